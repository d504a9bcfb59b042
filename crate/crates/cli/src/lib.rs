//! Command-line front end for asymlab: typed JSON inputs, reproducible
//! reports with an embedded manifest, and built-in experiment suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod input;
pub mod report;
pub mod suite;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;

use crate::commands::{ConstructOptions, Context};
use crate::config::{Command, ExperimentConfig, Format};
use crate::error::CliError;
use crate::report::{ErrorReport, Report, RunManifest, Timing, SCHEMA};

pub const THREADS_ENV: &str = "ASYMLAB_THREADS";

pub struct RunOutput {
    pub report: Report,
    pub timing: Timing,
    /// Set for suites: whether every criterion passed.
    pub suite_passed: Option<bool>,
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Rejected(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Internal(e.to_string()))
}

fn require_input(config: &ExperimentConfig) -> Result<&Path, CliError> {
    config
        .input
        .as_deref()
        .ok_or(CliError::MissingInput(config.command.name()))
}

pub fn run(config: &ExperimentConfig) -> Result<RunOutput, CliError> {
    config.validate()?;
    let start = Instant::now();
    let mut manifest = RunManifest::new(config);
    let mut timing = Timing::default();
    let mut suite_passed = None;
    let pool = thread_pool()?;
    let result = pool.install(|| -> Result<serde_json::Value, CliError> {
        let mut ctx = Context {
            manifest: &mut manifest,
            timing: &mut timing,
        };
        match config.command {
            Command::Analyze => commands::analyze(&mut ctx, require_input(config)?),
            Command::Similarity => commands::similarity(&mut ctx, require_input(config)?),
            Command::Shift => commands::shift(
                &mut ctx,
                require_input(config)?,
                config.window_or(commands::DEFAULT_SHIFT_WINDOW),
                config.n_max.unwrap_or(commands::DEFAULT_SHIFT_HORIZON),
            ),
            Command::Sum => commands::sum(&mut ctx, require_input(config)?),
            Command::Construct => {
                let opts = ConstructOptions {
                    window: config.window_or(commands::DEFAULT_CONSTRUCT_WINDOW),
                    level_dim: config.level_dim.unwrap_or(commands::DEFAULT_LEVEL_DIM),
                    n_max: config.n_max.unwrap_or(commands::DEFAULT_N_MAX),
                    seed: config.seed,
                    emit_matrices: config.emit_matrices,
                };
                commands::construct(&mut ctx, require_input(config)?, &opts)
            }
            Command::Suite => {
                let name = config.suite.as_deref().unwrap_or("acceptance");
                let started = Instant::now();
                let report = suite::run_suite(name, config.seed, config.window, config.n_max)?;
                for c in &report.criteria {
                    ctx.timing.steps.insert(format!("criterion_{}", c.id), c.seconds);
                }
                ctx.timing.steps.insert("suite".into(), started.elapsed().as_secs_f64());
                ctx.manifest.record("suite", json!({ "name": name, "seed": config.seed }));
                suite_passed = Some(report.all_passed);
                Ok(serde_json::to_value(&report).expect("suite report serializes"))
            }
        }
    })?;
    timing.total_seconds = start.elapsed().as_secs_f64();
    if let Some(out) = &config.output {
        manifest.timing_file = Some(timing_path(out).file_name().unwrap_or_default().to_string_lossy().into_owned());
    }
    Ok(RunOutput {
        report: Report {
            schema: SCHEMA.into(),
            command: config.command.name().into(),
            manifest,
            result,
        },
        timing,
        suite_passed,
    })
}

/// `<output>.timing.json`.
pub fn timing_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".timing.json");
    PathBuf::from(s)
}

pub fn render(report: &Report, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => report::to_json(report),
        Format::Csv => Ok(report::to_csv(report)),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Runs, writes the report (and the timing sidecar) and returns the exit
/// code. Failures produce an error report in JSON when an output path is
/// configured, and a message on stderr.
pub fn execute(config: &ExperimentConfig) -> i32 {
    match run(config) {
        Ok(out) => {
            let text = match render(&out.report, config.format) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: {e}");
                    return e.exit_code();
                }
            };
            let written = match &config.output {
                Some(path) => write_file(path, &text).and_then(|_| {
                    let timing = report::to_json(&out.timing)?;
                    write_file(&timing_path(path), &timing)
                }),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return e.exit_code();
            }
            if out.suite_passed == Some(false) {
                eprintln!("suite finished with failing criteria");
                return 1;
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(path) = &config.output {
                let body = ErrorReport::new(RunManifest::new(config), &e);
                if let Ok(text) = report::to_json(&body) {
                    let _ = write_file(path, &text);
                }
            }
            e.exit_code()
        }
    }
}
