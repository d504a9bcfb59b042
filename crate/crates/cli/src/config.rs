use std::path::PathBuf;

use asymlab::Params;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Power profile and asymptotic limit of a matrix.
    Analyze,
    /// Similarity tests and class predicates for a matrix.
    Similarity,
    /// Closed-form analysis of a weighted bilateral shift.
    Shift,
    /// Orthogonal sums of weighted shifts.
    Sum,
    /// Contraction with a prescribed asymptotic limit.
    Construct,
    /// Built-in experiment suite.
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Analyze => "analyze",
            Command::Similarity => "similarity",
            Command::Shift => "shift",
            Command::Sum => "sum",
            Command::Construct => "construct",
            Command::Suite => "suite",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub tol: Option<f64>,
    pub kernel_tol: Option<f64>,
    pub eig_tol: Option<f64>,
    pub power_budget: Option<u64>,
    pub window: Option<usize>,
    pub level_dim: Option<usize>,
    pub n_max: Option<usize>,
    pub seed: u64,
    pub suite: Option<String>,
    /// Include full A, U, T in `construct` reports.
    pub emit_matrices: bool,
}

impl ExperimentConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            output: None,
            format: Format::Json,
            tol: None,
            kernel_tol: None,
            eig_tol: None,
            power_budget: None,
            window: None,
            level_dim: None,
            n_max: None,
            seed: Params::default().seed,
            suite: None,
            emit_matrices: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let floats = [("tol", self.tol), ("kernel-tol", self.kernel_tol), ("eig-tol", self.eig_tol)];
        for (name, v) in floats {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    return Err(CliError::InvalidOverride { name, value: v });
                }
            }
        }
        let ints = [
            ("power-budget", self.power_budget.map(|v| v as f64)),
            ("window", self.window.map(|v| v as f64)),
            ("level-dim", self.level_dim.map(|v| v as f64)),
            ("n-max", self.n_max.map(|v| v as f64)),
        ];
        for (name, v) in ints {
            if v == Some(0.0) {
                return Err(CliError::InvalidOverride { name, value: 0.0 });
            }
        }
        let p = self.params();
        let limit = p.eig_tol * 1e3;
        if p.kernel_tol > limit {
            return Err(CliError::ToleranceConflict {
                kernel_tol: p.kernel_tol,
                limit,
            });
        }
        Ok(())
    }

    pub fn params(&self) -> Params {
        let mut p = Params::default();
        if let Some(v) = self.tol {
            p.tol = v;
        }
        if let Some(v) = self.kernel_tol {
            p.kernel_tol = v;
        }
        if let Some(v) = self.eig_tol {
            p.eig_tol = v;
        }
        if let Some(v) = self.power_budget {
            p.power_budget = v;
        }
        p.seed = self.seed;
        p
    }

    pub fn window_or(&self, default: usize) -> usize {
        self.window.unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_consistent() {
        assert!(ExperimentConfig::new(Command::Analyze).validate().is_ok());
    }

    #[test]
    fn tolerance_conflict() {
        let mut c = ExperimentConfig::new(Command::Analyze);
        c.kernel_tol = Some(1e-6);
        assert!(matches!(c.validate(), Err(CliError::ToleranceConflict { .. })));
        c.eig_tol = Some(1e-9);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn overrides_must_be_positive() {
        let mut c = ExperimentConfig::new(Command::Analyze);
        c.tol = Some(-1.0);
        assert!(matches!(c.validate(), Err(CliError::InvalidOverride { name: "tol", .. })));
        c.tol = None;
        c.window = Some(0);
        assert_eq!(c.validate().unwrap_err().exit_code(), 2);
    }
}
