use std::path::Path;
use std::time::Instant;

use asymlab::asymptotics::{asymptotic_limit, classify_c, finite_horizon_gram, power_profile, PowerVerdict};
use asymlab::constructor::{
    assemble, build_partition, eigenspace_dichotomy_probe, validate_target, verify_convergence, TargetSpectrum,
};
use asymlab::shifts::{classify_shift, sum_analysis, truncate_to_matrix, Boundary, ShiftSumSpec, WeightSequence};
use asymlab::similarity::{
    class_q_margin, class_q_predicate, gamma_alternative_test, paranormal_sampled_predicate, sznagy_isometry_test,
    sznagy_unitary_test,
};
use asymlab::ComplexMatrix;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::report::{RunManifest, Timing};

pub const DEFAULT_CONSTRUCT_WINDOW: usize = 32;
pub const DEFAULT_LEVEL_DIM: usize = 4;
pub const DEFAULT_N_MAX: usize = 16;
pub const DEFAULT_SHIFT_WINDOW: usize = 64;
pub const DEFAULT_SHIFT_HORIZON: usize = 32;
pub const PROBE_WINDOWS: [usize; 3] = [8, 16, 32];

pub struct Context<'a> {
    pub manifest: &'a mut RunManifest,
    pub timing: &'a mut Timing,
}

impl Context<'_> {
    fn timed<T>(&mut self, step: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timing.steps.entry(step.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }
}

fn err_value<E: std::fmt::Display>(r: Result<Value, E>) -> Value {
    r.unwrap_or_else(|e| json!({ "error": e.to_string() }))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn load_input<T: serde::de::DeserializeOwned>(ctx: &mut Context, path: &Path) -> Result<T, CliError> {
    let (value, echo) = crate::input::load::<T>(path)?;
    ctx.manifest.input = Some(echo);
    Ok(value)
}

pub fn analyze(ctx: &mut Context, path: &Path) -> Result<Value, CliError> {
    let t: ComplexMatrix = load_input(ctx, path)?;
    t.ensure_square()?;
    let p = ctx.manifest.params.clone();
    let profile = ctx.timed("power_profile", || power_profile(&t, p.power_budget))?;
    ctx.manifest.record("power_profile", json!({ "budget": p.power_budget }));
    if profile.verdict == PowerVerdict::NotPowerBounded {
        return Err(CliError::Rejected(format!(
            "T is not power bounded (‖Tⁿ‖ reaches {:e} at n = {:?})",
            profile.sup_estimate, profile.offending_exponent
        )));
    }
    let limit = ctx.timed("asymptotic_limit", || asymptotic_limit(&t, &p))?;
    ctx.manifest.record("asymptotic_limit", json!({ "mode": limit.mode }));
    let class = ctx.timed("classify_c", || classify_c(&t, &p));
    ctx.manifest.record("classify_c", json!({}));
    Ok(json!({
        "power_profile": profile,
        "limit": limit,
        "c_class": err_value(class.map(|c| to_value(&c))),
    }))
}

pub fn similarity(ctx: &mut Context, path: &Path) -> Result<Value, CliError> {
    let t: ComplexMatrix = load_input(ctx, path)?;
    t.ensure_square()?;
    let p = ctx.manifest.params.clone();
    let unitary = ctx.timed("sznagy_unitary_test", || sznagy_unitary_test(&t, &p));
    ctx.manifest.record("sznagy_unitary_test", json!({ "power_budget": p.power_budget }));
    let isometry = ctx.timed("sznagy_isometry_test", || sznagy_isometry_test(&t, &p));
    ctx.manifest.record("sznagy_isometry_test", json!({ "power_budget": p.power_budget }));
    let gamma = ctx.timed("gamma_alternative_test", || gamma_alternative_test(&t, &p));
    ctx.manifest.record("gamma_alternative_test", json!({}));
    let q_margin = class_q_margin(&t, p.eig_tol)?;
    let q = class_q_predicate(&t, p.eig_tol)?;
    let paranormal = paranormal_sampled_predicate(&t, p.samples, p.seed)?;
    ctx.manifest.record("class_q_predicate", json!({ "eig_tol": p.eig_tol }));
    ctx.manifest.record(
        "paranormal_sampled_predicate",
        json!({ "samples": p.samples, "seed": p.seed }),
    );
    Ok(json!({
        "unitary_test": unitary,
        "isometry_test": err_value(isometry.map(|v| to_value(&v))),
        "gamma_alternative": err_value(gamma.map(|v| to_value(&v))),
        "class_q": { "holds": q, "margin": q_margin },
        "paranormal_sampled": paranormal,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossvalRow {
    pub k: i64,
    pub closed_form: f64,
    pub truncated: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Crossval {
    pub window: usize,
    pub horizon: usize,
    /// Compared indices satisfy `k_min <= k < k_max`: every orbit has
    /// crossed the core and stays inside the truncation.
    pub k_min: i64,
    pub k_max: i64,
    pub max_error: f64,
    pub rows: Vec<CrossvalRow>,
}

/// Diagonal of `T*ⁿTⁿ` for the `Zero` truncation against the closed-form
/// diagonal limit.
pub fn shift_crossval(w: &WeightSequence, window: usize, horizon: usize) -> Result<Crossval, CliError> {
    let analysis = classify_shift(w)?;
    let t = truncate_to_matrix(w, window, Boundary::Zero);
    let gram = finite_horizon_gram(&t, horizon as u64);
    let k_min = (w.hi - horizon as i64).max(-(window as i64));
    let k_max = window as i64 - horizon as i64;
    let mut rows = Vec::new();
    for k in k_min..k_max {
        let idx = (k + window as i64) as usize;
        let closed = analysis
            .diag_limit(k)
            .ok_or_else(|| CliError::Rejected("shift is not power bounded".into()))?;
        let truncated = gram[(idx, idx)].re;
        rows.push(CrossvalRow {
            k,
            closed_form: closed,
            truncated,
            error: (closed - truncated).abs(),
        });
    }
    let max_error = rows.iter().map(|r| r.error).fold(0.0, f64::max);
    Ok(Crossval {
        window,
        horizon,
        k_min,
        k_max,
        max_error,
        rows,
    })
}

pub fn shift(ctx: &mut Context, path: &Path, window: usize, horizon: usize) -> Result<Value, CliError> {
    let w: WeightSequence = load_input(ctx, path)?;
    let analysis = ctx.timed("classify_shift", || classify_shift(&w))?;
    ctx.manifest.record("classify_shift", json!({}));
    let crossval = if analysis.power_bounded && horizon < window {
        let c = ctx.timed("shift_crossval", || shift_crossval(&w, window, horizon))?;
        ctx.manifest.record(
            "shift_crossval",
            json!({ "window": window, "horizon": horizon, "boundary": "zero" }),
        );
        to_value(&c)
    } else {
        Value::Null
    };
    Ok(json!({ "analysis": analysis, "crossval": crossval }))
}

pub fn sum(ctx: &mut Context, path: &Path) -> Result<Value, CliError> {
    let spec: ShiftSumSpec = load_input(ctx, path)?;
    let verdict = ctx.timed("sum_analysis", || sum_analysis(&spec))?;
    ctx.manifest.record("sum_analysis", json!({ "summands": spec.summands.len() }));
    Ok(to_value(&verdict))
}

pub struct ConstructOptions {
    pub window: usize,
    pub level_dim: usize,
    pub n_max: usize,
    pub seed: u64,
    pub emit_matrices: bool,
}

pub fn construct(ctx: &mut Context, path: &Path, opts: &ConstructOptions) -> Result<Value, CliError> {
    let spec: TargetSpectrum = load_input(ctx, path)?;
    let target = validate_target(&spec)?;
    ctx.manifest.record("validate_target", json!({ "r_under": target.r_under }));
    let plan = ctx.timed("build_partition", || build_partition(&target, opts.window, opts.level_dim))?;
    ctx.manifest.record(
        "build_partition",
        json!({ "window": opts.window, "level_dim": opts.level_dim, "a_rule": plan.a_rule }),
    );
    let result = ctx.timed("assemble", || assemble(&plan))?;
    ctx.manifest.record("assemble", json!({ "boundary": "cyclic" }));
    let conv = ctx.timed("verify_convergence", || verify_convergence(&result, opts.n_max, opts.seed))?;
    ctx.manifest.record("verify_convergence", json!({ "n_max": opts.n_max, "seed": opts.seed }));
    let probe = ctx.timed("dichotomy_probe", || {
        eigenspace_dichotomy_probe(&target, &PROBE_WINDOWS, opts.level_dim)
    })?;
    ctx.manifest.record("eigenspace_dichotomy_probe", json!({ "windows": PROBE_WINDOWS }));
    let mut out = json!({
        "plan": plan,
        "dim": result.t.rows(),
        "interior_levels": result.interior_levels,
        "unitary_defect": result.unitary_defect,
        "interior_contraction_defect": result.interior_contraction_defect,
        "defect_norm": result.defect_norm,
        "dense_agreement": result.dense_agreement,
        "convergence": conv,
        "probe": probe,
    });
    if opts.emit_matrices {
        out["A"] = to_value(&result.a);
        out["U"] = to_value(&result.u);
        out["T"] = to_value(&result.t);
    }
    Ok(out)
}
