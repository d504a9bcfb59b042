//! Similarity of power-bounded matrices to isometries and unitaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::asymptotics::{
    asymptotic_limit, kerchy_decompose, power_profile, AsymptoticError, AsymptoticReport,
    LimitMode, PowerVerdict,
};
use crate::matrix::{herm_eig, inverse, singular_values, vec_norm, ComplexMatrix, MatrixError, C64};
use crate::params::Params;
use crate::random;

#[derive(Debug, Clone, Error)]
pub enum SimilarityError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Asymptotic(#[from] AsymptoticError),
    #[error("{which} is not power bounded ({verdict:?}, sup ‖Tⁿ‖ ≈ {sup_estimate:e})")]
    NotPowerBounded {
        which: &'static str,
        verdict: PowerVerdict,
        sup_estimate: f64,
    },
    #[error("asymptotic limit vanishes: T is of class C0.")]
    ClassC0dot,
    #[error("asymptotic limit is zero; there is no subspace to intertwine on")]
    ZeroOperator,
    #[error("γ(A)/‖A‖ = {ratio:e} is below the floor {floor:e}")]
    IllConditioned { ratio: f64, floor: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    SimilarToUnitary,
    SimilarToIsometry,
    NotSimilarToIsometry,
    Inconclusive,
}

/// Which regime a verdict was computed in. A finite-dimensional contraction
/// similar to a unitary is itself unitary, so non-trivial similarity
/// experiments live in the power-bounded regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Contraction,
    PowerBounded,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IntertwinerCertificate {
    /// `A₁^{1/2} L*`, mapping H onto `(ker A)⊥` in the eigenbasis of A.
    #[serde(rename = "Xplus")]
    pub x_plus: ComplexMatrix,
    #[serde(rename = "V")]
    pub v: ComplexMatrix,
    /// ‖V*V − I‖.
    pub isometry_defect: f64,
    /// ‖V X₊ − X₊ T‖.
    pub intertwining_defect: f64,
    pub subspace_dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimilarityVerdict {
    pub kind: VerdictKind,
    pub regime: Regime,
    /// `c = γ(A)^{1/2}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intertwiner: Option<IntertwinerCertificate>,
    pub evidence: BTreeMap<String, Value>,
}

fn regime(t: &ComplexMatrix, params: &Params) -> Regime {
    if t.op_norm() <= 1.0 + params.op_norm_slack {
        Regime::Contraction
    } else {
        Regime::PowerBounded
    }
}

/// Orthonormal basis of `(ker A)⊥` and the matching positive eigenvalues.
fn support(a: &ComplexMatrix, params: &Params) -> Result<(ComplexMatrix, Vec<f64>, f64), MatrixError> {
    let eig = herm_eig(&a.hermitian_part(), params.eig_tol)?;
    let norm = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let threshold = params.kernel_tol * norm.max(1.0);
    let first = eig.eigenvalues.iter().position(|&x| x > threshold).unwrap_or(eig.eigenvalues.len());
    let n = a.rows();
    let basis = eig.eigenvectors.columns(first..n);
    Ok((basis, eig.eigenvalues[first..].to_vec(), norm))
}

/// Isometry V on `(ker A)⊥` with `V A^{1/2} x = A^{1/2} T x`.
pub fn intertwiner_to_isometry(
    t: &ComplexMatrix,
    a: &ComplexMatrix,
    params: &Params,
) -> Result<IntertwinerCertificate, SimilarityError> {
    let n = t.ensure_square()?;
    if a.rows() != n || a.cols() != n {
        return Err(MatrixError::DimensionMismatch {
            left: (n, n),
            right: (a.rows(), a.cols()),
        }
        .into());
    }
    let (l, lambdas, norm) = support(a, params)?;
    if lambdas.is_empty() {
        return Err(SimilarityError::ZeroOperator);
    }
    let ratio = lambdas[0] / norm;
    if ratio < params.gamma_floor {
        return Err(SimilarityError::IllConditioned {
            ratio,
            floor: params.gamma_floor,
        });
    }
    let m = lambdas.len();
    let roots: Vec<f64> = lambdas.iter().map(|x| x.sqrt()).collect();
    let t1 = l.adjoint_matmul(&t.matmul(&l));
    let v = ComplexMatrix::from_fn(m, m, |i, j| t1[(i, j)] * (roots[i] / roots[j]));
    let x_plus = ComplexMatrix::from_fn(m, n, |i, j| l[(j, i)].conj() * roots[i]);
    let isometry_defect = (&v.adjoint_matmul(&v) - &ComplexMatrix::identity(m)).hermitian_op_norm();
    let intertwining_defect = (&v.matmul(&x_plus) - &x_plus.matmul(t)).op_norm();
    Ok(IntertwinerCertificate {
        x_plus,
        v,
        isometry_defect,
        intertwining_defect,
        subspace_dim: m,
    })
}

/// Exponents `1..=64` and the doublings up to the budget.
fn probe_exponents(budget: u64) -> Vec<u64> {
    let mut e: Vec<u64> = (1..=budget.min(64)).collect();
    let mut k = 128;
    while k <= budget {
        e.push(k);
        k *= 2;
    }
    e
}

/// `min_n σ_min(Tⁿ L)` over the probe exponents: the exact infimum of
/// `‖Tⁿx‖/‖x‖` over x in the range of L.
fn orbit_lower_bound(t: &ComplexMatrix, l: &ComplexMatrix, budget: u64) -> Result<f64, MatrixError> {
    if l.cols() == 0 {
        return Ok(f64::INFINITY);
    }
    let mut best = f64::INFINITY;
    let mut p = ComplexMatrix::identity(t.dim());
    let mut current = 0u64;
    for e in probe_exponents(budget) {
        if e == current + 1 {
            p = p.matmul(t);
        } else {
            p = t.pow(e);
        }
        current = e;
        let s = singular_values(&p.matmul(l))?;
        best = best.min(s[0]);
    }
    Ok(best)
}

fn require_power_bounded(
    t: &ComplexMatrix,
    which: &'static str,
    params: &Params,
) -> Result<(), SimilarityError> {
    let profile = power_profile(t, params.power_budget)?;
    if profile.verdict != PowerVerdict::PowerBounded {
        return Err(SimilarityError::NotPowerBounded {
            which,
            verdict: profile.verdict,
            sup_estimate: profile.sup_estimate,
        });
    }
    Ok(())
}

fn report_evidence(prefix: &str, r: &AsymptoticReport, ev: &mut BTreeMap<String, Value>) {
    ev.insert(format!("{prefix}_mode"), json!(r.mode));
    ev.insert(format!("{prefix}_kernel_dim"), json!(r.kernel_dim));
    ev.insert(format!("{prefix}_min_spec"), json!(r.min_spec));
    ev.insert(format!("{prefix}_norm"), json!(r.norm_a));
    ev.insert(format!("{prefix}_residual"), json!(r.residual));
    ev.insert(format!("{prefix}_window_spread"), json!(r.window_spread));
}

/// Similarity to an isometry: A invertible, with lower bound `c = γ(A)^{1/2}`.
///
/// The cross-check verifies `‖Tⁿx‖ ≥ (c/‖A‖^{1/2} − tol)‖x‖` for every
/// probe exponent. That constant is the uniform bound that follows from
/// `‖A^{1/2}x‖ = ‖A^{1/2}Tⁿx‖`; it coincides with c when `‖A‖ = 1`.
pub fn sznagy_isometry_test(
    t: &ComplexMatrix,
    params: &Params,
) -> Result<SimilarityVerdict, SimilarityError> {
    let n = t.ensure_square()?;
    require_power_bounded(t, "T", params)?;
    let report = asymptotic_limit(t, params)?;
    let mut evidence = BTreeMap::new();
    report_evidence("A_T", &report, &mut evidence);
    let regime = regime(t, params);

    if report.mode == LimitMode::BanachDependent {
        return Ok(SimilarityVerdict {
            kind: VerdictKind::Inconclusive,
            regime,
            lower_bound: None,
            intertwiner: None,
            evidence,
        });
    }
    if report.kernel_dim > 0 {
        return Ok(SimilarityVerdict {
            kind: VerdictKind::NotSimilarToIsometry,
            regime,
            lower_bound: None,
            intertwiner: None,
            evidence,
        });
    }

    let gamma = report.gamma.unwrap_or(0.0);
    let c = gamma.sqrt();
    let c_uniform = c / report.norm_a.sqrt();
    let observed = orbit_lower_bound(t, &ComplexMatrix::identity(n), params.power_budget)?;
    let cross_check = observed >= c_uniform - params.tol;
    evidence.insert("c".into(), json!(c));
    evidence.insert("c_uniform".into(), json!(c_uniform));
    evidence.insert("observed_orbit_lower_bound".into(), json!(observed));
    evidence.insert("cross_check_passed".into(), json!(cross_check));
    let intertwiner = intertwiner_to_isometry(t, &report.a, params)?;
    Ok(SimilarityVerdict {
        kind: if cross_check {
            VerdictKind::SimilarToIsometry
        } else {
            VerdictKind::Inconclusive
        },
        regime,
        lower_bound: Some(c),
        intertwiner: Some(intertwiner),
        evidence,
    })
}

/// Similarity to a unitary, decided by two independent routes: both
/// asymptotic limits `A_T`, `A_{T*}` positive definite, and T invertible
/// with T and T⁻¹ power bounded. Disagreement yields `Inconclusive`.
pub fn sznagy_unitary_test(t: &ComplexMatrix, params: &Params) -> SimilarityVerdict {
    let mut evidence = BTreeMap::new();
    let regime = regime(t, params);

    let route_ii = (|| -> Result<(bool, Option<AsymptoticReport>), SimilarityError> {
        require_power_bounded(t, "T", params)?;
        let a_t = asymptotic_limit(t, params)?;
        let a_star = asymptotic_limit(&t.adjoint(), params)?;
        report_evidence("A_T", &a_t, &mut evidence);
        report_evidence("A_T*", &a_star, &mut evidence);
        let definite = |r: &AsymptoticReport| {
            r.mode != LimitMode::BanachDependent && r.kernel_dim == 0 && r.min_spec > r.kernel_threshold()
        };
        Ok((definite(&a_t) && definite(&a_star), Some(a_t)))
    })();
    let (route_ii, a_t) = match route_ii {
        Ok(v) => v,
        Err(e) => {
            evidence.insert("route_ii_error".into(), json!(e.to_string()));
            (false, None)
        }
    };

    let route_iii = (|| -> Result<bool, SimilarityError> {
        let cond = crate::matrix::condition_number(t)?;
        evidence.insert("cond_T".into(), json!(cond));
        if cond.is_nan() || cond >= 1.0 / f64::EPSILON {
            return Ok(false);
        }
        let inv = inverse(t)?;
        let forward = power_profile(t, params.power_budget)?;
        let backward = power_profile(&inv, params.power_budget)?;
        evidence.insert("sup_T_powers".into(), json!(forward.sup_estimate));
        evidence.insert("sup_T_inverse_powers".into(), json!(backward.sup_estimate));
        Ok(forward.verdict == PowerVerdict::PowerBounded && backward.verdict == PowerVerdict::PowerBounded)
    })();
    let route_iii = match route_iii {
        Ok(v) => v,
        Err(e) => {
            evidence.insert("route_iii_error".into(), json!(e.to_string()));
            false
        }
    };
    evidence.insert("route_ii".into(), json!(route_ii));
    evidence.insert("route_iii".into(), json!(route_iii));

    match (route_ii, route_iii) {
        (true, true) => {
            let a = a_t.expect("route (ii) passed with a report");
            let (lower_bound, intertwiner) = match intertwiner_to_isometry(t, &a.a, params) {
                Ok(cert) => (a.gamma.map(f64::sqrt), Some(cert)),
                Err(e) => {
                    evidence.insert("intertwiner_error".into(), json!(e.to_string()));
                    (a.gamma.map(f64::sqrt), None)
                }
            };
            SimilarityVerdict {
                kind: VerdictKind::SimilarToUnitary,
                regime,
                lower_bound,
                intertwiner,
                evidence,
            }
        }
        (false, false) => match sznagy_isometry_test(t, params) {
            Ok(mut v) => {
                for (k, val) in evidence {
                    v.evidence.entry(k).or_insert(val);
                }
                v
            }
            Err(e) => {
                evidence.insert("isometry_test_error".into(), json!(e.to_string()));
                SimilarityVerdict {
                    kind: VerdictKind::NotSimilarToIsometry,
                    regime,
                    lower_bound: None,
                    intertwiner: None,
                    evidence,
                }
            }
        },
        _ => SimilarityVerdict {
            kind: VerdictKind::Inconclusive,
            regime,
            lower_bound: None,
            intertwiner: None,
            evidence,
        },
    }
}

/// The three equivalent conditions for T outside C₀.: γ(A) > 0, the
/// compression T₁ to `H₀⊥` is similar to an isometry, and the powers of T
/// are uniformly bounded below on `H₀⊥`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaAlternative {
    pub gamma_positive: bool,
    pub gamma: f64,
    pub compression_similar_to_isometry: bool,
    #[serde(rename = "T1")]
    pub t1: ComplexMatrix,
    pub compression_lower_bound: Option<f64>,
    pub uniformly_bounded_below: bool,
    /// `min_n σ_min(Tⁿ|H₀⊥)` over the probe exponents.
    pub observed_lower_bound: f64,
    pub agree: bool,
}

pub fn gamma_alternative_test(
    t: &ComplexMatrix,
    params: &Params,
) -> Result<GammaAlternative, SimilarityError> {
    require_power_bounded(t, "T", params)?;
    let report = asymptotic_limit(t, params)?;
    if report.is_zero() {
        return Err(SimilarityError::ClassC0dot);
    }
    let gamma = report.gamma.unwrap_or(0.0);
    let gamma_positive = gamma > report.kernel_threshold();

    let split = kerchy_decompose(t, &report)?;
    let compression = sznagy_isometry_test(&split.t11, params)?;
    let compression_similar_to_isometry = compression.kind == VerdictKind::SimilarToIsometry;

    let observed = orbit_lower_bound(t, &split.split.l_basis(), params.power_budget)?;
    let floor = (gamma / report.norm_a).sqrt() - params.tol;
    let uniformly_bounded_below = observed > 0.0 && observed >= floor;

    Ok(GammaAlternative {
        gamma_positive,
        gamma,
        compression_similar_to_isometry,
        t1: split.t11,
        compression_lower_bound: compression.lower_bound,
        uniformly_bounded_below,
        observed_lower_bound: observed,
        agree: gamma_positive == compression_similar_to_isometry
            && gamma_positive == uniformly_bounded_below,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceEvidence {
    pub gamma_positive_t: bool,
    pub gamma_positive_s: bool,
    pub kernel_dim_t: usize,
    pub kernel_dim_s: usize,
    pub cond_x: f64,
    pub agree: bool,
}

/// Compares the asymptotic limits of T and `S = XTX⁻¹`.
pub fn similarity_invariance_check(
    t: &ComplexMatrix,
    x: &ComplexMatrix,
    params: &Params,
) -> Result<InvarianceEvidence, SimilarityError> {
    let cond_x = crate::matrix::condition_number(x)?;
    let s = x.matmul(t).matmul(&inverse(x)?);
    require_power_bounded(t, "T", params)?;
    require_power_bounded(&s, "S", params)?;
    let rt = asymptotic_limit(t, params)?;
    let rs = asymptotic_limit(&s, params)?;
    let positive = |r: &AsymptoticReport| r.gamma.is_some_and(|g| g > r.kernel_threshold());
    let (gamma_positive_t, gamma_positive_s) = (positive(&rt), positive(&rs));
    Ok(InvarianceEvidence {
        gamma_positive_t,
        gamma_positive_s,
        kernel_dim_t: rt.kernel_dim,
        kernel_dim_s: rs.kernel_dim,
        cond_x,
        agree: gamma_positive_t == gamma_positive_s && rt.kernel_dim == rs.kernel_dim,
    })
}

/// Smallest eigenvalue of `(T*²T² + I)/2 − T*T`.
pub fn class_q_margin(t: &ComplexMatrix, eig_tol: f64) -> Result<f64, MatrixError> {
    let n = t.ensure_square()?;
    let t2 = t.matmul(t);
    let m = &(&t2.adjoint_matmul(&t2) + &ComplexMatrix::identity(n)).scale(0.5) - &t.adjoint_matmul(t);
    Ok(herm_eig(&m.hermitian_part(), eig_tol)?.min())
}

/// Class Q: `‖Tx‖² ≤ (‖T²x‖² + ‖x‖²)/2` for all x. The slack is
/// `eig_tol·max(1, ‖T‖⁴)`, the rounding scale of `T*²T²`.
pub fn class_q_predicate(t: &ComplexMatrix, eig_tol: f64) -> Result<bool, MatrixError> {
    let margin = class_q_margin(t, eig_tol)?;
    Ok(margin >= -eig_tol * t.op_norm().powi(4).max(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome")]
pub enum ParanormalOutcome {
    Pass,
    FailWitness { re: Vec<f64>, im: Vec<f64> },
}

/// Checks `‖Tx‖² ≤ ‖T²x‖‖x‖` on the standard basis and on `samples`
/// seeded random unit vectors.
pub fn paranormal_sampled_predicate(
    t: &ComplexMatrix,
    samples: usize,
    seed: u64,
) -> Result<ParanormalOutcome, MatrixError> {
    let n = t.ensure_square()?;
    let slack = 1e-12 * t.op_norm().powi(2).max(1.0);
    let t2 = t.matmul(t);
    let fails = |x: &[C64]| {
        let lhs = vec_norm(&t.mat_vec(x)).powi(2);
        let rhs = vec_norm(&t2.mat_vec(x)) * vec_norm(x);
        lhs > rhs + slack
    };
    let witness = |x: Vec<C64>| ParanormalOutcome::FailWitness {
        re: x.iter().map(|z| z.re).collect(),
        im: x.iter().map(|z| z.im).collect(),
    };
    for j in 0..n {
        let e: Vec<C64> = (0..n).map(|i| C64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect();
        if fails(&e) {
            return Ok(witness(e));
        }
    }
    let mut rng = random::rng(seed);
    for _ in 0..samples {
        let x = random::unit_vector(n, &mut rng);
        if fails(&x) {
            return Ok(witness(x));
        }
    }
    Ok(ParanormalOutcome::Pass)
}
