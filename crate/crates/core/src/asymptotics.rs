//! Asymptotic limits of power-bounded matrices.
//!
//! For a contraction the sequence `Qₙ = T*ⁿTⁿ` decreases and converges, so
//! its limit is computed directly. For a general power-bounded T the limit
//! is the value of a Banach limit on `Qₙ`, which is not computable as such;
//! it is approximated through sliding-window Cesàro means and reported as
//! `AlmostConvergent` only when the windows agree uniformly in the offset.
//!
//! The windows are evaluated on a pre-smoothed sequence `Φʲ(B)` where
//! `Φ(X) = T*XT` and `B = C_m^p(I)` is an iterated Cesàro mean of length
//! `m = 2^smoothing_log2`. Every Banach limit is linear and shift invariant,
//! so it takes the same value on `Φʲ(B)` as on `Qⱼ`; the smoothing only
//! suppresses the `O(1/m)` oscillation that plain windows carry.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{
    herm_eig, BlockSplit, ComplexMatrix, MatrixError, C64,
};
use crate::params::Params;
use crate::random;

/// Exponents below this are profiled one by one; above it by squaring.
const DIRECT_PROFILE_LIMIT: u64 = 64;
const BLOWUP_FACTOR: f64 = 1e6;
const GROWTH_FACTOR: f64 = 1.5;
const GROWTH_RUN: usize = 4;

#[derive(Debug, Clone, Error)]
pub enum AsymptoticError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("operator is not a contraction: ‖T‖ = {norm}")]
    NotAContraction { norm: f64 },
    #[error("monotone iteration did not converge in {iterations} steps (last step {last_step:e})")]
    NoConvergence {
        iterations: usize,
        last_step: f64,
        partial: Box<AsymptoticReport>,
    },
    #[error("operator is not power bounded ({verdict:?}, sup ‖Tⁿ‖ ≈ {sup_estimate:e})")]
    NotPowerBounded {
        verdict: PowerVerdict,
        sup_estimate: f64,
    },
    #[error("kernel vector orbit does not decay: ‖T^n x‖ = {orbit_norm:e} after n = {horizon}")]
    KernelValidationFailed { orbit_norm: f64, horizon: u64 },
    #[error("asymptotic limit depends on the Banach limit; surrogate kernel not accepted")]
    BanachDependent,
    #[error("stable subspace is not invariant: lower-left block {lower_left:e} exceeds {allowed:e}")]
    InvarianceViolation { lower_left: f64, allowed: f64 },
    #[error("Kérchy block check failed: {0}")]
    KerchyCheckFailed(String),
    #[error("conjugating matrix is not unitary: ‖U*U − I‖ = {defect:e}")]
    NotUnitary { defect: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerVerdict {
    PowerBounded,
    NotPowerBounded,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerProfile {
    pub exponents: Vec<u64>,
    /// ‖Tⁿ‖ for each entry of `exponents`.
    pub norms: Vec<f64>,
    pub sup_estimate: f64,
    pub verdict: PowerVerdict,
    /// Exponent at which overflow or blow-up was detected.
    pub offending_exponent: Option<u64>,
}

/// Power profile of T over `n = 1..=budget`.
///
/// Exponents up to 64 are visited one at a time; beyond that only the
/// doublings `128, 256, ...` and `budget` itself. The verdict is heuristic:
/// `NotPowerBounded` when some ‖Tⁿ‖ exceeds `10⁶·‖T‖` (or overflows) or when
/// the norm grows by at least 1.5 over four consecutive doublings,
/// `Inconclusive` when the budget ends on such growth.
pub fn power_profile(t: &ComplexMatrix, budget: u64) -> Result<PowerProfile, MatrixError> {
    let n = t.ensure_square()?;
    let budget = budget.max(1);
    let t_norm = t.op_norm();
    let mut exponents = Vec::new();
    let mut norms = Vec::new();
    let mut offending = None;

    let record = |e: u64, p: &ComplexMatrix, exps: &mut Vec<u64>, ns: &mut Vec<f64>| -> bool {
        let v = if p.is_finite() { p.op_norm() } else { f64::INFINITY };
        exps.push(e);
        ns.push(v);
        !v.is_finite() || v > BLOWUP_FACTOR * t_norm.max(1.0)
    };

    let mut p = ComplexMatrix::identity(n);
    let direct = budget.min(DIRECT_PROFILE_LIMIT);
    for e in 1..=direct {
        p = p.matmul(t);
        if record(e, &p, &mut exponents, &mut norms) {
            offending = Some(e);
            break;
        }
    }
    if offending.is_none() && budget > DIRECT_PROFILE_LIMIT {
        let mut e = DIRECT_PROFILE_LIMIT;
        while e * 2 <= budget {
            p = p.matmul(&p);
            e *= 2;
            if record(e, &p, &mut exponents, &mut norms) {
                offending = Some(e);
                break;
            }
        }
        if offending.is_none() && e != budget {
            let q = t.pow(budget);
            if record(budget, &q, &mut exponents, &mut norms) {
                offending = Some(budget);
            }
        }
    }

    let sup_estimate = norms.iter().copied().fold(0.0, f64::max);
    let doubling: Vec<f64> = exponents
        .iter()
        .zip(&norms)
        .filter(|(e, _)| e.is_power_of_two())
        .map(|(_, &v)| v)
        .collect();
    let ratios: Vec<f64> = doubling
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    let sustained_growth = ratios
        .windows(GROWTH_RUN)
        .any(|run| run.iter().all(|&r| r >= GROWTH_FACTOR));
    let growing_at_end = ratios.last().is_some_and(|&r| r >= GROWTH_FACTOR)
        && norms.last().is_some_and(|&v| v >= sup_estimate);

    let verdict = if offending.is_some() || sustained_growth {
        PowerVerdict::NotPowerBounded
    } else if growing_at_end {
        PowerVerdict::Inconclusive
    } else {
        PowerVerdict::PowerBounded
    };
    Ok(PowerProfile {
        exponents,
        norms,
        sup_estimate,
        verdict,
        offending_exponent: offending,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LimitMode {
    MonotoneContraction,
    AlmostConvergent,
    BanachDependent,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsymptoticReport {
    pub mode: LimitMode,
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
    /// ‖T*AT − A‖.
    pub residual: f64,
    pub window_spread: f64,
    pub kernel_dim: usize,
    /// γ(A); `None` when A is numerically zero.
    pub gamma: Option<f64>,
    /// Smallest eigenvalue of A.
    pub min_spec: f64,
    #[serde(rename = "norm_A")]
    pub norm_a: f64,
    pub iterations: usize,
    /// Monotone route only: every accepted step had `Qₙ − Qₙ₊₁ ⪰ −eig_tol`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<bool>,
    /// Surrogate only: log₂ of the pre-smoothing length that was used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing_log2: Option<u32>,
    pub params: Params,
}

impl AsymptoticReport {
    /// Threshold below which an eigenvalue of A counts as zero.
    pub fn kernel_threshold(&self) -> f64 {
        self.params.kernel_tol * self.norm_a.max(1.0)
    }

    pub fn is_zero(&self) -> bool {
        self.kernel_dim == self.a.rows()
    }

    pub fn is_invertible(&self) -> bool {
        self.kernel_dim == 0
    }
}

fn finish_report(
    t: &ComplexMatrix,
    a: ComplexMatrix,
    mode: LimitMode,
    window_spread: f64,
    iterations: usize,
    monotone: Option<bool>,
    params: &Params,
) -> Result<AsymptoticReport, MatrixError> {
    let a = a.hermitian_part();
    let eig = herm_eig(&a, params.eig_tol)?;
    let norm_a = eig.eigenvalues.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let threshold = params.kernel_tol * norm_a.max(1.0);
    let kernel_dim = eig.eigenvalues.iter().filter(|&&x| x <= threshold).count();
    let gamma = eig.eigenvalues.iter().copied().find(|&x| x > threshold);
    let residual = (&t.congruence(&a) - &a).hermitian_op_norm();
    Ok(AsymptoticReport {
        mode,
        residual,
        window_spread,
        kernel_dim,
        gamma,
        min_spec: eig.min(),
        norm_a,
        iterations,
        monotone,
        a,
        smoothing_log2: None,
        params: params.clone(),
    })
}

/// True when `m + eig_tol·I` admits a Cholesky factorization, i.e. the
/// smallest eigenvalue of the Hermitian `m` exceeds `−eig_tol`.
fn psd_within(m: &ComplexMatrix, eig_tol: f64) -> bool {
    let n = m.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)].re + eig_tol;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[(j, j)] = C64::new(d, 0.0);
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / d;
        }
    }
    true
}

/// Limit of the decreasing sequence `Qₙ₊₁ = T*QₙT`, `Q₀ = I`, for a
/// contraction T. Stops when `‖Qₙ₊₁ − Qₙ‖_F ≤ tol`.
pub fn asymptotic_limit_contraction(
    t: &ComplexMatrix,
    params: &Params,
) -> Result<AsymptoticReport, AsymptoticError> {
    let n = t.ensure_square()?;
    let norm = t.op_norm();
    if norm > 1.0 + params.op_norm_slack {
        return Err(AsymptoticError::NotAContraction { norm });
    }
    let mut q = ComplexMatrix::identity(n);
    let mut monotone = true;
    let mut last_step = f64::INFINITY;
    for iter in 1..=params.max_iter {
        let next = t.congruence(&q).hermitian_part();
        let diff = &q - &next;
        if monotone && !psd_within(&diff, params.eig_tol) {
            monotone = false;
        }
        last_step = diff.frobenius_norm();
        q = next;
        if last_step <= params.tol {
            let report = finish_report(
                t,
                q,
                LimitMode::MonotoneContraction,
                0.0,
                iter,
                Some(monotone),
                params,
            )?;
            return Ok(report);
        }
    }
    let partial = finish_report(
        t,
        q,
        LimitMode::MonotoneContraction,
        0.0,
        params.max_iter,
        Some(monotone),
        params,
    )?;
    Err(AsymptoticError::NoConvergence {
        iterations: params.max_iter,
        last_step,
        partial: Box::new(partial),
    })
}

/// `Σ_{j<m} T*ʲ X Tʲ` by binary doubling, `O(log m)` products.
pub fn orbit_sum(t: &ComplexMatrix, x: &ComplexMatrix, m: u64) -> ComplexMatrix {
    let n = t.dim();
    let mut sum = ComplexMatrix::zeros(n, n);
    let mut power = ComplexMatrix::identity(n);
    if m == 0 {
        return sum;
    }
    let top = 63 - m.leading_zeros();
    for bit in (0..=top).rev() {
        // S_{2c} = S_c + Φ^c(S_c)
        sum = (&sum + &power.congruence(&sum)).hermitian_part();
        power = power.matmul(&power);
        if (m >> bit) & 1 == 1 {
            // S_{c+1} = X + Φ(S_c)
            sum = (x + &t.congruence(&sum)).hermitian_part();
            power = power.matmul(t);
        }
    }
    sum
}

/// Cesàro mean `(1/m) Σ_{j<m} T*ʲ X Tʲ`.
pub fn orbit_mean(t: &ComplexMatrix, x: &ComplexMatrix, m: u64) -> ComplexMatrix {
    orbit_sum(t, x, m).scale(1.0 / m as f64)
}

/// `T*ⁿTⁿ` at a fixed horizon.
pub fn finite_horizon_gram(t: &ComplexMatrix, n: u64) -> ComplexMatrix {
    let p = t.pow(n);
    p.adjoint_matmul(&p).hermitian_part()
}

/// Banach-limit surrogate for a power-bounded T.
///
/// Windows have lengths `N/4, N/2, N` and offsets `j·N/8` for
/// `j < window_count`. If all window means agree within
/// `10·tol·max(1, ‖A‖)` the mode is `AlmostConvergent` and A is their
/// average. On disagreement the pre-smoothing length grows fourfold, up
/// to `2^smoothing_log2_max`; if the windows still disagree the mode is
/// `BanachDependent` with A the longest window at offset zero.
pub fn l_asymptotic_surrogate(
    t: &ComplexMatrix,
    params: &Params,
) -> Result<AsymptoticReport, AsymptoticError> {
    let n = t.ensure_square()?;
    let budget = params.power_budget.max(8);
    let profile = power_profile(t, budget)?;
    if profile.verdict != PowerVerdict::PowerBounded {
        return Err(AsymptoticError::NotPowerBounded {
            verdict: profile.verdict,
            sup_estimate: profile.sup_estimate,
        });
    }

    let lengths = [budget / 4, budget / 2, budget];
    let offsets: Vec<u64> = (0..params.window_count.max(1) as u64)
        .map(|j| j * budget / 8)
        .collect();
    let shifts: Vec<ComplexMatrix> = offsets.iter().map(|&o| t.pow(o)).collect();

    let first = params.smoothing_log2.min(40);
    let last = params.smoothing_log2_max.clamp(first, 40);
    let mut level = first;
    loop {
        let smoothing_len = 1u64 << level;
        let mut base = ComplexMatrix::identity(n);
        for _ in 0..params.smoothing_order {
            base = orbit_mean(t, &base, smoothing_len);
        }
        let mut windows = Vec::with_capacity(lengths.len() * offsets.len());
        for &len in &lengths {
            let mean = orbit_mean(t, &base, len.max(1));
            for shift in &shifts {
                windows.push(shift.congruence(&mean).hermitian_part());
            }
        }

        let mut spread: f64 = 0.0;
        for i in 0..windows.len() {
            for j in (i + 1)..windows.len() {
                spread = spread.max((&windows[i] - &windows[j]).hermitian_op_norm());
            }
        }
        // longest window, offset zero
        let longest = windows[(lengths.len() - 1) * offsets.len()].clone();
        let scale = longest.hermitian_op_norm().max(1.0);
        let agreed = spread <= 10.0 * params.tol * scale;
        if agreed || level >= last {
            let (mode, a) = if agreed {
                let mut sum = ComplexMatrix::zeros(n, n);
                for w in &windows {
                    sum = &sum + w;
                }
                (LimitMode::AlmostConvergent, sum.scale(1.0 / windows.len() as f64))
            } else {
                (LimitMode::BanachDependent, longest)
            };
            let mut report = finish_report(t, a, mode, spread, 0, None, params)?;
            report.smoothing_log2 = Some(level);
            return Ok(report);
        }
        level = (level + 2).min(last);
    }
}

/// Monotone route for contractions, the surrogate otherwise.
pub fn asymptotic_limit(
    t: &ComplexMatrix,
    params: &Params,
) -> Result<AsymptoticReport, AsymptoticError> {
    let norm = t.op_norm();
    if norm <= 1.0 + params.op_norm_slack {
        asymptotic_limit_contraction(t, params)
    } else {
        l_asymptotic_surrogate(t, params)
    }
}

/// Numerical kernel of the report's A as a split `H₀ ⊕ H₀⊥`, with every
/// kernel basis vector (and `samples` random kernel vectors) checked to
/// decay along its orbit: `‖T^{2^orbit_log2} x‖ ≤ orbit_decay_tol`.
pub fn stable_subspace(
    t: &ComplexMatrix,
    report: &AsymptoticReport,
    accept_banach_dependent: bool,
) -> Result<BlockSplit, AsymptoticError> {
    if report.mode == LimitMode::BanachDependent && !accept_banach_dependent {
        return Err(AsymptoticError::BanachDependent);
    }
    let params = &report.params;
    let eig = herm_eig(&report.a, params.eig_tol)?;
    let n = eig.eigenvalues.len();
    let threshold = report.kernel_threshold();
    let k_dim = eig.eigenvalues.iter().filter(|&&x| x <= threshold).count();
    // eigenvalues are ascending, so the kernel comes first
    let split = BlockSplit {
        k_dim,
        basis: eig.eigenvectors.clone(),
    };
    if k_dim > 0 {
        let horizon = 1u64 << params.orbit_log2.min(62);
        let p = t.pow(horizon);
        let kb = split.k_basis();
        let mut rng = random::rng(params.seed);
        let mut candidates: Vec<Vec<C64>> = (0..k_dim).map(|j| kb.column(j)).collect();
        for _ in 0..params.samples {
            let c = random::unit_vector(k_dim, &mut rng);
            candidates.push(kb.mat_vec(&c));
        }
        let worst = candidates
            .iter()
            .map(|x| crate::matrix::vec_norm(&p.mat_vec(x)))
            .fold(0.0, f64::max);
        if worst.is_nan() || worst > params.orbit_decay_tol {
            return Err(AsymptoticError::KernelValidationFailed {
                orbit_norm: worst,
                horizon,
            });
        }
    }
    debug_assert_eq!(split.dim(), n);
    Ok(split)
}

/// Upper-triangular block form of T over `H₀ ⊕ H₀⊥`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KerchySplit {
    pub split: BlockSplit,
    pub t00: ComplexMatrix,
    pub r: ComplexMatrix,
    pub t11: ComplexMatrix,
    pub lower_left_norm: f64,
    /// ‖T₀^{2^orbit_log2}‖.
    pub t00_decay: f64,
    /// Kernel dimension of the asymptotic limit of T₁ (zero for class C₁.).
    pub t11_kernel_dim: usize,
}

pub fn kerchy_decompose(
    t: &ComplexMatrix,
    report: &AsymptoticReport,
) -> Result<KerchySplit, AsymptoticError> {
    let params = &report.params;
    let split = stable_subspace(t, report, false)?;
    let (t00, r, lower_left, t11) = split.blocks(t);
    let lower_left_norm = lower_left.op_norm();
    let allowed = params.split_tol * t.op_norm().max(1.0);
    if lower_left_norm > allowed {
        return Err(AsymptoticError::InvarianceViolation {
            lower_left: lower_left_norm,
            allowed,
        });
    }
    let t00_decay = if split.k_dim > 0 {
        t00.pow(1u64 << params.orbit_log2.min(62)).op_norm()
    } else {
        0.0
    };
    if t00_decay.is_nan() || t00_decay > params.orbit_decay_tol {
        return Err(AsymptoticError::KerchyCheckFailed(format!(
            "powers of T₀ do not decay (‖T₀ⁿ‖ = {t00_decay:e})"
        )));
    }
    let t11_kernel_dim = if split.l_dim() > 0 {
        asymptotic_limit(&t11, params)?.kernel_dim
    } else {
        0
    };
    if t11_kernel_dim != 0 {
        return Err(AsymptoticError::KerchyCheckFailed(format!(
            "T₁ has a stable subspace of dimension {t11_kernel_dim}"
        )));
    }
    Ok(KerchySplit {
        split,
        t00,
        r,
        t11,
        lower_left_norm,
        t00_decay,
        t11_kernel_dim,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CClass {
    C00,
    C01,
    C10,
    C11,
    C0dot,
    C1dot,
    Mixed,
}

/// C_{jk} class from the kernels of the asymptotic limits of T and T*.
pub fn classify_c(t: &ComplexMatrix, params: &Params) -> Result<CClass, AsymptoticError> {
    let n = t.ensure_square()?;
    let side = |op: &ComplexMatrix| -> Result<Option<bool>, AsymptoticError> {
        let rep = asymptotic_limit(op, params)?;
        Ok(match rep.kernel_dim {
            k if k == n => Some(false), // class 0: everything is stable
            0 => Some(true),
            _ => None,
        })
    };
    let left = side(t)?;
    let right = side(&t.adjoint())?;
    Ok(match (left, right) {
        (Some(false), Some(false)) => CClass::C00,
        (Some(false), Some(true)) => CClass::C01,
        (Some(true), Some(false)) => CClass::C10,
        (Some(true), Some(true)) => CClass::C11,
        (Some(false), None) => CClass::C0dot,
        (Some(true), None) => CClass::C1dot,
        (None, _) => CClass::Mixed,
    })
}

/// `‖A_{UTU*} − U A_T U*‖` with identical parameters on both sides.
pub fn unitary_conjugation_check(
    t: &ComplexMatrix,
    u: &ComplexMatrix,
    params: &Params,
) -> Result<f64, AsymptoticError> {
    let n = u.ensure_square()?;
    let defect = (&u.adjoint_matmul(u) - &ComplexMatrix::identity(n)).op_norm();
    if defect > 1e-10 {
        return Err(AsymptoticError::NotUnitary { defect });
    }
    let conj = u.matmul(t).matmul(&u.adjoint());
    let a_t = asymptotic_limit(t, params)?.a;
    let a_conj = asymptotic_limit(&conj, params)?.a;
    let moved = u.matmul(&a_t).matmul(&u.adjoint());
    Ok((&a_conj - &moved).hermitian_op_norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{ONE, ZERO};

    fn period_four() -> ComplexMatrix {
        let i = C64::i();
        ComplexMatrix::from_rows(&[&[ONE, i - 1.0], &[ZERO, i]])
    }

    #[test]
    fn profile_of_unitary_is_flat() {
        let mut rng = random::rng(1);
        let u = random::unitary(5, &mut rng);
        let p = power_profile(&u, 64).unwrap();
        assert_eq!(p.verdict, PowerVerdict::PowerBounded);
        assert!(p.norms.iter().all(|&x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn profile_of_jordan_block_diverges() {
        let j = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let p = power_profile(&j, 64).unwrap();
        assert_eq!(p.verdict, PowerVerdict::NotPowerBounded);
        // ‖Jⁿ‖ ~ n
        let last = *p.norms.last().unwrap();
        assert!(last > 60.0 && last < 70.0);
    }

    #[test]
    fn profile_of_period_four_matrix() {
        let p = power_profile(&period_four(), 64).unwrap();
        assert_eq!(p.verdict, PowerVerdict::PowerBounded);
        // max over n of ‖[[1, iⁿ−1],[0, iⁿ]]‖ is attained at n ≡ 2 mod 4: 1 + √2
        assert!((p.sup_estimate - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn profile_flags_overflow() {
        let t = ComplexMatrix::from_diag(&[1e200]);
        let p = power_profile(&t, 64).unwrap();
        assert_eq!(p.verdict, PowerVerdict::NotPowerBounded);
        assert_eq!(p.offending_exponent, Some(2));
    }

    #[test]
    fn contraction_examples() {
        let params = Params::default();
        let mut rng = random::rng(2);
        let u = random::unitary(4, &mut rng);
        let r = asymptotic_limit_contraction(&u, &params).unwrap();
        assert!((&r.a - &ComplexMatrix::identity(4)).max_abs() < 1e-12);
        assert_eq!(r.kernel_dim, 0);

        let r = asymptotic_limit_contraction(&ComplexMatrix::from_diag(&[1.0, 0.5]), &params).unwrap();
        assert!((&r.a - &ComplexMatrix::from_diag(&[1.0, 0.0])).max_abs() <= params.tol);
        assert_eq!(r.kernel_dim, 1);
        assert_eq!(r.monotone, Some(true));

        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = asymptotic_limit_contraction(&nil, &params).unwrap();
        assert!(r.a.max_abs() == 0.0);
        assert!(r.is_zero());
        assert_eq!(r.gamma, None);
    }

    #[test]
    fn contraction_route_rejects_expansive_input() {
        let t = ComplexMatrix::from_diag(&[1.5]);
        assert!(matches!(
            asymptotic_limit_contraction(&t, &Params::default()),
            Err(AsymptoticError::NotAContraction { .. })
        ));
    }

    #[test]
    fn contraction_route_reports_partial_limit() {
        let params = Params {
            max_iter: 5,
            ..Params::default()
        };
        let t = ComplexMatrix::from_diag(&[0.99]);
        match asymptotic_limit_contraction(&t, &params) {
            Err(AsymptoticError::NoConvergence { partial, .. }) => {
                assert!((partial.a[(0, 0)].re - 0.99f64.powi(10)).abs() < 1e-14)
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn orbit_sum_matches_direct_summation() {
        let t = period_four();
        let x = ComplexMatrix::identity(2);
        for m in [1u64, 2, 3, 5, 8, 13] {
            let mut direct = ComplexMatrix::zeros(2, 2);
            let mut q = x.clone();
            for _ in 0..m {
                direct = &direct + &q;
                q = t.congruence(&q);
            }
            assert!((&orbit_sum(&t, &x, m) - &direct).max_abs() < 1e-12, "m = {m}");
        }
    }

    #[test]
    fn surrogate_of_period_four_matrix() {
        // oracle: Qₙ has period 4, Tⁿ = [[1, iⁿ−1],[0, iⁿ]]
        let i = C64::i();
        let mut avg = ComplexMatrix::zeros(2, 2);
        for n in 0..4 {
            let ip = i.powi(n);
            let tn = ComplexMatrix::from_rows(&[&[ONE, ip - 1.0], &[ZERO, ip]]);
            avg = &avg + &tn.adjoint_matmul(&tn);
        }
        let avg = avg.scale(0.25);
        let expect = ComplexMatrix::from_real_rows(&[&[1.0, -1.0], &[-1.0, 3.0]]);
        assert!((&avg - &expect).max_abs() < 1e-15);

        let r = l_asymptotic_surrogate(&period_four(), &Params::default()).unwrap();
        assert_eq!(r.mode, LimitMode::AlmostConvergent);
        assert!((&r.a - &expect).max_abs() < 1e-10, "{:?}", r.a);
        assert!(r.residual < 1e-10);
        assert!((r.min_spec - (2.0 - 2f64.sqrt())).abs() < 1e-10);
    }

    #[test]
    fn surrogate_agrees_with_monotone_route_on_contractions() {
        let params = Params::default();
        let mut rng = random::rng(3);
        let u = random::unitary(3, &mut rng);
        let b = random::scaled_ginibre(2, 0.5, &mut rng);
        let mut t = ComplexMatrix::zeros(5, 5);
        t.set_block(0, 0, &u);
        t.set_block(3, 3, &b);
        let w = random::unitary(5, &mut rng);
        let t = w.matmul(&t).matmul(&w.adjoint());
        let mono = asymptotic_limit_contraction(&t, &params).unwrap();
        let sur = l_asymptotic_surrogate(&t, &params).unwrap();
        assert_eq!(sur.mode, LimitMode::AlmostConvergent);
        assert!((&mono.a - &sur.a).hermitian_op_norm() <= 10.0 * params.tol);
    }

    #[test]
    fn surrogate_rejects_jordan_block() {
        let j = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(
            l_asymptotic_surrogate(&j, &Params::default()),
            Err(AsymptoticError::NotPowerBounded { .. })
        ));
    }

    #[test]
    fn stable_subspace_examples() {
        let params = Params::default();
        let t = ComplexMatrix::from_diag(&[1.0, 0.5]);
        let r = asymptotic_limit(&t, &params).unwrap();
        let s = stable_subspace(&t, &r, false).unwrap();
        assert_eq!(s.k_dim, 1);
        assert!((s.basis[(1, 0)].norm() - 1.0).abs() < 1e-14);

        let i2 = ComplexMatrix::identity(2);
        let r = asymptotic_limit(&i2, &params).unwrap();
        assert_eq!(stable_subspace(&i2, &r, false).unwrap().k_dim, 0);

        let nil = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let r = asymptotic_limit(&nil, &params).unwrap();
        assert_eq!(stable_subspace(&nil, &r, false).unwrap().k_dim, 2);
    }

    #[test]
    fn stable_subspace_detects_tolerance_mismatch() {
        // pretend A has a kernel where the orbit does not decay
        let params = Params::default();
        let t = ComplexMatrix::identity(2);
        let mut r = asymptotic_limit(&t, &params).unwrap();
        r.a = ComplexMatrix::from_diag(&[1.0, 0.0]);
        r.kernel_dim = 1;
        assert!(matches!(
            stable_subspace(&t, &r, false),
            Err(AsymptoticError::KernelValidationFailed { .. })
        ));
    }

    #[test]
    fn kerchy_examples() {
        let params = Params::default();
        let t = ComplexMatrix::from_diag(&[0.5, 1.0]);
        let k = kerchy_decompose(&t, &asymptotic_limit(&t, &params).unwrap()).unwrap();
        assert!((k.t00[(0, 0)].norm() - 0.5).abs() < 1e-12);
        assert!((k.t11[(0, 0)].norm() - 1.0).abs() < 1e-12);
        assert!(k.r.max_abs() < 1e-12);

        // oracle: orbits of e₁ decay (T e₁ = e₁/2) and A = diag(0, 5)
        let t = ComplexMatrix::from_real_rows(&[&[0.5, 1.0], &[0.0, 1.0]]);
        let r = asymptotic_limit(&t, &params).unwrap();
        assert!((&r.a - &ComplexMatrix::from_diag(&[0.0, 5.0])).max_abs() < 1e-9);
        let k = kerchy_decompose(&t, &r).unwrap();
        assert!((k.split.basis[(0, 0)].norm() - 1.0).abs() < 1e-9);
        assert!((k.t00[(0, 0)] - 0.5).norm() < 1e-9);
        assert!((k.r[(0, 0)].norm() - 1.0).abs() < 1e-9);
        assert!((k.t11[(0, 0)] - 1.0).norm() < 1e-9);

        let mut rng = random::rng(4);
        let u = random::unitary(3, &mut rng);
        let k = kerchy_decompose(&u, &asymptotic_limit(&u, &params).unwrap()).unwrap();
        assert_eq!(k.split.k_dim, 0);
        assert!((&k.split.from_split_basis(&k.t11) - &u).max_abs() < 1e-12);
    }

    #[test]
    fn classification_examples() {
        let params = Params::default();
        assert_eq!(classify_c(&ComplexMatrix::from_diag(&[0.5, 0.3]), &params).unwrap(), CClass::C00);
        let u = random::unitary(3, &mut random::rng(5));
        assert_eq!(classify_c(&u, &params).unwrap(), CClass::C11);
        assert_eq!(classify_c(&ComplexMatrix::from_diag(&[1.0, 0.5]), &params).unwrap(), CClass::Mixed);
    }

    #[test]
    fn conjugation_examples() {
        let params = Params::default();
        let t = period_four();
        assert!(unitary_conjugation_check(&t, &ComplexMatrix::identity(2), &params).unwrap() < 1e-12);
        let swap = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let d = ComplexMatrix::from_diag(&[1.0, 0.5]);
        assert!(unitary_conjugation_check(&d, &swap, &params).unwrap() <= params.tol);
        let u = random::unitary(2, &mut random::rng(6));
        assert!(unitary_conjugation_check(&t, &u, &params).unwrap() <= 1e-9);
        let not_unitary = ComplexMatrix::from_diag(&[1.0, 2.0]);
        assert!(matches!(
            unitary_conjugation_check(&t, &not_unitary, &params),
            Err(AsymptoticError::NotUnitary { .. })
        ));
    }

    #[test]
    fn close_phases_escalate_smoothing() {
        let mut rng = random::rng(42);
        let x = random::conditioned(3, 5.0, &mut rng);
        let phases = [0.16, 0.16 + 2e-4, 2.0];
        let u = ComplexMatrix::from_complex_diag(&phases.map(|a| C64::from_polar(1.0, a)));
        let xinv = crate::matrix::inverse(&x).unwrap();
        let t = x.matmul(&u).matmul(&xinv);
        // oracle: Σ ‖X e_i‖² w_i w_i*, w_i* the rows of X⁻¹
        let mut oracle = ComplexMatrix::zeros(3, 3);
        for i in 0..3 {
            let v2: f64 = (0..3).map(|r| x[(r, i)].norm_sqr()).sum();
            for p in 0..3 {
                for q in 0..3 {
                    oracle[(p, q)] += xinv[(i, p)].conj() * xinv[(i, q)] * v2;
                }
            }
        }
        let params = Params::default();
        let r = l_asymptotic_surrogate(&t, &params).unwrap();
        assert_eq!(r.mode, LimitMode::AlmostConvergent);
        assert!(r.smoothing_log2.unwrap() > params.smoothing_log2);
        assert!((&r.a - &oracle).hermitian_op_norm() <= 1e-6 * oracle.op_norm());

        let capped = Params {
            smoothing_log2_max: params.smoothing_log2,
            ..params
        };
        let r = l_asymptotic_surrogate(&t, &capped).unwrap();
        assert_eq!(r.mode, LimitMode::BanachDependent);
        assert!(r.window_spread > 10.0 * capped.tol);
    }
}
