//! Construction of a contraction `T = A^{-1/2} U A^{1/2}` whose asymptotic
//! limit is a prescribed positive invertible contraction A.
//!
//! The target is described symbolically (atoms with finite or infinite
//! multiplicity and dyadic sequences) and realized on a window of levels
//! `Y_{-W}, ..., Y_W`, each of dimension `D`. U shifts `Y_k` onto `Y_{k+1}`
//! slot by slot and wraps `Y_W` back to `Y_{-W}`; that wrap edge is the only
//! place where the finite model departs from the bilateral construction.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::matrix::{vec_norm, ComplexMatrix, C64};
use crate::random;
use crate::shifts::{Tail, WeightSequence};

/// Sequence terms beyond this index are not generated; later dyadic terms
/// would round onto their limit.
const MAX_SEQUENCE_TERM: u32 = 48;
const SAME_VALUE_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Error)]
pub enum ConstructorError {
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("invalid target spectrum: {0}")]
    InvalidSpec(String),
    #[error("empty window: window and level dimension must be positive")]
    EmptyWindow,
    #[error("condition (iii) violated on edge Y_{k} → Y_{} at slot {slot}: {lower} > {upper}", k + 1)]
    ConditionIIIViolated {
        k: i64,
        slot: usize,
        lower: f64,
        upper: f64,
    },
    #[error("convergence bound violated at k = {k}, n = {n}: {measured:e} > {bound:e}")]
    BoundViolated {
        k: i64,
        n: usize,
        measured: f64,
        bound: f64,
    },
}

/// Finite multiplicity or the token `"INF"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Multiplicity {
    Finite(u64),
    Inf,
}

impl Serialize for Multiplicity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Multiplicity::Finite(n) => s.serialize_u64(*n),
            Multiplicity::Inf => s.serialize_str("INF"),
        }
    }
}

impl<'de> Deserialize<'de> for Multiplicity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Multiplicity;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a positive integer or \"INF\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Multiplicity, E> {
                Ok(Multiplicity::Finite(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Multiplicity, E> {
                u64::try_from(v)
                    .map(Multiplicity::Finite)
                    .map_err(|_| E::custom("multiplicity must be nonnegative"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Multiplicity, E> {
                if v.eq_ignore_ascii_case("inf") {
                    Ok(Multiplicity::Inf)
                } else {
                    Err(E::custom(format!("unknown multiplicity token {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub lambda: f64,
    pub mult: Multiplicity,
}

/// Eigenvalues `λ_m = limit + (from − limit)·2^{-m}`, `m ≥ 0`, each with
/// multiplicity `mult`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EigenSequence {
    Dyadic {
        limit: f64,
        from: f64,
        mult: Multiplicity,
    },
}

impl EigenSequence {
    fn terms(&self) -> impl Iterator<Item = (f64, Multiplicity)> + '_ {
        let EigenSequence::Dyadic { limit, from, mult } = self;
        (0..=MAX_SEQUENCE_TERM).map(move |m| (limit + (from - limit) * (-(m as f64)).exp2(), *mult))
    }

    fn limit(&self) -> f64 {
        let EigenSequence::Dyadic { limit, .. } = self;
        *limit
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetSpectrum {
    pub atoms: Vec<Atom>,
    pub sequences: Vec<EigenSequence>,
    pub r_under: Option<f64>,
}

/// A target that passed [`validate_target`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckedTarget {
    pub spec: TargetSpectrum,
    pub r_under: f64,
    pub has_one_in_essential_spectrum: bool,
    /// `dim ker(A − r̲I)`: zero or infinite.
    pub r_under_multiplicity: Multiplicity,
    /// Finite multiplicity of the eigenvalue 1 split off as an identity summand.
    pub identity_summand: u64,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= SAME_VALUE_TOL
}

pub fn validate_target(spec: &TargetSpectrum) -> Result<CheckedTarget, ConstructorError> {
    let in_unit = |x: f64| x.is_finite() && x > 0.0 && x <= 1.0;
    if spec.atoms.is_empty() && spec.sequences.is_empty() {
        return Err(ConstructorError::InvalidSpec("no atoms or sequences".into()));
    }
    for a in &spec.atoms {
        if !in_unit(a.lambda) {
            return Err(ConstructorError::HypothesisViolation(format!(
                "atom {} lies outside (0, 1]: A must be an invertible contraction",
                a.lambda
            )));
        }
        if a.mult == Multiplicity::Finite(0) {
            return Err(ConstructorError::InvalidSpec(format!("atom {} has multiplicity 0", a.lambda)));
        }
    }
    for s in &spec.sequences {
        let EigenSequence::Dyadic { limit, from, mult } = s;
        if !in_unit(*limit) || !in_unit(*from) {
            return Err(ConstructorError::HypothesisViolation(format!(
                "sequence from {from} to {limit} leaves (0, 1]"
            )));
        }
        if same(*limit, *from) {
            return Err(ConstructorError::InvalidSpec("sequence start equals its limit".into()));
        }
        if *mult == Multiplicity::Finite(0) {
            return Err(ConstructorError::InvalidSpec("sequence multiplicity 0".into()));
        }
    }

    let min_spec = spec
        .atoms
        .iter()
        .map(|a| a.lambda)
        .chain(spec.sequences.iter().flat_map(|s| {
            let EigenSequence::Dyadic { limit, from, .. } = s;
            [*limit, *from]
        }))
        .fold(f64::INFINITY, f64::min);
    let r_under = match spec.r_under {
        Some(r) if !same(r, min_spec) => {
            return Err(ConstructorError::HypothesisViolation(format!(
                "r_under = {r} is not the minimum {min_spec} of the spectrum"
            )))
        }
        Some(r) => r,
        None => min_spec,
    };

    let has_one = spec.atoms.iter().any(|a| same(a.lambda, 1.0) && a.mult == Multiplicity::Inf)
        || spec.sequences.iter().any(|s| same(s.limit(), 1.0));
    if !has_one {
        return Err(ConstructorError::HypothesisViolation(
            "1 is not in the essential spectrum of A".into(),
        ));
    }

    let mult_at = |x: f64| -> Multiplicity {
        let mut total = 0u64;
        let mut inf = false;
        let point_terms = spec.atoms.iter().map(|a| (a.lambda, a.mult)).chain(
            spec.sequences
                .iter()
                .flat_map(|s| s.terms().filter(move |(v, _)| !same(*v, s.limit()))),
        );
        for (v, m) in point_terms {
            if same(v, x) {
                match m {
                    Multiplicity::Inf => inf = true,
                    Multiplicity::Finite(n) => total += n,
                }
            }
        }
        if inf {
            Multiplicity::Inf
        } else {
            Multiplicity::Finite(total)
        }
    };
    let r_under_multiplicity = mult_at(r_under);
    if let Multiplicity::Finite(n) = r_under_multiplicity {
        if n > 0 && r_under < 1.0 {
            return Err(ConstructorError::HypothesisViolation(format!(
                "dim ker(A − r̲I) = {n} is finite and nonzero; it must be 0 or infinite"
            )));
        }
    }
    let identity_summand = match mult_at(1.0) {
        Multiplicity::Finite(n) => n,
        Multiplicity::Inf => 0,
    };
    if same(r_under, 1.0) && r_under_multiplicity != Multiplicity::Inf {
        return Err(ConstructorError::HypothesisViolation(
            "A = I must act on an infinite-dimensional space".into(),
        ));
    }
    Ok(CheckedTarget {
        spec: spec.clone(),
        r_under,
        has_one_in_essential_spectrum: true,
        r_under_multiplicity,
        identity_summand,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PositiveCase {
    Case1InfiniteXk,
    Case2FiniteXk,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NonpositiveCase {
    Case1,
    Case2,
    Case3,
    Degenerate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Level {
    pub k: i64,
    /// `α_{k,l}` for `l < D`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionPlan {
    pub target: CheckedTarget,
    pub window: usize,
    /// Per-chain cap for infinite multiplicities.
    pub chain_dim: usize,
    /// Dimension D of every level.
    pub level_dim: usize,
    pub a_rule: String,
    /// `(k, a_k)` for `k ∈ [−W−1, W+1]`.
    pub a_seq: Vec<(i64, f64)>,
    pub positive_case: PositiveCase,
    pub nonpositive_case: NonpositiveCase,
    pub levels: Vec<Level>,
    /// Merges, pads and truncations applied while filling levels.
    pub notes: Vec<String>,
}

/// `a_k = r̲ + (1 − r̲)·2^k/(1 + 2^k)`.
pub fn partition_point(r_under: f64, k: i64) -> f64 {
    let t = (k as f64).exp2();
    let frac = if t.is_infinite() { 1.0 } else { t / (1.0 + t) };
    r_under + (1.0 - r_under) * frac
}

/// Expanded multiset of eigenvalues in `[lo, hi)` (or `[lo, hi]`), with
/// infinite multiplicities expanded to `inf_copies`.
fn pool(target: &CheckedTarget, lo: f64, hi: f64, closed: bool, inf_copies: usize) -> Vec<f64> {
    let inside = |x: f64| x >= lo && (x < hi || (closed && x <= hi));
    let mut out = Vec::new();
    let mut push = |x: f64, m: Multiplicity| {
        if inside(x) {
            let copies = match m {
                Multiplicity::Finite(n) => n as usize,
                Multiplicity::Inf => inf_copies,
            };
            out.extend(std::iter::repeat_n(x, copies));
        }
    };
    for a in &target.spec.atoms {
        if !(same(a.lambda, 1.0) && target.identity_summand > 0) {
            push(a.lambda, a.mult);
        }
    }
    for s in &target.spec.sequences {
        for (x, m) in s.terms() {
            push(x, m);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Whether `[lo, hi)` carries an eigenvalue of infinite multiplicity.
fn has_infinite(target: &CheckedTarget, lo: f64, hi: f64) -> bool {
    let inside = |x: f64| x >= lo && x < hi;
    target.spec.atoms.iter().any(|a| a.mult == Multiplicity::Inf && inside(a.lambda))
        || target
            .spec
            .sequences
            .iter()
            .any(|s| s.terms().any(|(x, m)| m == Multiplicity::Inf && inside(x)))
}

/// Levels, cases and slot assignment for the window `[−W, W]`.
pub fn build_partition(
    target: &CheckedTarget,
    window: usize,
    chain_dim: usize,
) -> Result<ConstructionPlan, ConstructorError> {
    if window == 0 || chain_dim == 0 {
        return Err(ConstructorError::EmptyWindow);
    }
    let w = window as i64;
    let r = target.r_under;
    let a_rule = "a_k = r + (1 - r) * 2^k / (1 + 2^k)".to_string();
    let a = |k: i64| partition_point(r, k);
    let a_seq: Vec<(i64, f64)> = (-w - 1..=w + 1).map(|k| (k, a(k))).collect();
    let mut notes = Vec::new();

    if same(r, 1.0) {
        let levels = (-w..=w).map(|k| Level { k, values: vec![1.0; chain_dim] }).collect();
        notes.push("r̲ = 1: A = I and T = U".into());
        return Ok(ConstructionPlan {
            target: target.clone(),
            window,
            chain_dim,
            level_dim: chain_dim,
            a_rule,
            a_seq,
            positive_case: PositiveCase::Degenerate,
            nonpositive_case: NonpositiveCase::Degenerate,
            levels,
            notes,
        });
    }

    let n_present = target.spec.atoms.iter().any(|x| same(x.lambda, 1.0) && x.mult == Multiplicity::Inf);
    let m_present = target.r_under_multiplicity == Multiplicity::Inf;

    let inf_pos: Vec<bool> = (1..=w).map(|k| has_infinite(target, a(k), a(k + 1))).collect();
    let positive_case = if inf_pos.iter().all(|&b| b) {
        PositiveCase::Case1InfiniteXk
    } else {
        if inf_pos.iter().any(|&b| b) {
            notes.push("positive side mixes finite and infinite X_k; filled as finite (sorted)".into());
        }
        PositiveCase::Case2FiniteXk
    };
    // X_k for k in [−W−1, −1]
    let inf_neg: Vec<bool> = (-w - 1..=-1).map(|k| has_infinite(target, a(k), a(k + 1))).collect();
    let x0_inf = has_infinite(target, a(0), a(1));
    let nonpositive_case = if inf_neg.iter().all(|&b| b) {
        NonpositiveCase::Case1
    } else if !inf_neg.iter().any(|&b| b) && x0_inf {
        NonpositiveCase::Case3
    } else {
        if inf_neg.iter().any(|&b| b) {
            notes.push("nonpositive side mixes finite and infinite X_k; filled as finite (sorted)".into());
        }
        NonpositiveCase::Case2
    };

    let pos_chains = if positive_case == PositiveCase::Case1InfiniteXk && n_present { 2 } else { 1 };
    let neg_chains = if nonpositive_case == NonpositiveCase::Case1 && m_present { 2 } else { 1 };
    let dim = chain_dim * pos_chains.max(neg_chains);
    let mut levels: Vec<Level> = Vec::with_capacity(2 * window + 1);

    // X slots from the listed intervals, smallest first
    let x_slots = |k: i64, intervals: &[(f64, f64)], count: usize, notes: &mut Vec<String>| -> Vec<f64> {
        let mut vals: Vec<f64> = intervals
            .iter()
            .flat_map(|&(lo, hi)| pool(target, lo, hi, false, dim))
            .collect();
        vals.sort_by(f64::total_cmp);
        if vals.len() > count {
            notes.push(format!("level {k}: kept {count} of {} eigenvalues", vals.len()));
            vals.truncate(count);
        }
        vals
    };

    // nonpositive side, k = −W..0
    match nonpositive_case {
        NonpositiveCase::Case1 => {
            let m_slots = if m_present { chain_dim } else { 0 };
            let xs = dim - m_slots;
            for k in -w..=0 {
                let mut vals = if k < 0 {
                    x_slots(k, &[(a(k - 1), a(k))], xs, &mut notes)
                } else {
                    notes.push("level 0 merges X_{-1} and X_0".into());
                    x_slots(k, &[(a(-1), a(0)), (a(0), a(1))], xs, &mut notes)
                };
                if xs > chain_dim * neg_chains - m_slots {
                    notes.push(format!("level {k}: X chain padded to {xs} slots"));
                }
                vals.extend(std::iter::repeat_n(r, m_slots));
                levels.push(Level { k, values: vals });
            }
        }
        NonpositiveCase::Case2 | NonpositiveCase::Case3 => {
            let (top, stop) = if nonpositive_case == NonpositiveCase::Case3 { (-1, a(0)) } else { (0, a(1)) };
            let need = (top + w + 1) as usize * dim;
            let mut vals = pool(target, r, stop, false, need);
            vals.reverse();
            if vals.len() < need {
                let fill = vals.last().copied().unwrap_or(r);
                notes.push(format!("nonpositive pool padded with {} copies of {fill}", need - vals.len()));
                vals.resize(need, fill);
            }
            let mut rows: Vec<Level> = (0..=(top + w))
                .map(|i| {
                    let mut v = vals[i as usize * dim..(i as usize + 1) * dim].to_vec();
                    v.sort_by(f64::total_cmp);
                    Level { k: top - i, values: v }
                })
                .collect();
            rows.reverse();
            levels.extend(rows);
            if nonpositive_case == NonpositiveCase::Case3 {
                let v = x_slots(0, &[(a(0), a(1))], dim, &mut notes);
                levels.push(Level { k: 0, values: v });
            }
        }
        NonpositiveCase::Degenerate => unreachable!(),
    }

    // positive side, k = 1..W
    match positive_case {
        PositiveCase::Case1InfiniteXk => {
            let n_slots = if n_present { chain_dim } else { 0 };
            let xs = dim - n_slots;
            for k in 1..=w {
                let mut vals = x_slots(k, &[(a(k), a(k + 1))], xs, &mut notes);
                vals.extend(std::iter::repeat_n(1.0, n_slots));
                levels.push(Level { k, values: vals });
            }
        }
        PositiveCase::Case2FiniteXk => {
            let need = window * dim;
            let mut vals = pool(target, a(1), 1.0, true, need);
            if vals.len() < need {
                let fill = vals.last().copied().unwrap_or(1.0).max(a(w + 1));
                notes.push(format!("positive pool padded with {} copies of {fill}", need - vals.len()));
                vals.resize(need, fill);
            }
            for k in 1..=w {
                let i = (k - 1) as usize;
                levels.push(Level {
                    k,
                    values: vals[i * dim..(i + 1) * dim].to_vec(),
                });
            }
        }
        PositiveCase::Degenerate => unreachable!(),
    }

    if levels.iter().any(|l| l.values.len() != dim) {
        return Err(ConstructorError::InvalidSpec(
            "an interval with infinite multiplicity produced too few eigenvalues".into(),
        ));
    }
    Ok(ConstructionPlan {
        target: target.clone(),
        window,
        chain_dim,
        level_dim: dim,
        a_rule,
        a_seq,
        positive_case,
        nonpositive_case,
        levels,
        notes,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstructionResult {
    pub plan: ConstructionPlan,
    #[serde(rename = "A")]
    pub a: ComplexMatrix,
    #[serde(rename = "U")]
    pub u: ComplexMatrix,
    #[serde(rename = "T")]
    pub t: ComplexMatrix,
    /// Levels whose outgoing edge is not the wrap edge: `[−W, W)`.
    pub interior_levels: (i64, i64),
    /// ‖U*U − I‖.
    pub unitary_defect: f64,
    /// `max(‖Te‖ − 1, 0)` over basis vectors on interior levels.
    pub interior_contraction_defect: f64,
    /// `max ‖Te‖ − 1` over the wrap edge.
    pub defect_norm: f64,
    /// Entrywise distance between the slot formula and `A^{-1/2}UA^{1/2}`.
    pub dense_agreement: f64,
}

impl ConstructionResult {
    fn index(&self, k: i64, slot: usize) -> usize {
        (k + self.plan.window as i64) as usize * self.plan.level_dim + slot
    }

    fn alpha(&self, k: i64, slot: usize) -> f64 {
        self.plan.levels[(k + self.plan.window as i64) as usize].values[slot]
    }
}

pub fn assemble(plan: &ConstructionPlan) -> Result<ConstructionResult, ConstructorError> {
    let w = plan.window as i64;
    let d = plan.level_dim;
    let id = plan.target.identity_summand as usize;
    let core = (2 * plan.window + 1) * d;
    let n = core + id;
    let alpha = |k: i64, l: usize| plan.levels[(k + w) as usize].values[l];
    let idx = |k: i64, l: usize| (k + w) as usize * d + l;

    for k in -w..w {
        for l in 0..d {
            let (lower, upper) = (alpha(k, l), alpha(k + 1, l));
            if lower > upper {
                return Err(ConstructorError::ConditionIIIViolated { k, slot: l, lower, upper });
            }
        }
    }

    let mut diag = vec![1.0; n];
    for k in -w..=w {
        for l in 0..d {
            diag[idx(k, l)] = alpha(k, l);
        }
    }
    let a = ComplexMatrix::from_diag(&diag);
    let mut u = ComplexMatrix::zeros(n, n);
    let mut t = ComplexMatrix::zeros(n, n);
    for k in -w..=w {
        let next = if k == w { -w } else { k + 1 };
        for l in 0..d {
            u[(idx(next, l), idx(k, l))] = C64::new(1.0, 0.0);
            t[(idx(next, l), idx(k, l))] = C64::new((alpha(k, l) / alpha(next, l)).sqrt(), 0.0);
        }
    }
    for i in core..n {
        u[(i, i)] = C64::new(1.0, 0.0);
        t[(i, i)] = C64::new(1.0, 0.0);
    }

    let unitary_defect = (&u.adjoint_matmul(&u) - &ComplexMatrix::identity(n)).max_abs();
    let sqrt_a: Vec<f64> = diag.iter().map(|x| x.sqrt()).collect();
    let inv_sqrt_a: Vec<f64> = diag.iter().map(|x| 1.0 / x.sqrt()).collect();
    let dense = ComplexMatrix::from_diag(&inv_sqrt_a)
        .matmul(&u)
        .matmul(&ComplexMatrix::from_diag(&sqrt_a));
    let dense_agreement = (&dense - &t).max_abs();

    let col_norm = |j: usize| vec_norm(&t.column(j));
    let mut interior_contraction_defect = 0.0f64;
    let mut defect_norm = f64::NEG_INFINITY;
    for k in -w..=w {
        for l in 0..d {
            let excess = col_norm(idx(k, l)) - 1.0;
            if k < w {
                interior_contraction_defect = interior_contraction_defect.max(excess.max(0.0));
            } else {
                defect_norm = defect_norm.max(excess);
            }
        }
    }

    Ok(ConstructionResult {
        plan: plan.clone(),
        a,
        u,
        t,
        interior_levels: (-w, w - 1),
        unitary_defect,
        interior_contraction_defect,
        defect_norm,
        dense_agreement,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub k: i64,
    pub n: usize,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n_max: usize,
    pub rows: Vec<ConvergenceRow>,
    pub max_ratio: f64,
    pub all_within_bound: bool,
}

/// Nonzero entries of a matrix, by column.
struct Sparse {
    n: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl Sparse {
    fn from_dense(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::new();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                if m[(i, j)] != C64::new(0.0, 0.0) {
                    entries.push((i, j, m[(i, j)]));
                }
            }
        }
        Self { n: m.rows(), entries }
    }

    fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    fn apply_adjoint(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.n];
        for &(i, j, v) in &self.entries {
            y[j] += v.conj() * x[i];
        }
        y
    }
}

/// Measures `‖T*ⁿTⁿy_k − Ay_k‖` for one seeded unit vector `y_k` per level
/// and every `n ≤ n_max` with `k + n ≤ W`, against the bound
/// `‖A^{1/2}‖·‖(A^{-1} − I)|Y_{k+n}‖·‖A^{1/2}y_k‖`.
pub fn verify_convergence(
    result: &ConstructionResult,
    n_max: usize,
    seed: u64,
) -> Result<ConvergenceReport, ConstructorError> {
    let w = result.plan.window as i64;
    let d = result.plan.level_dim;
    let dim = result.t.rows();
    let t = Sparse::from_dense(&result.t);
    let a = Sparse::from_dense(&result.a);
    let norm_sqrt_a = result.a.diag().iter().map(|z| z.re).fold(0.0, f64::max).sqrt();
    let mut rng = random::rng(seed);
    let mut rows = Vec::new();

    for k in -w..=w {
        let coeffs = random::unit_vector(d, &mut rng);
        let mut y = vec![C64::new(0.0, 0.0); dim];
        for (l, c) in coeffs.iter().enumerate() {
            y[result.index(k, l)] = *c;
        }
        let ay = a.apply(&y);
        let sqrt_a_y: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(l, c)| c.norm_sqr() * result.alpha(k, l))
            .sum::<f64>()
            .sqrt();
        let mut forward = y.clone();
        for n in 0..=n_max.min((w - k) as usize) {
            if n > 0 {
                forward = t.apply(&forward);
            }
            let mut back = forward.clone();
            for _ in 0..n {
                back = t.apply_adjoint(&back);
            }
            let diff: Vec<C64> = back.iter().zip(&ay).map(|(p, q)| p - q).collect();
            let measured = vec_norm(&diff);
            let tail = (0..d)
                .map(|l| {
                    let x = result.alpha(k + n as i64, l);
                    (1.0 - x) / x
                })
                .fold(0.0, f64::max);
            let bound = norm_sqrt_a * tail * sqrt_a_y;
            // a few ulps of slack for the floating-point products
            if measured > bound + 8.0 * f64::EPSILON * (bound + 1.0) {
                return Err(ConstructorError::BoundViolated { k, n, measured, bound });
            }
            let ratio = if bound > 0.0 { measured / bound } else { 0.0 };
            rows.push(ConvergenceRow { k, n, measured, bound, ratio });
        }
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(ConvergenceReport {
        n_max,
        rows,
        max_ratio,
        all_within_bound: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelGrowth {
    Zero,
    Linear,
    Other,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DichotomyProbe {
    pub windows: Vec<usize>,
    /// Number of diagonal entries of A equal to r̲ at each window.
    pub kernel_dims: Vec<usize>,
    pub growth: KernelGrowth,
    pub statement: String,
}

/// `dim ker(A − r̲I)` of the constructed A at increasing windows.
pub fn eigenspace_dichotomy_probe(
    target: &CheckedTarget,
    windows: &[usize],
    chain_dim: usize,
) -> Result<DichotomyProbe, ConstructorError> {
    let mut kernel_dims = Vec::new();
    for &w in windows {
        let plan = build_partition(target, w, chain_dim)?;
        let count = plan
            .levels
            .iter()
            .flat_map(|l| &l.values)
            .filter(|&&x| x == target.r_under)
            .count();
        kernel_dims.push(count);
    }
    let growth = if kernel_dims.iter().all(|&c| c == 0) {
        KernelGrowth::Zero
    } else {
        let slopes: Vec<f64> = windows
            .windows(2)
            .zip(kernel_dims.windows(2))
            .map(|(w, c)| (c[1] as f64 - c[0] as f64) / (w[1] as f64 - w[0] as f64))
            .collect();
        if slopes.iter().all(|&s| s > 0.0 && (s - slopes[0]).abs() < 1e-12) {
            KernelGrowth::Linear
        } else {
            KernelGrowth::Other
        }
    };
    let statement = match growth {
        KernelGrowth::Zero => "dim ker(A − r̲I) = 0 at every window".to_string(),
        KernelGrowth::Linear => {
            "dim ker(A − r̲I) grows linearly with the window, the finite picture of an infinite multiplicity".to_string()
        }
        KernelGrowth::Other => "kernel dimension neither zero nor linear in the window".to_string(),
    };
    Ok(DichotomyProbe {
        windows: windows.to_vec(),
        kernel_dims,
        growth,
        statement,
    })
}

/// The scalar construction as a weighted shift: `w_k = (α_k/α_{k+1})^{1/2}`
/// on `[−W, W]` with `α_{W+1} = 1` and unit tails. Its diagonal asymptotic
/// limit is `α_k` on the window.
pub fn scalar_shift_weights(plan: &ConstructionPlan) -> Option<WeightSequence> {
    if plan.level_dim != 1 {
        return None;
    }
    let w = plan.window as i64;
    let alpha: Vec<f64> = plan.levels.iter().map(|l| l.values[0]).collect();
    let core = (0..alpha.len())
        .map(|i| (alpha[i] / alpha.get(i + 1).copied().unwrap_or(1.0)).sqrt())
        .collect();
    Some(WeightSequence {
        lo: -w,
        hi: w + 1,
        core,
        left_tail: Tail::Constant(1.0),
        right_tail: Tail::Constant(1.0),
    })
}
