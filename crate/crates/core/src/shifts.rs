//! Weighted bilateral shifts `T e_k = w_k e_{k+1}` with eventually periodic
//! weights, analysed in closed form.
//!
//! Only the moduli `|w_k|` matter; phases are dropped on input.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::matrix::{ComplexMatrix, C64};

/// Relative tolerance for deciding that a period product equals one.
const PERIOD_UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Error)]
pub enum ShiftError {
    #[error("invalid weight sequence: {0}")]
    InvalidWeights(String),
    #[error("the shift is not power bounded (sup of weight products is infinite)")]
    NotPowerBounded,
    #[error("orthogonal sum is not power bounded: sup ‖A_i‖ = {sup_norm}")]
    PowerBoundednessViolated { sup_norm: f64 },
}

/// Tail of the weight sequence outside `[lo, hi)`.
///
/// On the right `w_{hi+j} = values[j mod p]`; on the left
/// `w_{lo-1-j} = values[j mod p]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tail {
    Constant(f64),
    Periodic(Vec<f64>),
}

impl Tail {
    fn values(&self) -> Vec<f64> {
        match self {
            Tail::Constant(r) => vec![r.abs()],
            Tail::Periodic(v) => v.iter().map(|x| x.abs()).collect(),
        }
    }

    fn period(&self) -> usize {
        match self {
            Tail::Constant(_) => 1,
            Tail::Periodic(v) => v.len(),
        }
    }

    /// Sign of the log of the period product: -1, 0 or 1.
    fn drift(&self) -> i8 {
        let s: f64 = self.values().iter().map(|x| x.ln()).sum();
        let scale: f64 = self.values().iter().map(|x| x.ln().abs()).sum::<f64>().max(1.0);
        if s.abs() <= PERIOD_UNIT_TOL * scale {
            0
        } else if s > 0.0 {
            1
        } else {
            -1
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence {
    pub lo: i64,
    pub hi: i64,
    /// `|w_k|` for `k ∈ [lo, hi)`.
    pub core: Vec<f64>,
    pub left_tail: Tail,
    pub right_tail: Tail,
}

impl WeightSequence {
    pub fn unweighted() -> Self {
        Self {
            lo: 0,
            hi: 0,
            core: vec![],
            left_tail: Tail::Constant(1.0),
            right_tail: Tail::Constant(1.0),
        }
    }

    /// Unit weights except `w_at = dip`.
    pub fn single_dip(at: i64, dip: f64) -> Self {
        Self {
            lo: at,
            hi: at + 1,
            core: vec![dip],
            left_tail: Tail::Constant(1.0),
            right_tail: Tail::Constant(1.0),
        }
    }

    pub fn validate(&self) -> Result<(), ShiftError> {
        let bad = |x: &f64| !(x.is_finite() && *x != 0.0);
        if self.hi < self.lo || (self.hi - self.lo) as usize != self.core.len() {
            return Err(ShiftError::InvalidWeights(format!(
                "core has {} entries but [lo, hi) = [{}, {})",
                self.core.len(),
                self.lo,
                self.hi
            )));
        }
        if self.core.iter().any(bad) {
            return Err(ShiftError::InvalidWeights("core weights must be finite and nonzero".into()));
        }
        for (side, tail) in [("left", &self.left_tail), ("right", &self.right_tail)] {
            let v = tail.values();
            if v.is_empty() {
                return Err(ShiftError::InvalidWeights(format!("{side} periodic tail is empty")));
            }
            if v.iter().any(bad) {
                return Err(ShiftError::InvalidWeights(format!(
                    "{side} tail weights must be finite and nonzero"
                )));
            }
        }
        Ok(())
    }

    /// `|w_k|`.
    pub fn weight(&self, k: i64) -> f64 {
        if k >= self.hi {
            let v = self.right_tail.values();
            v[((k - self.hi) as usize) % v.len()]
        } else if k < self.lo {
            let v = self.left_tail.values();
            v[((self.lo - 1 - k) as usize) % v.len()]
        } else {
            self.core[(k - self.lo) as usize].abs()
        }
    }

    /// `∏_{j<m} |w_{k+j}| = ‖Tᵐ e_k‖`.
    pub fn block_product(&self, k: i64, m: usize) -> f64 {
        (0..m as i64).map(|j| self.weight(k + j)).product()
    }

    pub fn scaled(&self, c: f64) -> Self {
        let scale_tail = |t: &Tail| match t {
            Tail::Constant(r) => Tail::Constant(r * c),
            Tail::Periodic(v) => Tail::Periodic(v.iter().map(|x| x * c).collect()),
        };
        Self {
            lo: self.lo,
            hi: self.hi,
            core: self.core.iter().map(|x| x * c).collect(),
            left_tail: scale_tail(&self.left_tail),
            right_tail: scale_tail(&self.right_tail),
        }
    }

    /// Index range covering two periods of each tail around the core.
    fn enumeration_range(&self) -> (i64, i64) {
        let pl = self.left_tail.period() as i64;
        let pr = self.right_tail.period() as i64;
        (self.lo - 2 * pl, self.hi + 2 * pr)
    }
}

/// Serializes an extended nonnegative real, writing `+∞` as `"inf"`.
mod extended {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {s}"))),
        }
    }
}

/// `(sup, inf)` over `k ∈ ℤ`, `m ≥ 1` of `∏_{j<m} |w_{k+j}|`.
///
/// A tail with period product above one makes the sup infinite, below one
/// makes the inf zero. Otherwise a full tail period can be cut out of any
/// block without moving it past the relevant extremum, so blocks inside
/// two periods of each tail around the core suffice.
pub fn product_bounds(w: &WeightSequence) -> Result<(f64, f64), ShiftError> {
    w.validate()?;
    let (dl, dr) = (w.left_tail.drift(), w.right_tail.drift());
    let (start, end) = w.enumeration_range();
    let (mut sup, mut inf) = (0.0f64, f64::INFINITY);
    for k in start..end {
        let mut p = 1.0;
        for j in k..end {
            p *= w.weight(j);
            sup = sup.max(p);
            inf = inf.min(p);
        }
    }
    if dl > 0 || dr > 0 {
        sup = f64::INFINITY;
    }
    if dl < 0 || dr < 0 {
        inf = 0.0;
    }
    Ok((sup, inf))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagEntry {
    pub k: i64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftAnalysis {
    pub weights: WeightSequence,
    #[serde(with = "extended")]
    pub sup_prod: f64,
    pub inf_prod: f64,
    pub power_bounded: bool,
    pub similar_to_unitary: bool,
    /// Closed-form description of `k ↦ diag_limit(k)`.
    pub diag_rule: String,
    /// Sample of diag_limit over two tail periods around the core.
    pub diag_table: Vec<DiagEntry>,
    /// Infimum of the nonzero diagonal values; `None` when A = 0.
    pub gamma: Option<f64>,
    pub norm_limit: Option<f64>,
    /// Whether every diagonal entry is positive (A injective).
    pub injective: bool,
    pub justification: String,
}

impl ShiftAnalysis {
    /// `⟨A e_k, e_k⟩`; `None` when the shift is not power bounded.
    pub fn diag_limit(&self, k: i64) -> Option<f64> {
        self.power_bounded.then(|| diag_value(&self.weights, k))
    }

    /// `max_k | |w_k|·(D(k+1)/D(k))^{1/2} − 1 |` over `[lo_k, hi_k)`: the
    /// isometry defect of `D^{1/2} T D^{-1/2}`.
    pub fn conjugation_defect(&self, lo_k: i64, hi_k: i64) -> Option<f64> {
        if !self.similar_to_unitary {
            return None;
        }
        let w = &self.weights;
        Some(
            (lo_k..hi_k)
                .map(|k| (w.weight(k) * (diag_value(w, k + 1) / diag_value(w, k)).sqrt() - 1.0).abs())
                .fold(0.0, f64::max),
        )
    }
}

/// Period mean `M = (1/p) Σ_r c_r` of the squared right-tail partial
/// products `c_r = ∏_{j<r} |v_j|²` together with `c`.
fn right_tail_phases(w: &WeightSequence) -> (f64, Vec<f64>) {
    let v = w.right_tail.values();
    let mut c = Vec::with_capacity(v.len());
    let mut acc = 1.0;
    for x in &v {
        c.push(acc);
        acc *= x * x;
    }
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    (mean, c)
}

/// `D(k)` for a power-bounded shift, from `D(k) = |w_k|² D(k+1)` and the
/// right-tail phase values.
fn diag_value(w: &WeightSequence, k: i64) -> f64 {
    match w.right_tail.drift() {
        d if d < 0 => 0.0,
        _ => {
            let (mean, c) = right_tail_phases(w);
            if k >= w.hi {
                let t = ((k - w.hi) as usize) % c.len();
                mean / c[t]
            } else {
                let p: f64 = (k..w.hi).map(|i| w.weight(i).powi(2)).product();
                p * mean
            }
        }
    }
}

pub fn classify_shift(w: &WeightSequence) -> Result<ShiftAnalysis, ShiftError> {
    let (sup_prod, inf_prod) = product_bounds(w)?;
    let power_bounded = sup_prod.is_finite();
    let similar_to_unitary = power_bounded && inf_prod > 0.0;
    let (start, end) = w.enumeration_range();

    let right = w.right_tail.drift();
    let (diag_rule, justification) = match (power_bounded, right, &w.right_tail) {
        (false, _, _) => (
            "absent: not power bounded".to_string(),
            "sup of weight products is infinite".to_string(),
        ),
        (true, d, _) if d < 0 => (
            "0 for every k".to_string(),
            "right tail period product below one: ‖Tⁿe_k‖ → 0".to_string(),
        ),
        (true, _, Tail::Constant(_)) => (
            format!("∏_{{i=k}}^{{{}}} |w_i|² for k < {}, 1 for k ≥ {}", w.hi - 1, w.hi, w.hi),
            "‖Tⁿe_k‖² is eventually constant".to_string(),
        ),
        (true, _, Tail::Periodic(v)) => (
            format!(
                "∏_{{i=k}}^{{{}}} |w_i|² · M for k < {}, M / c_((k−{}) mod {}) for k ≥ {}, M = mean of squared partial products over one period",
                w.hi - 1,
                w.hi,
                w.hi,
                v.len(),
                w.hi
            ),
            "‖Tⁿe_k‖² is eventually periodic, hence almost convergent to its period mean; every Banach limit takes that value".to_string(),
        ),
    };

    let (diag_table, gamma, norm_limit, injective) = if power_bounded {
        let table: Vec<DiagEntry> = (start..=end).map(|k| DiagEntry { k, value: diag_value(w, k) }).collect();
        let zero = right < 0;
        let injective = !zero;
        let gamma = if zero {
            None
        } else if w.left_tail.drift() < 0 {
            // D(k) → 0 as k → −∞ through positive values
            Some(0.0)
        } else {
            Some(table.iter().map(|e| e.value).fold(f64::INFINITY, f64::min))
        };
        let norm = table.iter().map(|e| e.value).fold(0.0, f64::max);
        (table, gamma, Some(norm), injective)
    } else {
        (vec![], None, None, false)
    };

    Ok(ShiftAnalysis {
        weights: w.clone(),
        sup_prod,
        inf_prod,
        power_bounded,
        similar_to_unitary,
        diag_rule,
        diag_table,
        gamma,
        norm_limit,
        injective,
        justification,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Zero,
    Cyclic,
}

/// Matrix of the shift on `span{e_k : |k| ≤ W}`, index `k ↦ k + W`. The
/// last column is zero (`Zero`) or wraps `e_W ↦ w_W e_{−W}` (`Cyclic`);
/// either way the truncation is exact only away from the edges.
pub fn truncate_to_matrix(w: &WeightSequence, window: usize, boundary: Boundary) -> ComplexMatrix {
    let n = 2 * window + 1;
    let mut m = ComplexMatrix::zeros(n, n);
    for col in 0..n {
        let k = col as i64 - window as i64;
        let val = C64::new(w.weight(k), 0.0);
        if col + 1 < n {
            m[(col + 1, col)] = val;
        } else if boundary == Boundary::Cyclic {
            m[(0, col)] = val;
        }
    }
    m
}

/// Closed-form dip rules `i ↦ dip(i)`, `i ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dip", rename_all = "snake_case")]
pub enum DipRule {
    #[serde(rename = "1/i")]
    Reciprocal,
    #[serde(rename = "1/i^p")]
    ReciprocalPower { p: f64 },
    #[serde(rename = "2^-i")]
    Dyadic,
    #[serde(rename = "i")]
    Linear,
    Constant { c: f64 },
}

impl DipRule {
    pub fn dip(&self, i: u64) -> f64 {
        let x = i as f64;
        match self {
            DipRule::Reciprocal => 1.0 / x,
            DipRule::ReciprocalPower { p } => x.powf(-p),
            DipRule::Dyadic => (-x).exp2(),
            DipRule::Linear => x,
            DipRule::Constant { c } => *c,
        }
    }

    /// `lim_{i→∞} dip(i)`, when the rule is monotone.
    fn limit(&self) -> Option<f64> {
        match self {
            DipRule::Reciprocal | DipRule::Dyadic => Some(0.0),
            DipRule::ReciprocalPower { p } if *p > 0.0 => Some(0.0),
            DipRule::ReciprocalPower { .. } => None,
            DipRule::Linear => Some(f64::INFINITY),
            DipRule::Constant { c } => Some(*c),
        }
    }
}

/// Family `i ↦ single_dip(0, dip(i))` for `i ≥ first`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyRule {
    SingleDip {
        #[serde(flatten)]
        dip: DipRule,
        #[serde(default = "one")]
        first: u64,
    },
}

fn one() -> u64 {
    1
}

impl FamilyRule {
    pub fn member(&self, i: u64) -> WeightSequence {
        match self {
            FamilyRule::SingleDip { dip, .. } => WeightSequence::single_dip(0, dip.dip(i)),
        }
    }

    fn first(&self) -> u64 {
        match self {
            FamilyRule::SingleDip { first, .. } => *first,
        }
    }

    /// Indices at which monotonicity is checked.
    fn sample_indices(&self) -> Vec<u64> {
        let f = self.first().max(1);
        let mut v: Vec<u64> = (f..f + 64).collect();
        let mut k = f.max(64);
        while k < (1 << 40) {
            v.push(k);
            v.push(k + 1);
            k *= 4;
        }
        v.sort_unstable();
        v.dedup();
        v
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ShiftSumSpec {
    pub summands: Vec<WeightSequence>,
    pub family: Option<FamilyRule>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SumVerdictKind {
    SimilarToUnitary,
    NotSimilarToAnyNormal,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SumVerdict {
    pub kind: SumVerdictKind,
    pub sup_norm: f64,
    pub inf_gamma: f64,
    pub all_entries_positive: bool,
    /// Isometry defect of the diagonal conjugation `D^{1/2} W D^{-1/2}`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate_defect: Option<f64>,
    pub evidence: BTreeMap<String, Value>,
}

/// Orthogonal sum `⊕ W_i` of weighted shifts. With every summand similar
/// to a unitary, the sum is similar to a unitary iff `inf γ(A_i) > 0`, and
/// otherwise (A injective but not invertible) not similar to any normal
/// operator.
pub fn sum_analysis(spec: &ShiftSumSpec) -> Result<SumVerdict, ShiftError> {
    let mut evidence = BTreeMap::new();
    let mut analyses = Vec::new();
    for w in &spec.summands {
        analyses.push(classify_shift(w)?);
    }
    let mut sup_norm = 0.0f64;
    let mut sup_prod = 0.0f64;
    let mut inf_gamma = f64::INFINITY;
    let mut all_positive = true;
    let mut all_similar = true;
    let mut gammas = Vec::new();
    for a in &analyses {
        sup_norm = sup_norm.max(a.norm_limit.unwrap_or(f64::INFINITY));
        sup_prod = sup_prod.max(a.sup_prod);
        all_positive &= a.injective;
        all_similar &= a.similar_to_unitary;
        let g = a.gamma.unwrap_or(0.0);
        gammas.push(g);
        inf_gamma = inf_gamma.min(g);
    }
    evidence.insert("explicit_gammas".into(), json!(gammas));

    let mut family_members = Vec::new();
    if let Some(rule) = &spec.family {
        let FamilyRule::SingleDip { dip, .. } = rule;
        let samples = rule.sample_indices();
        let values: Vec<f64> = samples.iter().map(|&i| dip.dip(i)).collect();
        let nonincreasing = values.windows(2).all(|p| p[1] <= p[0]);
        let nondecreasing = values.windows(2).all(|p| p[1] >= p[0]);
        evidence.insert("family_rule".into(), json!(rule));
        evidence.insert("family_monotone_on_samples".into(), json!(nonincreasing || nondecreasing));
        let limit = dip.limit();
        if !(nonincreasing || nondecreasing) || limit.is_none() || values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            evidence.insert("reason".into(), json!("family rule is not monotone with a closed-form limit"));
            return Ok(SumVerdict {
                kind: SumVerdictKind::Inconclusive,
                sup_norm,
                inf_gamma,
                all_entries_positive: all_positive,
                certificate_defect: None,
                evidence,
            });
        }
        let limit = limit.unwrap();
        // single dip d: products in {1, d}, diag values {d², 1}
        let extremes = [dip.dip(rule.first().max(1)), limit];
        let (lo, hi) = (
            extremes.iter().copied().fold(f64::INFINITY, f64::min),
            extremes.iter().copied().fold(0.0, f64::max),
        );
        sup_norm = sup_norm.max(hi * hi).max(1.0);
        sup_prod = sup_prod.max(hi).max(1.0);
        inf_gamma = inf_gamma.min(lo * lo).min(1.0);
        evidence.insert("family_dip_limit".into(), json!(limit));
        evidence.insert("family_inf_gamma".into(), json!((lo * lo).min(1.0)));
        family_members = samples.iter().take(64).map(|&i| rule.member(i)).collect();
    }

    evidence.insert("sup_prod".into(), json!(if sup_prod.is_finite() { json!(sup_prod) } else { json!("inf") }));
    if !sup_norm.is_finite() || !sup_prod.is_finite() {
        return Err(ShiftError::PowerBoundednessViolated { sup_norm });
    }
    if !all_similar {
        evidence.insert("reason".into(), json!("a summand is not similar to a unitary"));
        return Ok(SumVerdict {
            kind: SumVerdictKind::Inconclusive,
            sup_norm,
            inf_gamma,
            all_entries_positive: all_positive,
            certificate_defect: None,
            evidence,
        });
    }

    if inf_gamma > 0.0 {
        let mut defect = 0.0f64;
        for w in spec.summands.iter().chain(&family_members) {
            let a = classify_shift(w)?;
            let (s, e) = w.enumeration_range();
            defect = defect.max(a.conjugation_defect(s - 8, e + 8).unwrap_or(f64::INFINITY));
        }
        Ok(SumVerdict {
            kind: SumVerdictKind::SimilarToUnitary,
            sup_norm,
            inf_gamma,
            all_entries_positive: all_positive,
            certificate_defect: Some(defect),
            evidence,
        })
    } else if all_positive {
        evidence.insert(
            "reason".into(),
            json!("A = ⊕ A_i is injective with inf γ(A_i) = 0, so it is not invertible"),
        );
        Ok(SumVerdict {
            kind: SumVerdictKind::NotSimilarToAnyNormal,
            sup_norm,
            inf_gamma,
            all_entries_positive: true,
            certificate_defect: None,
            evidence,
        })
    } else {
        Ok(SumVerdict {
            kind: SumVerdictKind::Inconclusive,
            sup_norm,
            inf_gamma,
            all_entries_positive: false,
            certificate_defect: None,
            evidence,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dip_half() -> WeightSequence {
        WeightSequence::single_dip(0, 0.5)
    }

    #[test]
    fn product_bounds_examples() {
        assert_eq!(product_bounds(&WeightSequence::unweighted()).unwrap(), (1.0, 1.0));
        assert_eq!(product_bounds(&dip_half()).unwrap(), (1.0, 0.5));
        let mut w = WeightSequence::unweighted();
        w.right_tail = Tail::Constant(2.0);
        assert_eq!(product_bounds(&w).unwrap().0, f64::INFINITY);
        w.right_tail = Tail::Constant(0.5);
        assert_eq!(product_bounds(&w).unwrap(), (1.0, 0.0));
        w.right_tail = Tail::Periodic(vec![2.0, 0.5]);
        assert_eq!(product_bounds(&w).unwrap(), (2.0, 0.5));
        let mut w = WeightSequence::unweighted();
        w.left_tail = Tail::Constant(1.5);
        assert_eq!(product_bounds(&w).unwrap().0, f64::INFINITY);
    }

    #[test]
    fn product_bounds_match_brute_force() {
        // core with a bump, periodic tails of product one
        let w = WeightSequence {
            lo: -2,
            hi: 3,
            core: vec![0.5, 3.0, 0.25, 2.0, 1.5],
            left_tail: Tail::Periodic(vec![0.5, 2.0, 1.0]),
            right_tail: Tail::Periodic(vec![4.0, 0.25]),
        };
        let (sup, inf) = product_bounds(&w).unwrap();
        let (mut bs, mut bi) = (0.0f64, f64::INFINITY);
        for k in -60..60 {
            for m in 1..80 {
                let p = w.block_product(k, m);
                bs = bs.max(p);
                bi = bi.min(p);
            }
        }
        assert!((sup - bs).abs() < 1e-12 && (inf - bi).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let a = classify_shift(&WeightSequence::unweighted()).unwrap();
        assert!(a.similar_to_unitary);
        assert_eq!(a.gamma, Some(1.0));
        assert!((-5..5).all(|k| a.diag_limit(k) == Some(1.0)));

        let a = classify_shift(&dip_half()).unwrap();
        assert!(a.similar_to_unitary);
        assert_eq!(a.gamma, Some(0.25));
        assert_eq!(a.norm_limit, Some(1.0));
        for k in -5..=0 {
            assert_eq!(a.diag_limit(k), Some(0.25));
        }
        for k in 1..6 {
            assert_eq!(a.diag_limit(k), Some(1.0));
        }
    }

    #[test]
    fn periodic_tail_diag_limit_is_period_mean() {
        let w = WeightSequence {
            lo: 0,
            hi: 0,
            core: vec![],
            left_tail: Tail::Constant(1.0),
            right_tail: Tail::Periodic(vec![2.0, 0.5]),
        };
        let a = classify_shift(&w).unwrap();
        // oracle: ‖Tⁿe_k‖² alternates between two values; average them
        for k in -3..6i64 {
            let n0 = 200;
            let even = w.block_product(k, n0).powi(2);
            let odd = w.block_product(k, n0 + 1).powi(2);
            let expect = (even + odd) / 2.0;
            assert!((a.diag_limit(k).unwrap() - expect).abs() < 1e-12, "k = {k}");
        }
        assert_eq!(a.diag_limit(0), Some(2.5));
        assert_eq!(a.diag_limit(1), Some(0.625));
    }

    #[test]
    fn non_power_bounded_has_no_diag_limit() {
        let mut w = WeightSequence::unweighted();
        w.right_tail = Tail::Periodic(vec![2.0, 0.6]);
        let a = classify_shift(&w).unwrap();
        assert!(!a.power_bounded && !a.similar_to_unitary);
        assert_eq!(a.diag_limit(0), None);
    }

    #[test]
    fn decaying_tails() {
        let mut w = WeightSequence::unweighted();
        w.right_tail = Tail::Constant(0.5);
        let a = classify_shift(&w).unwrap();
        assert_eq!(a.gamma, None);
        assert_eq!(a.diag_limit(3), Some(0.0));

        let mut w = WeightSequence::unweighted();
        w.left_tail = Tail::Constant(0.5);
        let a = classify_shift(&w).unwrap();
        assert!(a.power_bounded && !a.similar_to_unitary && a.injective);
        assert_eq!(a.gamma, Some(0.0));
        assert_eq!(a.diag_limit(-3), Some(0.25f64.powi(3)));
    }

    #[test]
    fn invalid_weights() {
        let mut w = dip_half();
        w.core = vec![0.0];
        assert!(matches!(classify_shift(&w), Err(ShiftError::InvalidWeights(_))));
        let mut w = dip_half();
        w.hi = 3;
        assert!(classify_shift(&w).is_err());
        let mut w = dip_half();
        w.right_tail = Tail::Periodic(vec![]);
        assert!(classify_shift(&w).is_err());
    }

    #[test]
    fn truncation_examples() {
        let u = WeightSequence::unweighted();
        let c = truncate_to_matrix(&u, 1, Boundary::Cyclic);
        let expect = ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(c.data(), expect.data());
        let z = truncate_to_matrix(&u, 1, Boundary::Zero);
        let expect = ComplexMatrix::from_real_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        assert_eq!(z.data(), expect.data());
        let m = truncate_to_matrix(&dip_half(), 2, Boundary::Zero);
        let sub: Vec<f64> = (0..4).map(|i| m[(i + 1, i)].re).collect();
        assert_eq!(sub, vec![1.0, 1.0, 0.5, 1.0]);
    }

    #[test]
    fn sum_examples() {
        let two = ShiftSumSpec {
            summands: vec![dip_half(), WeightSequence::single_dip(3, 0.5)],
            family: None,
        };
        let v = sum_analysis(&two).unwrap();
        assert_eq!(v.kind, SumVerdictKind::SimilarToUnitary);
        assert_eq!(v.inf_gamma, 0.25);
        assert!(v.certificate_defect.unwrap() <= 1e-12);

        let fam = ShiftSumSpec {
            summands: (1..=32).map(|i| WeightSequence::single_dip(0, 1.0 / i as f64)).collect(),
            family: Some(FamilyRule::SingleDip { dip: DipRule::Reciprocal, first: 33 }),
        };
        let v = sum_analysis(&fam).unwrap();
        assert_eq!(v.kind, SumVerdictKind::NotSimilarToAnyNormal);
        assert_eq!(v.inf_gamma, 0.0);
        assert!(v.all_entries_positive);

        let single = ShiftSumSpec {
            summands: vec![WeightSequence::unweighted()],
            family: None,
        };
        assert_eq!(sum_analysis(&single).unwrap().kind, SumVerdictKind::SimilarToUnitary);
    }

    #[test]
    fn sum_rejects_unbounded_family() {
        let spec = ShiftSumSpec {
            summands: vec![],
            family: Some(FamilyRule::SingleDip { dip: DipRule::Linear, first: 1 }),
        };
        assert!(matches!(sum_analysis(&spec), Err(ShiftError::PowerBoundednessViolated { .. })));
    }

    #[test]
    fn sum_with_nonmonotone_rule_is_inconclusive() {
        let spec = ShiftSumSpec {
            summands: vec![],
            family: Some(FamilyRule::SingleDip { dip: DipRule::ReciprocalPower { p: -1.0 }, first: 1 }),
        };
        assert_eq!(sum_analysis(&spec).unwrap().kind, SumVerdictKind::Inconclusive);
    }

    #[test]
    fn weight_json_schema() {
        let json = r#"{"lo":0,"hi":1,"core":[0.5],"left_tail":{"constant":1.0},"right_tail":{"periodic":[2.0,0.5]}}"#;
        let w: WeightSequence = serde_json::from_str(json).unwrap();
        assert_eq!(w.right_tail, Tail::Periodic(vec![2.0, 0.5]));
        let rule: FamilyRule = serde_json::from_str(r#"{"kind":"single_dip","dip":"1/i"}"#).unwrap();
        assert_eq!(rule, FamilyRule::SingleDip { dip: DipRule::Reciprocal, first: 1 });
        let rule: FamilyRule = serde_json::from_str(r#"{"kind":"single_dip","dip":"1/i^p","p":2.0,"first":5}"#).unwrap();
        assert_eq!(rule.member(5).core, vec![1.0 / 25.0]);
        let mut w = WeightSequence::unweighted();
        w.right_tail = Tail::Constant(3.0);
        let s = serde_json::to_value(classify_shift(&w).unwrap()).unwrap();
        assert_eq!(s["sup_prod"], json!("inf"));
    }
}
