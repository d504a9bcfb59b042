//! Seeded generators for test operators and sampled checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{inner, normalize, ComplexMatrix, C64};

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn unit_vector(n: usize, rng: &mut impl Rng) -> Vec<C64> {
    loop {
        let mut v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
        if normalize(&mut v) > 1e-8 {
            return v;
        }
    }
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut impl Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary: Gram–Schmidt on a Ginibre matrix.
pub fn unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = g.column(j);
        // two passes keep orthogonality at rounding level
        for _ in 0..2 {
            for q in &cols {
                let c = inner(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
        normalize(&mut v);
        cols.push(v);
    }
    ComplexMatrix::from_columns(n, &cols)
}

/// Unimodular diagonal matrix with uniformly random phases.
pub fn phase_diagonal(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let d: Vec<C64> = (0..n)
        .map(|_| C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    ComplexMatrix::from_complex_diag(&d)
}

/// W₁ diag(s) W₂ with singular values spread log-uniformly in `[1, cond]`,
/// so the condition number is at most `cond`.
pub fn conditioned(n: usize, cond: f64, rng: &mut impl Rng) -> ComplexMatrix {
    let w1 = unitary(n, rng);
    let w2 = unitary(n, rng);
    let mut s: Vec<f64> = (0..n).map(|_| cond.powf(rng.gen_range(0.0..1.0))).collect();
    if n >= 2 {
        s[0] = 1.0;
        s[1] = cond;
    }
    w1.matmul(&ComplexMatrix::from_diag(&s)).matmul(&w2)
}

/// Ginibre matrix rescaled to operator norm `norm`.
pub fn scaled_ginibre(n: usize, norm: f64, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ginibre(n, n, rng);
    let s = g.op_norm();
    g.scale(norm / s)
}
