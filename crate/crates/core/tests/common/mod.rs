#![allow(dead_code)]

use asymlab::random::{self, SeededRng};
use asymlab::{ComplexMatrix, C64};
use rand::Rng;

pub fn block_diag(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let n = a.rows() + b.rows();
    let mut m = ComplexMatrix::zeros(n, n);
    m.set_block(0, 0, a);
    m.set_block(a.rows(), a.rows(), b);
    m
}

/// `W (U ⊕ B) W*` with U diagonal unitary on `unitary_dim` coordinates and
/// `‖B‖ = b_norm`.
pub fn mixed_contraction(n: usize, unitary_dim: usize, b_norm: f64, rng: &mut SeededRng) -> ComplexMatrix {
    let u = random::phase_diagonal(unitary_dim, rng);
    let b = random::scaled_ginibre(n - unitary_dim, b_norm, rng);
    let w = random::unitary(n, rng);
    w.matmul(&block_diag(&u, &b)).matmul(&w.adjoint())
}

/// `X U X⁻¹` with `cond(X) ≤ cond`.
pub fn similar_to_unitary(n: usize, cond: f64, rng: &mut SeededRng) -> (ComplexMatrix, ComplexMatrix) {
    let x = random::conditioned(n, cond, rng);
    let u = random::phase_diagonal(n, rng);
    let t = x.matmul(&u).matmul(&asymlab::matrix::inverse(&x).unwrap());
    (t, x)
}

/// Oracle for `A_{T,L}` of `T = X U X⁻¹` with U diagonal with distinct
/// phases: `A = Σ ‖X e_i‖²·w_i w_i*` where `w_i` is the i-th row of `X⁻¹`.
pub fn similar_to_unitary_oracle(x: &ComplexMatrix) -> ComplexMatrix {
    let n = x.rows();
    let xinv = asymlab::matrix::inverse(x).unwrap();
    let mut a = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        let v2: f64 = (0..n).map(|r| x[(r, i)].norm_sqr()).sum();
        for p in 0..n {
            for q in 0..n {
                a[(p, q)] += xinv[(i, p)].conj() * xinv[(i, q)] * v2;
            }
        }
    }
    a
}

pub fn random_unit(n: usize, rng: &mut SeededRng) -> Vec<C64> {
    random::unit_vector(n, rng)
}

pub fn dim(rng: &mut SeededRng, lo: usize, hi: usize) -> usize {
    rng.gen_range(lo..=hi)
}
