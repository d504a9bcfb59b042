//! Dense complex matrices and the Hermitian toolkit built on them.
//!
//! Storage is row-major: `data[i * cols + j]` holds the entry in row `i`,
//! column `j`. Square matrices stand in for bounded operators on a finite
//! dimensional Hilbert space; rectangular ones appear as blocks of a
//! decomposition `H = K ⊕ L` and as maps between such pieces.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

const MAX_JACOBI_SWEEPS: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("data length mismatch: expected {expected}, got {got}")]
    InvalidData { expected: usize, got: usize },
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not Hermitian: ‖A − A*‖ = {asymmetry:e} exceeds {allowed:e}")]
    NotHermitian { asymmetry: f64, allowed: f64 },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("positive operator is numerically singular: min eigenvalue {min_eigenvalue:e} < floor {floor:e}")]
    SingularPositiveOperator { min_eigenvalue: f64, floor: f64 },
    #[error("matrix is numerically singular at pivot {pivot}")]
    Singular { pivot: usize },
    #[error("matrix is not upper block-triangular in the split: ‖X₂₁‖ = {lower_left:e} exceeds {allowed:e}")]
    NotUpperTriangularInSplit { lower_left: f64, allowed: f64 },
    #[error("diagonal block {block} is numerically singular")]
    SingularBlock { block: &'static str },
    #[error("split basis is not orthonormal: ‖Q*Q − I‖ = {defect:e}")]
    NonOrthonormalSplit { defect: f64 },
}

/// Dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::InvalidData {
                expected: rows * cols,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(MatrixError::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Square matrix from separate real and imaginary parts (row-major).
    pub fn from_parts(dim: usize, re: &[f64], im: &[f64]) -> Result<Self, MatrixError> {
        Self::from_parts_rect(dim, dim, re, im)
    }

    pub fn from_parts_rect(
        rows: usize,
        cols: usize,
        re: &[f64],
        im: &[f64],
    ) -> Result<Self, MatrixError> {
        if re.len() != rows * cols {
            return Err(MatrixError::InvalidData {
                expected: rows * cols,
                got: re.len(),
            });
        }
        if im.len() != rows * cols {
            return Err(MatrixError::InvalidData {
                expected: rows * cols,
                got: im.len(),
            });
        }
        let data = re.iter().zip(im).map(|(&r, &i)| C64::new(r, i)).collect();
        Self::new(rows, cols, data)
    }

    /// Real square matrix given row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n, rows.first().map_or(0, |r| r.len()));
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), m.cols, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = C64::new(x, 0.0);
            }
        }
        m
    }

    /// Complex matrix given row by row.
    pub fn from_rows(rows: &[&[C64]]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n, rows.first().map_or(0, |r| r.len()));
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), m.cols, "ragged rows");
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_complex_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (i, &x) in col.iter().enumerate() {
                m[(i, j)] = x;
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn ensure_square(&self) -> Result<usize, MatrixError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// (A + A*)/2.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Spectral (operator) norm, the largest singular value.
    pub fn op_norm(&self) -> f64 {
        if self.rows == 0 || self.cols == 0 {
            return 0.0;
        }
        let s = self.max_abs();
        if s == 0.0 || !s.is_finite() {
            return s;
        }
        let m = ComplexMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)] / s);
        let gram = if m.cols <= m.rows {
            m.adjoint().matmul(&m)
        } else {
            m.matmul(&m.adjoint())
        };
        let unit = match herm_eig(&gram.hermitian_part(), 1e-12) {
            Ok(e) => e.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt(),
            Err(_) => m.frobenius_norm(),
        };
        s * unit
    }

    /// Operator norm of a matrix already known to be Hermitian.
    pub fn hermitian_op_norm(&self) -> f64 {
        if self.rows == 0 {
            return 0.0;
        }
        match herm_eig(&self.hermitian_part(), 1e-12) {
            Ok(e) => e
                .eigenvalues
                .iter()
                .map(|x| x.abs())
                .fold(0.0, f64::max),
            Err(_) => self.frobenius_norm(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        let m = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * m..(i + 1) * m];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let other_row = &other.data[k * m..(k + 1) * m];
                for (o, b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// A* B without forming A*.
    pub fn adjoint_matmul(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut out = Self::zeros(self.cols, other.cols);
        let m = other.cols;
        for k in 0..self.rows {
            let other_row = &other.data[k * m..(k + 1) * m];
            for i in 0..self.cols {
                let a = self.data[k * self.cols + i].conj();
                if a == ZERO {
                    continue;
                }
                let out_row = &mut out.data[i * m..(i + 1) * m];
                for (o, b) in out_row.iter_mut().zip(other_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// T* X T, re-symmetrized when X is Hermitian.
    pub fn congruence(&self, x: &Self) -> Self {
        self.adjoint_matmul(&x.matmul(self))
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .filter(|(a, _)| **a != ZERO)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// A* v.
    pub fn adjoint_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![ZERO; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            if vi == ZERO {
                continue;
            }
            for (o, a) in out
                .iter_mut()
                .zip(&self.data[i * self.cols..(i + 1) * self.cols])
            {
                *o += a.conj() * vi;
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Columns `range` as a new matrix.
    pub fn columns(&self, range: std::ops::Range<usize>) -> Self {
        Self::from_fn(self.rows, range.len(), |i, j| self[(i, range.start + j)])
    }

    pub fn block(&self, rows: std::ops::Range<usize>, cols: std::ops::Range<usize>) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| {
            self[(rows.start + i, cols.start + j)]
        })
    }

    /// Places `b` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// ‖A − A*‖_F.
    pub fn hermitian_defect(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// T^n by binary powering.
    pub fn pow(&self, n: u64) -> Self {
        let dim = self.dim();
        let mut result = Self::identity(dim);
        let mut base = self.clone();
        let mut e = n;
        let mut first = true;
        while e > 0 {
            if e & 1 == 1 {
                result = if first { base.clone() } else { result.matmul(&base) };
                first = false;
            }
            e >>= 1;
            if e > 0 {
                base = base.matmul(&base);
            }
        }
        result
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cols: Option<usize>,
    re: Vec<f64>,
    #[serde(default)]
    im: Option<Vec<f64>>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let (dim, rows, cols) = if self.is_square() {
            (Some(self.rows), None, None)
        } else {
            (None, Some(self.rows), Some(self.cols))
        };
        MatrixRepr {
            dim,
            rows,
            cols,
            re: self.data.iter().map(|z| z.re).collect(),
            im: Some(self.data.iter().map(|z| z.im).collect()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = MatrixRepr::deserialize(deserializer)?;
        let (rows, cols) = match (repr.dim, repr.rows, repr.cols) {
            (Some(d), None, None) => (d, d),
            (None, Some(r), Some(c)) => (r, c),
            (Some(d), Some(r), Some(c)) if r == d && c == d => (d, d),
            _ => {
                return Err(D::Error::custom(
                    "matrix needs either \"dim\" or both \"rows\" and \"cols\"",
                ))
            }
        };
        let im = repr.im.unwrap_or_else(|| vec![0.0; repr.re.len()]);
        ComplexMatrix::from_parts_rect(rows, cols, &repr.re, &im).map_err(D::Error::custom)
    }
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨x, y⟩ = Σ x̄ᵢ yᵢ.
pub fn inner(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn normalize(v: &mut [C64]) -> f64 {
    let n = vec_norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
    n
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors as columns, ordered like `eigenvalues`.
    pub eigenvectors: ComplexMatrix,
}

impl HermEigen {
    /// V f(Λ) V*.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = v.rows();
        let vals: Vec<f64> = self.eigenvalues.iter().map(|&x| f(x)).collect();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in vals.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let a = v[(i, k)] * lam;
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += a * v[(j, k)].conj();
                }
            }
        }
        out.hermitian_part()
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Sweeps visit pairs `(p, q)`, `p < q`, in row order and stop once the
/// off-diagonal Frobenius mass drops below `1e-3 · eig_tol · ‖A‖_F`.
pub fn herm_eig(a: &ComplexMatrix, eig_tol: f64) -> Result<HermEigen, MatrixError> {
    let n = a.ensure_square()?;
    let norm = a.frobenius_norm();
    let asymmetry = a.hermitian_defect();
    let allowed = eig_tol * norm.max(f64::MIN_POSITIVE);
    if asymmetry > allowed && asymmetry > 0.0 {
        return Err(MatrixError::NotHermitian { asymmetry, allowed });
    }
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let thresh = (1e-3 * eig_tol).max(f64::EPSILON) * norm;

    let off_norm = |m: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += m[(i, j)].norm_sqr();
                }
            }
        }
        s.sqrt()
    };

    let mut sweep = 0;
    loop {
        let off = off_norm(&m);
        if off <= thresh || norm == 0.0 {
            break;
        }
        if sweep >= MAX_JACOBI_SWEEPS {
            return Err(MatrixError::NoConvergence { sweeps: sweep, off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                if sweep > 3 && app.abs() + 100.0 * mag == app.abs() && aqq.abs() + 100.0 * mag == aqq.abs() {
                    m[(p, q)] = ZERO;
                    m[(q, p)] = ZERO;
                    continue;
                }
                let phase = apq / mag;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase.conj() * s;
                let cp = phase.conj() * c;
                // columns: A ← A G, V ← V G
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * c - akq * sp;
                    m[(k, q)] = akp * s + akq * cp;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * sp;
                    v[(k, q)] = vkp * s + vkq * cp;
                }
                // rows: A ← G* A
                let spc = sp.conj();
                let cpc = cp.conj();
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = apk * c - aqk * spc;
                    m[(q, k)] = apk * s + aqk * cpc;
                }
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = C64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = C64::new(m[(q, q)].re, 0.0);
            }
        }
        sweep += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| m[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermEigen {
        eigenvalues,
        eigenvectors,
    })
}

/// Singular values in ascending order, from the Hermitian dilation
/// `[[0, A], [A*, 0]]` so that small values keep full absolute accuracy.
pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>, MatrixError> {
    let (r, c) = (a.rows(), a.cols());
    let n = r + c;
    let mut dil = ComplexMatrix::zeros(n, n);
    dil.set_block(0, r, a);
    dil.set_block(r, 0, &a.adjoint());
    let eig = herm_eig(&dil, 1e-12)?;
    // the top min(r, c) eigenvalues are the singular values
    let k = r.min(c);
    let mut s: Vec<f64> = eig.eigenvalues[n - k..].iter().map(|x| x.max(0.0)).collect();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// σ_max / σ_min; infinite for a singular matrix.
pub fn condition_number(a: &ComplexMatrix) -> Result<f64, MatrixError> {
    let s = singular_values(a)?;
    let (lo, hi) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
    Ok(if lo == 0.0 { f64::INFINITY } else { hi / lo })
}

/// Inverse by LU with partial pivoting.
pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix, MatrixError> {
    let n = a.ensure_square()?;
    let scale = a.max_abs();
    let tiny = scale * f64::EPSILON * (n.max(1) as f64);
    let mut lu = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let (pivot_row, pivot_mag) = (col..n)
            .map(|r| (r, lu[(r, col)].norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap();
        if pivot_mag <= tiny || pivot_mag == 0.0 {
            return Err(MatrixError::Singular { pivot: col });
        }
        if pivot_row != col {
            for j in 0..n {
                let t = lu[(col, j)];
                lu[(col, j)] = lu[(pivot_row, j)];
                lu[(pivot_row, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(pivot_row, j)];
                inv[(pivot_row, j)] = t;
            }
        }
        let pivot = lu[(col, col)];
        for j in 0..n {
            lu[(col, j)] /= pivot;
            inv[(col, j)] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = lu[(r, col)];
            if factor == ZERO {
                continue;
            }
            for j in 0..n {
                let l = lu[(col, j)];
                lu[(r, j)] -= factor * l;
                let iv = inv[(col, j)];
                inv[(r, j)] -= factor * iv;
            }
        }
    }
    Ok(inv)
}

/// A^{1/2} for a positive semidefinite A; slightly negative eigenvalues
/// from rounding are clamped to zero.
pub fn psd_sqrt(a: &ComplexMatrix, eig_tol: f64) -> Result<ComplexMatrix, MatrixError> {
    let eig = herm_eig(a, eig_tol)?;
    Ok(eig.apply_fn(|x| x.max(0.0).sqrt()))
}

/// (A^{1/2}, A^{-1/2}) for a positive definite A with min eigenvalue ≥ `floor`.
pub fn psd_sqrt_and_invsqrt(
    a: &ComplexMatrix,
    floor: f64,
) -> Result<(ComplexMatrix, ComplexMatrix), MatrixError> {
    let eig = herm_eig(a, 1e-12)?;
    let min = eig.min();
    if min < floor || min <= 0.0 {
        return Err(MatrixError::SingularPositiveOperator {
            min_eigenvalue: min,
            floor,
        });
    }
    Ok((eig.apply_fn(f64::sqrt), eig.apply_fn(|x| 1.0 / x.sqrt())))
}

/// γ(A) with the zero operator flagged instead of rejected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedMinModulus {
    /// `f64::INFINITY` when `zero_operator` is set.
    pub value: f64,
    pub zero_operator: bool,
}

/// Smallest singular value of `a` above `kernel_tol · ‖A‖`.
pub fn reduced_min_modulus(
    a: &ComplexMatrix,
    kernel_tol: f64,
) -> Result<ReducedMinModulus, MatrixError> {
    let s = singular_values(a)?;
    let norm = s.last().copied().unwrap_or(0.0);
    let threshold = kernel_tol * norm;
    match s.iter().find(|&&x| x > threshold && x > 0.0) {
        Some(&v) if norm > 0.0 => Ok(ReducedMinModulus {
            value: v,
            zero_operator: false,
        }),
        _ => Ok(ReducedMinModulus {
            value: f64::INFINITY,
            zero_operator: true,
        }),
    }
}

/// Orthonormal basis adapted to `H = K ⊕ L`: the first `k_dim` columns
/// span K, the remaining ones span L.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSplit {
    pub k_dim: usize,
    pub basis: ComplexMatrix,
}

impl BlockSplit {
    pub fn new(k_dim: usize, basis: ComplexMatrix, split_tol: f64) -> Result<Self, MatrixError> {
        let n = basis.ensure_square()?;
        assert!(k_dim <= n);
        let defect = (&basis.adjoint_matmul(&basis) - &ComplexMatrix::identity(n)).op_norm();
        if defect > split_tol {
            return Err(MatrixError::NonOrthonormalSplit { defect });
        }
        Ok(Self { k_dim, basis })
    }

    /// Split along the standard basis: K = span(e_0..e_{k-1}).
    pub fn standard(n: usize, k_dim: usize) -> Self {
        Self {
            k_dim,
            basis: ComplexMatrix::identity(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn l_dim(&self) -> usize {
        self.dim() - self.k_dim
    }

    pub fn k_basis(&self) -> ComplexMatrix {
        self.basis.columns(0..self.k_dim)
    }

    pub fn l_basis(&self) -> ComplexMatrix {
        self.basis.columns(self.k_dim..self.dim())
    }

    /// Q* X Q, the matrix of X in the adapted basis.
    pub fn to_split_basis(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.basis.adjoint_matmul(&x.matmul(&self.basis))
    }

    pub fn from_split_basis(&self, y: &ComplexMatrix) -> ComplexMatrix {
        self.basis.matmul(&y.matmul(&self.basis.adjoint()))
    }

    /// Blocks (X₁₁, X₁₂, X₂₁, X₂₂) of X in the adapted basis.
    pub fn blocks(
        &self,
        x: &ComplexMatrix,
    ) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        let y = self.to_split_basis(x);
        let (k, n) = (self.k_dim, self.dim());
        (
            y.block(0..k, 0..k),
            y.block(0..k, k..n),
            y.block(k..n, 0..k),
            y.block(k..n, k..n),
        )
    }
}

/// Basis of the spectral subspace of A for eigenvalues in `[lo, hi)`,
/// followed by its orthogonal complement.
pub fn spectral_subspace(
    a: &ComplexMatrix,
    lo: f64,
    hi: f64,
    eig_tol: f64,
) -> Result<BlockSplit, MatrixError> {
    let eig = herm_eig(a, eig_tol)?;
    let n = eig.eigenvalues.len();
    let (inside, outside): (Vec<usize>, Vec<usize>) =
        (0..n).partition(|&i| eig.eigenvalues[i] >= lo && eig.eigenvalues[i] < hi);
    let k_dim = inside.len();
    let order: Vec<usize> = inside.into_iter().chain(outside).collect();
    let basis = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(BlockSplit { k_dim, basis })
}

/// X⁻¹ assembled blockwise from an upper block-triangular X:
/// `[[X₁₁⁻¹, −X₁₁⁻¹X₁₂X₂₂⁻¹], [0, X₂₂⁻¹]]` in the split's basis.
pub fn block_upper_inverse(
    x: &ComplexMatrix,
    split: &BlockSplit,
    tol: f64,
) -> Result<ComplexMatrix, MatrixError> {
    let n = x.ensure_square()?;
    if n != split.dim() {
        return Err(MatrixError::DimensionMismatch {
            left: (n, n),
            right: (split.dim(), split.dim()),
        });
    }
    let (x11, x12, x21, x22) = split.blocks(x);
    let allowed = tol * x.op_norm();
    let lower_left = x21.op_norm();
    if lower_left > allowed {
        return Err(MatrixError::NotUpperTriangularInSplit {
            lower_left,
            allowed,
        });
    }
    let k = split.k_dim;
    let inv11 = inverse(&x11).map_err(|_| MatrixError::SingularBlock { block: "X11" })?;
    let inv22 = inverse(&x22).map_err(|_| MatrixError::SingularBlock { block: "X22" })?;
    let upper_right = inv11.matmul(&x12).matmul(&inv22).scale(-1.0);
    let mut y = ComplexMatrix::zeros(n, n);
    y.set_block(0, 0, &inv11);
    y.set_block(0, k, &upper_right);
    y.set_block(k, k, &inv22);
    Ok(split.from_split_basis(&y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eig_of_diagonal_is_sorted_permutation() {
        let a = ComplexMatrix::from_diag(&[3.0, 1.0, 2.0]);
        let e = herm_eig(&a, 1e-12).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0, 3.0]);
        // eigenvectors are e₂, e₃, e₁ up to phase
        assert!(close(e.eigenvectors[(1, 0)].norm(), 1.0, 1e-15));
        assert!(close(e.eigenvectors[(2, 1)].norm(), 1.0, 1e-15));
        assert!(close(e.eigenvectors[(0, 2)].norm(), 1.0, 1e-15));
    }

    #[test]
    fn eig_of_two_by_two_examples() {
        let swap = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = herm_eig(&swap, 1e-12).unwrap();
        assert!(close(e.eigenvalues[0], -1.0, 1e-14) && close(e.eigenvalues[1], 1.0, 1e-14));
        let a = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let e = herm_eig(&a, 1e-12).unwrap();
        assert!(close(e.eigenvalues[0], 1.0, 1e-14) && close(e.eigenvalues[1], 3.0, 1e-14));
    }

    #[test]
    fn eig_of_complex_hermitian_reconstructs() {
        let i = C64::i();
        let a = ComplexMatrix::from_rows(&[
            &[C64::new(2.0, 0.0), 1.0 - i, C64::new(0.0, 0.5)],
            &[1.0 + i, C64::new(-1.0, 0.0), C64::new(0.3, 0.0)],
            &[C64::new(0.0, -0.5), C64::new(0.3, 0.0), C64::new(0.7, 0.0)],
        ]);
        let e = herm_eig(&a, 1e-12).unwrap();
        let resid = (&e.reconstruct() - &a).frobenius_norm();
        assert!(resid < 1e-13, "residual {resid}");
        let v = &e.eigenvectors;
        let orth = (&v.adjoint_matmul(v) - &ComplexMatrix::identity(3)).frobenius_norm();
        assert!(orth < 1e-13);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(matches!(herm_eig(&a, 1e-12), Err(MatrixError::NotHermitian { .. })));
    }

    #[test]
    fn sqrt_examples() {
        let (s, si) = psd_sqrt_and_invsqrt(&ComplexMatrix::identity(3), 1e-12).unwrap();
        assert!((&s - &ComplexMatrix::identity(3)).max_abs() < 1e-15);
        assert!((&si - &ComplexMatrix::identity(3)).max_abs() < 1e-15);

        let (s, si) = psd_sqrt_and_invsqrt(&ComplexMatrix::from_diag(&[4.0, 0.25]), 1e-12).unwrap();
        assert!((&s - &ComplexMatrix::from_diag(&[2.0, 0.5])).max_abs() < 1e-15);
        assert!((&si - &ComplexMatrix::from_diag(&[0.5, 2.0])).max_abs() < 1e-15);

        let (s, si) = psd_sqrt_and_invsqrt(&ComplexMatrix::from_diag(&[0.9, 0.1]), 1e-12).unwrap();
        assert!((&s - &ComplexMatrix::from_diag(&[0.9f64.sqrt(), 0.1f64.sqrt()])).max_abs() < 1e-15);
        let expect = ComplexMatrix::from_diag(&[1.0 / 0.9f64.sqrt(), 1.0 / 0.1f64.sqrt()]);
        assert!((&si - &expect).max_abs() < 1e-14);
    }

    #[test]
    fn invsqrt_rejects_singular() {
        let a = ComplexMatrix::from_diag(&[1.0, 0.0]);
        assert!(matches!(
            psd_sqrt_and_invsqrt(&a, 1e-12),
            Err(MatrixError::SingularPositiveOperator { .. })
        ));
        // the plain square root is still fine
        let s = psd_sqrt(&a, 1e-12).unwrap();
        assert!((&s - &a).max_abs() < 1e-15);
    }

    #[test]
    fn reduced_min_modulus_examples() {
        let g = reduced_min_modulus(&ComplexMatrix::from_diag(&[0.0, 0.3, 1.0]), 1e-10).unwrap();
        assert!(close(g.value, 0.3, 1e-14) && !g.zero_operator);
        let g = reduced_min_modulus(&ComplexMatrix::identity(4), 1e-10).unwrap();
        assert!(close(g.value, 1.0, 1e-14));
        let g = reduced_min_modulus(&ComplexMatrix::from_diag(&[1e-14, 0.5]), 1e-10).unwrap();
        assert!(close(g.value, 0.5, 1e-14));
        let g = reduced_min_modulus(&ComplexMatrix::zeros(3, 3), 1e-10).unwrap();
        assert!(g.zero_operator && g.value.is_infinite());
    }

    #[test]
    fn spectral_subspace_examples() {
        let a = ComplexMatrix::from_diag(&[0.2, 0.5, 0.9]);
        let s = spectral_subspace(&a, 0.4, 0.8, 1e-12).unwrap();
        assert_eq!(s.k_dim, 1);
        assert!(close(s.basis[(1, 0)].norm(), 1.0, 1e-15));
        assert_eq!(spectral_subspace(&a, 0.0, 1.0, 1e-12).unwrap().k_dim, 3);
        assert_eq!(spectral_subspace(&a, 0.95, 1.0, 1e-12).unwrap().k_dim, 0);
    }

    #[test]
    fn block_inverse_examples() {
        let split = BlockSplit::standard(2, 1);
        let x = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[0.0, 4.0]]);
        let inv = block_upper_inverse(&x, &split, 1e-12).unwrap();
        // direct 2x2 inverse: (1/8)[[4, -1], [0, 2]]
        let expect = ComplexMatrix::from_real_rows(&[&[0.5, -0.125], &[0.0, 0.25]]);
        assert!((&inv - &expect).max_abs() < 1e-15);

        let x = ComplexMatrix::from_real_rows(&[&[1.0, 5.0], &[0.0, 1.0]]);
        let inv = block_upper_inverse(&x, &split, 1e-12).unwrap();
        let expect = ComplexMatrix::from_real_rows(&[&[1.0, -5.0], &[0.0, 1.0]]);
        assert!((&inv - &expect).max_abs() < 1e-15);

        let id = ComplexMatrix::identity(3);
        for k in 0..=3 {
            let inv = block_upper_inverse(&id, &BlockSplit::standard(3, k), 1e-12).unwrap();
            assert!((&inv - &id).max_abs() < 1e-15);
        }
    }

    #[test]
    fn block_inverse_rejects_lower_left_mass() {
        let x = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[0.5, 4.0]]);
        let err = block_upper_inverse(&x, &BlockSplit::standard(2, 1), 1e-12).unwrap_err();
        assert!(matches!(err, MatrixError::NotUpperTriangularInSplit { .. }));
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 4.0]]);
        let err = block_upper_inverse(&x, &BlockSplit::standard(2, 1), 1e-12).unwrap_err();
        assert!(matches!(err, MatrixError::SingularBlock { block: "X11" }));
    }

    #[test]
    fn inverse_and_singular_values() {
        let i = C64::i();
        let t = ComplexMatrix::from_rows(&[&[ONE, i - 1.0], &[ZERO, i]]);
        let inv = inverse(&t).unwrap();
        assert!((&t.matmul(&inv) - &ComplexMatrix::identity(2)).max_abs() < 1e-15);
        // σ₁² + σ₂² = 4 and σ₁σ₂ = 1
        let s = singular_values(&t).unwrap();
        assert!(close(s[0] * s[1], 1.0, 1e-14));
        assert!(close(s[0] * s[0] + s[1] * s[1], 4.0, 1e-13));
        assert!(matches!(
            inverse(&ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]])),
            Err(MatrixError::Singular { .. })
        ));
    }

    #[test]
    fn pow_matches_repeated_product() {
        let t = ComplexMatrix::from_real_rows(&[&[0.5, 1.0], &[0.0, 1.0]]);
        let mut p = ComplexMatrix::identity(2);
        for n in 0..12u64 {
            assert!((&t.pow(n) - &p).max_abs() < 1e-13, "n = {n}");
            p = p.matmul(&t);
        }
    }

    #[test]
    fn json_schema_round_trip() {
        let m = ComplexMatrix::from_rows(&[&[ONE, C64::new(0.0, 2.0)], &[ZERO, C64::new(-1.0, 0.5)]]);
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"dim":2,"re":[1.0,0.0,0.0,-1.0],"im":[0.0,2.0,0.0,0.5]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let rect: ComplexMatrix =
            serde_json::from_str(r#"{"rows":1,"cols":2,"re":[1,2]}"#).unwrap();
        assert_eq!((rect.rows(), rect.cols()), (1, 2));
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"dim":2,"re":[1,2,3]}"#).is_err());
    }
}
