//! Dense complex linear algebra for small Hermitian problems.
//!
//! Everything in this module targets matrices of dimension at most
//! [`MAX_DIM`]; the eigensolver is a cyclic complex Jacobi iteration, which is
//! more than accurate enough at this scale and keeps the crate free of
//! external linear-algebra dependencies.

use num_complex::Complex64 as C64;
use thiserror::Error;

/// Largest matrix dimension accepted by the eigensolver.
pub const MAX_DIM: usize = 16;

/// Default relative rank tolerance: an eigenvalue `p` counts as zero when
/// `p <= RANK_TOL * max|eigenvalue|`.
pub const RANK_TOL: f64 = 1e-10;

/// Maximum elementwise deviation `|A - A†|` tolerated by [`herm_eig`].
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix is not Hermitian: max |A - A^H| = {max_deviation:.3e}")]
    NonHermitianInput { max_deviation: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("dimension {dim} exceeds the supported maximum {MAX_DIM}")]
    DimensionTooLarge { dim: usize },
    #[error("matrix is singular: eigenvalue {eigenvalue:.6e} at or below tolerance {tolerance:.3e}")]
    SingularMatrix { eigenvalue: f64, tolerance: f64 },
    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
}

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn<F>(rows: usize, cols: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> C64,
    {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Rank-1 projector `|v><v|`.
    pub fn outer(v: &[C64]) -> Self {
        Self::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj())
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

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip(rhs, |a, b| a - b)
    }

    fn zip<F>(&self, rhs: &Self, f: F) -> Result<Self, LinalgError>
    where
        F: Fn(C64, C64) -> C64,
    {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(rhs.data.iter())
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&a| a * factor).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Max elementwise `|A_ij - conj(A_ji)|`; zero for exactly Hermitian input.
    pub fn hermiticity_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "apply: vector length mismatch");
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `A B - B A`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix: `A = V diag(values) V†`.
///
/// Eigenvalues are sorted ascending; ties keep the solver's column order.
/// Columns of `vectors` are the corresponding (orthonormal) eigenvectors.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(values) V†`, for testing reconstruction accuracy.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..n)
                .map(|k| self.vectors[(i, k)] * self.values[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermitianEigen, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    if n > MAX_DIM {
        return Err(LinalgError::DimensionTooLarge { dim: n });
    }
    let dev = a.hermiticity_deviation();
    if dev > HERMITICITY_TOL {
        return Err(LinalgError::NonHermitianInput { max_deviation: dev });
    }

    // Work on the symmetrized copy so the iteration sees exact Hermitian data.
    let mut w = ComplexMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = ComplexMatrix::identity(n);

    let scale = w.frobenius_norm().max(1.0);
    let eps = 1e-15 * scale;
    const MAX_SWEEPS: usize = 100;

    let mut converged = n < 2;
    for _sweep in 0..MAX_SWEEPS {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(w[(p, q)].norm());
            }
        }
        if off <= eps {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let g = w[(p, q)];
                let gn = g.norm();
                if gn <= eps {
                    continue;
                }
                // Phase factor turning the 2x2 block real, then a real rotation.
                let phase = g / gn;
                let app = w[(p, p)].re;
                let aqq = w[(q, q)].re;
                let tau = (aqq - app) / (2.0 * gn);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Unitary U: U_pp = phase*c, U_pq = phase*s, U_qp = -s, U_qq = c.
                let upp = phase * c;
                let upq = phase * s;
                // Column update M <- M U.
                for k in 0..n {
                    let mp = w[(k, p)];
                    let mq = w[(k, q)];
                    w[(k, p)] = mp * upp - mq * s;
                    w[(k, q)] = mp * upq + mq * c;
                }
                // Row update M <- U† M.
                for k in 0..n {
                    let mp = w[(p, k)];
                    let mq = w[(q, k)];
                    w[(p, k)] = mp * upp.conj() - mq * s;
                    w[(q, k)] = mp * upq.conj() + mq * c;
                }
                // Accumulate eigenvectors.
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = vp * upp - vq * s;
                    v[(k, q)] = vp * upq + vq * c;
                }
                w[(p, q)] = C64::new(0.0, 0.0);
                w[(q, p)] = C64::new(0.0, 0.0);
            }
        }
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| w[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let values: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Dense row-major real square matrix (used for QFI and Fisher matrices).
#[derive(Clone, Debug, PartialEq)]
pub struct RealMatrix {
    n: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn<F>(n: usize, mut f: F) -> Self
    where
        F: FnMut(usize, usize) -> f64,
    {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn symmetry_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                dev = dev.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        dev
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_off_diagonal(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    dev = dev.max(self[(i, j)].abs());
                }
            }
        }
        dev
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self[(i, i)]).sum()
    }

    pub fn mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.n != rhs.n {
            return Err(LinalgError::DimensionMismatch {
                left_rows: self.n,
                left_cols: self.n,
                right_rows: rhs.n,
                right_cols: rhs.n,
            });
        }
        Ok(Self::from_fn(self.n, |i, j| {
            (0..self.n).map(|k| self[(i, k)] * rhs[(k, j)]).sum()
        }))
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, self.n, |i, j| C64::new(self[(i, j)], 0.0))
    }
}

impl std::ops::Index<(usize, usize)> for RealMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum InverseMode {
    /// Full-rank inverse; fails on eigenvalues at or below the rank tolerance.
    Exact,
    /// Moore-Penrose pseudo-inverse on the numerical support.
    Pseudo,
}

/// Inverse or pseudo-inverse of a real symmetric matrix via eigendecomposition.
///
/// The rank test is relative: an eigenvalue counts as zero when it does not
/// exceed `rank_tol * max|eigenvalue|`.
pub fn mat_inverse(
    a: &RealMatrix,
    mode: InverseMode,
    rank_tol: f64,
) -> Result<RealMatrix, LinalgError> {
    let dev = a.symmetry_deviation();
    if dev > 1e-10 {
        return Err(LinalgError::NonHermitianInput { max_deviation: dev });
    }
    let eig = herm_eig(&a.to_complex())?;
    let max_abs = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let threshold = rank_tol * max_abs;

    let inv_values: Vec<f64> = match mode {
        InverseMode::Exact => {
            if let Some(&bad) = eig.values.iter().find(|&&v| v <= threshold) {
                return Err(LinalgError::SingularMatrix { eigenvalue: bad, tolerance: threshold });
            }
            eig.values.iter().map(|&v| 1.0 / v).collect()
        }
        InverseMode::Pseudo => eig
            .values
            .iter()
            .map(|&v| if v.abs() > threshold { 1.0 / v } else { 0.0 })
            .collect(),
    };

    let n = a.dim();
    let v = &eig.vectors;
    Ok(RealMatrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| (v[(i, k)] * inv_values[k] * v[(j, k)].conj()).re)
            .sum()
    }))
}

/// `Tr(rho [l1, l2])`; purely imaginary for Hermitian inputs.
pub fn commutator_trace(
    rho: &ComplexMatrix,
    l1: &ComplexMatrix,
    l2: &ComplexMatrix,
) -> Result<C64, LinalgError> {
    let comm = l1.commutator(l2)?;
    Ok(rho.mul(&comm)?.trace())
}
