//! Dense real matrices and a cyclic Jacobi eigensolver for symmetric input.
//!
//! The solver applies plane rotations in row-cyclic order until every
//! off-diagonal entry is below `tol · ‖A‖_F`. Matrices in this crate are at most
//! a few hundred rows, where Jacobi is fast enough and yields eigenvectors that
//! are orthogonal to working precision.

use std::fmt;
use std::ops::{Index, IndexMut};

use thiserror::Error;

/// Off-diagonal stopping threshold relative to the Frobenius norm.
pub const DEFAULT_OFFDIAG_TOL: f64 = 1e-12;
/// Sweep cap; quadratic convergence normally finishes in well under 20.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal {offdiag:e} > {target:e})")]
    ConvergenceFailure { sweeps: usize, offdiag: f64, target: f64 },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {gap:e}")]
    NotSymmetric { i: usize, j: usize, gap: f64 },
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    /// Build a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<f64>]) -> Self {
        let c = columns.len();
        let r = columns.first().map_or(0, Vec::len);
        let mut m = Self::zeros(r, c);
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), r, "ragged columns");
            for (i, &v) in col.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
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

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matmul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(src) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "dimension mismatch in matvec");
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == 0.0 {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Copy `block` into `self` with its top-left corner at `(r0, c0)`.
    pub fn set_block(&mut self, r0: usize, c0: usize, block: &Self) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self[(r0 + i, c0 + j)] = block[(i, j)];
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Largest `|a_ij - a_ji|`, or `None` for a non-square matrix.
    pub fn asymmetry(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i + 1..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        Some(worst)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Eigenvalues in ascending order with matching unit eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
    pub sweeps: usize,
}

impl SymmetricEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// Cyclic Jacobi with the default tolerance.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen, LinalgError> {
    jacobi_eigen(a, DEFAULT_OFFDIAG_TOL)
}

/// Diagonalize a real symmetric matrix by cyclic Jacobi rotations.
///
/// Terminates when `max_{i≠j} |a_ij| ≤ tol · ‖A‖_F`. Input symmetry is checked
/// to `1e-12 · ‖A‖_F` and the upper triangle is used.
pub fn jacobi_eigen(a: &Matrix, tol: f64) -> Result<SymmetricEigen, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    let scale = a.frobenius_norm();
    for i in 0..n {
        for j in i + 1..n {
            let gap = (a[(i, j)] - a[(j, i)]).abs();
            if gap > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(LinalgError::NotSymmetric { i, j, gap });
            }
        }
    }

    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    let target = tol * scale;
    let mut sweeps = 0;

    loop {
        let off = max_offdiag(&m);
        if off <= target || n < 2 {
            break;
        }
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::ConvergenceFailure { sweeps, offdiag: off, target });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                // Entries already negligible next to both diagonals are zeroed outright.
                if apq.abs() <= f64::EPSILON * 1e-2 * (m[(p, p)].abs() + m[(q, q)].abs())
                    && apq.abs() <= target
                {
                    m[(p, q)] = 0.0;
                    m[(q, p)] = 0.0;
                    continue;
                }
                if apq == 0.0 {
                    continue;
                }
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].total_cmp(&m[(j, j)]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, dst)] = v[(i, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors, sweeps })
}

fn max_offdiag(m: &Matrix) -> f64 {
    let n = m.rows;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max(m[(i, j)].abs());
        }
    }
    worst
}

/// One Jacobi rotation annihilating `m[p][q]`, accumulated into `v`.
fn rotate(m: &mut Matrix, v: &mut Matrix, p: usize, q: usize) {
    let n = m.rows;
    let apq = m[(p, q)];
    let app = m[(p, p)];
    let aqq = m[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let tau = s / (1.0 + c);

    m[(p, p)] = app - t * apq;
    m[(q, q)] = aqq + t * apq;
    m[(p, q)] = 0.0;
    m[(q, p)] = 0.0;
    for r in 0..n {
        if r == p || r == q {
            continue;
        }
        let arp = m[(r, p)];
        let arq = m[(r, q)];
        let new_rp = arp - s * (arq + tau * arp);
        let new_rq = arq + s * (arp - tau * arq);
        m[(r, p)] = new_rp;
        m[(p, r)] = new_rp;
        m[(r, q)] = new_rq;
        m[(q, r)] = new_rq;
    }
    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp - s * (vrq + tau * vrp);
        v[(r, q)] = vrq + s * (vrp - tau * vrq);
    }
}

/// Orthonormal basis for the span of `vectors`, of the requested dimension.
///
/// Uses the leading eigenvectors of the Gram operator `Σ v vᵀ`, which is
/// insensitive to the ordering and conditioning of the input set.
pub fn dominant_subspace(vectors: &[Vec<f64>], dim: usize) -> Result<Vec<Vec<f64>>, LinalgError> {
    let Some(first) = vectors.first() else {
        return Ok(Vec::new());
    };
    let n = first.len();
    let mut gram = Matrix::zeros(n, n);
    for v in vectors {
        for i in 0..n {
            for j in 0..n {
                gram[(i, j)] += v[i] * v[j];
            }
        }
    }
    let eig = symmetric_eigen(&gram)?;
    Ok((0..dim.min(n)).map(|k| eig.vector(n - 1 - k)).collect())
}

/// Sine of the largest principal angle between two subspaces given by
/// orthonormal bases of equal dimension.
pub fn max_principal_angle_sine(u: &[Vec<f64>], v: &[Vec<f64>]) -> Result<f64, LinalgError> {
    if u.is_empty() || v.is_empty() {
        return Ok(0.0);
    }
    // Residual of projecting each v onto span(u); its largest singular value is sin θ_max.
    let residual: Vec<Vec<f64>> = v
        .iter()
        .map(|vk| {
            let mut r = vk.clone();
            for uj in u {
                let c = dot(uj, vk);
                for (ri, ui) in r.iter_mut().zip(uj) {
                    *ri -= c * ui;
                }
            }
            r
        })
        .collect();
    let m = residual.len();
    let mut gram = Matrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = dot(&residual[i], &residual[j]);
        }
    }
    let eig = symmetric_eigen(&gram)?;
    Ok(eig.values.last().copied().unwrap_or(0.0).max(0.0).sqrt().min(1.0))
}
