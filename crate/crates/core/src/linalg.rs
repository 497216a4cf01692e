//! Dense matrix kernel: general and symmetric matrices, cyclic Jacobi
//! eigendecomposition, PSD-cone projection and the block-diagonal trace
//! inner product.
//!
//! Symmetric matrices are also exposed in "svec" coordinates (upper
//! triangle, row by row, off-diagonal entries scaled by `sqrt(2)`), under
//! which the trace inner product becomes the Euclidean dot product.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MAX_JACOBI_SWEEPS: usize = 100;

/// Dense row-major real matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds a matrix from a list of rows. Rows must be non-empty and of equal length.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        if nrows == 0 || ncols == 0 {
            return Err(Error::contract("matrix must have at least one row and column"));
        }
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::contract("ragged matrix rows"));
        }
        Ok(Matrix { rows: nrows, cols: ncols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn scalar(value: f64) -> Self {
        Matrix { rows: 1, cols: 1, data: vec![value] }
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

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.cols.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Matrix product `self * rhs`.
    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let rrow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, x.len(), "matvec dimension mismatch");
        self.data.chunks(self.cols).map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    pub fn add(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        Matrix { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.cols.max(1))).finish()
    }
}

impl TryFrom<Vec<Vec<f64>>> for Matrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Matrix::from_rows(rows)
    }
}

impl From<Matrix> for Vec<Vec<f64>> {
    fn from(m: Matrix) -> Self {
        m.to_rows()
    }
}

/// Real symmetric matrix with finite entries.
///
/// Construction symmetrizes by `(M + Mᵀ)/2`, so `entries[r][c] == entries[c][r]`
/// holds bit-for-bit afterwards.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::contract(format!("symmetric matrix must be square, got {}x{}", m.rows, m.cols)));
        }
        if !m.is_finite() {
            return Err(Error::contract("matrix has non-finite entries"));
        }
        Ok(Self::symmetrized(m))
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::new(Matrix::from_rows(rows)?)
    }

    fn symmetrized(mut m: Matrix) -> Self {
        let n = m.rows;
        for r in 0..n {
            for c in (r + 1)..n {
                let v = 0.5 * (m[(r, c)] + m[(c, r)]);
                m[(r, c)] = v;
                m[(c, r)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(Matrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(Matrix::identity(n))
    }

    pub fn scalar(value: f64) -> Self {
        SymMatrix(Matrix::scalar(value))
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        SymMatrix(Matrix::from_fn(n, n, |r, c| if r == c { values[r] } else { 0.0 }))
    }

    /// `left * m * leftᵀ`, the congruence transform by a (possibly rectangular) matrix.
    pub fn congruence(&self, left: &Matrix) -> SymMatrix {
        Self::symmetrized(left.matmul(&self.0).matmul(&left.transpose()))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0.to_rows()
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn add(&self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.add(&rhs.0))
    }

    pub fn sub(&self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(self.0.sub(&rhs.0))
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(self.0.scale(s))
    }

    /// Trace inner product `Tr(self * rhs)`.
    pub fn dot(&self, rhs: &SymMatrix) -> f64 {
        assert_eq!(self.dim(), rhs.dim(), "dot dimension mismatch");
        self.0.data.iter().zip(&rhs.0.data).map(|(a, b)| a * b).sum()
    }

    pub fn svec_len(n: usize) -> usize {
        n * (n + 1) / 2
    }

    /// Appends the svec coordinates of `self` to `out`.
    pub fn write_svec(&self, out: &mut Vec<f64>) {
        let n = self.dim();
        for r in 0..n {
            out.push(self.0[(r, r)]);
            for c in (r + 1)..n {
                out.push(self.0[(r, c)] * std::f64::consts::SQRT_2);
            }
        }
    }

    pub fn from_svec(n: usize, v: &[f64]) -> SymMatrix {
        assert_eq!(v.len(), Self::svec_len(n), "svec length mismatch");
        let mut m = Matrix::zeros(n, n);
        let mut k = 0;
        for r in 0..n {
            m[(r, r)] = v[k];
            k += 1;
            for c in (r + 1)..n {
                let x = v[k] * std::f64::consts::FRAC_1_SQRT_2;
                m[(r, c)] = x;
                m[(c, r)] = x;
                k += 1;
            }
        }
        SymMatrix(m)
    }
}

impl Index<(usize, usize)> for SymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        SymMatrix::from_rows(rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

/// Eigendecomposition `M = V diag(values) Vᵀ` with ascending eigenvalues;
/// column `k` of `vectors` belongs to `values[k]`.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Reassembles `V diag(f(λ)) Vᵀ`.
    pub fn reassemble(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let n = self.values.len();
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        let mut out = Matrix::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let s: f64 = (0..n).map(|k| v[(r, k)] * mapped[k] * v[(c, k)]).sum();
                out[(r, c)] = s;
                out[(c, r)] = s;
            }
        }
        SymMatrix(out)
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn eig_sym(m: &SymMatrix) -> Result<SymEigen> {
    let n = m.dim();
    let mut a = m.0.clone();
    let mut v = Matrix::identity(n);

    let mut converged = n <= 1;
    for _ in 0..MAX_JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Off-diagonal entry below the rounding level of both pivots.
                let g = 100.0 * apq.abs();
                if app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.is_infinite() {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s, t);
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::numerical(
            "eig_sym",
            format!("Jacobi iteration did not converge in {MAX_JACOBI_SWEEPS} sweeps (dim {n})"),
        ));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(SymEigen { values, vectors })
}

#[allow(clippy::too_many_arguments)]
fn rotate(a: &mut Matrix, v: &mut Matrix, p: usize, q: usize, c: f64, s: f64, t: f64) {
    let n = a.rows;
    let apq = a[(p, q)];
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64> {
    Ok(eig_sym(m)?.min())
}

/// Frobenius-nearest point of `{X : X ⪰ floor·I}`.
pub fn project_psd(m: &SymMatrix, floor: f64) -> Result<SymMatrix> {
    let eig = eig_sym(m)?;
    if eig.min() >= floor {
        return Ok(m.clone());
    }
    Ok(eig.reassemble(|l| l.max(floor)))
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix; eigenvalues below
/// `rel_cutoff * |λ|_max` are treated as zero.
pub fn pinv_sym(m: &SymMatrix, rel_cutoff: f64) -> Result<SymMatrix> {
    let eig = eig_sym(m)?;
    let scale = eig.values.iter().fold(0.0_f64, |acc, l| acc.max(l.abs()));
    let cut = rel_cutoff * scale;
    Ok(eig.reassemble(|l| if l.abs() > cut { 1.0 / l } else { 0.0 }))
}

/// Ordered list of symmetric blocks, possibly of different sizes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDiagSym {
    blocks: Vec<SymMatrix>,
}

impl BlockDiagSym {
    pub fn new(blocks: Vec<SymMatrix>) -> Self {
        BlockDiagSym { blocks }
    }

    pub fn zeros(structure: &[usize]) -> Self {
        BlockDiagSym { blocks: structure.iter().map(|&n| SymMatrix::zeros(n)).collect() }
    }

    pub fn structure(&self) -> Vec<usize> {
        self.blocks.iter().map(SymMatrix::dim).collect()
    }

    pub fn blocks(&self) -> &[SymMatrix] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<SymMatrix> {
        self.blocks
    }

    pub fn block(&self, k: usize) -> &SymMatrix {
        &self.blocks[k]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.dot(b)).sum::<f64>().sqrt()
    }

    pub fn check_structure(&self, expected: &[usize], what: &str) -> Result<()> {
        if self.structure() != expected {
            return Err(Error::contract(format!(
                "{what}: block structure {:?} does not match expected {:?}",
                self.structure(),
                expected
            )));
        }
        Ok(())
    }

    pub fn add(&self, rhs: &BlockDiagSym) -> Result<BlockDiagSym> {
        rhs.check_structure(&self.structure(), "add")?;
        Ok(BlockDiagSym { blocks: self.blocks.iter().zip(&rhs.blocks).map(|(a, b)| a.add(b)).collect() })
    }

    pub fn scale(&self, s: f64) -> BlockDiagSym {
        BlockDiagSym { blocks: self.blocks.iter().map(|b| b.scale(s)).collect() }
    }

    pub fn svec_len(structure: &[usize]) -> usize {
        structure.iter().map(|&n| SymMatrix::svec_len(n)).sum()
    }

    pub fn to_svec(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(Self::svec_len(&self.structure()));
        for b in &self.blocks {
            b.write_svec(&mut out);
        }
        out
    }

    pub fn from_svec(structure: &[usize], v: &[f64]) -> BlockDiagSym {
        let mut offset = 0;
        let blocks = structure
            .iter()
            .map(|&n| {
                let len = SymMatrix::svec_len(n);
                let b = SymMatrix::from_svec(n, &v[offset..offset + len]);
                offset += len;
                b
            })
            .collect();
        BlockDiagSym { blocks }
    }
}

/// Block-diagonal trace inner product `Σ_k Tr(X_k Y_k)`.
pub fn inner_product(x: &BlockDiagSym, y: &BlockDiagSym) -> Result<f64> {
    y.check_structure(&x.structure(), "inner_product")?;
    Ok(x.blocks.iter().zip(&y.blocks).map(|(a, b)| a.dot(b)).sum())
}
