//! Small dense linear algebra: row-major matrices, Householder QR least
//! squares and Cholesky factorization.

use std::ops::{Index, IndexMut};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("column {column} of the design matrix is linearly dependent on earlier columns")]
    RankDeficient { column: usize },
    #[error("matrix is not positive definite (pivot {index})")]
    NotPositiveDefinite { index: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
}

/// Relative pivot threshold below which a QR diagonal entry counts as zero.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, LinalgError> {
        if data.len() != rows * cols {
            return Err(LinalgError::Shape(format!("{} values for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [T] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t[(c, r)] = self[(r, c)];
            }
        }
        t
    }

    /// `self * x` for a column vector `x`.
    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).abs()))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|r| (0..r).all(|c| self[(r, c)] == self[(c, r)]))
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &T {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut T {
        &mut self.data[r * self.cols + c]
    }
}

#[inline]
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + *x * *y)
}

/// Solves `min ||A X - B||_F` column by column via Householder QR of `A`.
///
/// `A` must have at least as many rows as columns. A diagonal entry of R
/// smaller than [`RANK_TOL`] times the largest one is reported as
/// [`LinalgError::RankDeficient`] with the offending column.
pub fn lstsq_qr<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let (m, n) = (a.rows, a.cols);
    if b.rows != m {
        return Err(LinalgError::Shape(format!("A has {m} rows, B has {}", b.rows)));
    }
    if m < n {
        return Err(LinalgError::Shape(format!("underdetermined system: {m} rows < {n} columns")));
    }
    let k = b.cols;
    let mut r = a.clone();
    let mut qtb = b.clone();
    let mut diag = vec![T::zero(); n];
    let mut v = vec![T::zero(); m];

    for j in 0..n {
        let norm = (j..m).fold(T::zero(), |s, i| s + r[(i, j)] * r[(i, j)]).sqrt();
        if norm == T::zero() {
            diag[j] = T::zero();
            continue;
        }
        let x0 = r[(j, j)];
        let alpha = if x0 >= T::zero() { -norm } else { norm };
        for i in j..m {
            v[i] = r[(i, j)];
        }
        v[j] = v[j] - alpha;
        let vnorm2 = (j..m).fold(T::zero(), |s, i| s + v[i] * v[i]);
        if vnorm2 == T::zero() {
            diag[j] = alpha;
            continue;
        }
        let two = T::lit(2.0);
        for c in j..n {
            let s = (j..m).fold(T::zero(), |s, i| s + v[i] * r[(i, c)]) * two / vnorm2;
            for i in j..m {
                r[(i, c)] = r[(i, c)] - s * v[i];
            }
        }
        for c in 0..k {
            let s = (j..m).fold(T::zero(), |s, i| s + v[i] * qtb[(i, c)]) * two / vnorm2;
            for i in j..m {
                qtb[(i, c)] = qtb[(i, c)] - s * v[i];
            }
        }
        diag[j] = r[(j, j)];
    }

    let largest = diag.iter().fold(T::zero(), |mx, d| mx.max(d.abs()));
    let tol = T::lit(RANK_TOL) * largest;
    if let Some(column) = diag.iter().position(|d| d.abs() <= tol) {
        return Err(LinalgError::RankDeficient { column });
    }

    let mut x = Matrix::zeros(n, k);
    for c in 0..k {
        for row in (0..n).rev() {
            let mut s = qtb[(row, c)];
            for j in row + 1..n {
                s = s - r[(row, j)] * x[(j, c)];
            }
            x[(row, c)] = s / r[(row, row)];
        }
    }
    Ok(x)
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors `a`; a pivot (conditional variance) at or below `min_pivot`
    /// is rejected.
    pub fn new(a: &Matrix<T>, min_pivot: T) -> Result<Self, LinalgError> {
        let n = a.rows;
        if a.cols != n {
            return Err(LinalgError::Shape(format!("{}x{} is not square", a.rows, a.cols)));
        }
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d = d - l[(j, k)] * l[(j, k)];
            }
            if d.is_nan() || d <= min_pivot {
                return Err(LinalgError::NotPositiveDefinite { index: j });
            }
            let ljj = d.sqrt();
            l[(j, j)] = ljj;
            for i in j + 1..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / ljj;
            }
        }
        Ok(Cholesky { l })
    }

    pub fn log_det(&self) -> T {
        let two = T::lit(2.0);
        (0..self.l.rows).fold(T::zero(), |s, i| s + two * self.l[(i, i)].ln())
    }

    /// `x^T A^{-1} x`, via a single forward substitution.
    pub fn quad_form_inv(&self, x: &[T]) -> T {
        let n = self.l.rows;
        let mut y = vec![T::zero(); n];
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s = s - self.l[(i, k)] * y[k];
            }
            y[i] = s / self.l[(i, i)];
        }
        dot(&y, &y)
    }
}
