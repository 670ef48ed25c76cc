//! Small dense complex linear algebra used by the pilot model and the linear estimators.
//!
//! Matrices here are at most a few tens of rows, so everything is a plain row-major
//! `Vec` with straightforward loops.

use std::ops::{Index, IndexMut};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{dim_err, Error, Result};
use crate::scalar::{Scalar, C};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Scalar> CMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_err("CMatrix::from_vec", rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[C<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self · v`
    pub fn matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    /// `selfᴴ · v`
    pub fn adjoint_matvec(&self, v: &[C<T>]) -> Vec<C<T>> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![Complex::zero(); self.cols];
        for (r, vr) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * vr;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    out[(r, c)] += a * other[(k, c)];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self + s·I` for square matrices.
    pub fn add_diag(&self, s: T) -> Self {
        let mut m = self.clone();
        for i in 0..self.rows.min(self.cols) {
            m[(i, i)] += Complex::new(s, T::zero());
        }
        m
    }

    pub fn trace(&self) -> C<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).fold(Complex::zero(), |a, b| a + b)
    }

    /// Squared Frobenius norm, equal to `tr(self·selfᴴ)`.
    pub fn frobenius_sqr(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Solves `self · X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Self) -> Result<Self> {
        if self.rows != self.cols {
            return Err(dim_err("solve (square)", self.rows, self.cols));
        }
        if rhs.rows != self.rows {
            return Err(dim_err("solve (rhs rows)", self.rows, rhs.rows));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        let scale = self
            .data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), T::max);
        let tol = scale * T::epsilon() * T::from_usize_lossy(n.max(1)) * T::lit(16.0);
        for k in 0..n {
            let (piv, pmag) = (k..n)
                .map(|r| (r, a[(r, k)].norm()))
                .fold((k, T::neg_infinity()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if !(pmag > tol) {
                return Err(Error::Singular("Gaussian elimination"));
            }
            if piv != k {
                a.swap_rows(piv, k);
                b.swap_rows(piv, k);
            }
            let inv = a[(k, k)].inv();
            for r in (k + 1)..n {
                let f = a[(r, k)] * inv;
                if f.is_zero() {
                    continue;
                }
                for c in k..n {
                    let v = a[(k, c)];
                    a[(r, c)] -= f * v;
                }
                for c in 0..b.cols {
                    let v = b[(k, c)];
                    b[(r, c)] -= f * v;
                }
            }
        }
        for k in (0..n).rev() {
            let inv = a[(k, k)].inv();
            for c in 0..b.cols {
                let mut acc = b[(k, c)];
                for j in (k + 1)..n {
                    acc -= a[(k, j)] * b[(j, c)];
                }
                b[(k, c)] = acc * inv;
            }
        }
        Ok(b)
    }

    pub fn inverse(&self) -> Result<Self> {
        self.solve(&Self::identity(self.rows))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &C<T> {
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C<T> {
        &mut self.data[r * self.cols + c]
    }
}
