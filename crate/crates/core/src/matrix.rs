//! Small dense matrices over exact rationals.

use std::fmt;
use std::ops::Mul;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    n: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![Rational::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = Rational::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { left: n, right: row.len() });
            }
            data.extend(row);
        }
        Ok(Matrix { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<Rational>> {
        self.data.chunks(self.n.max(1)).take(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].clone())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Matrix { n: self.n, data: self.data.iter().map(|x| x * c).collect() }
    }

    /// Gaussian elimination with exact pivots.
    pub fn det(&self) -> Rational {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Rational::one();
        for col in 0..n {
            let Some(p) = (col..n).find(|&r| !a[r * n + col].is_zero()) else {
                return Rational::zero();
            };
            if p != col {
                for k in 0..n {
                    a.swap(p * n + k, col * n + k);
                }
                det = -det;
            }
            let pivot = a[col * n + col].clone();
            det *= &pivot;
            for r in col + 1..n {
                if a[r * n + col].is_zero() {
                    continue;
                }
                let factor = &a[r * n + col] / &pivot;
                for k in col..n {
                    let v = &factor * &a[col * n + k];
                    a[r * n + k] -= v;
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let p = (col..n).find(|&r| !a[(r, col)].is_zero()).ok_or(Error::SingularLinearPart)?;
            if p != col {
                for k in 0..n {
                    a.data.swap(p * n + k, col * n + k);
                    inv.data.swap(p * n + k, col * n + k);
                }
            }
            let pivot = a[(col, col)].clone();
            for k in 0..n {
                a[(col, k)] /= &pivot;
                inv[(col, k)] /= &pivot;
            }
            for r in 0..n {
                if r == col || a[(r, col)].is_zero() {
                    continue;
                }
                let factor = a[(r, col)].clone();
                for k in 0..n {
                    let v = &factor * &a[(col, k)];
                    a[(r, k)] -= v;
                    let w = &factor * &inv[(col, k)];
                    inv[(r, k)] -= w;
                }
            }
        }
        Ok(inv)
    }

    pub fn leading_minor(&self, k: usize) -> Rational {
        Self::from_fn(k, |i, j| self[(i, j)].clone()).det()
    }

    /// Index (1-based) of the first non-positive leading principal minor, if any.
    pub fn first_nonpositive_minor(&self) -> Option<usize> {
        (1..=self.n).find(|&k| !self.leading_minor(k).is_positive())
    }

    pub fn is_positive_definite(&self) -> bool {
        self.is_symmetric() && self.first_nonpositive_minor().is_none()
    }

    /// `self = L · diag(D) · Lᵀ` with unit lower-triangular `L`, for symmetric
    /// positive-definite input.
    pub fn ldl(&self) -> Result<(Matrix, Vec<Rational>)> {
        let n = self.n;
        if let Some(minor) = self.first_nonpositive_minor() {
            return Err(Error::NotPositiveDefinite { minor });
        }
        let mut l = Self::identity(n);
        let mut d = vec![Rational::zero(); n];
        for j in 0..n {
            let mut dj = self[(j, j)].clone();
            for k in 0..j {
                dj -= &l[(j, k)] * &l[(j, k)] * &d[k];
            }
            for i in j + 1..n {
                let mut v = self[(i, j)].clone();
                for k in 0..j {
                    v -= &l[(i, k)] * &l[(j, k)] * &d[k];
                }
                l[(i, j)] = v / &dj;
            }
            d[j] = dj;
        }
        Ok((l, d))
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        self.rows().iter().map(|r| r.iter().map(rational::to_f64).collect()).collect()
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Rational;
    fn index(&self, (i, j): (usize, usize)) -> &Rational {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rational {
        &mut self.data[i * self.n + j]
    }
}

impl Mul for &Matrix {
    type Output = Matrix;
    fn mul(self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.n, rhs.n, "matrix size mismatch");
        Matrix::from_fn(self.n, |i, j| {
            (0..self.n).fold(Rational::zero(), |acc, k| acc + &self[(i, k)] * &rhs[(k, j)])
        })
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> =
            self.rows().iter().map(|r| r.iter().map(rational::format).collect()).collect();
        write!(f, "{rows:?}")
    }
}
