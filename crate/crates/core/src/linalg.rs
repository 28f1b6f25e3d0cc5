//! Small dense linear algebra over a [`Scalar`] backend.
//!
//! Elimination pivots on the largest magnitude entry; on the exact backend
//! any nonzero pivot is exact, on floats entries below `tol` count as zero.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{GeometryError, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Row-major `rows × cols` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![S::zero(); rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    /// View a rank-2 tensor (any valence) as a matrix over its two slots.
    pub fn from_tensor(t: &Tensor<S>) -> Self {
        assert_eq!(t.rank(), 2, "matrix view needs a rank-2 tensor");
        let n = t.dim();
        Self::from_fn(n, n, |r, c| t[[r, c]].clone())
    }

    pub fn to_tensor(&self, upper: usize, lower: usize) -> Tensor<S> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(upper + lower, 2);
        Tensor::from_fn(self.rows, upper, lower, |i| self.get(i[0], i[1]).clone())
    }

    pub fn get(&self, r: usize, c: usize) -> &S {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: S) {
        self.data[r * self.cols + c] = v;
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        Self::from_fn(self.rows, other.cols, |r, c| {
            (0..self.cols).fold(S::zero(), |acc, k| acc + self.get(r, k).clone() * other.get(k, c).clone())
        })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    /// Reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self, tol: f64) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let best = (row..self.rows)
                .map(|r| (r, self.get(r, col).abs().to_f64()))
                .filter(|(r, _)| !self.get(*r, col).negligible(tol))
                .fold(None, |acc: Option<(usize, f64)>, (r, m)| match acc {
                    Some((_, bm)) if bm >= m => acc,
                    _ => Some((r, m)),
                });
            let Some((p, _)) = best else {
                for r in row..self.rows {
                    self.set(r, col, S::zero());
                }
                continue;
            };
            self.swap_rows(row, p);
            let pivot = self.get(row, col).clone();
            for c in 0..self.cols {
                let v = self.get(row, c).clone() / pivot.clone();
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col).clone();
                if factor.is_zero() {
                    continue;
                }
                for c in 0..self.cols {
                    let v = self.get(r, c).clone() - factor.clone() * self.get(row, c).clone();
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    pub fn rank(&self, tol: f64) -> usize {
        self.clone().rref(tol).len()
    }

    /// Basis of the kernel.
    pub fn nullspace(&self, tol: f64) -> Vec<Vec<S>> {
        let mut m = self.clone();
        let pivots = m.rref(tol);
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![S::zero(); self.cols];
                v[f] = S::one();
                for (r, &p) in pivots.iter().enumerate() {
                    v[p] = -m.get(r, f).clone();
                }
                v
            })
            .collect()
    }

    /// One solution of `self · x = rhs`, or `None` if inconsistent.
    pub fn solve(&self, rhs: &[S], tol: f64) -> Option<Vec<S>> {
        assert_eq!(rhs.len(), self.rows);
        let mut aug = Self::from_fn(self.rows, self.cols + 1, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                rhs[r].clone()
            }
        });
        let pivots = aug.rref(tol);
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![S::zero(); self.cols];
        for (r, &p) in pivots.iter().enumerate() {
            x[p] = aug.get(r, self.cols).clone();
        }
        Some(x)
    }

    pub fn determinant(&self) -> S {
        assert_eq!(self.rows, self.cols);
        let mut m = self.clone();
        let n = self.rows;
        let mut det = S::one();
        for col in 0..n {
            let p = (col..n)
                .filter(|&r| !m.get(r, col).is_zero())
                .max_by(|&a, &b| {
                    m.get(a, col)
                        .abs()
                        .to_f64()
                        .partial_cmp(&m.get(b, col).abs().to_f64())
                        .unwrap_or(core::cmp::Ordering::Equal)
                });
            let Some(p) = p else { return S::zero() };
            if p != col {
                m.swap_rows(p, col);
                det = -det;
            }
            let pivot = m.get(col, col).clone();
            det = det * pivot.clone();
            for r in col + 1..n {
                let factor = m.get(r, col).clone() / pivot.clone();
                if factor.is_zero() {
                    continue;
                }
                for c in col..n {
                    let v = m.get(r, c).clone() - factor.clone() * m.get(col, c).clone();
                    m.set(r, c, v);
                }
            }
        }
        det
    }

    pub fn inverse(&self, tol: f64) -> Result<Self> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut aug = Self::from_fn(n, 2 * n, |r, c| {
            if c < n {
                self.get(r, c).clone()
            } else if c - n == r {
                S::one()
            } else {
                S::zero()
            }
        });
        let pivots = aug.rref(tol);
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(GeometryError::Singular("matrix"));
        }
        Ok(Self::from_fn(n, n, |r, c| aug.get(r, n + c).clone()))
    }

    /// Positive definiteness of a symmetric matrix via leading minors of an
    /// LDLᵀ elimination.
    pub fn is_positive_definite(&self, tol: f64) -> bool {
        let n = self.rows;
        let mut m = self.clone();
        for k in 0..n {
            let pivot = m.get(k, k).clone();
            if pivot.negligible(tol) || pivot.signum_i8() < 0 {
                return false;
            }
            for r in k + 1..n {
                let factor = m.get(r, k).clone() / pivot.clone();
                for c in k..n {
                    let v = m.get(r, c).clone() - factor.clone() * m.get(k, c).clone();
                    m.set(r, c, v);
                }
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn m3() -> Matrix<Rational> {
        Matrix::from_fn(3, 3, |r, c| q([[2, 1, 0], [1, 3, 1], [0, 1, 4]][r][c]))
    }

    #[test]
    fn inverse_round_trip() {
        let m = m3();
        let inv = m.inverse(0.0).unwrap();
        assert_eq!(m.mul(&inv), Matrix::from_fn(3, 3, |r, c| if r == c { q(1) } else { q(0) }));
        assert_eq!(m.determinant(), q(18));
    }

    #[test]
    fn singular_detected() {
        let m = Matrix::from_fn(2, 2, |r, c| q(((r + 1) * (c + 1)) as i64));
        assert!(m.inverse(0.0).is_err());
        assert_eq!(m.determinant(), q(0));
        assert_eq!(m.rank(0.0), 1);
        let ker = m.nullspace(0.0);
        assert_eq!(ker.len(), 1);
        assert_eq!(q(1) * ker[0][0].clone() + q(2) * ker[0][1].clone(), q(0));
    }

    #[test]
    fn solve_consistency() {
        let m = Matrix::from_fn(2, 3, |r, c| q([[1, 1, 0], [0, 1, 1]][r][c]));
        let x = m.solve(&[q(2), q(3)], 0.0).unwrap();
        assert_eq!(x[0].clone() + x[1].clone(), q(2));
        assert_eq!(x[1].clone() + x[2].clone(), q(3));
        let bad = Matrix::from_fn(2, 1, |_, _| q(1));
        assert!(bad.solve(&[q(1), q(2)], 0.0).is_none());
    }

    #[test]
    fn positive_definiteness() {
        assert!(m3().is_positive_definite(0.0));
        let indefinite = Matrix::from_fn(2, 2, |r, c| q([[1, 2], [2, 1]][r][c]));
        assert!(!indefinite.is_positive_definite(0.0));
    }
}
