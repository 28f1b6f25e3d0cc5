//! Dense multi-index component arrays.
//!
//! A [`Tensor`] of valence `(r, s)` over an `n`-dimensional frame stores
//! `n^(r+s)` scalars in row-major order. Slots are addressed globally and
//! zero-based, upper slots first: slot `k < r` is contravariant, slot
//! `r + j` is the `j`-th covariant slot.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{GeometryError, Result};
use crate::scalar::Scalar;

/// Frame dimension and valence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub dim: usize,
    pub upper: usize,
    pub lower: usize,
}

impl Shape {
    pub const fn new(dim: usize, upper: usize, lower: usize) -> Self {
        Shape { dim, upper, lower }
    }

    pub fn rank(&self) -> usize {
        self.upper + self.lower
    }

    pub fn len(&self) -> usize {
        self.dim.pow(self.rank() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same dimension, one more covariant slot.
    pub fn with_extra_lower(&self) -> Shape {
        Shape::new(self.dim, self.upper, self.lower + 1)
    }
}

/// Dense component array of fixed valence.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    shape: Shape,
    data: Vec<S>,
}

/// Elementary index-algebra operations.
#[derive(Clone, Debug)]
pub enum TensorOp<S> {
    /// Trace of an upper slot against a lower slot.
    Contract { up: usize, down: usize },
    /// Symmetrising projection over slots of equal variance.
    Sym(Vec<usize>),
    /// Alternating projection over slots of equal variance.
    Alt(Vec<usize>),
    Scale(S),
    Add(Tensor<S>),
}

/// Decode a row-major offset into a multi-index.
fn decode(mut offset: usize, dim: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = offset % dim;
        offset /= dim;
    }
}

/// All permutations of `0..k` with their signs.
pub(crate) fn permutations(k: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], sign: i64, out: &mut Vec<(Vec<usize>, i64)>) {
        let k = used.len();
        if prefix.len() == k {
            out.push((prefix.clone(), sign));
            return;
        }
        for i in 0..k {
            if used[i] {
                continue;
            }
            // inversions contributed by placing i after the current prefix
            let inv = prefix.iter().filter(|&&p| p > i).count();
            used[i] = true;
            prefix.push(i);
            rec(prefix, used, if inv % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            used[i] = false;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], 1, &mut out);
    out
}

impl<S: Scalar> Tensor<S> {
    pub fn zeros(dim: usize, upper: usize, lower: usize) -> Self {
        let shape = Shape::new(dim, upper, lower);
        Tensor { shape, data: vec![S::zero(); shape.len()] }
    }

    pub fn zeros_like(shape: Shape) -> Self {
        Self::zeros(shape.dim, shape.upper, shape.lower)
    }

    /// Build from a function of the multi-index.
    pub fn from_fn(dim: usize, upper: usize, lower: usize, mut f: impl FnMut(&[usize]) -> S) -> Self {
        let shape = Shape::new(dim, upper, lower);
        let mut idx = vec![0; shape.rank()];
        let data = (0..shape.len())
            .map(|offset| {
                decode(offset, dim, &mut idx);
                f(&idx)
            })
            .collect();
        Tensor { shape, data }
    }

    pub fn from_vec(dim: usize, upper: usize, lower: usize, data: Vec<S>) -> Result<Self> {
        let shape = Shape::new(dim, upper, lower);
        if data.len() != shape.len() {
            return Err(GeometryError::ShapeMismatch(format!(
                "expected {} components, got {}",
                shape.len(),
                data.len()
            )));
        }
        Ok(Tensor { shape, data })
    }

    /// Kronecker delta as a `(1,1)` tensor.
    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, 1, 1, |i| if i[0] == i[1] { S::one() } else { S::zero() })
    }

    /// Rank-zero tensor.
    pub fn scalar(dim: usize, value: S) -> Self {
        Tensor { shape: Shape::new(dim, 0, 0), data: vec![value] }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    pub fn upper(&self) -> usize {
        self.shape.upper
    }

    pub fn lower(&self) -> usize {
        self.shape.lower
    }

    pub fn rank(&self) -> usize {
        self.shape.rank()
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn into_data(self) -> Vec<S> {
        self.data
    }

    pub fn offset(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.rank());
        idx.iter().fold(0, |acc, &i| acc * self.shape.dim + i)
    }

    pub fn get(&self, idx: &[usize]) -> &S {
        &self.data[self.offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: S) {
        let o = self.offset(idx);
        self.data[o] = value;
    }

    /// The single component of a rank-zero tensor.
    pub fn value(&self) -> &S {
        &self.data[0]
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Tensor { shape: self.shape, data: self.data.iter().map(f).collect() }
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.shape != other.shape {
            return Err(GeometryError::ShapeMismatch(format!(
                "{:?} versus {:?}",
                self.shape, other.shape
            )));
        }
        Ok(())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&S, &S) -> S) -> Result<Self> {
        self.check_same(other)?;
        Ok(Tensor {
            shape: self.shape,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, k: &S, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + k.clone() * b.clone())
    }

    pub fn scale(&self, k: &S) -> Self {
        self.map(|a| k.clone() * a.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|a| -a.clone())
    }

    /// Largest component magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs().to_f64()).fold(0.0, f64::max)
    }

    /// All components vanish under the backend tolerance policy.
    pub fn negligible(&self, tol: f64) -> bool {
        self.data.iter().all(|v| v.negligible(tol))
    }

    fn check_slot(&self, slot: usize) -> Result<()> {
        if slot >= self.rank() {
            return Err(GeometryError::SlotOutOfRange {
                slot,
                upper: self.upper(),
                lower: self.lower(),
            });
        }
        Ok(())
    }

    fn is_upper_slot(&self, slot: usize) -> bool {
        slot < self.upper()
    }

    fn check_group(&self, slots: &[usize]) -> Result<()> {
        for (k, &s) in slots.iter().enumerate() {
            self.check_slot(s)?;
            if slots[..k].contains(&s) {
                return Err(GeometryError::ShapeMismatch(format!("slot {s} repeated")));
            }
            if self.is_upper_slot(s) != self.is_upper_slot(slots[0]) {
                return Err(GeometryError::ShapeMismatch(format!(
                    "slots {slots:?} mix upper and lower positions"
                )));
            }
        }
        Ok(())
    }

    /// Trace over an upper slot and a lower slot (global addressing).
    pub fn contract(&self, up: usize, down: usize) -> Result<Self> {
        self.check_slot(up)?;
        self.check_slot(down)?;
        if !self.is_upper_slot(up) || self.is_upper_slot(down) {
            return Err(GeometryError::ShapeMismatch(format!(
                "contraction needs an upper and a lower slot, got {up} and {down}"
            )));
        }
        let n = self.dim();
        let mut full = vec![0; self.rank()];
        Ok(Self::from_fn(n, self.upper() - 1, self.lower() - 1, |idx| {
            let mut k = 0;
            for (s, slot) in full.iter_mut().enumerate() {
                if s != up && s != down {
                    *slot = idx[k];
                    k += 1;
                }
            }
            let mut acc = S::zero();
            for m in 0..n {
                full[up] = m;
                full[down] = m;
                acc = acc + self.get(&full).clone();
            }
            acc
        }))
    }

    fn project(&self, slots: &[usize], signed: bool) -> Result<Self> {
        self.check_group(slots)?;
        let perms = permutations(slots.len());
        let count = S::from_i64(perms.len() as i64);
        let mut src = vec![0; self.rank()];
        Ok(Self::from_fn(self.dim(), self.upper(), self.lower(), |idx| {
            let mut acc = S::zero();
            for (perm, sign) in &perms {
                src.copy_from_slice(idx);
                for (k, &p) in perm.iter().enumerate() {
                    src[slots[k]] = idx[slots[p]];
                }
                let v = self.get(&src).clone();
                acc = if signed && *sign < 0 { acc - v } else { acc + v };
            }
            acc / count.clone()
        }))
    }

    /// Symmetrising projection over `slots`.
    pub fn sym(&self, slots: &[usize]) -> Result<Self> {
        self.project(slots, false)
    }

    /// Alternating projection over `slots`.
    pub fn alt(&self, slots: &[usize]) -> Result<Self> {
        self.project(slots, true)
    }

    pub fn apply(&self, op: &TensorOp<S>) -> Result<Self> {
        match op {
            TensorOp::Contract { up, down } => self.contract(*up, *down),
            TensorOp::Sym(slots) => self.sym(slots),
            TensorOp::Alt(slots) => self.alt(slots),
            TensorOp::Scale(k) => Ok(self.scale(k)),
            TensorOp::Add(other) => self.add(other),
        }
    }

    /// Reorder covariant slots: lower slot `i` of the result is lower slot
    /// `perm[i]` of `self`.
    pub fn permute_lower(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.lower());
        let r = self.upper();
        let mut src = vec![0; self.rank()];
        Self::from_fn(self.dim(), r, self.lower(), |idx| {
            src[..r].copy_from_slice(&idx[..r]);
            for (i, &p) in perm.iter().enumerate() {
                src[r + p] = idx[r + i];
            }
            self.get(&src).clone()
        })
    }

    /// Exchange two covariant slots (lower-slot numbering).
    pub fn swap_lower(&self, i: usize, j: usize) -> Self {
        let mut perm: Vec<usize> = (0..self.lower()).collect();
        perm.swap(i, j);
        self.permute_lower(&perm)
    }

    /// Tensor product; upper slots of `self`, upper of `other`, lower of
    /// `self`, lower of `other`.
    pub fn outer(&self, other: &Self) -> Self {
        let (r1, s1) = (self.upper(), self.lower());
        let r2 = other.upper();
        let mut a = vec![0; self.rank()];
        let mut b = vec![0; other.rank()];
        Self::from_fn(self.dim(), r1 + r2, s1 + other.lower(), |idx| {
            a[..r1].copy_from_slice(&idx[..r1]);
            b[..r2].copy_from_slice(&idx[r1..r1 + r2]);
            a[r1..].copy_from_slice(&idx[r1 + r2..r1 + r2 + s1]);
            b[r2..].copy_from_slice(&idx[r1 + r2 + s1..]);
            self.get(&a).clone() * other.get(&b).clone()
        })
    }

    /// Let an endomorphism `m` (a `(1,1)` tensor) act on one slot.
    ///
    /// On a lower slot the argument is replaced by `m X`; on an upper slot
    /// the value is mapped by `m`.
    pub fn act(&self, m: &Self, slot: usize) -> Result<Self> {
        self.check_slot(slot)?;
        if m.upper() != 1 || m.lower() != 1 || m.dim() != self.dim() {
            return Err(GeometryError::ShapeMismatch(format!("{:?} is not an endomorphism", m.shape)));
        }
        let n = self.dim();
        let upper = self.is_upper_slot(slot);
        let mut src = vec![0; self.rank()];
        Ok(Self::from_fn(n, self.upper(), self.lower(), |idx| {
            src.copy_from_slice(idx);
            let mut acc = S::zero();
            for k in 0..n {
                src[slot] = k;
                let coeff = if upper { &m[[idx[slot], k]] } else { &m[[k, idx[slot]]] };
                if !coeff.is_zero() {
                    acc = acc + coeff.clone() * self.get(&src).clone();
                }
            }
            acc
        }))
    }

    /// Hermitian and anti-Hermitian parts over a pair of slots of equal
    /// variance: `T±(X,Y) = ½(T(X,Y) ± T(JX,JY))`.
    pub fn hermitian_parts(&self, j: &Self, pair: (usize, usize)) -> Result<(Self, Self)> {
        if pair.0 == pair.1 {
            return Err(GeometryError::ShapeMismatch(format!("pair repeats slot {}", pair.0)));
        }
        self.check_group(&[pair.0, pair.1])?;
        let jj = self.act(j, pair.0)?.act(j, pair.1)?;
        let half = S::half();
        let plus = self.zip_with(&jj, |a, b| half.clone() * (a.clone() + b.clone()))?;
        let minus = self.zip_with(&jj, |a, b| half.clone() * (a.clone() - b.clone()))?;
        Ok((plus, minus))
    }

    /// Composition of `(1,1)` tensors read as matrices: `(self∘other)^a_c`.
    pub fn compose(&self, other: &Self) -> Self {
        let n = self.dim();
        Self::from_fn(n, 1, 1, |i| {
            (0..n).fold(S::zero(), |acc, k| acc + self[[i[0], k]].clone() * other[[k, i[1]]].clone())
        })
    }
}

impl<S, const N: usize> Index<[usize; N]> for Tensor<S> {
    type Output = S;
    fn index(&self, idx: [usize; N]) -> &S {
        debug_assert_eq!(N, self.shape.rank());
        let o = idx.iter().fold(0, |acc, &i| acc * self.shape.dim + i);
        &self.data[o]
    }
}

impl<S, const N: usize> IndexMut<[usize; N]> for Tensor<S> {
    fn index_mut(&mut self, idx: [usize; N]) -> &mut S {
        debug_assert_eq!(N, self.shape.rank());
        let o = idx.iter().fold(0, |acc, &i| acc * self.shape.dim + i);
        &mut self.data[o]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn sample3(n: usize) -> Tensor<Rational> {
        Tensor::from_fn(n, 1, 2, |i| q((i[0] * 7 + i[1] * 3 + i[2] * i[2] + 1) as i64 % 11 - 5))
    }

    #[test]
    fn trace_of_identity() {
        let d = Tensor::<Rational>::identity(4);
        assert_eq!(d.contract(0, 1).unwrap().value(), &q(4));
    }

    #[test]
    fn permutation_signs() {
        let perms = permutations(3);
        assert_eq!(perms.len(), 6);
        let odd = perms.iter().filter(|(_, s)| *s < 0).count();
        assert_eq!(odd, 3);
        assert!(perms.contains(&(vec![1, 0, 2], -1)));
        assert!(perms.contains(&(vec![1, 2, 0], 1)));
    }

    #[test]
    fn alt_and_sym_are_complementary_on_pairs() {
        let t = sample3(3);
        let a = t.alt(&[1, 2]).unwrap();
        let s = t.sym(&[1, 2]).unwrap();
        assert_eq!(a.add(&s).unwrap(), t);
        assert_eq!(a.alt(&[1, 2]).unwrap(), a);
    }

    #[test]
    fn mixed_variance_group_rejected() {
        let t = sample3(2);
        assert!(t.alt(&[0, 1]).is_err());
        assert!(t.contract(1, 2).is_err());
        assert!(matches!(t.contract(0, 5), Err(GeometryError::SlotOutOfRange { .. })));
    }

    #[test]
    fn contraction_of_j_with_j_is_minus_identity() {
        let n = 4;
        let j = Tensor::<Rational>::from_fn(n, 1, 1, |i| match (i[0], i[1]) {
            (1, 0) | (3, 2) => q(1),
            (0, 1) | (2, 3) => q(-1),
            _ => q(0),
        });
        let jj = j.outer(&j).contract(1, 2).unwrap();
        let mut oracle = Tensor::<Rational>::zeros(n, 1, 1);
        for a in 0..n {
            for c in 0..n {
                let mut acc = q(0);
                for b in 0..n {
                    acc = acc + j[[a, b]].clone() * j[[b, c]].clone();
                }
                oracle[[a, c]] = acc;
            }
        }
        assert_eq!(jj, oracle);
        assert_eq!(jj, Tensor::identity(n).neg());
        assert_eq!(j.compose(&j), oracle);
    }

    #[test]
    fn permute_lower_moves_arguments() {
        let t = sample3(3);
        let s = t.swap_lower(0, 1);
        assert_eq!(s[[2, 0, 1]], t[[2, 1, 0]]);
        let p = Tensor::<Rational>::from_fn(3, 0, 3, |i| q((i[0] * 9 + i[1] * 3 + i[2]) as i64));
        let r = p.permute_lower(&[2, 0, 1]);
        assert_eq!(r[[0, 1, 2]], p[[1, 2, 0]]);
    }

    #[test]
    fn act_on_lower_and_upper() {
        let n = 2;
        let m = Tensor::<Rational>::from_fn(n, 1, 1, |i| q((i[0] * 2 + i[1] + 1) as i64));
        let v = Tensor::<Rational>::from_fn(n, 1, 0, |i| q(i[0] as i64 + 1));
        let mv = v.act(&m, 0).unwrap();
        assert_eq!(mv[[0]], q(1 * 1 + 2 * 2));
        let w = Tensor::<Rational>::from_fn(n, 0, 1, |i| q(i[0] as i64 + 1));
        let wm = w.act(&m, 0).unwrap();
        assert_eq!(wm[[1]], m[[0, 1]].clone() * q(1) + m[[1, 1]].clone() * q(2));
    }

    #[test]
    fn hermitian_parts_reconstruct() {
        let j = Tensor::<Rational>::from_fn(2, 1, 1, |i| match (i[0], i[1]) {
            (1, 0) => q(1),
            (0, 1) => q(-1),
            _ => q(0),
        });
        let t = sample3(2);
        let (p, m) = t.hermitian_parts(&j, (1, 2)).unwrap();
        assert_eq!(p.add(&m).unwrap(), t);
        let pjj = p.act(&j, 1).unwrap().act(&j, 2).unwrap();
        assert_eq!(pjj, p);
        assert!(t.hermitian_parts(&j, (1, 1)).is_err());
    }
}
