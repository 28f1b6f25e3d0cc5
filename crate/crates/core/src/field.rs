//! Tensor fields over a frame.
//!
//! A [`Field`] is either constant in the frame (homogeneous presentations,
//! exact arithmetic) or a sampler evaluated at chart coordinates. Pointwise
//! operations lift through [`Field::lift`]: constant inputs are combined
//! eagerly, anything else yields a composed sampler.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{GeometryError, Result};
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

/// Evaluation of a field at chart coordinates.
pub type Sampler<S> = Arc<dyn Fn(&[f64]) -> Tensor<S> + Send + Sync>;

/// Valence-`(r,s)` tensor field in a fixed frame.
#[derive(Clone)]
pub enum Field<S> {
    Constant(Tensor<S>),
    Sampled { shape: Shape, eval: Sampler<S> },
}

impl<S: Scalar> fmt::Debug for Field<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Constant(t) => f.debug_tuple("Constant").field(t).finish(),
            Field::Sampled { shape, .. } => f.debug_struct("Sampled").field("shape", shape).finish(),
        }
    }
}

impl<S: Scalar> From<Tensor<S>> for Field<S> {
    fn from(t: Tensor<S>) -> Self {
        Field::Constant(t)
    }
}

/// Validate an operation on a zero tensor of the given shape and report the
/// result shape.
pub(crate) fn probe<S: Scalar>(shape: Shape, op: impl FnOnce(&Tensor<S>) -> Result<Tensor<S>>) -> Result<Shape> {
    op(&Tensor::zeros_like(shape)).map(|t| t.shape())
}

impl<S: Scalar> Field<S> {
    pub fn constant(t: Tensor<S>) -> Self {
        Field::Constant(t)
    }

    pub fn sampled(shape: Shape, eval: impl Fn(&[f64]) -> Tensor<S> + Send + Sync + 'static) -> Self {
        Field::Sampled { shape, eval: Arc::new(eval) }
    }

    pub fn zeros(shape: Shape) -> Self {
        Field::Constant(Tensor::zeros_like(shape))
    }

    pub fn shape(&self) -> Shape {
        match self {
            Field::Constant(t) => t.shape(),
            Field::Sampled { shape, .. } => *shape,
        }
    }

    pub fn dim(&self) -> usize {
        self.shape().dim
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Field::Constant(_))
    }

    pub fn as_constant(&self) -> Option<&Tensor<S>> {
        match self {
            Field::Constant(t) => Some(t),
            Field::Sampled { .. } => None,
        }
    }

    /// The same field with evaluations cached by exact coordinates. Nested
    /// finite differences revisit the same points many times; constant
    /// fields are returned unchanged.
    #[cfg(feature = "std")]
    pub fn memoized(&self) -> Field<S> {
        match self {
            Field::Constant(_) => self.clone(),
            Field::Sampled { shape, eval } => {
                let eval = eval.clone();
                let cache = std::sync::Mutex::new(alloc::collections::BTreeMap::<Vec<u64>, Tensor<S>>::new());
                Field::sampled(*shape, move |x| {
                    let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
                    if let Some(t) = cache.lock().expect("cache lock").get(&key) {
                        return t.clone();
                    }
                    let t = eval(x);
                    cache.lock().expect("cache lock").insert(key, t.clone());
                    t
                })
            }
        }
    }

    #[cfg(not(feature = "std"))]
    pub fn memoized(&self) -> Field<S> {
        self.clone()
    }

    /// Components at chart coordinates `x` (ignored when constant).
    pub fn at(&self, x: &[f64]) -> Tensor<S> {
        match self {
            Field::Constant(t) => t.clone(),
            Field::Sampled { eval, .. } => eval(x),
        }
    }

    /// Combine fields pointwise into a field of shape `shape`.
    pub fn lift(
        inputs: &[&Field<S>],
        shape: Shape,
        f: impl Fn(&[&Tensor<S>]) -> Tensor<S> + Send + Sync + 'static,
    ) -> Field<S> {
        if let Some(consts) = inputs.iter().map(|i| i.as_constant()).collect::<Option<Vec<_>>>() {
            let out = f(&consts);
            debug_assert_eq!(out.shape(), shape);
            return Field::Constant(out);
        }
        let owned: Vec<Field<S>> = inputs.iter().map(|&i| i.clone()).collect();
        Field::sampled(shape, move |x| {
            let values: Vec<Tensor<S>> = owned.iter().map(|i| i.at(x)).collect();
            let refs: Vec<&Tensor<S>> = values.iter().collect();
            f(&refs)
        })
    }

    pub fn map(&self, shape: Shape, f: impl Fn(&Tensor<S>) -> Tensor<S> + Send + Sync + 'static) -> Field<S> {
        Self::lift(&[self], shape, move |t| f(t[0]))
    }

    pub fn zip(
        &self,
        other: &Field<S>,
        shape: Shape,
        f: impl Fn(&Tensor<S>, &Tensor<S>) -> Tensor<S> + Send + Sync + 'static,
    ) -> Field<S> {
        Self::lift(&[self, other], shape, move |t| f(t[0], t[1]))
    }

    fn check_same(&self, other: &Field<S>) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(GeometryError::ShapeMismatch(format!(
                "{:?} versus {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Field<S>) -> Result<Field<S>> {
        self.check_same(other)?;
        Ok(self.zip(other, self.shape(), |a, b| a.add(b).expect("shape checked")))
    }

    pub fn sub(&self, other: &Field<S>) -> Result<Field<S>> {
        self.check_same(other)?;
        Ok(self.zip(other, self.shape(), |a, b| a.sub(b).expect("shape checked")))
    }

    /// `self + k * other`.
    pub fn add_scaled(&self, k: S, other: &Field<S>) -> Result<Field<S>> {
        self.check_same(other)?;
        Ok(self.zip(other, self.shape(), move |a, b| a.add_scaled(&k, b).expect("shape checked")))
    }

    pub fn scale(&self, k: S) -> Field<S> {
        self.map(self.shape(), move |t| t.scale(&k))
    }

    pub fn neg(&self) -> Field<S> {
        self.map(self.shape(), |t| t.neg())
    }

    pub fn contract(&self, up: usize, down: usize) -> Result<Field<S>> {
        let shape = probe::<S>(self.shape(), |z| z.contract(up, down))?;
        Ok(self.map(shape, move |t| t.contract(up, down).expect("validated")))
    }

    pub fn sym(&self, slots: &[usize]) -> Result<Field<S>> {
        let shape = probe::<S>(self.shape(), |z| z.sym(slots))?;
        let slots = slots.to_vec();
        Ok(self.map(shape, move |t| t.sym(&slots).expect("validated")))
    }

    pub fn alt(&self, slots: &[usize]) -> Result<Field<S>> {
        let shape = probe::<S>(self.shape(), |z| z.alt(slots))?;
        let slots = slots.to_vec();
        Ok(self.map(shape, move |t| t.alt(&slots).expect("validated")))
    }

    pub fn swap_lower(&self, i: usize, j: usize) -> Field<S> {
        assert!(i < self.shape().lower && j < self.shape().lower);
        self.map(self.shape(), move |t| t.swap_lower(i, j))
    }

    pub fn permute_lower(&self, perm: &[usize]) -> Field<S> {
        assert_eq!(perm.len(), self.shape().lower);
        let perm = perm.to_vec();
        self.map(self.shape(), move |t| t.permute_lower(&perm))
    }

    pub fn outer(&self, other: &Field<S>) -> Field<S> {
        let (a, b) = (self.shape(), other.shape());
        let shape = Shape::new(a.dim, a.upper + b.upper, a.lower + b.lower);
        self.zip(other, shape, |x, y| x.outer(y))
    }

    /// Let an endomorphism field act on one slot (see [`Tensor::act`]).
    pub fn act(&self, m: &Field<S>, slot: usize) -> Result<Field<S>> {
        let mz = Tensor::<S>::zeros_like(m.shape());
        let shape = probe::<S>(self.shape(), |z| z.act(&mz, slot))?;
        Ok(self.zip(m, shape, move |t, m| t.act(m, slot).expect("validated")))
    }

    /// Largest component magnitude over the sample points.
    pub fn max_abs(&self, samples: &[Vec<f64>]) -> f64 {
        match self {
            Field::Constant(t) => t.max_abs(),
            Field::Sampled { eval, .. } => samples.iter().map(|x| eval(x).max_abs()).fold(0.0, f64::max),
        }
    }

    /// Vanishes at every sample under the backend tolerance policy.
    pub fn negligible(&self, samples: &[Vec<f64>], tol: f64) -> bool {
        match self {
            Field::Constant(t) => t.negligible(tol),
            Field::Sampled { eval, .. } => samples.iter().all(|x| eval(x).negligible(tol)),
        }
    }
}

/// Hermitian and anti-Hermitian parts of a field over a pair of slots.
#[derive(Clone)]
pub struct HermitianSplit<S> {
    pub plus: Field<S>,
    pub minus: Field<S>,
    pub pair: (usize, usize),
}

impl<S: Scalar> fmt::Debug for HermitianSplit<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianSplit")
            .field("plus", &self.plus)
            .field("minus", &self.minus)
            .field("pair", &self.pair)
            .finish()
    }
}

/// `T±(X,Y) = ½(T(X,Y) ± T(JX,JY))` over `pair`.
pub fn hermitian_split<S: Scalar>(t: &Field<S>, j: &Field<S>, pair: (usize, usize)) -> Result<HermitianSplit<S>> {
    if t.dim() != j.dim() {
        return Err(GeometryError::ShapeMismatch(format!("dimension {} versus {}", t.dim(), j.dim())));
    }
    let jz = Tensor::<S>::zeros_like(j.shape());
    let shape = probe(t.shape(), |z| z.hermitian_parts(&jz, pair).map(|p| p.0))?;
    let plus = t.zip(j, shape, move |t, j| t.hermitian_parts(j, pair).expect("validated").0);
    let minus = t.zip(j, shape, move |t, j| t.hermitian_parts(j, pair).expect("validated").1);
    Ok(HermitianSplit { plus, minus, pair })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn constant_lift_is_eager() {
        let a = Field::constant(Tensor::<Rational>::identity(2));
        let b = a.scale(Rational::from_i64(3));
        assert!(b.is_constant());
        assert_eq!(b.as_constant().unwrap()[[1, 1]], Rational::from_i64(3));
    }

    #[test]
    fn sampled_lift_composes() {
        let f = Field::<f64>::sampled(Shape::new(2, 0, 0), |x| Tensor::scalar(2, x[0] * x[1]));
        let g = Field::constant(Tensor::scalar(2, 1.0));
        let h = f.add(&g).unwrap();
        assert!(!h.is_constant());
        assert_eq!(*h.at(&[2.0, 3.0]).value(), 7.0);
        assert_eq!(h.max_abs(&[alloc::vec![1.0, 1.0], alloc::vec![2.0, 2.0]]), 5.0);
    }

    #[test]
    fn shape_errors_surface() {
        let a = Field::constant(Tensor::<Rational>::identity(2));
        let b = Field::constant(Tensor::<Rational>::zeros(2, 0, 1));
        assert!(a.add(&b).is_err());
        assert!(a.contract(0, 0).is_err());
    }
}
