//! Metric helpers: validation, inversion and the musical isomorphisms.
//!
//! Lowering moves an upper slot to the front of the lower slots, so
//! `G_{xyz} = g_{xb} G^b_{yz}`. Raising moves a lower slot to the end of the
//! upper slots.

use alloc::format;

use crate::error::{GeometryError, Result};
use crate::field::Field;
use crate::frame::FrameComplex;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Musical {
    Raise,
    Lower,
}

/// Inverse metric as a `(2,0)` tensor.
pub fn inverse_tensor<S: Scalar>(g: &Tensor<S>) -> Result<Tensor<S>> {
    Ok(Matrix::from_tensor(g).inverse(0.0)?.to_tensor(2, 0))
}

/// Check that `g` is a symmetric positive definite `(0,2)` field at every
/// sample and return its inverse field.
pub fn validate_metric<S: Scalar>(g: &Field<S>, fc: &FrameComplex<S>) -> Result<Field<S>> {
    let s = g.shape();
    if s != Shape::new(fc.dim(), 0, 2) {
        return Err(GeometryError::ShapeMismatch(format!("metric must be (0,2) in dimension {}, got {s:?}", fc.dim())));
    }
    let tol = fc.default_tolerance();
    let asym = fc.max_abs(&g.sub(&g.swap_lower(0, 1))?);
    if asym > tol || (S::EXACT && asym > 0.0) {
        return Err(GeometryError::invariant("metric symmetry", asym));
    }
    for x in fc.samples() {
        let m = Matrix::from_tensor(&g.at(x));
        if !m.is_positive_definite(tol) {
            let det = m.determinant();
            return Err(GeometryError::Invariant {
                what: "metric positive definiteness",
                residual: det.to_f64(),
                detail: format!(" at sample {x:?}"),
            });
        }
    }
    inverse_metric(g)
}

/// Pointwise inverse `g^{ab}`.
pub fn inverse_metric<S: Scalar>(g: &Field<S>) -> Result<Field<S>> {
    if let Some(t) = g.as_constant() {
        return inverse_tensor(t).map(Field::Constant);
    }
    let n = g.dim();
    Ok(g.map(Shape::new(n, 2, 0), |t| {
        inverse_tensor(t).unwrap_or_else(|_| t.map(|_| S::from_f64(f64::NAN)))
    }))
}

/// Lower the upper slot `slot` with `g`.
pub fn lower_tensor<S: Scalar>(t: &Tensor<S>, g: &Tensor<S>, slot: usize) -> Result<Tensor<S>> {
    let (n, up, lo) = (t.dim(), t.upper(), t.lower());
    if slot >= up {
        return Err(GeometryError::SlotOutOfRange { slot, upper: up, lower: lo });
    }
    let mut src = alloc::vec![0; up + lo];
    Ok(Tensor::from_fn(n, up - 1, lo + 1, |idx| {
        // idx = (upper without slot) ++ (new lower, old lowers)
        let x = idx[up - 1];
        let mut k = 0;
        for (p, s) in src.iter_mut().enumerate() {
            if p == slot {
                continue;
            }
            *s = if p < up { idx[k] } else { idx[k + 1] };
            k += 1;
        }
        let mut acc = S::zero();
        for b in 0..n {
            src[slot] = b;
            acc = acc + g[[x, b]].clone() * t.get(&src).clone();
        }
        acc
    }))
}

/// Raise lower slot `slot` (counted among lower slots) with `g^{-1}`.
pub fn raise_tensor<S: Scalar>(t: &Tensor<S>, ginv: &Tensor<S>, slot: usize) -> Result<Tensor<S>> {
    let (n, up, lo) = (t.dim(), t.upper(), t.lower());
    if slot >= lo {
        return Err(GeometryError::SlotOutOfRange { slot: up + slot, upper: up, lower: lo });
    }
    let mut src = alloc::vec![0; up + lo];
    Ok(Tensor::from_fn(n, up + 1, lo - 1, |idx| {
        let x = idx[up];
        src[..up].copy_from_slice(&idx[..up]);
        let mut k = up + 1;
        for p in 0..lo {
            if p == slot {
                continue;
            }
            src[up + p] = idx[k];
            k += 1;
        }
        let mut acc = S::zero();
        for b in 0..n {
            src[up + slot] = b;
            acc = acc + ginv[[x, b]].clone() * t.get(&src).clone();
        }
        acc
    }))
}

/// Raise or lower one slot. For `Lower`, `slot` indexes the upper slots;
/// for `Raise`, it indexes the lower slots.
pub fn musical<S: Scalar>(t: &Field<S>, g: &Field<S>, slot: usize, direction: Musical) -> Result<Field<S>> {
    let s = t.shape();
    match direction {
        Musical::Lower => {
            if slot >= s.upper {
                return Err(GeometryError::SlotOutOfRange { slot, upper: s.upper, lower: s.lower });
            }
            let shape = Shape::new(s.dim, s.upper - 1, s.lower + 1);
            Ok(t.zip(g, shape, move |t, g| lower_tensor(t, g, slot).expect("validated")))
        }
        Musical::Raise => {
            if slot >= s.lower {
                return Err(GeometryError::SlotOutOfRange { slot: s.upper + slot, upper: s.upper, lower: s.lower });
            }
            let ginv = inverse_metric(g)?;
            let shape = Shape::new(s.dim, s.upper + 1, s.lower - 1);
            Ok(t.zip(&ginv, shape, move |t, gi| raise_tensor(t, gi, slot).expect("validated")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn metric() -> Tensor<Rational> {
        Tensor::from_fn(3, 0, 2, |i| q([[2, 1, 0], [1, 2, 0], [0, 0, 3]][i[0]][i[1]]))
    }

    #[test]
    fn lower_then_raise_is_identity() {
        let t = Tensor::from_fn(3, 1, 2, |i| q((i[0] * 9 + i[1] * 3 + i[2]) as i64 - 7));
        let g = metric();
        let low = lower_tensor(&t, &g, 0).unwrap();
        assert_eq!(low.shape(), Shape::new(3, 0, 3));
        assert_eq!(low[[0, 1, 2]], q(2) * t[[0, 1, 2]].clone() + t[[1, 1, 2]].clone());
        let back = raise_tensor(&low, &inverse_tensor(&g).unwrap(), 0).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn field_musical_and_validation() {
        let fc = FrameComplex::<Rational>::abelian(3);
        let g = Field::constant(metric());
        assert!(validate_metric(&g, &fc).is_ok());
        let v = Field::constant(Tensor::from_fn(3, 0, 1, |i| q(i[0] as i64)));
        let up = musical(&v, &g, 0, Musical::Raise).unwrap();
        let down = musical(&up, &g, 0, Musical::Lower).unwrap();
        assert_eq!(down.as_constant(), v.as_constant());
        assert!(musical(&v, &g, 0, Musical::Lower).is_err());
        let bad = Field::constant(Tensor::from_fn(3, 0, 2, |i| if i[0] == i[1] { q(-1) } else { q(0) }));
        assert!(validate_metric(&bad, &fc).is_err());
    }
}
