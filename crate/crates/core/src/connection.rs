//! Affine connections in a frame.
//!
//! Coefficients are stored `[b][c][a]` with `∇_{e_a} e_c = Γ^b_{ca} e_b`.
//! Adding a `(1,2)` tensor `H` to the coefficients gives
//! `∇'_X Y = ∇_X Y + H(Y, X)`: the differentiating direction is the last
//! slot throughout.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{GeometryError, Result};
use crate::field::Field;
use crate::frame::FrameComplex;
use crate::metric::inverse_metric;
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

/// A connection together with the frame it is expressed in.
#[derive(Clone, Debug)]
pub struct Connection<S: Scalar> {
    gamma: Field<S>,
    frame: FrameComplex<S>,
}

/// Outcome of comparing unparametrised geodesics of two connections.
#[derive(Clone, Debug)]
pub struct GeodesicComparison<S: Scalar> {
    pub same: bool,
    /// `∇' - ∇` in coefficient storage.
    pub difference: Field<S>,
    /// Largest component of the symmetric part of the difference.
    pub symmetric_residual: f64,
}

fn kronecker<S: Scalar>(a: usize, b: usize) -> S {
    if a == b {
        S::one()
    } else {
        S::zero()
    }
}

impl<S: Scalar> Connection<S> {
    pub fn new(gamma: Field<S>, frame: &FrameComplex<S>) -> Result<Self> {
        let expected = Shape::new(frame.dim(), 1, 2);
        if gamma.shape() != expected {
            return Err(GeometryError::ShapeMismatch(format!(
                "connection coefficients must be {expected:?}, got {:?}",
                gamma.shape()
            )));
        }
        Ok(Connection { gamma: gamma.memoized(), frame: frame.clone() })
    }

    /// The connection with `Γ = 0`, i.e. `∇ e_a = 0`.
    pub fn frame_flat(frame: &FrameComplex<S>) -> Self {
        Connection { gamma: Field::zeros(Shape::new(frame.dim(), 1, 2)), frame: frame.clone() }
    }

    /// The torsion-free connection `Γ = -½c`.
    pub fn symmetric_frame(frame: &FrameComplex<S>) -> Self {
        Connection { gamma: frame.structure().scale(-S::half()).memoized(), frame: frame.clone() }
    }

    pub fn gamma(&self) -> &Field<S> {
        &self.gamma
    }

    pub fn frame(&self) -> &FrameComplex<S> {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// `Γ + h` in coefficient storage.
    pub fn add_difference(&self, h: &Field<S>) -> Result<Self> {
        Connection::new(self.gamma.add(h)?, &self.frame)
    }

    /// `other - self` in coefficient storage.
    pub fn difference(&self, other: &Connection<S>) -> Result<Field<S>> {
        if other.dim() != self.dim() {
            return Err(GeometryError::ShapeMismatch("connections on different frames".into()));
        }
        self.gamma.sub(&other.gamma).map(|d| d.neg())
    }

    /// `∇T`, with the direction appended as the last lower slot.
    pub fn covariant_derivative(&self, t: &Field<S>) -> Result<Field<S>> {
        if t.dim() != self.dim() {
            return Err(GeometryError::ShapeMismatch(format!("field of dimension {} on frame of {}", t.dim(), self.dim())));
        }
        let n = self.dim();
        let s = t.shape();
        let out = s.with_extra_lower();
        let deriv = self.frame.derivative(t);
        Ok(Field::lift(&[t, &deriv, &self.gamma], out, move |v| {
            let (t, dt, g) = (v[0], v[1], v[2]);
            let mut src = alloc::vec![0usize; s.rank()];
            Tensor::from_fn(n, out.upper, out.lower, |idx| {
                let a = idx[s.rank()];
                let mut acc = dt.get(idx).clone();
                src.copy_from_slice(&idx[..s.rank()]);
                for slot in 0..s.rank() {
                    let orig = idx[slot];
                    for m in 0..n {
                        src[slot] = m;
                        let coeff = if slot < s.upper { g[[orig, m, a]].clone() } else { -g[[m, orig, a]].clone() };
                        if !coeff.is_zero() {
                            acc = acc + coeff * t.get(&src).clone();
                        }
                    }
                    src[slot] = orig;
                }
                acc
            })
        }))
    }

    /// `T^i_{jk} = Γ^i_{kj} - Γ^i_{jk} - c^i_{jk}`, i.e.
    /// `T(X,Y) = ∇_X Y - ∇_Y X - [X,Y]`.
    pub fn torsion(&self) -> Field<S> {
        let c = self.frame.structure();
        let n = self.dim();
        Field::lift(&[&self.gamma, &c], Shape::new(n, 1, 2), move |v| {
            let (g, c) = (v[0], v[1]);
            Tensor::from_fn(n, 1, 2, |i| {
                g[[i[0], i[2], i[1]]].clone() - g[[i[0], i[1], i[2]]].clone() - c[[i[0], i[1], i[2]]].clone()
            })
        })
    }

    pub fn torsion_residual(&self) -> f64 {
        self.frame.max_abs(&self.torsion())
    }

    pub fn is_torsion_free(&self, tol: f64) -> bool {
        self.frame.negligible(&self.torsion(), tol)
    }

    fn require_torsion_free(&self) -> Result<()> {
        let tol = self.frame.default_tolerance();
        if !self.is_torsion_free(tol) {
            return Err(GeometryError::invariant("torsion-free connection", self.torsion_residual()));
        }
        Ok(())
    }

    /// `R^c_{dab}` stored `[c][d][a][b]`, so that
    /// `R(e_a, e_b) e_d = ∇_a ∇_b e_d - ∇_b ∇_a e_d - ∇_{[e_a,e_b]} e_d = R^c_{dab} e_c`.
    pub fn curvature(&self) -> Field<S> {
        let n = self.dim();
        let dg = self.frame.derivative(&self.gamma);
        let c = self.frame.structure();
        Field::lift(&[&self.gamma, &dg, &c], Shape::new(n, 1, 3), move |v| {
            let (g, dg, c) = (v[0], v[1], v[2]);
            Tensor::from_fn(n, 1, 3, |i| {
                let (cc, d, a, b) = (i[0], i[1], i[2], i[3]);
                let mut acc = dg[[cc, d, b, a]].clone() - dg[[cc, d, a, b]].clone();
                for m in 0..n {
                    acc = acc + g[[m, d, b]].clone() * g[[cc, m, a]].clone()
                        - g[[m, d, a]].clone() * g[[cc, m, b]].clone()
                        - c[[m, a, b]].clone() * g[[cc, d, m]].clone();
                }
                acc
            })
        })
    }

    /// `Ric(Y,Z) = tr(X ↦ R(X,Y)Z)`, stored `[y][z]`.
    pub fn ricci(&self) -> Field<S> {
        let n = self.dim();
        self.curvature().map(Shape::new(n, 0, 2), move |r| {
            Tensor::from_fn(n, 0, 2, |i| (0..n).fold(S::zero(), |acc, a| acc + r[[a, i[1], a, i[0]]].clone()))
        })
    }

    /// Trace `Σ_c R^c_{cab}` of the curvature on the volume line.
    pub fn volume_trace(&self) -> Field<S> {
        let n = self.dim();
        self.curvature().map(Shape::new(n, 0, 2), move |r| {
            Tensor::from_fn(n, 0, 2, |i| (0..n).fold(S::zero(), |acc, c| acc + r[[c, c, i[0], i[1]]].clone()))
        })
    }

    /// `τ_a = Γ^c_{ca}`, the connection form on the volume line; its
    /// derivative is [`Self::volume_trace`].
    pub fn volume_form_trace(&self) -> Field<S> {
        let n = self.dim();
        self.gamma.map(Shape::new(n, 0, 1), move |g| {
            Tensor::from_fn(n, 0, 1, |i| (0..n).fold(S::zero(), |acc, c| acc + g[[c, c, i[0]]].clone()))
        })
    }

    /// Projective change `∇'_X Y = ∇_X Y + Υ(X) Y + Υ(Y) X`.
    pub fn projective_change(&self, upsilon: &Field<S>) -> Result<Self> {
        self.require_torsion_free()?;
        check_one_form(upsilon, self.dim())?;
        self.add_difference(&projective_difference(upsilon))
    }

    /// Compare geodesics: equal iff `∇' - ∇` is skew in its lower slots.
    pub fn same_geodesics(&self, other: &Connection<S>, tol: f64) -> Result<GeodesicComparison<S>> {
        let difference = self.difference(other)?;
        let sym = difference.sym(&[1, 2])?;
        Ok(GeodesicComparison {
            same: self.frame.negligible(&sym, tol),
            symmetric_residual: self.frame.max_abs(&sym),
            difference,
        })
    }
}

pub(crate) fn check_one_form<S: Scalar>(u: &Field<S>, n: usize) -> Result<()> {
    if u.shape() != Shape::new(n, 0, 1) {
        return Err(GeometryError::ShapeMismatch(format!("expected a 1-form in dimension {n}, got {:?}", u.shape())));
    }
    Ok(())
}

/// `ΔΓ^b_{ca} = Υ_a δ^b_c + Υ_c δ^b_a`.
pub fn projective_difference<S: Scalar>(upsilon: &Field<S>) -> Field<S> {
    let n = upsilon.dim();
    upsilon.map(Shape::new(n, 1, 2), move |u| {
        Tensor::from_fn(n, 1, 2, |i| {
            let (b, c, a) = (i[0], i[1], i[2]);
            u[[a]].clone() * kronecker::<S>(b, c) + u[[c]].clone() * kronecker::<S>(b, a)
        })
    })
}

/// Weyl-type template `ΔΓ^b_{ca} = k (u_a δ^b_c + u_c δ^b_a - u^b g_{ca})`.
pub fn weyl_difference<S: Scalar>(u: &Field<S>, g: &Field<S>, k: S) -> Result<Field<S>> {
    let n = u.dim();
    check_one_form(u, n)?;
    let ginv = inverse_metric(g)?;
    Ok(Field::lift(&[u, g, &ginv], Shape::new(n, 1, 2), move |v| {
        let (u, g, gi) = (v[0], v[1], v[2]);
        let up: Vec<S> = (0..n).map(|b| (0..n).fold(S::zero(), |acc, m| acc + gi[[b, m]].clone() * u[[m]].clone())).collect();
        Tensor::from_fn(n, 1, 2, |i| {
            let (b, c, a) = (i[0], i[1], i[2]);
            k.clone()
                * (u[[a]].clone() * kronecker::<S>(b, c) + u[[c]].clone() * kronecker::<S>(b, a)
                    - up[b].clone() * g[[c, a]].clone())
        })
    }))
}

/// Levi-Civita connection of `g` by the Koszul formula in a general frame:
/// `2Γ_{mjk} = e_k g_{jm} + e_j g_{km} - e_m g_{kj}
///   + c^i_{kj} g_{im} - c^i_{km} g_{ij} - c^i_{jm} g_{ik}`, where
/// `Γ_{mjk} = g(∇_{e_k} e_j, e_m)`.
pub fn levi_civita<S: Scalar>(g: &Field<S>, frame: &FrameComplex<S>) -> Result<Connection<S>> {
    let n = frame.dim();
    if g.shape() != Shape::new(n, 0, 2) {
        return Err(GeometryError::ShapeMismatch(format!("metric must be (0,2), got {:?}", g.shape())));
    }
    let ginv = inverse_metric(g)?;
    let dg = frame.derivative(g);
    let c = frame.structure();
    let gamma = Field::lift(&[g, &ginv, &dg, &c], Shape::new(n, 1, 2), move |v| {
        let (g, gi, dg, c) = (v[0], v[1], v[2], v[3]);
        let mut low = Tensor::<S>::zeros(n, 0, 3);
        for m in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = dg[[j, m, k]].clone() + dg[[k, m, j]].clone() - dg[[k, j, m]].clone();
                    for i in 0..n {
                        acc = acc + c[[i, k, j]].clone() * g[[i, m]].clone()
                            - c[[i, k, m]].clone() * g[[i, j]].clone()
                            - c[[i, j, m]].clone() * g[[i, k]].clone();
                    }
                    low[[m, j, k]] = acc * S::half();
                }
            }
        }
        Tensor::from_fn(n, 1, 2, |i| {
            (0..n).fold(S::zero(), |acc, m| acc + gi[[i[0], m]].clone() * low[[m, i[1], i[2]]].clone())
        })
    });
    Connection::new(gamma, frame)
}

/// Levi-Civita connection of `e^{2φ} g` written through `g`, with
/// `Υ = dφ`: `ΔΓ^b_{ca} = Υ_a δ^b_c + Υ_c δ^b_a - Υ^b g_{ca}`. Closedness of
/// `Υ` is not checked; the result satisfies `∇̂g = -2Υ ⊗ g`.
pub fn conformal_change_lc<S: Scalar>(g: &Field<S>, upsilon: &Field<S>, frame: &FrameComplex<S>) -> Result<Connection<S>> {
    let lc = levi_civita(g, frame)?;
    lc.add_difference(&weyl_difference(upsilon, g, S::one())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn heisenberg() -> FrameComplex<Rational> {
        FrameComplex::from_structure_entries(3, &[(2, 0, 1, q(1))], 1).unwrap()
    }

    fn metric() -> Field<Rational> {
        Field::constant(Tensor::from_fn(3, 0, 2, |i| q([[2, 1, 0], [1, 2, 0], [0, 0, 3]][i[0]][i[1]])))
    }

    #[test]
    fn levi_civita_is_metric_and_torsion_free() {
        let fc = heisenberg();
        let lc = levi_civita(&metric(), &fc).unwrap();
        assert!(lc.torsion().as_constant().unwrap().negligible(0.0));
        let dg = lc.covariant_derivative(&metric()).unwrap();
        assert!(dg.as_constant().unwrap().negligible(0.0));
    }

    #[test]
    fn identity_is_parallel() {
        let fc = heisenberg();
        let gamma = Field::constant(Tensor::from_fn(3, 1, 2, |i| q((i[0] + 2 * i[1] + 3 * i[2]) as i64 % 5 - 2)));
        let conn = Connection::new(gamma, &fc).unwrap();
        let d = conn.covariant_derivative(&Field::constant(Tensor::identity(3))).unwrap();
        assert!(d.as_constant().unwrap().negligible(0.0));
    }

    #[test]
    fn symmetric_frame_connection_is_torsion_free() {
        let fc = heisenberg();
        assert!(Connection::symmetric_frame(&fc).is_torsion_free(0.0));
        assert!(!Connection::frame_flat(&fc).is_torsion_free(0.0));
    }

    #[test]
    fn projective_change_rejects_torsion() {
        let fc = heisenberg();
        let u = Field::constant(Tensor::from_fn(3, 0, 1, |i| q(i[0] as i64)));
        assert!(Connection::frame_flat(&fc).projective_change(&u).is_err());
        let changed = Connection::symmetric_frame(&fc).projective_change(&u).unwrap();
        assert!(changed.is_torsion_free(0.0));
    }

    #[test]
    fn conformal_change_metricity_sign() {
        let fc = heisenberg();
        let u = Field::constant(Tensor::from_fn(3, 0, 1, |i| q(i[0] as i64 - 1)));
        let conn = conformal_change_lc(&metric(), &u, &fc).unwrap();
        let dg = conn.covariant_derivative(&metric()).unwrap();
        let expected = metric().outer(&u).scale(q(-2));
        assert_eq!(dg.as_constant(), expected.as_constant());
    }
}
