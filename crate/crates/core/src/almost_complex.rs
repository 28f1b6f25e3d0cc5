//! Almost complex structures and the intrinsic torsion `G` of a connection.
//!
//! For a connection `∇` and almost complex structure `J`,
//! `G(X,Y) = ½(∇_Y J)JX = -½J(∇_Y J)X`, stored `[b][c][a]` as
//! `G^b_{ca} = ½(∇_a J^b_d)J^d_c`. Adding `G` to the coefficients gives an
//! almost complex connection `∇^G_X Y = ∇_X Y + G(Y,X)`.

use alloc::format;

use crate::connection::Connection;
use crate::error::{GeometryError, Result};
use crate::field::{hermitian_split, Field, HermitianSplit};
use crate::frame::FrameComplex;
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

/// A validated `(1,1)` field with `J² = -1`.
#[derive(Clone, Debug)]
pub struct AlmostComplexStructure<S: Scalar> {
    j: Field<S>,
}

/// Largest entry of `J² + 1` over the samples.
pub fn square_residual<S: Scalar>(j: &Field<S>, fc: &FrameComplex<S>) -> f64 {
    let n = j.dim();
    let sq = j.map(Shape::new(n, 1, 1), |t| t.compose(t).add(&Tensor::identity(t.dim())).expect("same shape"));
    fc.max_abs(&sq)
}

/// Check that `j` is an almost complex structure on `fc`.
pub fn validate_acs<S: Scalar>(j: &Field<S>, fc: &FrameComplex<S>, tol: f64) -> Result<()> {
    let n = fc.dim();
    if n % 2 == 1 {
        return Err(GeometryError::Dimension(n, "almost complex structures need even dimension"));
    }
    if j.shape() != Shape::new(n, 1, 1) {
        return Err(GeometryError::ShapeMismatch(format!("J must be (1,1) in dimension {n}, got {:?}", j.shape())));
    }
    for x in fc.samples() {
        let t = j.at(x);
        let sq = t.compose(&t).add(&Tensor::identity(n))?;
        if !sq.negligible(tol) {
            let mut worst = (0, 0, 0.0);
            for a in 0..n {
                for c in 0..n {
                    let v = sq[[a, c]].abs().to_f64();
                    if v > worst.2 {
                        worst = (a, c, v);
                    }
                }
            }
            return Err(GeometryError::Invariant {
                what: "J^2 = -1",
                residual: worst.2,
                detail: format!(" at entry ({}, {})", worst.0 + 1, worst.1 + 1),
            });
        }
        let trace = t.contract(0, 1)?;
        if !trace.value().negligible(tol) {
            return Err(GeometryError::invariant("trace J = 0", trace.value().abs().to_f64()));
        }
    }
    Ok(())
}

impl<S: Scalar> AlmostComplexStructure<S> {
    pub fn new(j: Field<S>, fc: &FrameComplex<S>, tol: f64) -> Result<Self> {
        validate_acs(&j, fc, tol)?;
        Ok(AlmostComplexStructure { j })
    }

    /// `J_0 e_{2k} = e_{2k+1}`, `J_0 e_{2k+1} = -e_{2k}` (zero-based).
    pub fn standard(n: usize) -> Tensor<S> {
        Tensor::from_fn(n, 1, 1, |i| {
            let (a, b) = (i[0], i[1]);
            if b % 2 == 0 && a == b + 1 {
                S::one()
            } else if b % 2 == 1 && a + 1 == b {
                -S::one()
            } else {
                S::zero()
            }
        })
    }

    pub fn field(&self) -> &Field<S> {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }
}

/// The intrinsic torsion `G` of a connection with its Hermitian split over
/// the vector arguments.
#[derive(Clone, Debug)]
pub struct GTensor<S: Scalar> {
    full: Field<S>,
    split: HermitianSplit<S>,
}

impl<S: Scalar> GTensor<S> {
    pub fn from_full(full: Field<S>, j: &Field<S>) -> Result<Self> {
        let split = hermitian_split(&full, j, (1, 2))?;
        Ok(GTensor { full, split })
    }

    pub fn full(&self) -> &Field<S> {
        &self.full
    }

    /// `G_+(X,Y) = ½(G(X,Y) + G(JX,JY))`.
    pub fn plus(&self) -> &Field<S> {
        &self.split.plus
    }

    /// `G_-(X,Y) = ½(G(X,Y) - G(JX,JY))`.
    pub fn minus(&self) -> &Field<S> {
        &self.split.minus
    }

    pub fn split(&self) -> &HermitianSplit<S> {
        &self.split
    }

    /// `H^symm(X,Y) = ½(H(X,Y) + H(Y,X))` of a part of `G`.
    pub fn symm(part: &Field<S>) -> Field<S> {
        part.sym(&[1, 2]).expect("(1,2) field")
    }

    /// `H^skew(X,Y) = ½(H(X,Y) - H(Y,X))`.
    pub fn skew(part: &Field<S>) -> Field<S> {
        part.alt(&[1, 2]).expect("(1,2) field")
    }
}

/// `G^b_{ca} = ½(∇_a J^b_d) J^d_c`.
pub fn compute_g<S: Scalar>(conn: &Connection<S>, j: &Field<S>) -> Result<GTensor<S>> {
    let nj = conn.covariant_derivative(j)?;
    let n = conn.dim();
    let full = nj.zip(j, Shape::new(n, 1, 2), move |d, j| {
        Tensor::from_fn(n, 1, 2, |i| {
            let (b, c, a) = (i[0], i[1], i[2]);
            (0..n).fold(S::zero(), |acc, m| acc + d[[b, m, a]].clone() * j[[m, c]].clone()) * S::half()
        })
    });
    GTensor::from_full(full, j)
}

/// `∇^G = ∇ + G`, the almost complex connection attached to `∇`.
pub fn complexify<S: Scalar>(conn: &Connection<S>, g: &GTensor<S>) -> Result<Connection<S>> {
    conn.add_difference(g.full())
}

/// `∇^t_X Y = ∇^G_X Y + t G_+(X,Y)`.
pub fn connection_family<S: Scalar>(conn_g: &Connection<S>, g: &GTensor<S>, t: S) -> Result<Connection<S>> {
    conn_g.add_difference(&g.plus().swap_lower(0, 1).scale(t))
}

/// `∇^KN = ∇^G + G_+`, the `t = 1` member of the family.
pub fn kn_connection<S: Scalar>(conn: &Connection<S>, j: &Field<S>) -> Result<Connection<S>> {
    let g = compute_g(conn, j)?;
    connection_family(&complexify(conn, &g)?, &g, S::one())
}

fn require_torsion_free<S: Scalar>(conn: &Connection<S>) -> Result<()> {
    if !conn.is_torsion_free(conn.frame().default_tolerance()) {
        return Err(GeometryError::invariant("torsion-free connection", conn.torsion_residual()));
    }
    Ok(())
}

/// Nijenhuis tensor, normalised so that for torsion-free `∇`
/// `N(X,Y) = G_-(Y,X) - G_-(X,Y)`; a quarter of the bracket expression.
pub fn nijenhuis<S: Scalar>(conn: &Connection<S>, j: &Field<S>) -> Result<Field<S>> {
    require_torsion_free(conn)?;
    let g = compute_g(conn, j)?;
    g.minus().swap_lower(0, 1).sub(g.minus())
}

/// `4N(X,Y) = (∇_X J)JY - (∇_Y J)JX + (∇_{JX} J)Y - (∇_{JY} J)X`.
pub fn nijenhuis_from_derivative<S: Scalar>(conn: &Connection<S>, j: &Field<S>) -> Result<Field<S>> {
    require_torsion_free(conn)?;
    let n = conn.dim();
    let nj = conn.covariant_derivative(j)?;
    Ok(nj.zip(j, Shape::new(n, 1, 2), move |d, j| {
        let quarter = S::from_ratio(1, 4);
        Tensor::from_fn(n, 1, 2, |i| {
            let (b, x, y) = (i[0], i[1], i[2]);
            let mut acc = S::zero();
            for m in 0..n {
                acc = acc + d[[b, m, x]].clone() * j[[m, y]].clone() - d[[b, m, y]].clone() * j[[m, x]].clone()
                    + j[[m, x]].clone() * d[[b, y, m]].clone()
                    - j[[m, y]].clone() * d[[b, x, m]].clone();
            }
            acc * quarter.clone()
        })
    }))
}

/// Classical Nijenhuis tensor `[JX,JY] - J[JX,Y] - J[X,JY] - [X,Y]` from
/// brackets alone; equals `4N`.
pub fn classical_nijenhuis<S: Scalar>(j: &Field<S>, fc: &FrameComplex<S>) -> Field<S> {
    let n = fc.dim();
    let dj = fc.derivative(j);
    let c = fc.structure();
    Field::lift(&[j, &dj, &c], Shape::new(n, 1, 2), move |v| {
        let (j, dj, c) = (v[0], v[1], v[2]);
        // [u, w]^m = u^i e_i(w^m) - w^i e_i(u^m) + u^i w^k c^m_{ik}
        // for u, w among {e_x, J e_x}; `col` selects the vector, `dcol` its derivative.
        let vec = |x: usize, twisted: bool, m: usize| -> S {
            if twisted {
                j[[m, x]].clone()
            } else if m == x {
                S::one()
            } else {
                S::zero()
            }
        };
        let dvec = |x: usize, twisted: bool, m: usize, i: usize| -> S {
            if twisted {
                dj[[m, x, i]].clone()
            } else {
                S::zero()
            }
        };
        let bracket = |x: usize, tx: bool, y: usize, ty: bool, m: usize| -> S {
            let mut acc = S::zero();
            for i in 0..n {
                acc = acc + vec(x, tx, i) * dvec(y, ty, m, i) - vec(y, ty, i) * dvec(x, tx, m, i);
                for k in 0..n {
                    acc = acc + vec(x, tx, i) * vec(y, ty, k) * c[[m, i, k]].clone();
                }
            }
            acc
        };
        Tensor::from_fn(n, 1, 2, |i| {
            let (b, x, y) = (i[0], i[1], i[2]);
            let mut acc = bracket(x, true, y, true, b) - bracket(x, false, y, false, b);
            for m in 0..n {
                acc = acc - j[[b, m]].clone() * (bracket(x, true, y, false, m) + bracket(x, false, y, true, m));
            }
            acc
        })
    })
}

/// `∇J` residual of a connection; zero iff it is almost complex.
pub fn nabla_j<S: Scalar>(conn: &Connection<S>, j: &Field<S>) -> Result<Field<S>> {
    conn.covariant_derivative(j)
}

/// The four traces whose joint vanishing characterises compatibility.
#[derive(Clone, Debug)]
pub struct CompatibilityTraces<S: Scalar> {
    /// `∇_a J^a_b`.
    pub divergence: Field<S>,
    /// Trace of `Y ↦ G(X,Y)`, i.e. `G^b_{cb}`.
    pub g_trace: Field<S>,
    /// Trace of `Y ↦ JG(X,Y)`.
    pub jg_trace: Field<S>,
    /// Trace of `Y ↦ G(X,JY)`.
    pub g_j_trace: Field<S>,
    /// Trace of `Y ↦ G(JX,JY)`.
    pub g_jj_trace: Field<S>,
}

/// `∇_a J^a_b`; zero iff `∇` is compatible with `J`.
pub fn compatibility_residual<S: Scalar>(conn: &Connection<S>, j: &Field<S>) -> Result<Field<S>> {
    conn.covariant_derivative(j)?.contract(0, 2)
}

pub fn compatibility_traces<S: Scalar>(conn: &Connection<S>, j: &Field<S>) -> Result<CompatibilityTraces<S>> {
    let n = conn.dim();
    let g = compute_g(conn, j)?;
    let divergence = compatibility_residual(conn, j)?;
    let one = Shape::new(n, 0, 1);
    let g_trace = g.full().contract(0, 2)?;
    let jg_trace = g.full().act(j, 0)?.contract(0, 2)?;
    let g_j_trace = g.full().act(j, 2)?.contract(0, 2)?;
    let g_jj_trace = g.full().act(j, 1)?.act(j, 2)?.contract(0, 2)?;
    debug_assert_eq!(g_jj_trace.shape(), one);
    Ok(CompatibilityTraces { divergence, g_trace, jg_trace, g_j_trace, g_jj_trace })
}

/// Defects of the structural identities every `G` satisfies: anti-linearity
/// `G(JX,Y) + JG(X,Y)` and the first-slot traces of `G` and `JG`.
pub fn g_identity_residuals<S: Scalar>(g: &GTensor<S>, j: &Field<S>, fc: &FrameComplex<S>) -> Result<[f64; 3]> {
    let anti = g.full().act(j, 1)?.add(&g.full().act(j, 0)?)?;
    let tr = g.full().contract(0, 1)?;
    let jtr = g.full().act(j, 0)?.contract(0, 1)?;
    Ok([fc.max_abs(&anti), fc.max_abs(&tr), fc.max_abs(&jtr)])
}

/// Part of a `(1,2)` tensor that is complex linear in its first argument:
/// `K(JX,Y) = JK(X,Y)`.
pub fn complex_linear_first<S: Scalar>(k: &Tensor<S>, j: &Tensor<S>) -> Tensor<S> {
    let jkj = k.act(j, 1).and_then(|t| t.act(j, 0)).expect("(1,2) tensor");
    k.sub(&jkj).expect("same shape").scale(&S::half())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn standard_structure_squares_to_minus_one() {
        let fc = FrameComplex::<Rational>::abelian(6);
        let j = Field::constant(AlmostComplexStructure::<Rational>::standard(6));
        assert!(AlmostComplexStructure::new(j, &fc, 0.0).is_ok());
        let bad = Field::constant(Tensor::<Rational>::identity(6));
        let err = validate_acs(&bad, &fc, 0.0).unwrap_err();
        assert!(format!("{err}").contains("entry (1, 1)"));
        assert!(validate_acs(&Field::constant(Tensor::<Rational>::identity(3)), &FrameComplex::abelian(3), 0.0).is_err());
    }

    #[test]
    fn flat_constant_structure_has_no_intrinsic_torsion() {
        let fc = FrameComplex::<Rational>::abelian(4);
        let j = Field::constant(AlmostComplexStructure::<Rational>::standard(4));
        let g = compute_g(&Connection::frame_flat(&fc), &j).unwrap();
        assert!(g.full().as_constant().unwrap().negligible(0.0));
        assert!(nijenhuis(&Connection::frame_flat(&fc), &j).unwrap().as_constant().unwrap().negligible(0.0));
    }

    #[test]
    fn complex_linear_projection() {
        let j = AlmostComplexStructure::<Rational>::standard(4);
        let k = Tensor::from_fn(4, 1, 2, |i| q(((i[0] * 7 + i[1] * 3 + i[2]) % 5) as i64 - 2));
        let p = complex_linear_first(&k, &j);
        assert_eq!(p.act(&j, 1).unwrap(), p.act(&j, 0).unwrap());
    }
}
