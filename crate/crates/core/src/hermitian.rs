//! Almost Hermitian structures and their canonical Hermitian connection.
//!
//! `G` here is the intrinsic torsion of the Levi-Civita connection. The
//! lowered form `G(X,Y,Z) = g(X, G(Y,Z))` is stored `[x][y][z]`.

use crate::almost_complex::{compatibility_residual, compute_g, complexify, validate_acs, GTensor};
use crate::connection::{levi_civita, Connection};
use crate::error::{GeometryError, Result};
use crate::field::Field;
use crate::frame::FrameComplex;
use crate::metric::{inverse_tensor, lower_tensor, validate_metric};
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

/// A condition with the residual it was decided on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Flag {
    pub holds: bool,
    pub residual: f64,
}

impl Flag {
    pub fn decide<S: Scalar>(field: &Field<S>, fc: &FrameComplex<S>, tol: f64) -> Self {
        Flag { holds: fc.negligible(field, tol), residual: fc.max_abs(field) }
    }
}

/// Metric, almost complex structure and everything derived from the
/// Levi-Civita connection.
#[derive(Clone, Debug)]
pub struct HermitianData<S: Scalar> {
    frame: FrameComplex<S>,
    g: Field<S>,
    j: Field<S>,
    omega: Field<S>,
    lc: Connection<S>,
    g_lc: GTensor<S>,
}

/// `g(JX,JY) - g(X,Y)`.
pub fn hermitian_defect<S: Scalar>(g: &Field<S>, j: &Field<S>) -> Result<Field<S>> {
    g.act(j, 0)?.act(j, 1)?.sub(g)
}

/// `g_+(X,Y) = ½(g(X,Y) + g(JX,JY))`, positive definite whenever `g` is.
pub fn hermitize_metric<S: Scalar>(g_raw: &Field<S>, j: &Field<S>, fc: &FrameComplex<S>) -> Result<Field<S>> {
    validate_metric(g_raw, fc)?;
    let out = g_raw.add(&g_raw.act(j, 0)?.act(j, 1)?)?.scale(S::half());
    validate_metric(&out, fc)?;
    Ok(out)
}

/// `ω(X,Y) = g(X,JY)`, i.e. `ω_{ab} = g_{ac} J^c_b`.
pub fn kahler_form<S: Scalar>(g: &Field<S>, j: &Field<S>) -> Result<Field<S>> {
    g.act(j, 1)
}

impl<S: Scalar> HermitianData<S> {
    pub fn new(g: Field<S>, j: Field<S>, frame: &FrameComplex<S>) -> Result<Self> {
        let tol = frame.default_tolerance();
        validate_metric(&g, frame)?;
        validate_acs(&j, frame, tol)?;
        let defect = hermitian_defect(&g, &j)?;
        if !frame.negligible(&defect, tol) {
            return Err(GeometryError::invariant("g(JX,JY) = g(X,Y)", frame.max_abs(&defect)));
        }
        let omega = kahler_form(&g, &j)?;
        let lc = levi_civita(&g, frame)?;
        let g_lc = compute_g(&lc, &j)?;
        Ok(HermitianData { frame: frame.clone(), g, j, omega, lc, g_lc })
    }

    pub fn frame(&self) -> &FrameComplex<S> {
        &self.frame
    }

    pub fn metric(&self) -> &Field<S> {
        &self.g
    }

    pub fn j(&self) -> &Field<S> {
        &self.j
    }

    pub fn omega(&self) -> &Field<S> {
        &self.omega
    }

    pub fn levi_civita(&self) -> &Connection<S> {
        &self.lc
    }

    pub fn g_tensor(&self) -> &GTensor<S> {
        &self.g_lc
    }

    /// `G(X,Y,Z) = g(X, G(Y,Z))`.
    pub fn lowered_g(&self) -> Field<S> {
        lower(self.g_lc.full(), &self.g)
    }

    /// Lowered `G_±`.
    pub fn lowered_parts(&self) -> (Field<S>, Field<S>) {
        (lower(self.g_lc.plus(), &self.g), lower(self.g_lc.minus(), &self.g))
    }
}

fn lower<S: Scalar>(t: &Field<S>, g: &Field<S>) -> Field<S> {
    let n = t.dim();
    t.zip(g, Shape::new(n, 0, 3), |t, g| lower_tensor(t, g, 0).expect("(1,2) tensor"))
}

/// `∇_X ω(Y,Z) = 2g(Y, JG(Z,X))`, laid out like a covariant derivative:
/// `[y][z][x]`.
pub fn nabla_omega<S: Scalar>(hd: &HermitianData<S>) -> Field<S> {
    let n = hd.frame.dim();
    Field::lift(&[hd.g_lc.full(), &hd.g, &hd.j], Shape::new(n, 0, 3), move |v| {
        let (gt, g, j) = (v[0], v[1], v[2]);
        Tensor::from_fn(n, 0, 3, |i| {
            let (y, z, x) = (i[0], i[1], i[2]);
            let mut acc = S::zero();
            for b in 0..n {
                for m in 0..n {
                    acc = acc + g[[y, b]].clone() * j[[b, m]].clone() * gt[[m, z, x]].clone();
                }
            }
            acc * S::from_i64(2)
        })
    })
}

/// `∇ω` computed directly with the Levi-Civita connection.
pub fn nabla_omega_direct<S: Scalar>(hd: &HermitianData<S>) -> Result<Field<S>> {
    hd.lc.covariant_derivative(&hd.omega)
}

/// Gray–Hervella style flags detected through `G`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AhClassification {
    /// `G_- = 0`.
    pub hermitian: Flag,
    /// `G(X,Y) + G(Y,X) = 0`.
    pub nearly_kahler: Flag,
    /// `Alt g(X, JG(Y,Z)) = 0`.
    pub almost_kahler: Flag,
    /// `G = 0`.
    pub kahler: Flag,
    /// `∇_a J^a_b = 0` for the Levi-Civita connection.
    pub semi_kahler: Flag,
}

/// `Alt_{X,Y,Z} g(X, JG(Y,Z))`.
pub fn almost_kahler_defect<S: Scalar>(hd: &HermitianData<S>) -> Result<Field<S>> {
    let jg = hd.g_lc.full().act(&hd.j, 0)?;
    lower(&jg, &hd.g).alt(&[0, 1, 2])
}

pub fn classify_ah<S: Scalar>(hd: &HermitianData<S>, tol: f64) -> Result<AhClassification> {
    let fc = &hd.frame;
    let g = hd.g_lc.full();
    let nk = g.add(&g.swap_lower(0, 1))?;
    Ok(AhClassification {
        hermitian: Flag::decide(hd.g_lc.minus(), fc, tol),
        nearly_kahler: Flag::decide(&nk, fc, tol),
        almost_kahler: Flag::decide(&almost_kahler_defect(hd)?, fc, tol),
        kahler: Flag::decide(g, fc, tol),
        semi_kahler: Flag::decide(&compatibility_residual(&hd.lc, &hd.j)?, fc, tol),
    })
}

/// Difference tensor `∇^T - ∇^LC` of the metric connection with torsion
/// `T`, stored like `G`: lowered, `G_{abc} = ½(T_{cab} - T_{abc} - T_{bca})`
/// with `T_{abc} = g_{am} T^m_{bc}`.
pub fn metric_torsion_to_difference<S: Scalar>(t: &Field<S>, g: &Field<S>, fc: &FrameComplex<S>) -> Result<Field<S>> {
    let n = fc.dim();
    if t.shape() != Shape::new(n, 1, 2) {
        return Err(GeometryError::ShapeMismatch("torsion must be a (1,2) tensor".into()));
    }
    let sym = t.sym(&[1, 2])?;
    if !fc.negligible(&sym, fc.default_tolerance()) {
        return Err(GeometryError::invariant("torsion antisymmetric in its arguments", fc.max_abs(&sym)));
    }
    Ok(t.zip(g, Shape::new(n, 1, 2), move |t, g| {
        let tl = lower_tensor(t, g, 0).expect("(1,2) tensor");
        let low = Tensor::from_fn(n, 0, 3, |i| {
            let (a, b, c) = (i[0], i[1], i[2]);
            (tl[[c, a, b]].clone() - tl[[a, b, c]].clone() - tl[[b, c, a]].clone()) * S::half()
        });
        let gi = inverse_tensor(g).expect("validated metric");
        Tensor::from_fn(n, 1, 2, |i| {
            (0..n).fold(S::zero(), |acc, m| acc + gi[[i[0], m]].clone() * low[[m, i[1], i[2]]].clone())
        })
    }))
}

/// Complex-linear part in the first argument of `G^T_g(·, X)`:
/// `G(Y,X) - JG(JY,X)`, which vanishes exactly for the canonical connection.
pub fn characteristic_condition<S: Scalar>(t: &Field<S>, hd: &HermitianData<S>) -> Result<Field<S>> {
    let gt = metric_torsion_to_difference(t, &hd.g, &hd.frame)?;
    gt.sub(&gt.act(&hd.j, 1)?.act(&hd.j, 0)?)
}

/// Residuals certifying the canonical Hermitian connection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certificate {
    /// `∇g`.
    pub metric: f64,
    /// `∇J`.
    pub complex: f64,
    /// Complex-linear part of the torsion difference tensor.
    pub condition: f64,
}

impl Certificate {
    pub fn passes(&self, tol: f64) -> bool {
        self.metric <= tol && self.complex <= tol && self.condition <= tol
    }
}

/// Residuals of an arbitrary connection against the three clauses.
pub fn certify<S: Scalar>(conn: &Connection<S>, hd: &HermitianData<S>) -> Result<Certificate> {
    let fc = &hd.frame;
    Ok(Certificate {
        metric: fc.max_abs(&conn.covariant_derivative(&hd.g)?),
        complex: fc.max_abs(&conn.covariant_derivative(&hd.j)?),
        condition: fc.max_abs(&characteristic_condition(&conn.torsion(), hd)?),
    })
}

/// `∇^G` from the Levi-Civita connection together with its certificate.
pub fn characteristic_connection<S: Scalar>(hd: &HermitianData<S>) -> Result<(Connection<S>, Certificate)> {
    let conn = complexify(&hd.lc, &hd.g_lc)?;
    let cert = certify(&conn, hd)?;
    Ok((conn, cert))
}

/// Project a raw `(1,2)` tensor onto perturbations `K` with each
/// `K(·,X)` both `g`-skew and commuting with `J`.
pub fn unitary_perturbation<S: Scalar>(raw: &Tensor<S>, g: &Tensor<S>, j: &Tensor<S>) -> Tensor<S> {
    let n = raw.dim();
    let gi = inverse_tensor(g).expect("metric");
    // g-skew part: K - g^{-1} K^T g per direction
    let low = lower_tensor(raw, g, 0).expect("(1,2)");
    let skew_low = Tensor::from_fn(n, 0, 3, |i| (low[[i[0], i[1], i[2]]].clone() - low[[i[1], i[0], i[2]]].clone()) * S::half());
    let skew = Tensor::from_fn(n, 1, 2, |i| {
        (0..n).fold(S::zero(), |acc, m| acc + gi[[i[0], m]].clone() * skew_low[[m, i[1], i[2]]].clone())
    });
    let jkj = skew.act(j, 1).and_then(|t| t.act(j, 0)).expect("(1,2)");
    skew.sub(&jkj).expect("shape").scale(&S::half())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::almost_complex::AlmostComplexStructure;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn flat() -> HermitianData<Rational> {
        let fc = FrameComplex::abelian(4);
        HermitianData::new(
            Field::constant(Tensor::from_fn(4, 0, 2, |i| if i[0] == i[1] { q(1) } else { q(0) })),
            Field::constant(AlmostComplexStructure::standard(4)),
            &fc,
        )
        .unwrap()
    }

    #[test]
    fn flat_kahler_flags() {
        let hd = flat();
        let c = classify_ah(&hd, 0.0).unwrap();
        for f in [c.hermitian, c.nearly_kahler, c.almost_kahler, c.kahler, c.semi_kahler] {
            assert!(f.holds);
        }
        let omega = hd.omega().as_constant().unwrap();
        assert_eq!(omega[[0, 1]], q(-1));
        assert_eq!(omega[[1, 0]], q(1));
    }

    #[test]
    fn hermitize_fixes_raw_metric() {
        let fc = FrameComplex::<Rational>::abelian(4);
        let j = Field::constant(AlmostComplexStructure::<Rational>::standard(4));
        let raw = Field::constant(Tensor::from_fn(4, 0, 2, |i| if i[0] == i[1] { q(i[0] as i64 + 2) } else if i[0] + i[1] == 1 { q(1) } else { q(0) }));
        assert!(hermitian_defect(&raw, &j).unwrap().as_constant().is_some_and(|t| !t.negligible(0.0)));
        let h = hermitize_metric(&raw, &j, &fc).unwrap();
        assert!(hermitian_defect(&h, &j).unwrap().as_constant().unwrap().negligible(0.0));
    }

    #[test]
    fn zero_torsion_gives_zero_difference() {
        let hd = flat();
        let t = Field::zeros(Shape::new(4, 1, 2));
        let d = metric_torsion_to_difference(&t, hd.metric(), hd.frame()).unwrap();
        assert!(d.as_constant().unwrap().negligible(0.0));
        let mut bad = Tensor::<Rational>::zeros(4, 1, 2);
        bad[[0, 1, 1]] = q(1);
        assert!(metric_torsion_to_difference(&Field::constant(bad), hd.metric(), hd.frame()).is_err());
    }
}
