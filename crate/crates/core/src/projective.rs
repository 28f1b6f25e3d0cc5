//! Projective almost complex structures.
//!
//! A projective class is represented by any torsion-free connection. The
//! A-form `A_c = -(1/n)(∇_a J^a_b) J^b_c` shifts by `Υ` under a projective
//! change, so changing by `-A` lands on the unique compatible member `∇^p`.
//!
//! Difference tensors follow coefficient storage: an entry `[b][c][a]`
//! modifies `∇_{e_a} e_c`. Operator form `D(X,Y) = ∇'_X Y - ∇_X Y` is its
//! lower-slot swap.

use crate::almost_complex::{compatibility_residual, compute_g, complexify, connection_family, GTensor};
use crate::connection::{projective_difference, Connection, GeodesicComparison};
use crate::error::{GeometryError, Result};
use crate::field::{hermitian_split, Field};
use crate::forms::exterior_derivative;
use crate::frame::FrameComplex;
use crate::hermitian::Flag;
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

fn require_torsion_free<S: Scalar>(conn: &Connection<S>) -> Result<()> {
    if !conn.is_torsion_free(conn.frame().default_tolerance()) {
        return Err(GeometryError::invariant("torsion-free representative", conn.torsion_residual()));
    }
    Ok(())
}

/// `A_c = -(1/n)(∇_a J^a_b) J^b_c`.
pub fn projective_a<S: Scalar>(conn: &Connection<S>, j: &Field<S>) -> Result<Field<S>> {
    require_torsion_free(conn)?;
    let n = conn.dim();
    let r = compatibility_residual(conn, j)?;
    let k = -(S::one() / S::from_i64(n as i64));
    Ok(r.zip(j, Shape::new(n, 0, 1), move |r, j| {
        Tensor::from_fn(n, 0, 1, |i| {
            (0..n).fold(S::zero(), |acc, b| acc + r[[b]].clone() * j[[b, i[0]]].clone()) * k.clone()
        })
    }))
}

/// The unique torsion-free connection in the class of `rep` with
/// `∇_a J^a_b = 0`.
pub fn p_connection<S: Scalar>(rep: &Connection<S>, j: &Field<S>) -> Result<Connection<S>> {
    let a = projective_a(rep, j)?;
    rep.projective_change(&a.neg())
}

/// Scale in the class of `rep`: the projective change by `Υ = -τ/(n+1)`,
/// `τ_a = Γ^c_{ca}`, which annihilates the volume trace. Constant
/// coefficients stay constant, so every homogeneous class has one.
pub fn scale<S: Scalar>(rep: &Connection<S>) -> Result<Connection<S>> {
    let n = rep.dim() as i64;
    let tau = rep.volume_form_trace();
    rep.projective_change(&tau.scale(-(S::one() / S::from_i64(n + 1))))
}

#[derive(Clone, Debug)]
pub struct ProjectiveScene<S: Scalar> {
    frame: FrameComplex<S>,
    rep: Connection<S>,
    j: Field<S>,
    a: Field<S>,
    p_conn: Connection<S>,
    gp: GTensor<S>,
    gp_conn: Connection<S>,
    jp_conn: Connection<S>,
}

impl<S: Scalar> ProjectiveScene<S> {
    pub fn new(rep: &Connection<S>, j: &Field<S>) -> Result<Self> {
        let a = projective_a(rep, j)?;
        let p_conn = rep.projective_change(&a.neg())?;
        let gp = compute_g(&p_conn, j)?;
        let gp_conn = complexify(&p_conn, &gp)?;
        let jp_conn = connection_family(&gp_conn, &gp, -S::one())?;
        Ok(ProjectiveScene { frame: rep.frame().clone(), rep: rep.clone(), j: j.clone(), a, p_conn, gp, gp_conn, jp_conn })
    }

    pub fn frame(&self) -> &FrameComplex<S> {
        &self.frame
    }

    pub fn representative(&self) -> &Connection<S> {
        &self.rep
    }

    pub fn j(&self) -> &Field<S> {
        &self.j
    }

    /// A-form of the representative.
    pub fn a(&self) -> &Field<S> {
        &self.a
    }

    /// `∇^p`.
    pub fn p_connection(&self) -> &Connection<S> {
        &self.p_conn
    }

    /// `G^p`.
    pub fn gp(&self) -> &GTensor<S> {
        &self.gp
    }

    /// `∇^{gp} = ∇^p + G^p`.
    pub fn gp_connection(&self) -> &Connection<S> {
        &self.gp_conn
    }

    /// `∇^{JP}`, the `t = -1` member of the family.
    pub fn jp(&self) -> &Connection<S> {
        &self.jp_conn
    }

    /// `∇^{p,t} = ∇^{gp} + t G^p_+`.
    pub fn family(&self, t: S) -> Result<Connection<S>> {
        connection_family(&self.gp_conn, &self.gp, t)
    }

    /// The four parts `[G_+^symm, G_+^skew, G_-^symm, G_-^skew]`.
    pub fn parts(&self) -> [Field<S>; 4] {
        gp_parts(&self.gp)
    }
}

pub fn gp_parts<S: Scalar>(g: &GTensor<S>) -> [Field<S>; 4] {
    [GTensor::symm(g.plus()), GTensor::skew(g.plus()), GTensor::symm(g.minus()), GTensor::skew(g.minus())]
}

/// Both formulations of compatibility.
#[derive(Clone, Debug)]
pub struct CompatibilityReport<S: Scalar> {
    /// `G^p_-^symm`.
    pub minus_symm: Field<S>,
    /// Polarisation of `(∇^p_X J)X - (∇^p_{JX} J)(JX)`.
    pub derivative_form: Field<S>,
    pub residual: f64,
    pub derivative_residual: f64,
}

/// Symmetrised `Q^b(X,Y) = (∇_X J)Y - (∇_{JX} J)(JY)`, stored `[b][x][y]`.
pub fn compatibility_derivative_form<S: Scalar>(conn: &Connection<S>, j: &Field<S>) -> Result<Field<S>> {
    let n = conn.dim();
    let nj = conn.covariant_derivative(j)?;
    nj.zip(j, Shape::new(n, 1, 2), move |d, j| {
        Tensor::from_fn(n, 1, 2, |i| {
            let (b, x, y) = (i[0], i[1], i[2]);
            let mut acc = d[[b, y, x]].clone();
            for m in 0..n {
                for p in 0..n {
                    acc = acc - d[[b, m, p]].clone() * j[[m, y]].clone() * j[[p, x]].clone();
                }
            }
            acc
        })
    })
    .sym(&[1, 2])
}

pub fn compatibility_check<S: Scalar>(ps: &ProjectiveScene<S>) -> Result<CompatibilityReport<S>> {
    let minus_symm = GTensor::symm(ps.gp.minus());
    let derivative_form = compatibility_derivative_form(&ps.p_conn, &ps.j)?;
    Ok(CompatibilityReport {
        residual: ps.frame.max_abs(&minus_symm),
        derivative_residual: ps.frame.max_abs(&derivative_form),
        minus_symm,
        derivative_form,
    })
}

/// `∇^{JP}` with its geodesic comparison against `∇^p` and torsion.
#[derive(Clone, Debug)]
pub struct JpReport<S: Scalar> {
    pub connection: Connection<S>,
    pub geodesics: GeodesicComparison<S>,
    pub torsion: Field<S>,
    /// `Tor(∇^{JP})` from the family formula, `-4 G_+^skew - 2 G_-^skew`.
    pub expected_torsion: Field<S>,
}

pub fn jp_connection<S: Scalar>(ps: &ProjectiveScene<S>, tol: f64) -> Result<JpReport<S>> {
    let geodesics = ps.p_conn.same_geodesics(&ps.jp_conn, tol)?;
    let [_, plus_skew, _, minus_skew] = ps.parts();
    let expected_torsion = plus_skew.scale(S::from_i64(-4)).add(&minus_skew.scale(S::from_i64(-2)))?;
    Ok(JpReport { connection: ps.jp_conn.clone(), geodesics, torsion: ps.jp_conn.torsion(), expected_torsion })
}

/// Geodesic comparison of `∇^{p,t}` with `∇^p`.
pub fn family_geodesics<S: Scalar>(ps: &ProjectiveScene<S>, t: S, tol: f64) -> Result<GeodesicComparison<S>> {
    ps.p_conn.same_geodesics(&ps.family(t)?, tol)
}

/// Outcome of recovering an almost complex connection with geodesics in
/// the class.
#[derive(Clone, Debug)]
pub struct Reconstruction<S: Scalar> {
    pub compatible: bool,
    /// `T = 2(∇' - ∇^{JP})` in operator form, `T^b_{xy}`.
    pub torsion: Field<S>,
    /// The projective shift between `∇' - ½Tor∇'` and `∇^p`.
    pub upsilon: Field<S>,
    pub antisymmetry_residual: f64,
    pub anti_hermitian_residual: f64,
}

/// Recover `T` from `∇' = ∇^{JP} + ½T`. Fails when `∇'` does not preserve
/// `J` or its geodesics leave the class.
pub fn reconstruct_from_complex<S: Scalar>(conn: &Connection<S>, ps: &ProjectiveScene<S>, tol: f64) -> Result<Reconstruction<S>> {
    let fc = &ps.frame;
    let n = fc.dim();
    let nj = conn.covariant_derivative(&ps.j)?;
    if !fc.negligible(&nj, tol) {
        return Err(GeometryError::invariant("almost complex connection", fc.max_abs(&nj)));
    }
    let torsion_free = conn.add_difference(&conn.torsion().scale(S::half()))?;
    let d = ps.p_conn.difference(&torsion_free)?;
    let inv = S::one() / S::from_i64(n as i64 + 1);
    let upsilon = d.map(Shape::new(n, 0, 1), move |d| {
        Tensor::from_fn(n, 0, 1, |i| (0..n).fold(S::zero(), |acc, b| acc + d[[b, b, i[0]]].clone()) * inv.clone())
    });
    let off_class = d.sub(&projective_difference(&upsilon))?;
    if !fc.negligible(&off_class, tol) {
        return Err(GeometryError::Invariant {
            what: "geodesics in the projective class",
            residual: fc.max_abs(&off_class),
            detail: "(difference is not of projective type)".into(),
        });
    }
    if !fc.negligible(&upsilon, tol) {
        return Err(GeometryError::Invariant {
            what: "geodesics in the projective class",
            residual: fc.max_abs(&upsilon),
            detail: "(nonzero projective shift for an almost complex connection)".into(),
        });
    }
    let torsion = ps.jp_conn.difference(conn)?.swap_lower(0, 1).scale(S::from_i64(2));
    let antisym = torsion.sym(&[1, 2])?;
    let anti_herm = hermitian_split(&torsion, &ps.j, (1, 2))?.plus;
    let compat = compatibility_check(ps)?.residual;
    let compatible = compat <= tol && !(S::EXACT && compat > 0.0);
    Ok(Reconstruction {
        compatible,
        antisymmetry_residual: fc.max_abs(&antisym),
        anti_hermitian_residual: fc.max_abs(&anti_herm),
        torsion,
        upsilon,
    })
}

/// `F^{∇p}` by two routes with its Hermitian parts
/// `F_±(X,Y) = F(X,Y) ± F(JX,JY)`.
#[derive(Clone, Debug)]
pub struct ProjectiveFaraday<S: Scalar> {
    /// `-(1/(n+1)) R_{ab}{}^c{}_c` of `∇^p`.
    pub curvature_route: Field<S>,
    /// `dA^∇` for the scale `∇` of the class.
    pub scale_route: Field<S>,
    pub plus: Field<S>,
    pub minus: Field<S>,
}

pub fn projective_faraday<S: Scalar>(ps: &ProjectiveScene<S>) -> Result<ProjectiveFaraday<S>> {
    let n = ps.frame.dim() as i64;
    let curvature_route = ps.p_conn.volume_trace().scale(-(S::one() / S::from_i64(n + 1)));
    let sc = scale(&ps.rep)?;
    let scale_route = exterior_derivative(&projective_a(&sc, &ps.j)?, &ps.frame)?;
    let jj = curvature_route.act(&ps.j, 0)?.act(&ps.j, 1)?;
    Ok(ProjectiveFaraday {
        plus: curvature_route.add(&jj)?,
        minus: curvature_route.sub(&jj)?,
        curvature_route,
        scale_route,
    })
}

/// Projective analogues of the conformal Gray–Hervella rows.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectiveClassification {
    /// `G^p = 0`.
    pub gp_zero: Flag,
    /// `G^p(X,X) = 0`.
    pub pnk: Flag,
    /// `G^p = G^p_+`.
    pub gp_plus_only: Flag,
    /// `G^p = G^p_-`.
    pub gp_minus_only: Flag,
    /// `G^p_-(X,X) = 0`.
    pub compatible: Flag,
    /// `G^p_-^skew = 0`, equivalently `N_J = 0`.
    pub integrable: Flag,
    /// `G^p_+(X,X) = 0`.
    pub gp_plus_diag_zero: Flag,
}

pub fn classify_projective<S: Scalar>(ps: &ProjectiveScene<S>, tol: f64) -> Result<ProjectiveClassification> {
    let fc = &ps.frame;
    let [plus_symm, _, minus_symm, minus_skew] = ps.parts();
    Ok(ProjectiveClassification {
        gp_zero: Flag::decide(ps.gp.full(), fc, tol),
        pnk: Flag::decide(&GTensor::symm(ps.gp.full()), fc, tol),
        gp_plus_only: Flag::decide(ps.gp.minus(), fc, tol),
        gp_minus_only: Flag::decide(ps.gp.plus(), fc, tol),
        compatible: Flag::decide(&minus_symm, fc, tol),
        integrable: Flag::decide(&minus_skew, fc, tol),
        gp_plus_diag_zero: Flag::decide(&plus_symm, fc, tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::almost_complex::AlmostComplexStructure;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn random_symmetric(n: usize, seed: i64) -> Connection<Rational> {
        let fc = FrameComplex::abelian(n);
        let gamma = Tensor::from_fn(n, 1, 2, |i| {
            let (b, c, a) = (i[0] as i64, i[1].min(i[2]) as i64, i[1].max(i[2]) as i64);
            q((b * 7 + c * 3 + a * 5 + seed * (b + 1)) % 5 - 2)
        });
        Connection::new(Field::constant(gamma), &fc).unwrap()
    }

    #[test]
    fn p_connection_is_compatible_and_class_invariant() {
        let j = Field::constant(AlmostComplexStructure::standard(4));
        let rep = random_symmetric(4, 1);
        let ps = ProjectiveScene::new(&rep, &j).unwrap();
        assert!(compatibility_residual(ps.p_connection(), &j).unwrap().as_constant().unwrap().negligible(0.0));
        let shifted = rep.projective_change(&Field::constant(Tensor::from_fn(4, 0, 1, |i| q(i[0] as i64 - 1)))).unwrap();
        let other = ProjectiveScene::new(&shifted, &j).unwrap();
        assert_eq!(other.p_connection().gamma().as_constant(), ps.p_connection().gamma().as_constant());
    }

    #[test]
    fn torsion_rejected() {
        let fc = FrameComplex::<Rational>::abelian(2);
        let gamma = Tensor::from_fn(2, 1, 2, |i| if i == [0, 0, 1] { q(1) } else { q(0) });
        let conn = Connection::new(Field::constant(gamma), &fc).unwrap();
        let j = Field::constant(AlmostComplexStructure::standard(2));
        assert!(projective_a(&conn, &j).is_err());
    }

    #[test]
    fn jp_torsion_matches_family_formula() {
        let j = Field::constant(AlmostComplexStructure::standard(4));
        let ps = ProjectiveScene::new(&random_symmetric(4, 3), &j).unwrap();
        let report = jp_connection(&ps, 0.0).unwrap();
        assert!(report.torsion.sub(&report.expected_torsion).unwrap().as_constant().unwrap().negligible(0.0));
    }

    #[test]
    fn scale_kills_volume_trace_and_routes_agree() {
        let fc = FrameComplex::from_structure_entries(2, &[(0, 0, 1, q(-1)), (1, 0, 1, q(2))], 1).unwrap();
        let rep = Connection::symmetric_frame(&fc);
        let sc = scale(&rep).unwrap();
        assert!(sc.volume_form_trace().as_constant().unwrap().negligible(0.0));
        let j = Field::constant(AlmostComplexStructure::standard(2));
        let ps = ProjectiveScene::new(&rep, &j).unwrap();
        let f = projective_faraday(&ps).unwrap();
        assert_eq!(f.curvature_route.as_constant(), f.scale_route.as_constant());
    }
}
