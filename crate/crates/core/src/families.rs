//! Concrete structures used as fixtures: parameter families on Lie groups,
//! nilmanifolds, a homogeneous nearly Kähler space, constructed projective
//! strata and chart-based examples with non-constant data.

use alloc::format;
use alloc::vec::Vec;

use crate::almost_complex::{compatibility_residual, compute_g, AlmostComplexStructure};
use crate::connection::Connection;
use crate::error::{GeometryError, Result};
use crate::field::Field;
use crate::frame::{Differencing, FrameComplex};
use crate::linalg::Matrix;
use crate::projective::gp_parts;
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

/// Frame, metric and almost complex structure.
#[derive(Clone, Debug)]
pub struct AlmostHermitianFixture<S: Scalar> {
    pub frame: FrameComplex<S>,
    pub g: Field<S>,
    pub j: Field<S>,
}

/// Frame, torsion-free representative and almost complex structure, with
/// an optional metric for conformal comparisons.
#[derive(Clone, Debug)]
pub struct ProjectiveFixture<S: Scalar> {
    pub frame: FrameComplex<S>,
    pub rep: Connection<S>,
    pub j: Field<S>,
    pub g: Option<Field<S>>,
}

fn identity_metric<S: Scalar>(n: usize) -> Field<S> {
    Field::constant(Tensor::from_fn(n, 0, 2, |i| if i[0] == i[1] { S::one() } else { S::zero() }))
}

/// Homogeneous frame from structure equations `dθ^i = Σ v θ^j ∧ θ^k`,
/// given as `(i, j, k, v)`; sets `c^i_{jk} = -v`.
pub fn frame_from_structure_equations<S: Scalar>(dim: usize, terms: &[(usize, usize, usize, S)], orientation: i8) -> Result<FrameComplex<S>> {
    let mut c = Tensor::<S>::zeros(dim, 1, 2);
    for (i, j, k, v) in terms {
        let (i, j, k) = (*i, *j, *k);
        if i >= dim || j >= dim || k >= dim || j == k {
            return Err(GeometryError::ShapeMismatch(format!("bad structure equation term ({i},{j},{k})")));
        }
        c[[i, j, k]] = c[[i, j, k]].clone() - v.clone();
        c[[i, k, j]] = c[[i, k, j]].clone() + v.clone();
    }
    FrameComplex::homogeneous(c, orientation)
}

/// Flat torus: abelian frame, Euclidean metric, standard `J`.
pub fn kaehler_flat<S: Scalar>(n: usize) -> Result<AlmostHermitianFixture<S>> {
    if n == 0 || n % 2 == 1 {
        return Err(GeometryError::Dimension(n, "almost complex structures need even dimension"));
    }
    Ok(AlmostHermitianFixture {
        frame: FrameComplex::abelian(n),
        g: identity_metric(n),
        j: Field::constant(AlmostComplexStructure::standard(n)),
    })
}

/// Constants of the four-dimensional family `ℝ × G`:
/// `dθ^i = x_3 θ^1∧θ^2 + x_2 θ^3∧θ^1 + x_1 θ^2∧θ^3` for `x ∈ {a, b, c}`,
/// with the third constants fixed by the Jacobi identity.
#[derive(Clone, Debug, PartialEq)]
pub struct MaxwellParams<S> {
    pub a1: S,
    pub a2: S,
    pub b1: S,
    pub b2: S,
    pub c1: S,
    pub c2: S,
}

impl<S: Scalar> Default for MaxwellParams<S> {
    fn default() -> Self {
        let q = S::from_i64;
        MaxwellParams { a1: q(1), a2: q(2), b1: q(1), b2: q(1), c1: q(1), c2: q(3) }
    }
}

impl<S: Scalar> MaxwellParams<S> {
    /// The sub-family `b_1 = a_2`, `b_2 = s a_2`, `c_2 = s c_1`.
    pub fn maxwell(s: S, a1: S, a2: S, c1: S) -> Self {
        MaxwellParams { b1: a2.clone(), b2: s.clone() * a2.clone(), c2: s * c1.clone(), a1, a2, c1 }
    }

    /// `a_2 b_1 - a_1 b_2`, which must not vanish.
    pub fn denominator(&self) -> S {
        self.a2.clone() * self.b1.clone() - self.a1.clone() * self.b2.clone()
    }

    /// `(a_3, b_3, c_3)`.
    pub fn third_constants(&self) -> Result<(S, S, S)> {
        let d = self.denominator();
        if d.is_zero() {
            return Err(GeometryError::Singular("parameters with a2*b1 - a1*b2 = 0"));
        }
        let MaxwellParams { a1, a2, b1, b2, c1, c2 } = self.clone();
        let a3 = (a2.clone() * a2.clone() * c1.clone() - a1.clone() * b2.clone() * c1.clone() - a1.clone() * a2.clone() * c2.clone()
            + a1.clone() * b1.clone() * c2.clone())
            / d.clone();
        let b3 = (a2.clone() * b2.clone() * c1.clone() - b1.clone() * b2.clone() * c1.clone() + b1.clone() * b1.clone() * c2.clone()
            - a1.clone() * b2.clone() * c2.clone())
            / d.clone();
        let c3 = (-b2 * c1.clone() * c1.clone() + a2 * c1.clone() * c2.clone() + b1 * c1 * c2.clone() - a1 * c2.clone() * c2) / d;
        Ok((a3, b3, c3))
    }

    pub fn frame(&self) -> Result<FrameComplex<S>> {
        let (a3, b3, c3) = self.third_constants()?;
        let rows = [
            (a3, self.a2.clone(), self.a1.clone()),
            (b3, self.b2.clone(), self.b1.clone()),
            (c3, self.c2.clone(), self.c1.clone()),
        ];
        let mut terms = Vec::new();
        for (i, (x3, x2, x1)) in rows.into_iter().enumerate() {
            terms.push((i, 0, 1, x3));
            terms.push((i, 2, 0, x2));
            terms.push((i, 1, 2, x1));
        }
        frame_from_structure_equations(4, &terms, 1)
    }
}

/// `J = θ^1⊗e_3 - θ^3⊗e_1 + θ^2⊗e_4 - θ^4⊗e_2` (one-based labels).
pub fn maxwell_j<S: Scalar>() -> Tensor<S> {
    let mut j = Tensor::zeros(4, 1, 1);
    j[[2, 0]] = S::one();
    j[[0, 2]] = -S::one();
    j[[3, 1]] = S::one();
    j[[1, 3]] = -S::one();
    j
}

/// Euclidean metric and the structure above on the family's frame.
pub fn maxwell_family<S: Scalar>(p: &MaxwellParams<S>) -> Result<AlmostHermitianFixture<S>> {
    Ok(AlmostHermitianFixture { frame: p.frame()?, g: identity_metric(4), j: Field::constant(maxwell_j()) })
}

/// Kodaira–Thurston nilmanifold `dθ^3 = θ^0∧θ^1` with the almost Kähler
/// structure `ω = θ^0∧θ^3 + θ^1∧θ^2`; `J` is not integrable.
pub fn kodaira_thurston<S: Scalar>() -> Result<AlmostHermitianFixture<S>> {
    let frame = frame_from_structure_equations(4, &[(3, 0, 1, S::one())], 1)?;
    let mut j = Tensor::zeros(4, 1, 1);
    j[[0, 3]] = S::one();
    j[[3, 0]] = -S::one();
    j[[1, 2]] = S::one();
    j[[2, 1]] = -S::one();
    Ok(AlmostHermitianFixture { frame, g: identity_metric(4), j: Field::constant(j) })
}

/// Iwasawa manifold: `dθ^4 = θ^0∧θ^2 - θ^1∧θ^3`, `dθ^5 = θ^0∧θ^3 + θ^1∧θ^2`
/// with its integrable `J`; Hermitian, not Kähler.
pub fn iwasawa<S: Scalar>() -> Result<AlmostHermitianFixture<S>> {
    let one = S::one();
    let frame = frame_from_structure_equations(
        6,
        &[(4, 0, 2, one.clone()), (4, 1, 3, -one.clone()), (5, 0, 3, one.clone()), (5, 1, 2, one)],
        1,
    )?;
    Ok(AlmostHermitianFixture { frame, g: identity_metric(6), j: Field::constant(AlmostComplexStructure::standard(6)) })
}

/// `S^3 × S^3 = SU(2)^3 / ΔSU(2)` written on the simply transitive
/// `SU(2) × SU(2)`, with the normal metric and `J = (2σ + 1)/√3` for the
/// cyclic automorphism `σ`. Strictly nearly Kähler. Float only.
pub fn nearly_kahler_s3s3() -> Result<AlmostHermitianFixture<f64>> {
    let mut terms = Vec::new();
    for block in [0usize, 3] {
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            // [E_i, E_j] = E_k, so dθ^k = -θ^i ∧ θ^j
            terms.push((block + k, block + i, block + j, -1.0));
        }
    }
    let frame = frame_from_structure_equations(6, &terms, 1)?;
    let g = Tensor::from_fn(6, 0, 2, |i| {
        let (a, b) = (i[0], i[1]);
        if a % 3 != b % 3 {
            0.0
        } else if a / 3 == b / 3 {
            2.0 / 3.0
        } else {
            -1.0 / 3.0
        }
    });
    let r = 1.0 / libm::sqrt(3.0);
    let mut j = Tensor::zeros(6, 1, 1);
    for i in 0..3 {
        j[[i, i]] = r;
        j[[3 + i, i]] = 2.0 * r;
        j[[i, 3 + i]] = -2.0 * r;
        j[[3 + i, 3 + i]] = -r;
    }
    Ok(AlmostHermitianFixture { frame, g: Field::constant(g), j: Field::constant(j) })
}

/// Parameters of the general torsion-free connection on a surface with
/// `dθ^1 = α θ^1∧θ^2`, `dθ^2 = β θ^1∧θ^2`:
/// `Γ^1_1 = aθ^1 + (α+b)θ^2`, `Γ^1_2 = bθ^1 + cθ^2`,
/// `Γ^2_1 = fθ^1 + pθ^2`, `Γ^2_2 = (p-β)θ^1 + qθ^2`.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceParams<S> {
    pub alpha: S,
    pub beta: S,
    pub a: S,
    pub b: S,
    pub c: S,
    pub f: S,
    pub p: S,
    pub q: S,
}

impl<S: Scalar> SurfaceParams<S> {
    /// Impose `c = a + β - 2p`, `f = -α - 2b + q`.
    pub fn compatible(mut self) -> Self {
        self.c = self.a.clone() + self.beta.clone() - S::from_i64(2) * self.p.clone();
        self.f = -self.alpha.clone() - S::from_i64(2) * self.b.clone() + self.q.clone();
        self
    }

    /// Coefficients `Γ[i][j][k] = Γ^i_{jk}`.
    pub fn gamma(&self) -> Tensor<S> {
        let mut t = Tensor::zeros(2, 1, 2);
        t[[0, 0, 0]] = self.a.clone();
        t[[0, 0, 1]] = self.alpha.clone() + self.b.clone();
        t[[0, 1, 0]] = self.b.clone();
        t[[0, 1, 1]] = self.c.clone();
        t[[1, 0, 0]] = self.f.clone();
        t[[1, 0, 1]] = self.p.clone();
        t[[1, 1, 0]] = self.p.clone() - self.beta.clone();
        t[[1, 1, 1]] = self.q.clone();
        t
    }

    pub fn frame(&self) -> Result<FrameComplex<S>> {
        frame_from_structure_equations(2, &[(0, 0, 1, self.alpha.clone()), (1, 0, 1, self.beta.clone())], 1)
    }
}

/// `J = ε(θ^1⊗e_2 - θ^2⊗e_1)`.
pub fn surface_j<S: Scalar>(epsilon: i8) -> Tensor<S> {
    let e = S::from_i64(epsilon.signum() as i64);
    let mut j = Tensor::zeros(2, 1, 1);
    j[[1, 0]] = e.clone();
    j[[0, 1]] = -e;
    j
}

pub fn surface_family<S: Scalar>(params: &SurfaceParams<S>, epsilon: i8) -> Result<ProjectiveFixture<S>> {
    let frame = params.frame()?;
    let rep = Connection::new(Field::constant(params.gamma()), &frame)?;
    Ok(ProjectiveFixture { frame, rep, j: Field::constant(surface_j(epsilon)), g: Some(identity_metric(2)) })
}

/// The four parts of `G^p`: `G_+^symm`, `G_+^skew`, `G_-^symm`, `G_-^skew`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GpPart {
    PlusSymm,
    PlusSkew,
    MinusSymm,
    MinusSkew,
}

impl GpPart {
    pub const ALL: [GpPart; 4] = [GpPart::PlusSymm, GpPart::PlusSkew, GpPart::MinusSymm, GpPart::MinusSkew];

    fn index(self) -> usize {
        self as usize
    }
}

/// A projective class on `frame` whose compatible member has the listed
/// parts of `G^p` vanishing. Constant coefficients `Γ = -½c + S` with `S`
/// symmetric; the conditions `∇_a J^a_b = 0` and the chosen parts are
/// affine in `S`, solved exactly, then spread over the solution space with
/// fixed weights. The result is moved off the compatible member by a
/// projective change. `G^p_-^skew` is the Nijenhuis tensor and cannot be
/// imposed unless `J` is already integrable.
pub fn projective_stratum<S: Scalar>(frame: &FrameComplex<S>, j: &Field<S>, vanishing: &[GpPart]) -> Result<ProjectiveFixture<S>> {
    let n = frame.dim();
    let structure = frame.structure();
    let c = structure
        .as_constant()
        .ok_or_else(|| GeometryError::Unsupported("strata are built on homogeneous frames".into()))?;
    let base = c.scale(&-S::half());
    let mut basis = Vec::new();
    for b in 0..n {
        for c in 0..n {
            for a in c..n {
                basis.push((b, c, a));
            }
        }
    }
    let constraints = |gamma: Tensor<S>| -> Result<Vec<S>> {
        let conn = Connection::new(Field::constant(gamma), frame)?;
        let mut out: Vec<S> = compatibility_residual(&conn, j)?.as_constant().expect("constant").data().to_vec();
        let parts = gp_parts(&compute_g(&conn, j)?);
        for part in vanishing {
            out.extend(parts[part.index()].as_constant().expect("constant").data().iter().cloned());
        }
        Ok(out)
    };
    let unit = |&(b, c, a): &(usize, usize, usize)| {
        let mut t = Tensor::<S>::zeros(n, 1, 2);
        t[[b, c, a]] = S::one();
        t[[b, a, c]] = S::one();
        t
    };
    let offset = constraints(base.clone())?;
    let columns: Vec<Vec<S>> = basis
        .iter()
        .map(|e| {
            let col = constraints(base.add(&unit(e)).expect("same shape"))?;
            Ok(col.into_iter().zip(&offset).map(|(v, o)| v - o.clone()).collect())
        })
        .collect::<Result<_>>()?;
    let m = Matrix::from_fn(offset.len(), basis.len(), |r, c| columns[c][r].clone());
    let rhs: Vec<S> = offset.iter().map(|v| -v.clone()).collect();
    let particular = m
        .solve(&rhs, 1e-10)
        .ok_or(GeometryError::Singular("requested stratum is empty on this frame"))?;
    let mut gamma = base;
    for (coef, e) in particular.iter().zip(&basis) {
        if !coef.is_zero() {
            gamma = gamma.add_scaled(coef, &unit(e)).expect("same shape");
        }
    }
    for (k, v) in m.nullspace(1e-10).iter().enumerate() {
        let w = S::from_i64((k as i64 * 7 + 3) % 11 - 5);
        let w = if w.is_zero() { S::one() } else { w };
        for (coef, e) in v.iter().zip(&basis) {
            if !coef.is_zero() {
                gamma = gamma.add_scaled(&(w.clone() * coef.clone()), &unit(e)).expect("same shape");
            }
        }
    }
    let compatible = Connection::new(Field::constant(gamma), frame)?;
    let shift = Field::constant(Tensor::from_fn(n, 0, 1, |i| S::from_i64([1, -1, 2, 0, 1, -2, 0, 1][i[0] % 8])));
    let rep = compatible.projective_change(&shift)?;
    Ok(ProjectiveFixture { frame: frame.clone(), rep, j: j.clone(), g: None })
}

/// Coordinate sample points in a small box around the origin.
pub fn chart_samples(dim: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|s| (0..dim).map(|mu| 0.1 * libm::sin((s * dim + mu) as f64 * 1.7 + 0.3)).collect())
        .collect()
}

fn deformation(x: &[f64], n: usize) -> Tensor<f64> {
    Tensor::from_fn(n, 1, 1, |i| {
        let (r, c) = (i[0], i[1]);
        let base = if r == c { 1.0 } else { 0.0 };
        base + 0.2 * libm::sin(x[r] + 2.0 * x[c] + (r * n + c) as f64 * 0.37)
    })
}

/// `J(x) = P(x) J_0 P(x)^{-1}` on a coordinate chart of `ℝ^n`, with
/// `P(x)` a smooth perturbation of the identity.
pub fn chart_j(n: usize) -> Field<f64> {
    let j0 = AlmostComplexStructure::<f64>::standard(n);
    Field::sampled(Shape::new(n, 1, 1), move |x| {
        let p = Matrix::from_tensor(&deformation(x, n));
        let pinv = p.inverse(1e-12).expect("perturbation of the identity");
        p.mul(&Matrix::from_tensor(&j0)).mul(&pinv).to_tensor(1, 1)
    })
}

/// Coordinate frame `e_μ = ∂_μ` on `ℝ^n`.
pub fn coordinate_frame(n: usize, samples: Vec<Vec<f64>>, differencing: Differencing) -> Result<FrameComplex<f64>> {
    FrameComplex::chart(n, move |_| Tensor::identity(n), differencing, samples, 1)
}

/// Differencing for chart fixtures: coarse step with Richardson
/// extrapolation, accurate through two nested derivatives.
pub fn chart_differencing() -> Differencing {
    Differencing { step: 1e-3, richardson: true }
}

/// Flat coordinate connection on `ℝ^n` with non-constant `J`; the
/// representative is itself a scale.
pub fn chart_projective(n: usize) -> Result<ProjectiveFixture<f64>> {
    let frame = coordinate_frame(n, chart_samples(n, 3), chart_differencing())?;
    let rep = Connection::frame_flat(&frame);
    Ok(ProjectiveFixture { frame, rep, j: chart_j(n), g: None })
}

/// Hermitian metric for the standard `J` on a non-holonomic chart frame,
/// scaled by `e^{2φ}` with `φ(x) = phi_weight · (x_0 x_1 + sin x_2)`.
pub fn chart_hermitian(n: usize, phi_weight: f64) -> Result<AlmostHermitianFixture<f64>> {
    let frame = FrameComplex::chart(
        n,
        move |x| {
            let mut e = Tensor::identity(n);
            e[[0, 1]] = x[2];
            e[[n - 1, 0]] = 0.5 * x[1] * x[1];
            e
        },
        chart_differencing(),
        chart_samples(n, 3),
        1,
    )?;
    let j0 = AlmostComplexStructure::<f64>::standard(n);
    let j_field = Field::constant(j0.clone());
    let g = Field::sampled(Shape::new(n, 0, 2), move |x| {
        let raw = Tensor::from_fn(n, 0, 2, |i| {
            let (a, b) = (i[0].min(i[1]), i[0].max(i[1]));
            let base = if a == b { 2.0 } else { 0.0 };
            base + 0.3 * libm::sin(x[a] + x[b] * 1.3 + (a + 2 * b) as f64 * 0.5)
        });
        let jj = raw.act(&j0, 0).and_then(|t| t.act(&j0, 1)).expect("(0,2)");
        let phi = phi_weight * (x[0] * x[1] + libm::sin(x[2]));
        raw.add(&jj).expect("same shape").scale(&(0.5 * libm::exp(2.0 * phi)))
    });
    Ok(AlmostHermitianFixture { frame, g, j: j_field })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::almost_complex::{classical_nijenhuis, validate_acs};
    use crate::hermitian::{classify_ah, HermitianData};
    use crate::scalar::Rational;

    #[test]
    fn maxwell_default_is_a_lie_algebra() {
        let fx = maxwell_family(&MaxwellParams::<Rational>::default()).unwrap();
        assert_eq!(fx.frame.jacobi_residual(), 0.0);
        validate_acs(&fx.j, &fx.frame, 0.0).unwrap();
        let sub = MaxwellParams::maxwell(Rational::from_i64(2), Rational::from_i64(1), Rational::from_i64(1), Rational::from_i64(1));
        assert_eq!(sub.frame().unwrap().jacobi_residual(), 0.0);
    }

    #[test]
    fn singular_parameters_rejected() {
        let mut p = MaxwellParams::<Rational>::default();
        p.b1 = Rational::from_ratio(1, 2);
        assert!(p.frame().is_err());
    }

    #[test]
    fn nilmanifold_classes() {
        let kt = kodaira_thurston::<Rational>().unwrap();
        assert!(!classical_nijenhuis(&kt.j, &kt.frame).as_constant().unwrap().negligible(0.0));
        let hd = HermitianData::new(kt.g, kt.j, &kt.frame).unwrap();
        let c = classify_ah(&hd, 0.0).unwrap();
        assert!(c.almost_kahler.holds && !c.hermitian.holds);

        let iw = iwasawa::<Rational>().unwrap();
        assert_eq!(iw.frame.jacobi_residual(), 0.0);
        assert!(classical_nijenhuis(&iw.j, &iw.frame).as_constant().unwrap().negligible(0.0));
        let hd = HermitianData::new(iw.g, iw.j, &iw.frame).unwrap();
        let c = classify_ah(&hd, 0.0).unwrap();
        assert!(c.hermitian.holds && !c.kahler.holds);
    }

    #[test]
    fn s3s3_is_strictly_nearly_kahler() {
        let fx = nearly_kahler_s3s3().unwrap();
        assert!(fx.frame.jacobi_residual() < 1e-15);
        let hd = HermitianData::new(fx.g, fx.j, &fx.frame).unwrap();
        let c = classify_ah(&hd, 1e-12).unwrap();
        assert!(c.nearly_kahler.holds, "{c:?}");
        assert!(!c.hermitian.holds && !c.kahler.holds);
    }

    #[test]
    fn surface_representative_is_torsion_free() {
        let q = Rational::from_i64;
        let p = SurfaceParams { alpha: q(1), beta: q(-2), a: q(3), b: q(1), c: q(0), f: q(2), p: q(-1), q: q(4) };
        let fx = surface_family(&p, 1).unwrap();
        assert!(fx.rep.is_torsion_free(0.0));
    }

    #[test]
    fn strata_realise_requested_parts() {
        let flat = kaehler_flat::<Rational>(4).unwrap();
        let fx = projective_stratum(&flat.frame, &flat.j, &[GpPart::MinusSymm]).unwrap();
        let ps = crate::projective::ProjectiveScene::new(&fx.rep, &fx.j).unwrap();
        assert!(!ps.a().as_constant().unwrap().negligible(0.0));
        let parts = ps.parts();
        assert!(parts[2].as_constant().unwrap().negligible(0.0));
        assert!(!parts[0].as_constant().unwrap().negligible(0.0));

        let kt = kodaira_thurston::<Rational>().unwrap();
        let fx = projective_stratum(&kt.frame, &kt.j, &[GpPart::PlusSymm, GpPart::MinusSymm]).unwrap();
        let ps = crate::projective::ProjectiveScene::new(&fx.rep, &fx.j).unwrap();
        let parts = ps.parts();
        assert!(parts[0].as_constant().unwrap().negligible(0.0) && parts[2].as_constant().unwrap().negligible(0.0));
        assert!(!parts[3].as_constant().unwrap().negligible(0.0));
        assert!(projective_stratum(&kt.frame, &kt.j, &[GpPart::MinusSkew]).is_err());
    }
}
