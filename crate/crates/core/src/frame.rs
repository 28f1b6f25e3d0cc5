//! Frame presentations.
//!
//! Brackets satisfy `[e_j, e_k] = c^i_{jk} e_i`, hence
//! `dθ^i(e_j, e_k) = -c^i_{jk}`. A homogeneous frame carries constant
//! structure constants; a chart frame carries vector fields `e_a = E^μ_a ∂_μ`
//! over coordinates and differentiates by finite differences.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{GeometryError, Result};
use crate::field::{Field, Sampler};
use crate::linalg::Matrix;
use crate::scalar::{Scalar, Tolerance};
use crate::tensor::{Shape, Tensor};

/// Finite-difference scheme for chart derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Differencing {
    pub step: f64,
    /// Combine steps `h` and `h/2` to cancel the leading error term.
    pub richardson: bool,
}

impl Default for Differencing {
    fn default() -> Self {
        Differencing { step: 1e-5, richardson: false }
    }
}

#[derive(Clone)]
pub enum Presentation<S> {
    /// Left-invariant frame with constant `c^i_{jk}`.
    Homogeneous { structure: Tensor<S> },
    /// Frame fields over a coordinate chart; the sampler returns `E^μ_a`
    /// as a `(1,1)` array indexed `[μ, a]`. `structure` is derived from it
    /// once, at construction.
    Chart { frame: Sampler<S>, differencing: Differencing, structure: Field<S> },
}

/// A local frame with its bracket data, orientation and sample points.
#[derive(Clone)]
pub struct FrameComplex<S> {
    dim: usize,
    presentation: Presentation<S>,
    orientation: i8,
    samples: Vec<Vec<f64>>,
}

impl<S: Scalar> core::fmt::Debug for FrameComplex<S> {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FrameComplex")
            .field("dim", &self.dim)
            .field("chart", &self.is_chart())
            .field("orientation", &self.orientation)
            .finish()
    }
}

fn central<S: Scalar>(eval: &Sampler<S>, x: &[f64], mu: usize, h: f64) -> Tensor<S> {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[mu] += h;
    xm[mu] -= h;
    let denom = S::from_f64(2.0 * h);
    eval(&xp).zip_with(&eval(&xm), |a, b| (a.clone() - b.clone()) / denom.clone()).expect("same sampler")
}

/// Structure constants of a chart frame: `c^i_{jk} = θ^i([e_j, e_k])`.
fn chart_structure<S: Scalar>(n: usize, frame: Sampler<S>, scheme: Differencing) -> Field<S> {
    Field::sampled(Shape::new(n, 1, 2), move |x| {
        let e = frame(x);
        let theta = invert(&e);
        let partials: Vec<Tensor<S>> =
            (0..n).map(|nu| coordinate_partial(&frame, x, nu, scheme)).collect();
        // [e_j, e_k]^μ = E^ν_j ∂_ν E^μ_k - E^ν_k ∂_ν E^μ_j
        let mut bracket = Tensor::<S>::zeros(n, 1, 2);
        for mu in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut acc = S::zero();
                    for (nu, d) in partials.iter().enumerate() {
                        acc = acc + e[[nu, j]].clone() * d[[mu, k]].clone()
                            - e[[nu, k]].clone() * d[[mu, j]].clone();
                    }
                    bracket[[mu, j, k]] = acc;
                }
            }
        }
        Tensor::from_fn(n, 1, 2, |i| {
            (0..n).fold(S::zero(), |acc, mu| {
                acc + theta[[i[0], mu]].clone() * bracket[[mu, i[1], i[2]]].clone()
            })
        })
    })
}

/// Coordinate partial derivative `∂_μ f` at `x`.
pub fn coordinate_partial<S: Scalar>(eval: &Sampler<S>, x: &[f64], mu: usize, scheme: Differencing) -> Tensor<S> {
    let coarse = central(eval, x, mu, scheme.step);
    if !scheme.richardson {
        return coarse;
    }
    let fine = central(eval, x, mu, scheme.step / 2.0);
    let three = S::from_i64(3);
    let four = S::from_i64(4);
    fine.zip_with(&coarse, |f, c| (four.clone() * f.clone() - c.clone()) / three.clone()).expect("same shape")
}

fn invert<S: Scalar>(m: &Tensor<S>) -> Tensor<S> {
    Matrix::from_tensor(m)
        .inverse(0.0)
        .map(|inv| inv.to_tensor(1, 1))
        .unwrap_or_else(|_| m.map(|_| S::from_f64(f64::NAN)))
}

impl<S: Scalar> FrameComplex<S> {
    /// Homogeneous frame from a `(1,2)` tensor of structure constants.
    pub fn homogeneous(structure: Tensor<S>, orientation: i8) -> Result<Self> {
        let n = structure.dim();
        if structure.upper() != 1 || structure.lower() != 2 {
            return Err(GeometryError::ShapeMismatch(format!(
                "structure constants need valence (1,2), got {:?}",
                structure.shape()
            )));
        }
        let sym = structure.sym(&[1, 2])?;
        if !sym.negligible(0.0) {
            return Err(GeometryError::invariant("antisymmetry c^i_jk = -c^i_kj", sym.max_abs()));
        }
        Ok(FrameComplex {
            dim: n,
            presentation: Presentation::Homogeneous { structure },
            orientation: orientation.signum(),
            samples: vec![vec![0.0; n]],
        })
    }

    /// Abelian frame (`c = 0`), e.g. a torus or Euclidean space.
    pub fn abelian(dim: usize) -> Self {
        Self::homogeneous(Tensor::zeros(dim, 1, 2), 1).expect("zero is antisymmetric")
    }

    /// Homogeneous frame from sparse entries `c^i_{jk} = v`; the entry at
    /// `(i,k,j)` is filled with `-v`.
    pub fn from_structure_entries(dim: usize, entries: &[(usize, usize, usize, S)], orientation: i8) -> Result<Self> {
        let mut c = Tensor::<S>::zeros(dim, 1, 2);
        for (i, j, k, v) in entries {
            let (i, j, k) = (*i, *j, *k);
            if i >= dim || j >= dim || k >= dim {
                return Err(GeometryError::SlotOutOfRange { slot: i.max(j).max(k), upper: 1, lower: 2 });
            }
            if j == k && !v.is_zero() {
                return Err(GeometryError::invariant("antisymmetry c^i_jj = 0", v.abs().to_f64()));
            }
            let prev = c[[i, j, k]].clone();
            if !prev.is_zero() && prev != *v {
                return Err(GeometryError::ShapeMismatch(format!(
                    "conflicting entries for c^{i}_({j},{k})"
                )));
            }
            c[[i, j, k]] = v.clone();
            c[[i, k, j]] = -v.clone();
        }
        Self::homogeneous(c, orientation)
    }

    /// Chart frame; `frame(x)[μ, a] = E^μ_a(x)`. Linear independence is
    /// checked at every sample.
    pub fn chart(
        dim: usize,
        frame: impl Fn(&[f64]) -> Tensor<S> + Send + Sync + 'static,
        differencing: Differencing,
        samples: Vec<Vec<f64>>,
        orientation: i8,
    ) -> Result<Self> {
        if samples.is_empty() {
            return Err(GeometryError::ShapeMismatch("chart needs at least one sample point".into()));
        }
        let frame: Sampler<S> = match Field::sampled(Shape::new(dim, 1, 1), frame).memoized() {
            Field::Sampled { eval, .. } => eval,
            Field::Constant(_) => unreachable!("memoizing keeps samplers sampled"),
        };
        for x in &samples {
            if x.len() != dim {
                return Err(GeometryError::ShapeMismatch(format!("sample {x:?} has wrong length")));
            }
            let e = frame(x);
            if e.shape() != Shape::new(dim, 1, 1) {
                return Err(GeometryError::ShapeMismatch(format!("frame sampler returned {:?}", e.shape())));
            }
            let det = Matrix::from_tensor(&e).determinant();
            if det.negligible(1e-12) {
                return Err(GeometryError::invariant("frame fields linearly independent", det.abs().to_f64()));
            }
        }
        let structure = chart_structure(dim, frame.clone(), differencing).memoized();
        Ok(FrameComplex {
            dim,
            presentation: Presentation::Chart { frame, differencing, structure },
            orientation: orientation.signum(),
            samples,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn orientation(&self) -> i8 {
        self.orientation
    }

    pub fn presentation(&self) -> &Presentation<S> {
        &self.presentation
    }

    pub fn is_chart(&self) -> bool {
        matches!(self.presentation, Presentation::Chart { .. })
    }

    /// Points at which sampled fields are evaluated for residuals.
    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    /// Tolerance appropriate for identities evaluated on this frame.
    pub fn tolerance(&self, tol: &Tolerance) -> f64 {
        if self.is_chart() {
            tol.derivative
        } else {
            tol.algebraic
        }
    }

    /// [`Self::tolerance`] under the default policy; exact backends ignore it.
    pub fn default_tolerance(&self) -> f64 {
        self.tolerance(&Tolerance::default())
    }

    pub fn max_abs(&self, f: &Field<S>) -> f64 {
        f.max_abs(&self.samples)
    }

    pub fn negligible(&self, f: &Field<S>, tol: f64) -> bool {
        f.negligible(&self.samples, tol)
    }

    /// Structure constants `c^i_{jk}` as a field.
    pub fn structure(&self) -> Field<S> {
        match &self.presentation {
            Presentation::Homogeneous { structure } => Field::Constant(structure.clone()),
            Presentation::Chart { structure, .. } => structure.clone(),
        }
    }

    /// Cyclic Jacobi sum `c^m_{jk} c^i_{ml} + c^m_{kl} c^i_{mj} + c^m_{lj} c^i_{mk}`
    /// as a `(1,3)` tensor; `None` for charts, where it holds automatically.
    pub fn jacobi_tensor(&self) -> Option<Tensor<S>> {
        let Presentation::Homogeneous { structure: c } = &self.presentation else {
            return None;
        };
        let n = self.dim;
        Some(Tensor::from_fn(n, 1, 3, |idx| {
            let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = S::zero();
            for m in 0..n {
                acc = acc
                    + c[[m, j, k]].clone() * c[[i, m, l]].clone()
                    + c[[m, k, l]].clone() * c[[i, m, j]].clone()
                    + c[[m, l, j]].clone() * c[[i, m, k]].clone();
            }
            acc
        }))
    }

    /// Largest Jacobi defect; `0` on charts.
    pub fn jacobi_residual(&self) -> f64 {
        self.jacobi_tensor().map_or(0.0, |t| t.max_abs())
    }

    /// Frame derivative `e_a(T)`, appended as a new last lower slot.
    pub fn derivative(&self, f: &Field<S>) -> Field<S> {
        let shape = f.shape().with_extra_lower();
        match (&self.presentation, f) {
            (_, Field::Constant(_)) | (Presentation::Homogeneous { .. }, _) => Field::zeros(shape),
            (Presentation::Chart { frame, differencing, .. }, Field::Sampled { eval, .. }) => {
                let n = self.dim;
                let frame = frame.clone();
                let eval = eval.clone();
                let scheme = *differencing;
                Field::sampled(shape, move |x| {
                    let e = frame(x);
                    let partials: Vec<Tensor<S>> = (0..n).map(|mu| coordinate_partial(&eval, x, mu, scheme)).collect();
                    let len = partials[0].data().len();
                    let mut out = Vec::with_capacity(len * n);
                    for comp in 0..len {
                        for a in 0..n {
                            let mut acc = S::zero();
                            for (mu, d) in partials.iter().enumerate() {
                                acc = acc + e[[mu, a]].clone() * d.data()[comp].clone();
                            }
                            out.push(acc);
                        }
                    }
                    Tensor::from_vec(n, shape.upper, shape.lower, out).expect("shape fixed")
                })
                .memoized()
            }
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

    /// Heisenberg algebra `[e0, e1] = e2`.
    fn heisenberg() -> FrameComplex<Rational> {
        FrameComplex::from_structure_entries(3, &[(2, 0, 1, q(1))], 1).unwrap()
    }

    #[test]
    fn abelian_and_heisenberg_satisfy_jacobi() {
        assert_eq!(FrameComplex::<Rational>::abelian(4).jacobi_residual(), 0.0);
        assert!(heisenberg().jacobi_tensor().unwrap().negligible(0.0));
    }

    #[test]
    fn non_lie_bracket_breaks_jacobi() {
        // [e0,e1] = e2, [e1,e2] = e1: the cyclic sum is -e2
        let fc = FrameComplex::from_structure_entries(3, &[(2, 0, 1, q(1)), (1, 1, 2, q(1))], 1).unwrap();
        assert!(fc.jacobi_residual() > 0.0);
        let so3 = FrameComplex::from_structure_entries(3, &[(2, 0, 1, q(1)), (0, 1, 2, q(1)), (1, 2, 0, q(1))], 1)
            .unwrap();
        assert_eq!(so3.jacobi_residual(), 0.0);
    }

    #[test]
    fn asymmetric_entries_rejected() {
        let mut c = Tensor::<Rational>::zeros(2, 1, 2);
        c[[0, 0, 1]] = q(1);
        assert!(FrameComplex::homogeneous(c, 1).is_err());
        assert!(FrameComplex::from_structure_entries(2, &[(0, 1, 1, q(1))], 1).is_err());
    }

    /// Frame e_0 = ∂_0, e_1 = x_0 ∂_0 + ∂_1 has [e_0, e_1] = e_0.
    fn skew_chart(scheme: Differencing) -> FrameComplex<f64> {
        FrameComplex::chart(
            2,
            |x: &[f64]| Tensor::from_vec(2, 1, 1, alloc::vec![1.0, x[0], 0.0, 1.0]).unwrap(),
            scheme,
            alloc::vec![alloc::vec![0.3, -0.2], alloc::vec![1.1, 0.7]],
            1,
        )
        .unwrap()
    }

    #[test]
    fn chart_structure_constants_from_brackets() {
        let fc = skew_chart(Differencing { step: 1e-3, richardson: true });
        for x in fc.samples() {
            let c = fc.structure().at(x);
            assert!((c[[0, 0, 1]] - 1.0).abs() < 1e-9);
            assert!((c[[0, 1, 0]] + 1.0).abs() < 1e-9);
            assert!(c[[1, 0, 1]].abs() < 1e-9);
        }
    }

    #[test]
    fn chart_derivative_along_frame() {
        let fc = skew_chart(Differencing::default());
        let f = Field::sampled(Shape::new(2, 0, 0), |x: &[f64]| Tensor::scalar(2, x[0] * x[0] + 3.0 * x[1]));
        let df = fc.derivative(&f);
        let x = [0.5, 2.0];
        let d = df.at(&x);
        assert!((d[[0]] - 1.0).abs() < 1e-8);
        // e_1 f = x0 * 2 x0 + 3
        assert!((d[[1]] - (0.5 + 3.0)).abs() < 1e-8);
    }

    #[test]
    fn dependent_chart_frame_rejected() {
        let r = FrameComplex::<f64>::chart(
            2,
            |_| Tensor::from_vec(2, 1, 1, alloc::vec![1.0, 1.0, 1.0, 1.0]).unwrap(),
            Differencing::default(),
            alloc::vec![alloc::vec![0.0, 0.0]],
            1,
        );
        assert!(r.is_err());
    }
}
