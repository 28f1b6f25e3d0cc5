//! Exterior calculus on frame components.
//!
//! A `k`-form is a fully antisymmetric `(0,k)` field with components
//! `α_{i1..ik} = α(e_i1, .., e_ik)`. The wedge product uses the determinant
//! convention, `(θ^1∧θ^2)(e_1, e_2) = 1`, with no `1/k!` factor.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{GeometryError, Result};
use crate::field::{hermitian_split, Field};
use crate::frame::FrameComplex;
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

fn binomial(n: usize, k: usize) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

fn factorial(k: usize) -> i64 {
    (1..=k as i64).product()
}

/// Sign of the permutation sorting `idx`, or 0 when an index repeats.
pub fn permutation_sign(idx: &[usize]) -> i64 {
    let mut sign = 1;
    for i in 0..idx.len() {
        for j in i + 1..idx.len() {
            if idx[i] == idx[j] {
                return 0;
            }
            if idx[i] > idx[j] {
                sign = -sign;
            }
        }
    }
    sign
}

/// Reject anything that is not a `(0,k)` field.
pub fn check_form<S: Scalar>(alpha: &Field<S>) -> Result<usize> {
    let s = alpha.shape();
    if s.upper != 0 {
        return Err(GeometryError::ShapeMismatch(format!("a form has no upper slots, got {s:?}")));
    }
    Ok(s.lower)
}

/// Antisymmetry defect `α - Alt α` at every sample.
pub fn antisymmetry_residual<S: Scalar>(alpha: &Field<S>, fc: &FrameComplex<S>) -> Result<f64> {
    let k = check_form(alpha)?;
    let slots: Vec<usize> = (0..k).collect();
    Ok(fc.max_abs(&alpha.sub(&alpha.alt(&slots)?)?))
}

/// The coframe element `θ^i` as a constant 1-form.
pub fn coframe<S: Scalar>(dim: usize, i: usize) -> Tensor<S> {
    Tensor::from_fn(dim, 0, 1, |idx| if idx[0] == i { S::one() } else { S::zero() })
}

/// Pointwise wedge product of antisymmetric tensors.
pub fn wedge_tensor<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let (p, q) = (a.lower(), b.lower());
    let slots: Vec<usize> = (0..p + q).collect();
    let alt = a.outer(b).alt(&slots).expect("lower slots only");
    alt.scale(&S::from_i64(factorial(p + q) / (factorial(p) * factorial(q))))
}

pub fn wedge<S: Scalar>(a: &Field<S>, b: &Field<S>) -> Result<Field<S>> {
    let p = check_form(a)?;
    let q = check_form(b)?;
    let shape = Shape::new(a.dim(), 0, p + q);
    Ok(a.zip(b, shape, wedge_tensor))
}

/// `dα(X_0..X_k) = Σ (-1)^i X_i α(..X̂_i..) + Σ_{i<j} (-1)^{i+j} α([X_i,X_j], ..X̂_i..X̂_j..)`.
pub fn exterior_derivative<S: Scalar>(alpha: &Field<S>, fc: &FrameComplex<S>) -> Result<Field<S>> {
    let k = check_form(alpha)?;
    let n = fc.dim();
    if alpha.dim() != n {
        return Err(GeometryError::ShapeMismatch(format!("form of dimension {} on frame of {n}", alpha.dim())));
    }
    if k >= n {
        return Err(GeometryError::Dimension(k, "exterior derivative needs degree below the dimension"));
    }
    let deriv = fc.derivative(alpha);
    let c = fc.structure();
    let shape = Shape::new(n, 0, k + 1);
    Ok(Field::lift(&[alpha, &deriv, &c], shape, move |t| {
        let (a, da, c) = (t[0], t[1], t[2]);
        Tensor::from_fn(n, 0, k + 1, |x| {
            let mut acc = S::zero();
            let mut rest: Vec<usize> = Vec::with_capacity(k + 1);
            for i in 0..=k {
                rest.clear();
                rest.extend(x.iter().enumerate().filter(|&(p, _)| p != i).map(|(_, &v)| v));
                rest.push(x[i]);
                let term = da.get(&rest).clone();
                acc = if i % 2 == 0 { acc + term } else { acc - term };
            }
            for i in 0..=k {
                for j in i + 1..=k {
                    let mut bracket = S::zero();
                    for m in 0..n {
                        let cm = c[[m, x[i], x[j]]].clone();
                        if cm.is_zero() {
                            continue;
                        }
                        rest.clear();
                        rest.push(m);
                        rest.extend(x.iter().enumerate().filter(|&(p, _)| p != i && p != j).map(|(_, &v)| v));
                        bracket = bracket + cm * a.get(&rest).clone();
                    }
                    acc = if (i + j) % 2 == 0 { acc + bracket } else { acc - bracket };
                }
            }
            acc
        })
    }))
}

fn volume_factor<S: Scalar>(g: &Tensor<S>, orientation: i8) -> Result<S> {
    let det = Matrix::from_tensor(g).determinant();
    let root = det
        .sqrt()
        .ok_or_else(|| GeometryError::Unsupported(format!("volume form needs sqrt(det g) = sqrt({det}) in the scalar backend")))?;
    Ok(if orientation < 0 { -root } else { root })
}

/// Raise every slot of a `(0,k)` tensor with `g^{-1}`.
fn raise_all<S: Scalar>(alpha: &Tensor<S>, ginv: &Tensor<S>) -> Tensor<S> {
    let mut out = alpha.clone();
    for slot in 0..alpha.lower() {
        out = out.act(ginv, slot).expect("lower slot");
    }
    out
}

/// Pointwise Hodge star, `(⋆α)_J = (1/k!) α^I ε_{IJ}` with
/// `ε_{1..n} = orientation · sqrt(det g)`.
pub fn hodge_star_tensor<S: Scalar>(alpha: &Tensor<S>, g: &Tensor<S>, orientation: i8) -> Result<Tensor<S>> {
    let n = alpha.dim();
    let k = alpha.lower();
    let vol = volume_factor(g, orientation)?;
    let ginv = Matrix::from_tensor(g).inverse(0.0)?.to_tensor(1, 1);
    let up = raise_all(alpha, &ginv);
    Ok(Tensor::from_fn(n, 0, n - k, |j| {
        if permutation_sign(j) == 0 {
            return S::zero();
        }
        let mut full: Vec<usize> = (0..n).filter(|m| !j.contains(m)).collect();
        let value = up.get(&full).clone();
        full.extend_from_slice(j);
        value * vol.clone() * S::from_i64(permutation_sign(&full))
    }))
}

pub fn hodge_star<S: Scalar>(alpha: &Field<S>, g: &Field<S>, fc: &FrameComplex<S>) -> Result<Field<S>> {
    hodge_star_oriented(alpha, g, fc.orientation(), fc)
}

/// Hodge star with an explicit orientation sign.
pub fn hodge_star_oriented<S: Scalar>(
    alpha: &Field<S>,
    g: &Field<S>,
    orientation: i8,
    fc: &FrameComplex<S>,
) -> Result<Field<S>> {
    let k = check_form(alpha)?;
    let n = alpha.dim();
    // Validate on the first sample so backend failures surface eagerly.
    let x = &fc.samples()[0];
    hodge_star_tensor(&alpha.at(x), &g.at(x), orientation)?;
    Ok(alpha.zip(g, Shape::new(n, 0, n - k), move |a, g| {
        hodge_star_tensor(a, g, orientation).expect("validated at a sample")
    }))
}

/// `δ = (-1)^{n(k+1)+1} ⋆d⋆` on `k`-forms; `-⋆d⋆` in even dimension.
pub fn codifferential<S: Scalar>(alpha: &Field<S>, g: &Field<S>, fc: &FrameComplex<S>) -> Result<Field<S>> {
    let k = check_form(alpha)?;
    if k == 0 {
        return Err(GeometryError::Dimension(0, "codifferential of a function"));
    }
    let n = fc.dim();
    let inner = hodge_star(alpha, g, fc)?;
    let d = exterior_derivative(&inner, fc)?;
    let outer = hodge_star(&d, g, fc)?;
    Ok(if (n * (k + 1) + 1) % 2 == 0 { outer } else { outer.neg() })
}

/// Induced inner product `(1/k!) α^I β_I`.
pub fn form_inner<S: Scalar>(a: &Tensor<S>, b: &Tensor<S>, g: &Tensor<S>) -> Result<S> {
    let ginv = Matrix::from_tensor(g).inverse(0.0)?.to_tensor(1, 1);
    let up = raise_all(a, &ginv);
    let total = up.data().iter().zip(b.data()).fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone());
    Ok(total / S::from_i64(factorial(a.lower())))
}

/// Orientation induced by `J`: sign of `det(v_1, Jv_1, v_2, Jv_2, ..)` for
/// any complex basis `v_i`.
pub fn complex_orientation<S: Scalar>(j: &Tensor<S>) -> i8 {
    let n = j.dim();
    let mut cols: Vec<Vec<S>> = Vec::with_capacity(n);
    for e in 0..n {
        if cols.len() == n {
            break;
        }
        let v: Vec<S> = (0..n).map(|i| if i == e { S::one() } else { S::zero() }).collect();
        let jv: Vec<S> = (0..n).map(|i| j[[i, e]].clone()).collect();
        let mut trial = cols.clone();
        trial.push(v);
        trial.push(jv);
        let m = Matrix::from_fn(n, trial.len(), |r, c| trial[c][r].clone());
        if m.rank(1e-12) == trial.len() {
            cols = trial;
        }
    }
    let m = Matrix::from_fn(n, n, |r, c| cols[c][r].clone());
    m.determinant().signum_i8()
}

/// The four type components of a 2-form in dimension 4, split by
/// (anti-)self-duality and (anti-)Hermitian behaviour under `J`.
#[derive(Clone)]
pub struct TwoFormTypes<S> {
    pub sd_herm: Field<S>,
    pub sd_anti: Field<S>,
    pub asd_herm: Field<S>,
    pub asd_anti: Field<S>,
    /// Orientation used for the duality split.
    pub orientation: i8,
}

/// Type decomposition of a 2-form; duality is taken with respect to the
/// orientation induced by `J`, for which `ω` is self-dual.
pub fn two_form_type_split<S: Scalar>(
    f: &Field<S>,
    j: &Field<S>,
    g: &Field<S>,
    fc: &FrameComplex<S>,
) -> Result<TwoFormTypes<S>> {
    if fc.dim() != 4 {
        return Err(GeometryError::Dimension(fc.dim(), "two-form type split needs dimension 4"));
    }
    if check_form(f)? != 2 {
        return Err(GeometryError::ShapeMismatch("type split needs a 2-form".into()));
    }
    let orientation = complex_orientation(&j.at(&fc.samples()[0]));
    let star = hodge_star_oriented(f, g, orientation, fc)?;
    let half = S::from_ratio(1, 2);
    let sd = f.add(&star)?.scale(half.clone());
    let asd = f.sub(&star)?.scale(half);
    let sd_split = hermitian_split(&sd, j, (0, 1))?;
    let asd_split = hermitian_split(&asd, j, (0, 1))?;
    Ok(TwoFormTypes {
        sd_herm: sd_split.plus,
        sd_anti: sd_split.minus,
        asd_herm: asd_split.plus,
        asd_anti: asd_split.minus,
        orientation,
    })
}

/// Ranks of the four type projectors acting on `Λ²` at a point.
pub fn two_form_type_ranks<S: Scalar>(j: &Tensor<S>, g: &Tensor<S>, tol: f64) -> Result<[usize; 4]> {
    let n = j.dim();
    if n != 4 {
        return Err(GeometryError::Dimension(n, "two-form type ranks need dimension 4"));
    }
    let orientation = complex_orientation(j);
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let basis: Vec<Tensor<S>> = pairs
        .iter()
        .map(|&(a, b)| wedge_tensor(&coframe(n, a), &coframe(n, b)))
        .collect();
    let half = S::from_ratio(1, 2);
    let mut images: [Vec<Tensor<S>>; 4] = Default::default();
    for beta in &basis {
        let star = hodge_star_tensor(beta, g, orientation)?;
        let sd = beta.add(&star)?.scale(&half);
        let asd = beta.sub(&star)?.scale(&half);
        let (sh, sa) = sd.hermitian_parts(j, (0, 1))?;
        let (ah, aa) = asd.hermitian_parts(j, (0, 1))?;
        for (slot, t) in [sh, sa, ah, aa].into_iter().enumerate() {
            images[slot].push(t);
        }
    }
    let mut ranks = [0; 4];
    for (slot, imgs) in images.iter().enumerate() {
        let m = Matrix::from_fn(pairs.len(), basis.len(), |r, c| {
            let (a, b) = pairs[r];
            imgs[c][[a, b]].clone()
        });
        ranks[slot] = m.rank(tol);
    }
    Ok(ranks)
}

/// Number of `k`-subsets, i.e. `dim Λ^k`.
pub fn form_space_dim(n: usize, k: usize) -> usize {
    binomial(n, k) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn euclid(n: usize) -> Tensor<Rational> {
        Tensor::from_fn(n, 0, 2, |i| if i[0] == i[1] { q(1) } else { q(0) })
    }

    fn theta(n: usize, i: usize) -> Tensor<Rational> {
        coframe(n, i)
    }

    #[test]
    fn wedge_uses_determinant_convention() {
        let w = wedge_tensor(&theta(4, 0), &theta(4, 1));
        assert_eq!(w[[0, 1]], q(1));
        assert_eq!(w[[1, 0]], q(-1));
        let w3 = wedge_tensor(&w, &theta(4, 2));
        assert_eq!(w3[[0, 1, 2]], q(1));
        assert_eq!(w3[[2, 1, 0]], q(-1));
    }

    #[test]
    fn structure_equation_sign() {
        // [e0, e1] = e2, so dθ^2 = -θ^0∧θ^1
        let fc = FrameComplex::from_structure_entries(3, &[(2, 0, 1, q(1))], 1).unwrap();
        let d = exterior_derivative(&Field::constant(theta(3, 2)), &fc).unwrap();
        assert_eq!(d.as_constant().unwrap()[[0, 1]], q(-1));
    }

    #[test]
    fn d_squared_vanishes_on_so3() {
        let fc = FrameComplex::from_structure_entries(3, &[(2, 0, 1, q(1)), (0, 1, 2, q(1)), (1, 2, 0, q(1))], 1)
            .unwrap();
        for i in 0..3 {
            let d1 = exterior_derivative(&Field::constant(theta(3, i)), &fc).unwrap();
            let d2 = exterior_derivative(&d1, &fc).unwrap();
            assert!(d2.as_constant().unwrap().negligible(0.0));
        }
        let top = Field::constant(Tensor::<Rational>::zeros(3, 0, 3));
        assert!(exterior_derivative(&top, &fc).is_err());
    }

    #[test]
    fn hodge_on_standard_coframe() {
        let g = euclid(4);
        let w12 = wedge_tensor(&theta(4, 0), &theta(4, 1));
        let star = hodge_star_tensor(&w12, &g, 1).unwrap();
        assert_eq!(star, wedge_tensor(&theta(4, 2), &theta(4, 3)));
        let twice = hodge_star_tensor(&star, &g, 1).unwrap();
        assert_eq!(twice, w12);
        let one = hodge_star_tensor(&Tensor::scalar(4, q(1)), &g, 1).unwrap();
        assert_eq!(one[[0, 1, 2, 3]], q(1));
    }

    #[test]
    fn non_square_determinant_is_unsupported_exactly() {
        let mut g = euclid(4);
        g[[0, 0]] = q(2);
        assert!(hodge_star_tensor(&theta(4, 0), &g, 1).is_err());
        let gf: Tensor<f64> = Tensor::from_fn(4, 0, 2, |i| if i[0] == i[1] { if i[0] == 0 { 2.0 } else { 1.0 } } else { 0.0 });
        let s = hodge_star_tensor(&coframe::<f64>(4, 0), &gf, 1).unwrap();
        assert!((s[[1, 2, 3]] - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn standard_j_orientation_and_ranks() {
        // J0: e0 -> e1, e2 -> e3
        let j = Tensor::from_fn(4, 1, 1, |i| match (i[0], i[1]) {
            (1, 0) | (3, 2) => q(1),
            (0, 1) | (2, 3) => q(-1),
            _ => q(0),
        });
        assert_eq!(complex_orientation(&j), 1);
        // e0 -> e2, e1 -> e3 reverses orientation
        let j2 = Tensor::from_fn(4, 1, 1, |i| match (i[0], i[1]) {
            (2, 0) | (3, 1) => q(1),
            (0, 2) | (1, 3) => q(-1),
            _ => q(0),
        });
        assert_eq!(complex_orientation(&j2), -1);
        assert_eq!(two_form_type_ranks(&j, &euclid(4), 0.0).unwrap(), [1, 2, 3, 0]);
        assert_eq!(two_form_type_ranks(&j2, &euclid(4), 0.0).unwrap(), [1, 2, 3, 0]);
    }

    #[test]
    fn sign_of_permutations() {
        assert_eq!(permutation_sign(&[0, 1, 2]), 1);
        assert_eq!(permutation_sign(&[1, 0, 2]), -1);
        assert_eq!(permutation_sign(&[2, 0, 1]), 1);
        assert_eq!(permutation_sign(&[0, 0, 1]), 0);
        assert_eq!(form_space_dim(4, 2), 6);
    }
}
