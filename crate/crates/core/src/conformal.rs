//! Conformal almost Hermitian structures.
//!
//! For a representative `g` with Levi-Civita connection `∇`, the Lee form is
//! `B_a = 1/(n-2) J^c_b ∇_c J^b_a` and the canonical Weyl connection is
//! `∇^c_a Y^b = ∇_a Y^b - B_a Y^b + B^b Y_a - B_c Y^c δ^b_a`. It is
//! torsion-free, satisfies `∇^c g = 2B ⊗ g` and `∇^c_a J^a_b = 0`.

use alloc::vec::Vec;

use crate::almost_complex::{compatibility_residual, compute_g, complexify, connection_family, GTensor};
use crate::connection::{levi_civita, weyl_difference, Connection};
use crate::error::{GeometryError, Result};
use crate::field::Field;
use crate::forms::{codifferential, exterior_derivative, two_form_type_split, wedge};
use crate::frame::FrameComplex;
use crate::hermitian::{metric_torsion_to_difference, Flag, HermitianData};
use crate::metric::{inverse_metric, lower_tensor};
use crate::scalar::Scalar;
use crate::tensor::{Shape, Tensor};

/// Everything canonically attached to `(J, [g])`, computed through one
/// representative.
#[derive(Clone, Debug)]
pub struct ConformalScene<S: Scalar> {
    frame: FrameComplex<S>,
    g: Field<S>,
    j: Field<S>,
    lee: Field<S>,
    weyl: Connection<S>,
    gc: GTensor<S>,
    gc_conn: Connection<S>,
}

fn require_dim<S: Scalar>(fc: &FrameComplex<S>) -> Result<()> {
    if fc.dim() < 4 {
        return Err(GeometryError::Dimension(
            fc.dim(),
            "the Lee form divides by n - 2; in dimension 2 every Weyl connection is already complex",
        ));
    }
    Ok(())
}

/// `B_a = 1/(n-2) J^c_b ∇_c J^b_a` for a metric-preserving or Weyl `∇`.
pub fn lee_form_from<S: Scalar>(lc: &Connection<S>, j: &Field<S>) -> Result<Field<S>> {
    require_dim(lc.frame())?;
    let n = lc.dim();
    let nj = lc.covariant_derivative(j)?;
    let k = S::one() / S::from_i64(n as i64 - 2);
    Ok(nj.zip(j, Shape::new(n, 0, 1), move |d, j| {
        Tensor::from_fn(n, 0, 1, |i| {
            let a = i[0];
            let mut acc = S::zero();
            for b in 0..n {
                for c in 0..n {
                    acc = acc + j[[c, b]].clone() * d[[b, a, c]].clone();
                }
            }
            acc * k.clone()
        })
    }))
}

pub fn lee_form<S: Scalar>(hd: &HermitianData<S>) -> Result<Field<S>> {
    lee_form_from(hd.levi_civita(), hd.j())
}

/// The Weyl connection with potential `b`: `∇ + ΔΓ`,
/// `ΔΓ^b_{ca} = -B_a δ^b_c + B^b g_{ca} - B_c δ^b_a`.
pub fn weyl_with_potential<S: Scalar>(lc: &Connection<S>, g: &Field<S>, b: &Field<S>) -> Result<Connection<S>> {
    lc.add_difference(&weyl_difference(b, g, -S::one())?)
}

/// `∇g` against the Weyl template: `∇_a g_{bc} - 2B_a g_{bc}`.
pub fn weyl_metricity_defect<S: Scalar>(conn: &Connection<S>, g: &Field<S>, b: &Field<S>) -> Result<Field<S>> {
    conn.covariant_derivative(g)?.sub(&g.outer(b).scale(S::from_i64(2)))
}

/// Distance of `∇g` from being proportional to `g`:
/// `M - g ⊗ (g^{bc} M_{bca} / n)` with `M_{bca} = ∇_a g_{bc}`.
pub fn non_proportionality<S: Scalar>(conn: &Connection<S>, g: &Field<S>) -> Result<Field<S>> {
    let n = conn.dim();
    let m = conn.covariant_derivative(g)?;
    let gi = inverse_metric(g)?;
    Ok(Field::lift(&[&m, g, &gi], Shape::new(n, 0, 3), move |v| {
        let (m, g, gi) = (v[0], v[1], v[2]);
        let inv_n = S::one() / S::from_i64(n as i64);
        let beta: Vec<S> = (0..n)
            .map(|a| {
                let mut acc = S::zero();
                for b in 0..n {
                    for c in 0..n {
                        acc = acc + gi[[b, c]].clone() * m[[b, c, a]].clone();
                    }
                }
                acc * inv_n.clone()
            })
            .collect();
        Tensor::from_fn(n, 0, 3, |i| m[[i[0], i[1], i[2]]].clone() - g[[i[0], i[1]]].clone() * beta[i[2]].clone())
    }))
}

impl<S: Scalar> ConformalScene<S> {
    pub fn new(hd: &HermitianData<S>) -> Result<Self> {
        Self::from_levi_civita(hd.levi_civita(), hd.metric(), hd.j())
    }

    /// Build from a connection playing the role of the Levi-Civita
    /// connection of `g`. Passing a formally rescaled connection yields the
    /// scene of the rescaled representative.
    pub fn from_levi_civita(lc: &Connection<S>, g: &Field<S>, j: &Field<S>) -> Result<Self> {
        let frame = lc.frame().clone();
        require_dim(&frame)?;
        let lee = lee_form_from(lc, j)?;
        let weyl = weyl_with_potential(lc, g, &lee)?;
        let gc = compute_g(&weyl, j)?;
        let gc_conn = complexify(&weyl, &gc)?;
        Ok(ConformalScene { frame, g: g.clone(), j: j.clone(), lee, weyl, gc, gc_conn })
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

    /// Lee form `B` of the representative.
    pub fn lee(&self) -> &Field<S> {
        &self.lee
    }

    /// Canonical Weyl connection `∇^c`.
    pub fn weyl(&self) -> &Connection<S> {
        &self.weyl
    }

    /// `G^c`, the intrinsic torsion of `∇^c`.
    pub fn gc(&self) -> &GTensor<S> {
        &self.gc
    }

    /// `∇^{gc} = ∇^c + G^c`.
    pub fn gc_connection(&self) -> &Connection<S> {
        &self.gc_conn
    }

    /// `∇^c J`, the conformal invariant measuring failure of `∇^c` to
    /// preserve `J`.
    pub fn mu(&self) -> Result<Field<S>> {
        self.weyl.covariant_derivative(&self.j)
    }

    /// `∇^{c,t} = ∇^{gc} + t G^c_+`.
    pub fn family(&self, t: S) -> Result<Connection<S>> {
        connection_family(&self.gc_conn, &self.gc, t)
    }

    fn lower(&self, t: &Field<S>) -> Field<S> {
        let n = self.frame.dim();
        t.zip(&self.g, Shape::new(n, 0, 3), |t, g| lower_tensor(t, g, 0).expect("(1,2)"))
    }
}

/// Output of the torsion parametrisation of compatible conformal
/// connections.
#[derive(Clone, Debug)]
pub struct TorsionSolution<S: Scalar> {
    pub torsion: Field<S>,
    pub a: Field<S>,
    /// `∇^T - ∇^c` in coefficient storage.
    pub difference: Field<S>,
    pub b_prime: Field<S>,
    pub connection: Connection<S>,
}

/// `A_d = 1/(n-2) (T^a_{ad} + ½ J^a_c J^b_d (T_a{}^c{}_b - T_{ba}{}^c - T^c{}_{ba}))`.
pub fn torsion_a_form<S: Scalar>(t: &Field<S>, g: &Field<S>, j: &Field<S>) -> Result<Field<S>> {
    let n = t.dim();
    let gi = inverse_metric(g)?;
    let k = S::one() / S::from_i64(n as i64 - 2);
    Ok(Field::lift(&[t, g, &gi, j], Shape::new(n, 0, 1), move |v| {
        let (t, g, gi, j) = (v[0], v[1], v[2], v[3]);
        // mixed[a][c][b] = T_a^c_b, second[b][a][c] = T_{ba}^c
        let mixed = Tensor::from_fn(n, 0, 3, |i| {
            let (a, c, b) = (i[0], i[1], i[2]);
            let mut acc = S::zero();
            for m in 0..n {
                for p in 0..n {
                    acc = acc + g[[a, m]].clone() * t[[m, p, b]].clone() * gi[[p, c]].clone();
                }
            }
            acc
        });
        let second = Tensor::from_fn(n, 0, 3, |i| {
            let (b, a, c) = (i[0], i[1], i[2]);
            let mut acc = S::zero();
            for m in 0..n {
                for p in 0..n {
                    acc = acc + g[[b, m]].clone() * t[[m, a, p]].clone() * gi[[p, c]].clone();
                }
            }
            acc
        });
        Tensor::from_fn(n, 0, 1, |i| {
            let d = i[0];
            let mut trace = S::zero();
            for a in 0..n {
                trace = trace + t[[a, a, d]].clone();
            }
            let mut rest = S::zero();
            for a in 0..n {
                for b in 0..n {
                    let jbd = j[[b, d]].clone();
                    if jbd.is_zero() {
                        continue;
                    }
                    for c in 0..n {
                        let jac = j[[a, c]].clone();
                        if jac.is_zero() {
                            continue;
                        }
                        let inner = mixed[[a, c, b]].clone() - second[[b, a, c]].clone() - t[[c, b, a]].clone();
                        rest = rest + jac * jbd.clone() * inner;
                    }
                }
            }
            (trace + rest * S::half()) * k.clone()
        })
    }))
}

/// `G_T` as a `(1,2)` tensor in coefficient storage: lowered,
/// `A_a g_{bc} - A_b g_{ac} - A_c g_{ab} + ½(T_{cab} - T_{abc} - T_{bca})`.
pub fn torsion_difference<S: Scalar>(t: &Field<S>, a: &Field<S>, g: &Field<S>, fc: &FrameComplex<S>) -> Result<Field<S>> {
    let n = fc.dim();
    let metric_part = metric_torsion_to_difference(t, g, fc)?;
    let gi = inverse_metric(g)?;
    let a_part = Field::lift(&[a, g, &gi], Shape::new(n, 1, 2), move |v| {
        let (a, g, gi) = (v[0], v[1], v[2]);
        let up: Vec<S> = (0..n).map(|x| (0..n).fold(S::zero(), |acc, m| acc + gi[[x, m]].clone() * a[[m]].clone())).collect();
        Tensor::from_fn(n, 1, 2, |i| {
            let (x, b, c) = (i[0], i[1], i[2]);
            let dxb = if x == b { S::one() } else { S::zero() };
            let dxc = if x == c { S::one() } else { S::zero() };
            up[x].clone() * g[[b, c]].clone() - a[[b]].clone() * dxc - a[[c]].clone() * dxb
        })
    });
    metric_part.add(&a_part)
}

/// The unique compatible conformal connection with torsion `T`.
pub fn torsion_to_weyl<S: Scalar>(t: &Field<S>, scene: &ConformalScene<S>) -> Result<TorsionSolution<S>> {
    let a = torsion_a_form(t, &scene.g, &scene.j)?;
    let difference = torsion_difference(t, &a, &scene.g, &scene.frame)?;
    let connection = scene.weyl.add_difference(&difference)?;
    let b_prime = a.add(&scene.lee)?;
    Ok(TorsionSolution { torsion: t.clone(), a, difference, b_prime, connection })
}

/// `V(T) = J G_T(·,·) + G_T(J·,·)`.
pub fn v_invariant<S: Scalar>(t: &Field<S>, scene: &ConformalScene<S>) -> Result<Field<S>> {
    let sol = torsion_to_weyl(t, scene)?;
    sol.difference.act(&scene.j, 0)?.add(&sol.difference.act(&scene.j, 1)?)
}

/// Faraday form `F = dB`.
pub fn faraday<S: Scalar>(scene: &ConformalScene<S>) -> Result<Field<S>> {
    exterior_derivative(&scene.lee, &scene.frame)
}

/// Maxwell current `δF`, dimension 4 only.
pub fn maxwell_current<S: Scalar>(scene: &ConformalScene<S>) -> Result<Field<S>> {
    if scene.frame.dim() != 4 {
        return Err(GeometryError::Dimension(scene.frame.dim(), "the Maxwell current is defined in dimension 4"));
    }
    codifferential(&faraday(scene)?, &scene.g, &scene.frame)
}

/// `Alt g(·, J H(·,·))` for a part `H` of `G^c`.
fn alt_jg<S: Scalar>(scene: &ConformalScene<S>, h: &Field<S>) -> Result<Field<S>> {
    scene.lower(&h.act(&scene.j, 0)?).alt(&[0, 1, 2])
}

/// `dω - 2B∧ω`, the Lee-form defect of the Kähler form.
pub fn lee_equation_defect<S: Scalar>(scene: &ConformalScene<S>) -> Result<Field<S>> {
    let omega = crate::hermitian::kahler_form(&scene.g, &scene.j)?;
    let d_omega = exterior_derivative(&omega, &scene.frame)?;
    d_omega.sub(&wedge(&scene.lee.scale(S::from_i64(2)), &omega)?)
}

/// Conformal Gray–Hervella rows and related flags; `None` marks rows that
/// do not apply in the scene's dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConformalClassification {
    /// `G^c = 0`.
    pub lck: Flag,
    /// `G^c(X,X) = 0`.
    pub nkw: Flag,
    /// `Alt g(·, JG^c(·,·)) = 0` for `n ≥ 6`, `F = 0` in dimension 4.
    pub lcak: Flag,
    /// `G^c_- = 0`.
    pub conformal_hermitian: Flag,
    /// `G^c_+ = 0`.
    pub w1w2w4: Flag,
    /// `G^c_-(X,X) = 0`.
    pub w1w3w4: Flag,
    /// `Alt g(·, JG^c_-(·,·)) = 0`, `n ≥ 6` only.
    pub w2w3w4: Option<Flag>,
    /// `B = 0` for the representative.
    pub csk: Flag,
    /// Anti-self-dual part of `F` vanishes (dimension 4).
    pub faraday_sd: Option<Flag>,
    /// Self-dual part of `F` vanishes (dimension 4).
    pub faraday_asd: Option<Flag>,
    /// `δF = 0` (dimension 4).
    pub maxwell: Option<Flag>,
}

pub fn classify_conformal<S: Scalar>(scene: &ConformalScene<S>, tol: f64) -> Result<ConformalClassification> {
    let fc = &scene.frame;
    let n = fc.dim();
    let gc = scene.gc.full();
    let f = faraday(scene)?;
    let lcak = if n >= 6 { Flag::decide(&alt_jg(scene, gc)?, fc, tol) } else { Flag::decide(&f, fc, tol) };
    let w2w3w4 = if n >= 6 { Some(Flag::decide(&alt_jg(scene, scene.gc.minus())?, fc, tol)) } else { None };
    let (faraday_sd, faraday_asd, maxwell) = if n == 4 {
        let types = two_form_type_split(&f, &scene.j, &scene.g, fc)?;
        let asd = types.asd_herm.add(&types.asd_anti)?;
        let sd = types.sd_herm.add(&types.sd_anti)?;
        (
            Some(Flag::decide(&asd, fc, tol)),
            Some(Flag::decide(&sd, fc, tol)),
            Some(Flag::decide(&maxwell_current(scene)?, fc, tol)),
        )
    } else {
        (None, None, None)
    };
    Ok(ConformalClassification {
        lck: Flag::decide(gc, fc, tol),
        nkw: Flag::decide(&GTensor::symm(gc), fc, tol),
        lcak,
        conformal_hermitian: Flag::decide(scene.gc.minus(), fc, tol),
        w1w2w4: Flag::decide(scene.gc.plus(), fc, tol),
        w1w3w4: Flag::decide(&GTensor::symm(scene.gc.minus()), fc, tol),
        w2w3w4,
        csk: Flag::decide(&scene.lee, fc, tol),
        faraday_sd,
        faraday_asd,
        maxwell,
    })
}

/// Trace conditions characterising `∇^c` among Weyl connections: the
/// compatibility divergence and the metric traces `g^{jk} H^i_{jk}` of
/// `G^W`, `JG^W`, `G^W(·,J·)` and `G^W(J·,J·)`.
#[derive(Clone, Debug)]
pub struct WeylTraces<S: Scalar> {
    pub divergence: Field<S>,
    pub metric_traces: [Field<S>; 4],
}

pub fn weyl_traces<S: Scalar>(w: &Connection<S>, g: &Field<S>, j: &Field<S>) -> Result<WeylTraces<S>> {
    let gw = compute_g(w, j)?;
    let gi = inverse_metric(g)?;
    let n = w.dim();
    let trace = |h: Field<S>| -> Field<S> {
        h.zip(&gi, Shape::new(n, 1, 0), move |h, gi| {
            Tensor::from_fn(n, 1, 0, |i| {
                let mut acc = S::zero();
                for a in 0..n {
                    for b in 0..n {
                        acc = acc + gi[[a, b]].clone() * h[[i[0], a, b]].clone();
                    }
                }
                acc
            })
        })
    };
    let full = gw.full();
    Ok(WeylTraces {
        divergence: compatibility_residual(w, j)?,
        metric_traces: [
            trace(full.clone()),
            trace(full.act(j, 0)?),
            trace(full.act(j, 2)?),
            trace(full.act(j, 1)?.act(j, 2)?),
        ],
    })
}

/// Residuals of the three defining properties of `∇^c`.
pub fn weyl_residuals<S: Scalar>(scene: &ConformalScene<S>) -> Result<[f64; 3]> {
    let fc = &scene.frame;
    Ok([
        scene.weyl.torsion_residual(),
        fc.max_abs(&weyl_metricity_defect(&scene.weyl, &scene.g, &scene.lee)?),
        fc.max_abs(&compatibility_residual(&scene.weyl, &scene.j)?),
    ])
}

/// Rebuild the scene after the formal change `g ↦ e^{2φ}g` with `Υ = dφ`
/// supplied pointwise.
pub fn formally_rescaled<S: Scalar>(scene: &ConformalScene<S>, hd: &HermitianData<S>, upsilon: &Field<S>) -> Result<ConformalScene<S>> {
    let lc = crate::connection::conformal_change_lc(hd.metric(), upsilon, hd.frame())?;
    ConformalScene::from_levi_civita(&lc, &scene.g, &scene.j)
}

/// Levi-Civita connection of a metric, re-exported for scene assembly.
pub fn representative_levi_civita<S: Scalar>(g: &Field<S>, fc: &FrameComplex<S>) -> Result<Connection<S>> {
    levi_civita(g, fc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::almost_complex::AlmostComplexStructure;
    use crate::scalar::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn flat_scene_is_trivial() {
        let fc = FrameComplex::<Rational>::abelian(4);
        let g = Field::constant(Tensor::from_fn(4, 0, 2, |i| if i[0] == i[1] { q(1) } else { q(0) }));
        let j = Field::constant(AlmostComplexStructure::standard(4));
        let hd = HermitianData::new(g, j, &fc).unwrap();
        let scene = ConformalScene::new(&hd).unwrap();
        assert!(scene.lee().as_constant().unwrap().negligible(0.0));
        assert_eq!(weyl_residuals(&scene).unwrap(), [0.0; 3]);
        let c = classify_conformal(&scene, 0.0).unwrap();
        assert!(c.lck.holds && c.nkw.holds && c.lcak.holds && c.csk.holds);
        assert!(c.maxwell.unwrap().holds);
        assert!(c.w2w3w4.is_none());
    }

    #[test]
    fn dimension_two_rejected() {
        let fc = FrameComplex::<Rational>::abelian(2);
        let g = Field::constant(Tensor::from_fn(2, 0, 2, |i| if i[0] == i[1] { q(1) } else { q(0) }));
        let j = Field::constant(AlmostComplexStructure::standard(2));
        let hd = HermitianData::new(g, j, &fc).unwrap();
        let err = ConformalScene::new(&hd).unwrap_err();
        assert!(matches!(err, GeometryError::Dimension(2, _)));
    }
}
