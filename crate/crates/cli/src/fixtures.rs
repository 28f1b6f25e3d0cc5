//! Named, parameterised fixture scenes.
//!
//! Every fixture renders to a [`SceneFile`], so `fixture NAME` output and
//! the shipped `.scene` files go through the same loader as user input.

use std::collections::BTreeMap;

use acgeom_core::families::{
    iwasawa, kaehler_flat, kodaira_thurston, nearly_kahler_s3s3, projective_stratum, surface_j, AlmostHermitianFixture,
    GpPart, MaxwellParams, SurfaceParams,
};
use acgeom_core::scalar::parse_scalar;
use acgeom_core::connection::Connection;
use acgeom_core::{Field, FrameComplex, Rational, Scalar, Tensor};

use crate::scene::{
    Backend, ChartBlock, ConformalBlock, FamilyTag, FrameBlock, MatrixBlock, ProjectiveBlock, Representative, SceneFile,
    Value0,
};

#[derive(Debug, thiserror::Error)]
pub enum FixtureError {
    #[error("unknown fixture {0:?}; known: {known}", known = names().join(", "))]
    Unknown(String),
    #[error("fixture {fixture}: unknown parameter {param:?}; known: {known}")]
    Param { fixture: &'static str, param: String, known: String },
    #[error("fixture {fixture}: parameter {param}: {message}")]
    Value { fixture: &'static str, param: String, message: String },
    #[error("fixture {0}: {1}")]
    Geometry(&'static str, acgeom_core::GeometryError),
}

/// Fixture name, parameter defaults, one-line description.
pub struct FixtureInfo {
    pub name: &'static str,
    pub params: &'static [(&'static str, &'static str)],
    pub about: &'static str,
}

pub const FIXTURES: &[FixtureInfo] = &[
    FixtureInfo {
        name: "kaehler-flat",
        params: &[("n", "4"), ("backend", "rational")],
        about: "flat torus with the standard J and Euclidean metric",
    },
    FixtureInfo {
        name: "maxwell-family",
        params: &[("a1", "1"), ("a2", "2"), ("b1", "1"), ("b2", "1"), ("c1", "1"), ("c2", "3"), ("s", "none")],
        about: "line times a three-dimensional solvable Lie group; setting s selects b1=a2, b2=s a2, c2=s c1",
    },
    FixtureInfo {
        name: "surface-projective",
        params: &[
            ("alpha", "1"),
            ("beta", "2"),
            ("a", "1"),
            ("b", "-1"),
            ("c", "2"),
            ("f", "1"),
            ("p", "1"),
            ("q", "3"),
            ("epsilon", "1"),
            ("compatible", "0"),
        ],
        about: "general torsion-free connection on a two-dimensional frame; compatible=1 imposes the compatibility relations",
    },
    FixtureInfo {
        name: "nilmanifold-ak",
        params: &[("backend", "rational")],
        about: "Kodaira-Thurston nilmanifold, almost Kaehler with non-integrable J",
    },
    FixtureInfo { name: "iwasawa", params: &[("backend", "rational")], about: "Iwasawa manifold, Hermitian and not Kaehler" },
    FixtureInfo {
        name: "nearly-kahler-s3s3",
        params: &[],
        about: "homogeneous strictly nearly Kaehler S3 x S3 (float backend)",
    },
    FixtureInfo {
        name: "projective-stratum",
        params: &[("base", "kodaira-thurston"), ("vanish", "minus-symm"), ("n", "4")],
        about: "projective class with chosen parts of G^p vanishing; vanish is a +-separated list of plus-symm, plus-skew, minus-symm, minus-skew",
    },
    FixtureInfo {
        name: "chart-hermitian",
        params: &[("n", "4"), ("phi", "0.5")],
        about: "non-holonomic chart frame with a conformally rescaled Hermitian metric (float backend)",
    },
    FixtureInfo {
        name: "chart-projective",
        params: &[("n", "4")],
        about: "coordinate chart with the flat connection and a point-dependent J (float backend)",
    },
];

/// Fixture scenes shipped under `fixtures/`: file stem, fixture, parameters.
pub const SHIPPED: &[(&str, &str, &[(&str, &str)])] = &[
    ("kaehler_flat", "kaehler-flat", &[]),
    ("maxwell_family", "maxwell-family", &[]),
    ("maxwell_subfamily", "maxwell-family", &[("s", "2"), ("a1", "1"), ("a2", "1"), ("c1", "1")]),
    ("surface_projective", "surface-projective", &[]),
    ("surface_compatible", "surface-projective", &[("compatible", "1")]),
    ("nilmanifold_ak", "nilmanifold-ak", &[]),
    ("iwasawa", "iwasawa", &[]),
    ("nearly_kahler_s3s3", "nearly-kahler-s3s3", &[]),
    ("stratum_compatible", "projective-stratum", &[("vanish", "minus-symm")]),
    ("stratum_pnk", "projective-stratum", &[("vanish", "plus-symm+minus-symm")]),
    ("chart_hermitian", "chart-hermitian", &[]),
    ("chart_projective", "chart-projective", &[]),
];

pub fn names() -> Vec<&'static str> {
    FIXTURES.iter().map(|f| f.name).collect()
}

pub fn info(name: &str) -> Option<&'static FixtureInfo> {
    FIXTURES.iter().find(|f| f.name == name)
}

/// Resolved parameters: defaults overridden by `overrides`.
struct Params {
    fixture: &'static str,
    values: BTreeMap<String, String>,
}

impl Params {
    fn new(info: &'static FixtureInfo, overrides: &[(String, String)]) -> Result<Self, FixtureError> {
        let mut values: BTreeMap<String, String> = info.params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        for (k, v) in overrides {
            if !values.contains_key(k) {
                return Err(FixtureError::Param {
                    fixture: info.name,
                    param: k.clone(),
                    known: info.params.iter().map(|p| p.0).collect::<Vec<_>>().join(", "),
                });
            }
            values.insert(k.clone(), v.trim().to_string());
        }
        Ok(Params { fixture: info.name, values })
    }

    fn text(&self, key: &str) -> &str {
        &self.values[key]
    }

    fn bad(&self, key: &str, message: impl Into<String>) -> FixtureError {
        FixtureError::Value { fixture: self.fixture, param: key.into(), message: message.into() }
    }

    fn scalar<S: Scalar>(&self, key: &str) -> Result<S, FixtureError> {
        parse_scalar(self.text(key)).ok_or_else(|| self.bad(key, format!("{:?} is not a number", self.text(key))))
    }

    fn usize(&self, key: &str) -> Result<usize, FixtureError> {
        self.text(key).parse().map_err(|_| self.bad(key, "expected a non-negative integer"))
    }

    fn flag(&self, key: &str) -> Result<bool, FixtureError> {
        match self.text(key) {
            "0" | "false" => Ok(false),
            "1" | "true" => Ok(true),
            other => Err(self.bad(key, format!("expected 0 or 1, got {other:?}"))),
        }
    }

    fn backend(&self) -> Result<Backend, FixtureError> {
        match self.text("backend") {
            "rational" => Ok(Backend::Rational),
            "float" => Ok(Backend::Float),
            other => Err(self.bad("backend", format!("expected rational or float, got {other:?}"))),
        }
    }

    fn tag(&self) -> FamilyTag {
        let params = self
            .values
            .iter()
            .filter(|(k, v)| k.as_str() != "backend" && v.as_str() != "none")
            .map(|(k, v)| {
                let v = match v.parse::<i64>() {
                    Ok(i) => Value0::Int(i),
                    Err(_) => Value0::Text(v.clone()),
                };
                (k.clone(), v)
            })
            .collect();
        FamilyTag { name: self.fixture.to_string(), params }
    }
}

/// Build the scene document of a named fixture.
pub fn fixture(name: &str, overrides: &[(String, String)]) -> Result<SceneFile, FixtureError> {
    let info = info(name).ok_or_else(|| FixtureError::Unknown(name.to_string()))?;
    let p = Params::new(info, overrides)?;
    let geo = |e| FixtureError::Geometry(info.name, e);
    let mut file = match info.name {
        "kaehler-flat" => {
            let n = p.usize("n")?;
            match p.backend()? {
                Backend::Rational => hermitian_file::<Rational>(&kaehler_flat(n).map_err(geo)?, Backend::Rational),
                Backend::Float => hermitian_file::<f64>(&kaehler_flat(n).map_err(geo)?, Backend::Float),
            }
        }
        "maxwell-family" => {
            let params = maxwell_params(&p)?;
            let fx = acgeom_core::families::maxwell_family(&params).map_err(geo)?;
            hermitian_file::<Rational>(&fx, Backend::Rational)
        }
        "surface-projective" => {
            let mut sp = SurfaceParams::<Rational> {
                alpha: p.scalar("alpha")?,
                beta: p.scalar("beta")?,
                a: p.scalar("a")?,
                b: p.scalar("b")?,
                c: p.scalar("c")?,
                f: p.scalar("f")?,
                p: p.scalar("p")?,
                q: p.scalar("q")?,
            };
            if p.flag("compatible")? {
                sp = sp.compatible();
            }
            let eps: i64 = p.text("epsilon").parse().map_err(|_| p.bad("epsilon", "expected 1 or -1"))?;
            if eps != 1 && eps != -1 {
                return Err(p.bad("epsilon", "expected 1 or -1"));
            }
            let fx = acgeom_core::families::surface_family(&sp, eps as i8).map_err(geo)?;
            let mut file = base_file::<Rational>(&fx.frame, &fx.j, fx.g.as_ref(), Backend::Rational);
            file.projective = Some(explicit(&fx.rep));
            // record the relations actually imposed so oracles see the true c, f
            let mut tag = p.tag();
            tag.params.insert("c".into(), Value0::exact(&sp.c));
            tag.params.insert("f".into(), Value0::exact(&sp.f));
            debug_assert_eq!(surface_j::<Rational>(eps as i8), fx.j.as_constant().unwrap().clone());
            file.family = Some(tag);
            file.name = info.name.into();
            return Ok(file);
        }
        "nilmanifold-ak" => match p.backend()? {
            Backend::Rational => hermitian_file::<Rational>(&kodaira_thurston().map_err(geo)?, Backend::Rational),
            Backend::Float => hermitian_file::<f64>(&kodaira_thurston().map_err(geo)?, Backend::Float),
        },
        "iwasawa" => match p.backend()? {
            Backend::Rational => hermitian_file::<Rational>(&iwasawa().map_err(geo)?, Backend::Rational),
            Backend::Float => hermitian_file::<f64>(&iwasawa().map_err(geo)?, Backend::Float),
        },
        "nearly-kahler-s3s3" => hermitian_file::<f64>(&nearly_kahler_s3s3().map_err(geo)?, Backend::Float),
        "projective-stratum" => {
            let base = match p.text("base") {
                "kodaira-thurston" => kodaira_thurston::<Rational>().map_err(geo)?,
                "iwasawa" => iwasawa::<Rational>().map_err(geo)?,
                "abelian" => kaehler_flat::<Rational>(p.usize("n")?).map_err(geo)?,
                other => return Err(p.bad("base", format!("expected kodaira-thurston, iwasawa or abelian, got {other:?}"))),
            };
            let mut parts = Vec::new();
            for word in p.text("vanish").split('+').map(str::trim).filter(|w| !w.is_empty()) {
                parts.push(match word {
                    "plus-symm" => GpPart::PlusSymm,
                    "plus-skew" => GpPart::PlusSkew,
                    "minus-symm" => GpPart::MinusSymm,
                    "minus-skew" => GpPart::MinusSkew,
                    other => return Err(p.bad("vanish", format!("unknown part {other:?}"))),
                });
            }
            let fx = projective_stratum(&base.frame, &base.j, &parts).map_err(geo)?;
            let mut file = base_file::<Rational>(&fx.frame, &fx.j, None, Backend::Rational);
            file.projective = Some(explicit(&fx.rep));
            file
        }
        "chart-hermitian" => chart_hermitian(&p)?,
        "chart-projective" => chart_projective(&p)?,
        _ => unreachable!("every listed fixture is handled"),
    };
    file.name = info.name.into();
    file.family = Some(p.tag());
    Ok(file)
}

fn maxwell_params(p: &Params) -> Result<MaxwellParams<Rational>, FixtureError> {
    let (a1, a2, c1) = (p.scalar("a1")?, p.scalar("a2")?, p.scalar("c1")?);
    Ok(if p.text("s") == "none" {
        MaxwellParams { a1, a2, b1: p.scalar("b1")?, b2: p.scalar("b2")?, c1, c2: p.scalar("c2")? }
    } else {
        MaxwellParams::maxwell(p.scalar("s")?, a1, a2, c1)
    })
}

/// Resolved Maxwell constants recorded in a family tag.
pub fn maxwell_from_tag(tag: &FamilyTag) -> Option<MaxwellParams<Rational>> {
    let get = |k: &str| tag.params.get(k).and_then(|v| parse_scalar::<Rational>(&v.to_string()));
    let (a1, a2, c1) = (get("a1")?, get("a2")?, get("c1")?);
    Some(match get("s") {
        Some(s) => MaxwellParams::maxwell(s, a1, a2, c1),
        None => MaxwellParams { a1, a2, b1: get("b1")?, b2: get("b2")?, c1, c2: get("c2")? },
    })
}

/// Surface parameters recorded in a family tag.
pub fn surface_from_tag(tag: &FamilyTag) -> Option<(SurfaceParams<Rational>, i8)> {
    let get = |k: &str| tag.params.get(k).and_then(|v| parse_scalar::<Rational>(&v.to_string()));
    let sp = SurfaceParams {
        alpha: get("alpha")?,
        beta: get("beta")?,
        a: get("a")?,
        b: get("b")?,
        c: get("c")?,
        f: get("f")?,
        p: get("p")?,
        q: get("q")?,
    };
    let eps = get("epsilon")?;
    Some((sp, if eps.signum_i8() < 0 { -1 } else { 1 }))
}

fn matrix_rows<S: Scalar>(t: &Tensor<S>) -> Vec<Vec<Value0>> {
    let n = t.dim();
    (0..n).map(|r| (0..n).map(|c| Value0::exact(&t[[r, c]])).collect()).collect()
}

fn sparse_matrix<S: Scalar>(t: &Tensor<S>) -> Vec<(usize, usize, Value0)> {
    let n = t.dim();
    let mut out = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if !t[[r, c]].is_zero() {
                out.push((r, c, Value0::exact(&t[[r, c]])));
            }
        }
    }
    out
}

fn base_file<S: Scalar>(frame: &FrameComplex<S>, j: &Field<S>, g: Option<&Field<S>>, backend: Backend) -> SceneFile {
    let n = frame.dim();
    let c = frame.structure();
    let c = c.as_constant().expect("homogeneous fixture");
    let mut structure = Vec::new();
    for i in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if !c[[i, a, b]].is_zero() {
                    structure.push((i, a, b, Value0::exact(&c[[i, a, b]])));
                }
            }
        }
    }
    SceneFile {
        name: String::new(),
        backend,
        seed: 0,
        trials: None,
        family: None,
        frame: FrameBlock {
            dim: n,
            orientation: (frame.orientation() != 1).then_some(frame.orientation()),
            structure: (!structure.is_empty()).then_some(structure),
            chart: None,
        },
        j: MatrixBlock { entries: Some(sparse_matrix(j.as_constant().expect("constant J"))), ..Default::default() },
        metric: g.map(|g| MatrixBlock { matrix: Some(matrix_rows(g.as_constant().expect("constant metric"))), ..Default::default() }),
        conformal: None,
        projective: None,
        tolerance: None,
    }
}

/// Almost Hermitian fixture with every pipeline switched on.
fn hermitian_file<S: Scalar>(fx: &AlmostHermitianFixture<S>, backend: Backend) -> SceneFile {
    let mut file = base_file(&fx.frame, &fx.j, Some(&fx.g), backend);
    if fx.frame.dim() >= 4 {
        file.conformal = Some(ConformalBlock { enabled: true });
    }
    file.projective = Some(ProjectiveBlock { representative: Representative::LeviCivita, gamma: None });
    file
}

fn explicit<S: Scalar>(conn: &Connection<S>) -> ProjectiveBlock {
    let g = conn.gamma();
    let g = g.as_constant().expect("constant representative");
    let n = g.dim();
    let mut gamma = Vec::new();
    for b in 0..n {
        for c in 0..n {
            for a in 0..n {
                if !g[[b, c, a]].is_zero() {
                    gamma.push((b, c, a, Value0::exact(&g[[b, c, a]])));
                }
            }
        }
    }
    ProjectiveBlock { representative: Representative::Explicit, gamma: Some(gamma) }
}

fn text(s: impl Into<String>) -> Value0 {
    Value0::Text(s.into())
}

fn even_dim(p: &Params) -> Result<usize, FixtureError> {
    let n = p.usize("n")?;
    if n < 4 || n % 2 == 1 {
        return Err(p.bad("n", "expected an even dimension of at least 4"));
    }
    Ok(n)
}

fn chart_hermitian(p: &Params) -> Result<SceneFile, FixtureError> {
    let n = even_dim(p)?;
    let w: f64 = p.text("phi").parse().map_err(|_| p.bad("phi", "expected a number"))?;
    // e_0 = ∂_0 + (1/2) x1² ∂_{n-1}, e_1 = ∂_1 + x2 ∂_0, others coordinate
    let mut vectors: Vec<Vec<Value0>> = (0..n).map(|a| (0..n).map(|mu| Value0::Int((a == mu) as i64)).collect()).collect();
    vectors[1][0] = text("x2");
    vectors[0][n - 1] = text("0.5 * x1 * x1");
    let conformal_factor = format!("math::exp(2.0 * {w:?} * (x0 * x1 + math::sin(x2)))");
    let metric = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| {
                    let (lo, hi) = (a.min(b), a.max(b));
                    let base = if a == b { "2.0" } else { "0.0" };
                    text(format!(
                        "({base} + 0.3 * math::sin(x{lo} + 1.3 * x{hi} + {:?})) * {conformal_factor}",
                        (lo + 2 * hi) as f64 * 0.5
                    ))
                })
                .collect()
        })
        .collect();
    Ok(SceneFile {
        name: String::new(),
        backend: Backend::Float,
        seed: 0,
        trials: None,
        family: None,
        frame: FrameBlock {
            dim: n,
            orientation: None,
            structure: None,
            chart: Some(ChartBlock { vectors, samples: None, step: None, richardson: None }),
        },
        j: MatrixBlock::default(),
        metric: Some(MatrixBlock { matrix: Some(metric), hermitize: true, ..Default::default() }),
        conformal: Some(ConformalBlock { enabled: true }),
        projective: None,
        tolerance: None,
    })
}

fn chart_projective(p: &Params) -> Result<SceneFile, FixtureError> {
    let n = even_dim(p)?;
    let vectors = (0..n).map(|a| (0..n).map(|mu| Value0::Int((a == mu) as i64)).collect()).collect();
    let conjugator = (0..n)
        .map(|r| {
            (0..n)
                .map(|c| {
                    let base = if r == c { "1.0 + " } else { "" };
                    text(format!("{base}0.2 * math::sin(x{r} + 2.0 * x{c} + {:?})", (r * n + c) as f64 * 0.37))
                })
                .collect()
        })
        .collect();
    Ok(SceneFile {
        name: String::new(),
        backend: Backend::Float,
        seed: 0,
        trials: None,
        family: None,
        frame: FrameBlock {
            dim: n,
            orientation: None,
            structure: None,
            chart: Some(ChartBlock { vectors, samples: None, step: None, richardson: None }),
        },
        j: MatrixBlock { conjugator: Some(conjugator), ..Default::default() },
        metric: None,
        conformal: None,
        projective: Some(ProjectiveBlock { representative: Representative::Flat, gamma: None }),
        tolerance: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{build, Scene};

    #[test]
    fn every_fixture_loads() {
        for f in FIXTURES {
            let file = fixture(f.name, &[]).unwrap_or_else(|e| panic!("{}: {e}", f.name));
            let reparsed = SceneFile::parse(&file.to_text()).unwrap();
            assert_eq!(reparsed, file, "{}", f.name);
            build(&file, None).unwrap_or_else(|e| panic!("{}: {e}", f.name));
        }
    }

    #[test]
    fn maxwell_parameters_reach_the_frame() {
        let file = fixture("maxwell-family", &[("s".into(), "2".into()), ("a2".into(), "1".into())]).unwrap();
        let tag = file.family.clone().unwrap();
        let mp = maxwell_from_tag(&tag).unwrap();
        assert_eq!(mp.b2, Rational::from_i64(2));
        let Scene::Rational(d) = build(&file, None).unwrap() else { panic!("rational") };
        assert_eq!(d.frame.jacobi_residual(), 0.0);
    }

    #[test]
    fn unknown_parameter_is_rejected() {
        let err = fixture("kaehler-flat", &[("a1".into(), "1".into())]).unwrap_err();
        assert!(err.to_string().contains("unknown parameter"));
    }

    #[test]
    fn chart_fixture_matches_library_chart() {
        let file = fixture("chart-projective", &[]).unwrap();
        let Scene::Float(d) = build(&file, None).unwrap() else { panic!("float") };
        let lib = acgeom_core::families::chart_j(4);
        let x = &d.frame.samples()[1];
        let diff = d.j.at(x).sub(&lib.at(x)).unwrap().max_abs();
        assert!(diff < 1e-12, "{diff}");
    }
}
