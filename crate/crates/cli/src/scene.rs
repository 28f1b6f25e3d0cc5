//! Scene files.
//!
//! A scene is TOML whose first line is exactly [`HEADER`]. Scalars are
//! TOML integers, floats, or strings `"p/q"`; on chart frames a string that
//! does not parse as a scalar is an expression in `x0 … x{n-1}`.
//!
//! ```toml
//! # acs-scene v1
//! name = "kaehler-flat"
//! backend = "rational"
//!
//! [frame]
//! dim = 4
//! structure = [[3, 0, 2, "1/2"]]   # [e_0, e_2] = ½ e_3, j < k
//!
//! [j]
//! entries = [[1, 0, 1], [0, 1, -1], [3, 2, 1], [2, 3, -1]]
//!
//! [metric]
//! matrix = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use acgeom_core::almost_complex::{validate_acs, AlmostComplexStructure};
use acgeom_core::connection::{levi_civita, Connection};
use acgeom_core::forms::complex_orientation;
use acgeom_core::hermitian::{hermitian_defect, hermitize_metric};
use acgeom_core::metric::validate_metric;
use acgeom_core::scalar::parse_scalar;
use acgeom_core::{Differencing, Field, FrameComplex, Matrix, Rational, Scalar, Shape, Tensor, Tolerance};
use evalexpr::{ContextWithMutableVariables, HashMapContext, Node, Value};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Mandatory first line of every scene file.
pub const HEADER: &str = "# acs-scene v1";

/// Environment variable overriding the default float tolerance.
pub const TOLERANCE_ENV: &str = "ACGEOM_TOLERANCE";

/// Default number of random trials per randomised check.
pub const DEFAULT_TRIALS: usize = 64;

#[derive(Debug, thiserror::Error)]
pub enum SceneError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("missing header line `{HEADER}`")]
    Header,
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error("invariant violated on load: {0}")]
    Invariant(#[from] acgeom_core::GeometryError),
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> SceneError {
    SceneError::Field { field: field.into(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Rational,
    Float,
}

/// A scalar as written in a scene file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value0 {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Value0 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value0::Int(v) => write!(f, "{v}"),
            Value0::Float(v) => write!(f, "{v}"),
            Value0::Text(v) => f.write_str(v),
        }
    }
}

impl Value0 {
    /// Canonical text for an exact scalar: integers stay integers.
    pub fn exact<S: Scalar>(v: &S) -> Self {
        let text = v.to_string();
        match text.parse::<i64>() {
            Ok(i) => Value0::Int(i),
            Err(_) if S::EXACT => Value0::Text(text),
            Err(_) => Value0::Float(v.to_f64()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyTag {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, Value0>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartBlock {
    /// `vectors[a][μ] = E^μ_a`: row `a` is the frame field `e_a`.
    pub vectors: Vec<Vec<Value0>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub richardson: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameBlock {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<i8>,
    /// Sparse `[i, j, k, v]`: `[e_j, e_k] = v e_i`; the `(k, j)` entry is implied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<Vec<(usize, usize, usize, Value0)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chart: Option<ChartBlock>,
}

/// A matrix given densely or as sparse `[row, col, v]` entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<Value0>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub entries: Option<Vec<(usize, usize, Value0)>>,
    /// `J = P J_0 P^{-1}` with `J_0` standard; only in `[j]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conjugator: Option<Vec<Vec<Value0>>>,
    /// Replace the metric by its `J`-invariant part; only in `[metric]`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub hermitize: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalBlock {
    #[serde(default = "yes")]
    pub enabled: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representative {
    /// Levi-Civita connection of the metric block.
    LeviCivita,
    /// `Γ = -½c`, torsion-free on any frame.
    Symmetric,
    /// `Γ = 0` in the frame; torsion-free only on holonomic frames.
    Flat,
    /// Sparse `gamma` entries on top of `Γ = 0`.
    Explicit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectiveBlock {
    pub representative: Representative,
    /// Sparse `[b, c, a, v]` with `∇_{e_a} e_c = Γ^b_{ca} e_b`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Vec<(usize, usize, usize, Value0)>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algebraic: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<f64>,
}

/// Parsed but not yet validated scene document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    pub name: String,
    pub backend: Backend,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyTag>,
    pub frame: FrameBlock,
    pub j: MatrixBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<MatrixBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformal: Option<ConformalBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projective: Option<ProjectiveBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceBlock>,
}

impl SceneFile {
    pub fn parse(text: &str) -> Result<Self, SceneError> {
        if text.lines().next().map(str::trim_end) != Some(HEADER) {
            return Err(SceneError::Header);
        }
        toml::from_str(text).map_err(|e| SceneError::Schema(e.message().to_string() + &span_note(text, e.span())))
    }

    pub fn read(path: &Path) -> Result<Self, SceneError> {
        let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Scene text with the header line; parses back to an equal document.
    pub fn to_text(&self) -> String {
        let body = toml::to_string(self).expect("scene documents serialise");
        format!("{HEADER}\n{body}")
    }

    /// `sha256` of the canonical JSON rendering of the document.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("scene documents serialise");
        let hash = Sha256::digest(canonical.as_bytes());
        format!("sha256:{hash:x}")
    }
}

fn span_note(text: &str, span: Option<std::ops::Range<usize>>) -> String {
    match span {
        Some(r) => {
            let line = text[..r.start.min(text.len())].lines().count().max(1);
            format!(" (line {line})")
        }
        None => String::new(),
    }
}

/// Validated scene over one scalar backend.
#[derive(Clone)]
pub struct SceneData<S: Scalar> {
    pub name: String,
    pub digest: String,
    pub frame: FrameComplex<S>,
    pub j: Field<S>,
    pub metric: Option<Field<S>>,
    pub conformal: bool,
    pub projective: Option<Connection<S>>,
    pub family: Option<FamilyTag>,
    pub tolerance: Tolerance,
    pub seed: u64,
    pub trials: usize,
    /// Load-time observations that are not errors.
    pub notes: Vec<String>,
    /// Load-time residuals `(check id, residual)`.
    pub load_residuals: Vec<(&'static str, f64)>,
}

impl<S: Scalar> SceneData<S> {
    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// Tolerance for identities on this frame (ignored on exact backends).
    pub fn tol(&self) -> f64 {
        self.frame.tolerance(&self.tolerance)
    }
}

#[derive(Clone)]
pub enum Scene {
    Rational(SceneData<Rational>),
    Float(SceneData<f64>),
}

/// Run `$body` with `$data` bound to the backend-specific scene data.
#[macro_export]
macro_rules! with_scene {
    ($scene:expr, $data:ident => $body:expr) => {
        match $scene {
            $crate::scene::Scene::Rational($data) => $body,
            $crate::scene::Scene::Float($data) => $body,
        }
    };
}

impl Scene {
    pub fn name(&self) -> &str {
        with_scene!(self, d => &d.name)
    }

    pub fn digest(&self) -> &str {
        with_scene!(self, d => &d.digest)
    }

    pub fn backend(&self) -> Backend {
        match self {
            Scene::Rational(_) => Backend::Rational,
            Scene::Float(_) => Backend::Float,
        }
    }

    pub fn dim(&self) -> usize {
        with_scene!(self, d => d.dim())
    }

    pub fn seed(&self) -> u64 {
        with_scene!(self, d => d.seed)
    }

    pub fn set_seed(&mut self, seed: u64) {
        with_scene!(self, d => d.seed = seed)
    }

    pub fn set_trials(&mut self, trials: usize) {
        with_scene!(self, d => d.trials = trials)
    }

    pub fn trials(&self) -> usize {
        with_scene!(self, d => d.trials)
    }

    pub fn tolerance(&self) -> Tolerance {
        with_scene!(self, d => d.tolerance)
    }

    pub fn is_chart(&self) -> bool {
        with_scene!(self, d => d.frame.is_chart())
    }
}

/// Tolerances: built-in defaults, then the environment override, then the
/// scene block, then an explicit command-line value.
pub fn resolve_tolerance(block: Option<&ToleranceBlock>, cli: Option<f64>) -> Result<Tolerance, SceneError> {
    let mut tol = Tolerance::default();
    if let Ok(text) = std::env::var(TOLERANCE_ENV) {
        let v: f64 = text.trim().parse().map_err(|_| field_err(TOLERANCE_ENV, format!("not a number: {text:?}")))?;
        tol.algebraic = v;
        tol.derivative = tol.derivative.max(v);
    }
    if let Some(b) = block {
        tol.algebraic = b.algebraic.unwrap_or(tol.algebraic);
        tol.derivative = b.derivative.unwrap_or(tol.derivative);
        tol.structure = b.structure.unwrap_or(tol.structure);
    }
    if let Some(v) = cli {
        tol = Tolerance { algebraic: v, derivative: v.max(tol.derivative), structure: tol.structure.max(v.min(1e-9)) };
    }
    for (name, v) in [("algebraic", tol.algebraic), ("derivative", tol.derivative), ("structure", tol.structure)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(field_err(format!("tolerance.{name}"), "must be a finite non-negative number"));
        }
    }
    Ok(tol)
}

pub fn load_path(path: &Path, cli_tolerance: Option<f64>) -> Result<Scene, SceneError> {
    build(&SceneFile::read(path)?, cli_tolerance)
}

/// Validate a document and build the scene on its backend.
pub fn build(file: &SceneFile, cli_tolerance: Option<f64>) -> Result<Scene, SceneError> {
    let tol = resolve_tolerance(file.tolerance.as_ref(), cli_tolerance)?;
    Ok(match file.backend {
        Backend::Rational => Scene::Rational(build_on::<Rational>(file, tol)?),
        Backend::Float => Scene::Float(build_on::<f64>(file, tol)?),
    })
}

/// Entry of a field: constant scalar or a chart expression.
enum Entry<S> {
    Const(S),
    Expr(Arc<Node>),
}

fn entry<S: Scalar>(v: &Value0, field: &str, chart: bool) -> Result<Entry<S>, SceneError> {
    match v {
        Value0::Int(i) => Ok(Entry::Const(S::from_i64(*i))),
        Value0::Float(x) => {
            if S::EXACT {
                parse_scalar::<S>(&format!("{x:?}")).map(Entry::Const).ok_or_else(|| field_err(field, "bad number"))
            } else {
                Ok(Entry::Const(S::from_f64(*x)))
            }
        }
        Value0::Text(t) => {
            if let Some(s) = parse_scalar::<S>(t) {
                return Ok(Entry::Const(s));
            }
            if !chart {
                return Err(field_err(field, format!("{t:?} is not a scalar (expressions need a chart frame)")));
            }
            if S::EXACT {
                return Err(field_err(field, "expressions need the float backend"));
            }
            evalexpr::build_operator_tree(t)
                .map(|n| Entry::Expr(Arc::new(n)))
                .map_err(|e| field_err(field, format!("expression {t:?}: {e}")))
        }
    }
}

fn eval_expr(node: &Node, x: &[f64]) -> f64 {
    let mut ctx = HashMapContext::new();
    for (i, v) in x.iter().enumerate() {
        ctx.set_value(format!("x{i}"), Value::Float(*v)).expect("fresh context");
    }
    node.eval_number_with_context(&ctx).unwrap_or(f64::NAN)
}

/// Dense `n × n` grid of entries from a matrix block.
fn grid<S: Scalar>(block: &MatrixBlock, n: usize, field: &str, chart: bool) -> Result<Vec<Vec<Entry<S>>>, SceneError> {
    let mut out: Vec<Vec<Entry<S>>> = (0..n).map(|_| (0..n).map(|_| Entry::Const(S::zero())).collect()).collect();
    match (&block.matrix, &block.entries) {
        (Some(rows), None) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(field_err(format!("{field}.matrix"), format!("must be {n} × {n}")));
            }
            for (r, row) in rows.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    out[r][c] = entry(v, &format!("{field}.matrix[{r}][{c}]"), chart)?;
                }
            }
        }
        (None, Some(entries)) => {
            for (k, (r, c, v)) in entries.iter().enumerate() {
                if *r >= n || *c >= n {
                    return Err(field_err(format!("{field}.entries[{k}]"), format!("index out of range for dimension {n}")));
                }
                out[*r][*c] = entry(v, &format!("{field}.entries[{k}]"), chart)?;
            }
        }
        (Some(_), Some(_)) => return Err(field_err(field, "give either `matrix` or `entries`, not both")),
        (None, None) => {}
    }
    Ok(out)
}

/// Field of an `n × n` grid with the given valence.
fn grid_field<S: Scalar>(g: Vec<Vec<Entry<S>>>, upper: usize, lower: usize) -> Field<S> {
    let n = g.len();
    let constant = g.iter().flatten().all(|e| matches!(e, Entry::Const(_)));
    let value = move |g: &Vec<Vec<Entry<S>>>, x: &[f64]| {
        Tensor::from_fn(n, upper, lower, |i| match &g[i[0]][i[1]] {
            Entry::Const(s) => s.clone(),
            Entry::Expr(node) => S::from_f64(eval_expr(node, x)),
        })
    };
    if constant {
        Field::constant(value(&g, &[]))
    } else {
        Field::sampled(Shape::new(n, upper, lower), move |x| value(&g, x))
    }
}

fn default_chart_samples(n: usize) -> Vec<Vec<f64>> {
    acgeom_core::families::chart_samples(n, 3)
}

fn build_frame<S: Scalar>(file: &SceneFile) -> Result<FrameComplex<S>, SceneError> {
    let fb = &file.frame;
    let n = fb.dim;
    if n == 0 {
        return Err(field_err("frame.dim", "must be positive"));
    }
    let orientation = fb.orientation.unwrap_or(1);
    if orientation != 1 && orientation != -1 {
        return Err(field_err("frame.orientation", "must be 1 or -1"));
    }
    match (&fb.structure, &fb.chart) {
        (Some(_), Some(_)) => Err(field_err("frame", "give either `structure` or `chart`, not both")),
        (None, Some(chart)) => {
            if S::EXACT {
                return Err(field_err("frame.chart", "chart frames need the float backend"));
            }
            let block = MatrixBlock { matrix: Some(chart.vectors.clone()), ..Default::default() };
            let rows = grid::<S>(&block, n, "frame.chart.vectors", true)?;
            // stored as E^μ_a: transpose the row-per-vector layout
            let rows: Vec<Vec<Entry<S>>> = {
                let mut rows = rows;
                let mut t: Vec<Vec<Entry<S>>> = (0..n).map(|_| Vec::with_capacity(n)).collect();
                for row in rows.iter_mut() {
                    for (mu, e) in row.drain(..).enumerate() {
                        t[mu].push(e);
                    }
                }
                t
            };
            let field = grid_field(rows, 1, 1);
            let samples = chart.samples.clone().unwrap_or_else(|| default_chart_samples(n));
            if let Some(bad) = samples.iter().position(|s| s.len() != n) {
                return Err(field_err(format!("frame.chart.samples[{bad}]"), format!("needs {n} coordinates")));
            }
            let differencing = Differencing {
                step: chart.step.unwrap_or(acgeom_core::families::chart_differencing().step),
                richardson: chart.richardson.unwrap_or(true),
            };
            Ok(FrameComplex::chart(n, move |x| field.at(x), differencing, samples, orientation)?)
        }
        (structure, None) => {
            let mut entries = Vec::new();
            for (k, (i, j, kk, v)) in structure.iter().flatten().enumerate() {
                let name = format!("frame.structure[{k}]");
                if *i >= n || *j >= n || *kk >= n {
                    return Err(field_err(name, format!("index out of range for dimension {n}")));
                }
                if j == kk {
                    return Err(field_err(name, "bracket of a vector with itself"));
                }
                match entry::<S>(v, &name, false)? {
                    Entry::Const(s) => entries.push((*i, *j, *kk, s)),
                    Entry::Expr(_) => unreachable!("homogeneous entries are constant"),
                }
            }
            Ok(FrameComplex::from_structure_entries(n, &entries, orientation)?)
        }
    }
}

fn build_j<S: Scalar>(file: &SceneFile, fc: &FrameComplex<S>) -> Result<Field<S>, SceneError> {
    let n = fc.dim();
    let chart = fc.is_chart();
    let jb = &file.j;
    if jb.hermitize {
        return Err(field_err("j.hermitize", "only meaningful in [metric]"));
    }
    if let Some(p) = &jb.conjugator {
        if jb.matrix.is_some() || jb.entries.is_some() {
            return Err(field_err("j", "give either a conjugator or explicit entries"));
        }
        let block = MatrixBlock { matrix: Some(p.clone()), ..Default::default() };
        let p = grid_field(grid::<S>(&block, n, "j.conjugator", chart)?, 1, 1);
        let j0 = AlmostComplexStructure::<S>::standard(n);
        for x in fc.samples() {
            if Matrix::from_tensor(&p.at(x)).inverse(1e-12).is_err() {
                return Err(field_err("j.conjugator", format!("singular at sample {x:?}")));
            }
        }
        return Ok(p.map(Shape::new(n, 1, 1), move |p| {
            let pm = Matrix::from_tensor(p);
            let pinv = pm.inverse(1e-12).expect("checked at samples");
            pm.mul(&Matrix::from_tensor(&j0)).mul(&pinv).to_tensor(1, 1)
        }));
    }
    if jb.matrix.is_none() && jb.entries.is_none() {
        return Ok(Field::constant(AlmostComplexStructure::standard(n)));
    }
    Ok(grid_field(grid::<S>(jb, n, "j", chart)?, 1, 1))
}

fn build_on<S: Scalar>(file: &SceneFile, tolerance: Tolerance) -> Result<SceneData<S>, SceneError> {
    let frame = build_frame::<S>(file)?;
    let n = frame.dim();
    let mut notes = Vec::new();
    let mut load_residuals = Vec::new();

    let jacobi = frame.jacobi_residual();
    if jacobi > tolerance.algebraic || (S::EXACT && jacobi > 0.0) {
        return Err(acgeom_core::GeometryError::invariant("Jacobi identity of the structure constants", jacobi).into());
    }
    load_residuals.push(("load.jacobi", jacobi));
    if frame.is_chart() {
        notes.push("chart frame: the Jacobi identity holds automatically".into());
    }

    let j = build_j::<S>(file, &frame)?;
    validate_acs(&j, &frame, tolerance.structure.max(if frame.is_chart() { 1e-12 } else { 0.0 }))?;
    let jsq = frame.max_abs(&j.act(&j, 0)?.add(&Field::constant(Tensor::identity(n)))?);
    load_residuals.push(("load.j-squared", jsq));

    if n == 4 {
        let sample = frame.samples().first().cloned().unwrap_or_default();
        let jo = complex_orientation(&j.at(&sample));
        if jo != frame.orientation() {
            notes.push(format!(
                "frame orientation {} differs from the orientation induced by J ({jo}); Hodge stars use the frame orientation",
                frame.orientation()
            ));
        }
    }

    let metric = match &file.metric {
        None => None,
        Some(mb) => {
            if mb.conjugator.is_some() {
                return Err(field_err("metric.conjugator", "only meaningful in [j]"));
            }
            if mb.matrix.is_none() && mb.entries.is_none() {
                return Err(field_err("metric", "needs `matrix` or `entries`"));
            }
            let raw = grid_field(grid::<S>(mb, n, "metric", frame.is_chart())?, 0, 2);
            let g = if mb.hermitize { hermitize_metric(&raw, &j, &frame)? } else { raw };
            validate_metric(&g, &frame)?;
            let defect = frame.max_abs(&hermitian_defect(&g, &j)?);
            if defect > tolerance.algebraic || (S::EXACT && defect > 0.0) {
                return Err(acgeom_core::GeometryError::Invariant {
                    what: "metric J-invariance",
                    residual: defect,
                    detail: " (set `hermitize = true` to project)".into(),
                }
                .into());
            }
            load_residuals.push(("load.metric-hermitian", defect));
            Some(g)
        }
    };

    let conformal = file.conformal.as_ref().is_some_and(|c| c.enabled);
    if conformal {
        if metric.is_none() {
            return Err(field_err("conformal", "needs a [metric] block for the class representative"));
        }
        if n < 4 {
            return Err(acgeom_core::GeometryError::Dimension(n, "the conformal pipeline needs dimension at least 4").into());
        }
    }

    let projective = match &file.projective {
        None => None,
        Some(pb) => Some(build_representative(pb, &frame, metric.as_ref())?),
    };

    let trials = file.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(field_err("trials", "must be positive"));
    }
    Ok(SceneData {
        name: file.name.clone(),
        digest: file.digest(),
        frame,
        j,
        metric,
        conformal,
        projective,
        family: file.family.clone(),
        tolerance,
        seed: file.seed,
        trials,
        notes,
        load_residuals,
    })
}

fn build_representative<S: Scalar>(
    pb: &ProjectiveBlock,
    frame: &FrameComplex<S>,
    metric: Option<&Field<S>>,
) -> Result<Connection<S>, SceneError> {
    let n = frame.dim();
    if pb.gamma.is_some() && pb.representative != Representative::Explicit {
        return Err(field_err("projective.gamma", "only used with representative = \"explicit\""));
    }
    let conn = match pb.representative {
        Representative::LeviCivita => {
            let g = metric.ok_or_else(|| field_err("projective.representative", "levi-civita needs a [metric] block"))?;
            levi_civita(g, frame)?
        }
        Representative::Symmetric => Connection::symmetric_frame(frame),
        Representative::Flat => Connection::frame_flat(frame),
        Representative::Explicit => {
            let mut gamma = Tensor::<S>::zeros(n, 1, 2);
            for (k, (b, c, a, v)) in pb.gamma.iter().flatten().enumerate() {
                let name = format!("projective.gamma[{k}]");
                if *b >= n || *c >= n || *a >= n {
                    return Err(field_err(name, format!("index out of range for dimension {n}")));
                }
                match entry::<S>(v, &name, false)? {
                    Entry::Const(s) => gamma[[*b, *c, *a]] = s,
                    Entry::Expr(_) => unreachable!("explicit Γ is constant"),
                }
            }
            Connection::new(Field::constant(gamma), frame)?
        }
    };
    let tol = frame.tolerance(&Tolerance::default());
    if !conn.is_torsion_free(tol) {
        return Err(acgeom_core::GeometryError::invariant("torsion-free projective representative", conn.torsion_residual()).into());
    }
    Ok(conn)
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = "# acs-scene v1
name = \"flat\"
backend = \"rational\"
[frame]
dim = 4
[j]
entries = [[1, 0, 1], [0, 1, -1], [3, 2, 1], [2, 3, -1]]
[metric]
matrix = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]
";

    #[test]
    fn header_is_mandatory() {
        assert!(matches!(SceneFile::parse(&FLAT[15..]), Err(SceneError::Header)));
    }

    #[test]
    fn round_trip_and_digest() {
        let file = SceneFile::parse(FLAT).unwrap();
        let again = SceneFile::parse(&file.to_text()).unwrap();
        assert_eq!(file, again);
        assert_eq!(file.digest(), again.digest());
        assert!(file.digest().starts_with("sha256:"));
    }

    #[test]
    fn bad_j_names_entry() {
        let text = FLAT.replace("[3, 2, 1], [2, 3, -1]", "[3, 2, 1], [2, 3, 1]");
        let err = build(&SceneFile::parse(&text).unwrap(), None).err().unwrap();
        let msg = err.to_string();
        assert!(msg.contains("J^2 = -1") && msg.contains("entry"), "{msg}");
    }

    #[test]
    fn unknown_field_is_a_schema_error() {
        let text = FLAT.replace("dim = 4", "dim = 4\nshape = 2");
        assert!(matches!(SceneFile::parse(&text), Err(SceneError::Schema(_))));
    }

    #[test]
    fn rational_strings_parse() {
        let text = FLAT.replace("[frame]\ndim = 4", "[frame]\ndim = 4\nstructure = [[3, 0, 1, \"1/2\"]]");
        let scene = build(&SceneFile::parse(&text).unwrap(), None).unwrap();
        let Scene::Rational(d) = scene else { panic!("rational backend") };
        let c = d.frame.structure();
        assert_eq!(c.as_constant().unwrap()[[3, 0, 1]], Rational::from_ratio(1, 2));
        assert_eq!(c.as_constant().unwrap()[[3, 1, 0]], Rational::from_ratio(-1, 2));
    }

    #[test]
    fn chart_expressions_evaluate() {
        let text = "# acs-scene v1
name = \"chart\"
backend = \"float\"
[frame]
dim = 2
[frame.chart]
vectors = [[1, 0], [\"x0\", 1]]
[j]
matrix = [[0, -1], [1, 0]]
";
        let scene = build(&SceneFile::parse(text).unwrap(), None).unwrap();
        let Scene::Float(d) = scene else { panic!("float backend") };
        // [e_0, e_1] = ∂_0(x0) ∂_0 = e_0
        let c = d.frame.structure().at(&[0.05, 0.02]);
        assert!((c[[0, 0, 1]] - 1.0).abs() < 1e-8, "{c:?}");
    }
}
