//! Structured reports: versioned JSON and a text rendering grouped by suite.
//!
//! Reports own their strings so that a parsed report compares equal to the
//! one that was emitted. Maps are `BTreeMap`s; output bytes depend only on
//! the scene, the seed and the trial count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use acgeom_core::almost_complex::{compute_g, nijenhuis};
use acgeom_core::conformal::{classify_conformal, faraday, ConformalScene};
use acgeom_core::hermitian::{characteristic_connection, classify_ah, kahler_form, Flag, HermitianData};
use acgeom_core::projective::{classify_projective, projective_faraday, ProjectiveScene};
use acgeom_core::{Field, FrameComplex, GeometryError, Scalar};
use serde::{Deserialize, Serialize};

use crate::checks::Suite;
use crate::scene::SceneData;
use crate::suite::{reference_connection, CheckRecord, Status};

pub const SCHEMA: &str = "acgeom-report/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneInfo {
    pub name: String,
    pub digest: String,
    pub backend: String,
    pub dim: usize,
    /// `homogeneous` or `chart`.
    pub presentation: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub not_applicable: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub id: String,
    pub anchor: String,
    pub suite: String,
    /// `pass`, `fail` or `not-applicable`.
    pub status: String,
    pub residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlagEntry {
    pub holds: bool,
    pub residual: f64,
}

impl From<&Flag> for FlagEntry {
    fn from(f: &Flag) -> Self {
        FlagEntry { holds: f.holds, residual: f.residual }
    }
}

/// Component array of a tensor field: nonzero entries, evaluated at `point`
/// for chart scenes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorDump {
    /// `[dim, upper, lower]`.
    pub shape: [usize; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<Vec<f64>>,
    pub entries: Vec<(Vec<usize>, String)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    pub scene: SceneInfo,
    pub seed: u64,
    pub trials: usize,
    pub tolerance: f64,
    pub summary: Summary,
    pub checks: Vec<CheckEntry>,
    pub classification: BTreeMap<String, FlagEntry>,
    pub objects: BTreeMap<String, TensorDump>,
    pub notes: Vec<String>,
}

impl Report {
    pub fn new<S: Scalar>(command: &str, d: &SceneData<S>) -> Self {
        Report {
            schema: SCHEMA.into(),
            command: command.into(),
            suite: None,
            scene: SceneInfo {
                name: d.name.clone(),
                digest: d.digest.clone(),
                backend: S::BACKEND.into(),
                dim: d.dim(),
                presentation: if d.frame.is_chart() { "chart" } else { "homogeneous" }.into(),
            },
            seed: d.seed,
            trials: d.trials,
            tolerance: if S::EXACT { 0.0 } else { d.tol() },
            summary: Summary::default(),
            checks: Vec::new(),
            classification: BTreeMap::new(),
            objects: BTreeMap::new(),
            notes: d.notes.clone(),
        }
    }

    pub fn with_checks(mut self, suite: &str, records: &[CheckRecord]) -> Self {
        self.suite = Some(suite.into());
        for r in records {
            match r.status {
                Status::Pass => self.summary.pass += 1,
                Status::Fail => self.summary.fail += 1,
                Status::NotApplicable => self.summary.not_applicable += 1,
            }
            self.checks.push(CheckEntry {
                id: r.id.into(),
                anchor: r.anchor.into(),
                suite: r.suite.label().into(),
                status: status_label(r.status).into(),
                residual: r.residual,
                note: r.note.clone(),
            });
        }
        self
    }

    pub fn failed(&self) -> bool {
        self.summary.fail > 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report values are finite or null");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let sc = &self.scene;
        let _ = writeln!(out, "{} [{} backend, dim {}, {}]", sc.name, sc.backend, sc.dim, sc.presentation);
        let _ = writeln!(out, "digest {}", sc.digest);
        let _ = writeln!(out, "command {}, seed {}, trials {}, tolerance {:e}", self.command, self.seed, self.trials, self.tolerance);
        for note in &self.notes {
            let _ = writeln!(out, "note: {note}");
        }
        let mut current = None;
        let width = self.checks.iter().map(|c| c.id.len()).max().unwrap_or(0);
        let mut grouped: Vec<&CheckEntry> = self.checks.iter().collect();
        grouped.sort_by_key(|c| (suite_order(&c.suite), c.id.clone()));
        for c in grouped {
            if current != Some(&c.suite) {
                current = Some(&c.suite);
                let _ = writeln!(out, "\n{}", suite_title(&c.suite));
            }
            let status = match c.status.as_str() {
                "pass" => "PASS",
                "fail" => "FAIL",
                _ => "n/a ",
            };
            let residual = c.residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
            let _ = write!(out, "  {status} {:width$}  {residual:>10}  [{}]", c.id, c.anchor);
            if let Some(n) = &c.note {
                let _ = write!(out, "  {n}");
            }
            out.push('\n');
        }
        if !self.classification.is_empty() {
            let _ = writeln!(out, "\nClassification");
            for (k, f) in &self.classification {
                let _ = writeln!(out, "  {:<28} {:<5}  {:.3e}", k, f.holds, f.residual);
            }
        }
        for (k, t) in &self.objects {
            let _ = writeln!(out, "\n{k} (valence ({},{}), dim {})", t.shape[1], t.shape[2], t.shape[0]);
            if let Some(p) = &t.point {
                let _ = writeln!(out, "  at {p:?}");
            }
            if t.entries.is_empty() {
                let _ = writeln!(out, "  0");
            }
            for (idx, v) in &t.entries {
                let _ = writeln!(out, "  {idx:?} = {v}");
            }
        }
        if self.suite.is_some() {
            let s = &self.summary;
            let _ = writeln!(out, "\n{} pass, {} fail, {} not applicable", s.pass, s.fail, s.not_applicable);
        }
        out
    }
}

fn status_label(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::NotApplicable => "not-applicable",
    }
}

const SUITES: [Suite; 6] =
    [Suite::Load, Suite::AlmostComplex, Suite::Hermitian, Suite::Conformal, Suite::Projective, Suite::Fixtures];

fn suite_order(label: &str) -> usize {
    SUITES.iter().position(|s| s.label() == label).unwrap_or(SUITES.len())
}

fn suite_title(label: &str) -> &str {
    SUITES.iter().find(|s| s.label() == label).map(|s| s.title()).unwrap_or(label)
}

/// Dump a field, evaluated at the first sample point of chart frames.
pub fn dump<S: Scalar>(f: &Field<S>, fc: &FrameComplex<S>, tol: f64) -> TensorDump {
    let point = if f.is_constant() { None } else { fc.samples().first().cloned() };
    let t = f.at(point.as_deref().unwrap_or(&[]));
    let (n, rank) = (t.dim(), t.rank());
    let mut entries = Vec::new();
    let mut idx = vec![0usize; rank];
    for _ in 0..n.pow(rank as u32) {
        let v = t.get(&idx);
        if !v.negligible(if S::EXACT { 0.0 } else { tol }) {
            entries.push((idx.clone(), v.to_string()));
        }
        for k in (0..rank).rev() {
            idx[k] += 1;
            if idx[k] < n {
                break;
            }
            idx[k] = 0;
        }
    }
    TensorDump { shape: [n, t.upper(), t.lower()], point, entries }
}

/// Classification tables of every pipeline the scene supports.
pub fn classification<S: Scalar>(d: &SceneData<S>) -> Result<BTreeMap<String, FlagEntry>, GeometryError> {
    let tol = d.tol();
    let mut out = BTreeMap::new();
    let mut put = |k: &str, f: &Flag| {
        out.insert(k.to_string(), FlagEntry::from(f));
    };
    let n_j = nijenhuis(&reference_connection(d), &d.j)?;
    put("acs.integrable", &Flag::decide(&n_j, &d.frame, tol));
    if let Some(g) = &d.metric {
        let hd = HermitianData::new(g.clone(), d.j.clone(), &d.frame)?;
        let c = classify_ah(&hd, tol)?;
        put("hermitian.hermitian", &c.hermitian);
        put("hermitian.nearly-kahler", &c.nearly_kahler);
        put("hermitian.almost-kahler", &c.almost_kahler);
        put("hermitian.kahler", &c.kahler);
        put("hermitian.semi-kahler", &c.semi_kahler);
        if d.conformal {
            let c = classify_conformal(&ConformalScene::new(&hd)?, tol)?;
            put("conformal.lck", &c.lck);
            put("conformal.nkw", &c.nkw);
            put("conformal.lcak", &c.lcak);
            put("conformal.conformal-hermitian", &c.conformal_hermitian);
            put("conformal.w1w2w4", &c.w1w2w4);
            put("conformal.w1w3w4", &c.w1w3w4);
            put("conformal.lcsk", &c.csk);
            for (k, f) in [
                ("conformal.w2w3w4", &c.w2w3w4),
                ("conformal.faraday-self-dual", &c.faraday_sd),
                ("conformal.faraday-anti-self-dual", &c.faraday_asd),
                ("conformal.maxwell", &c.maxwell),
            ] {
                if let Some(f) = f {
                    put(k, f);
                }
            }
        }
    }
    if let Some(rep) = &d.projective {
        let c = classify_projective(&ProjectiveScene::new(rep, &d.j)?, tol)?;
        put("projective.gp-zero", &c.gp_zero);
        put("projective.pnk", &c.pnk);
        put("projective.gp-plus-only", &c.gp_plus_only);
        put("projective.gp-minus-only", &c.gp_minus_only);
        put("projective.compatible", &c.compatible);
        put("projective.integrable", &c.integrable);
        put("projective.gp-plus-diagonal-zero", &c.gp_plus_diag_zero);
    }
    Ok(out)
}

/// Derived tensors: `N_J`, `G`, and per pipeline `ω`, `T^c`, `B`, `F`,
/// `G^c`, `A`, `G^p`, `F^p`.
pub fn invariants<S: Scalar>(d: &SceneData<S>) -> Result<BTreeMap<String, TensorDump>, GeometryError> {
    let (fc, tol) = (&d.frame, d.tol());
    let mut out = BTreeMap::new();
    let mut put = |k: &str, f: &Field<S>| {
        out.insert(k.to_string(), dump(f, fc, tol));
    };
    let base = reference_connection(d);
    put("nijenhuis", &nijenhuis(&base, &d.j)?);
    put("g-tensor", compute_g(&base, &d.j)?.full());
    if let Some(g) = &d.metric {
        let hd = HermitianData::new(g.clone(), d.j.clone(), fc)?;
        put("kahler-form", &kahler_form(g, &d.j)?);
        if let Ok((c, _)) = characteristic_connection(&hd) {
            put("characteristic-torsion", &c.torsion());
        }
        if d.conformal {
            let cs = ConformalScene::new(&hd)?;
            put("lee-form", cs.lee());
            put("faraday", &faraday(&cs)?);
            put("g-c", cs.gc().full());
        }
    }
    if let Some(rep) = &d.projective {
        let ps = ProjectiveScene::new(rep, &d.j)?;
        put("a-form", ps.a());
        put("g-p", ps.gp().full());
        put("projective-faraday", &projective_faraday(&ps)?.curvature_route);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::fixture;
    use crate::scene::{build, Scene};
    use crate::suite::run_checks;

    fn rational(name: &str) -> SceneData<acgeom_core::Rational> {
        match build(&fixture(name, &[]).unwrap(), None).unwrap() {
            Scene::Rational(d) => d,
            Scene::Float(_) => panic!("rational fixture expected"),
        }
    }

    #[test]
    fn empty_suite_is_a_valid_document() {
        let d = rational("kaehler-flat");
        let r = Report::new("verify", &d).with_checks("none", &[]);
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(back.checks.is_empty());
    }

    #[test]
    fn json_round_trips() {
        let mut d = rational("maxwell-family");
        d.trials = 2;
        let records = run_checks(&d, &[Suite::Load, Suite::Fixtures]);
        let mut r = Report::new("verify", &d).with_checks("fixtures", &records);
        r.classification = classification(&d).unwrap();
        r.objects = invariants(&d).unwrap();
        let back = Report::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), r.to_json());
    }

    #[test]
    fn text_groups_by_suite() {
        let mut d = rational("kaehler-flat");
        d.trials = 1;
        let records = run_checks(&d, &[Suite::Load, Suite::AlmostComplex]);
        let text = Report::new("verify", &d).with_checks("almost-complex", &records).to_text();
        let load = text.find(Suite::Load.title()).unwrap();
        let ac = text.find(Suite::AlmostComplex.title()).unwrap();
        assert!(load < ac);
    }
}
