//! Command-line surface. `main` only forwards to [`run`], which returns the
//! bytes to print and the exit code so the whole surface is testable.

use std::path::PathBuf;

use acgeom_core::almost_complex::{complexify, compute_g, connection_family, kn_connection};
use acgeom_core::conformal::ConformalScene;
use acgeom_core::connection::Connection;
use acgeom_core::hermitian::{characteristic_connection, HermitianData};
use acgeom_core::projective::ProjectiveScene;
use acgeom_core::scalar::parse_scalar;
use acgeom_core::{GeometryError, Scalar};
use clap::{Parser, Subcommand, ValueEnum};

use crate::checks::{Suite, CHECKS};
use crate::fixtures::{self, FIXTURES};
use crate::report::{classification, dump, invariants, Report};
use crate::scene::{self, Scene, SceneData, SceneFile};
use crate::suite::{reference_connection, run_checks};
use crate::with_scene;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "acgeom", version, about = "Connections, intrinsic torsion and classification for almost complex structures")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Override the scene tolerance (float backend only).
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(clap::Args, Debug, Clone)]
pub struct SceneArgs {
    /// Scene file.
    #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
    pub scene: Option<PathBuf>,
    /// Use a built-in fixture instead of a file.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Fixture parameter `key=value`; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE", requires = "fixture")]
    pub params: Vec<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    /// `∇^G`, the almost complex connection of the reference connection.
    #[value(name = "G")]
    G,
    /// `∇^G + G_+`, the `t = 1` family member; its torsion is `N_J` for torsion-free references.
    #[value(name = "KN")]
    Kn,
    /// Characteristic (Hermitian, skew torsion) connection.
    #[value(name = "c")]
    C,
    /// Almost complex Weyl connection `∇^{G^c}`.
    #[value(name = "gc")]
    Gc,
    /// Compatible representative `∇^p` of the projective class (`∇^{p,t}` with `--t`).
    #[value(name = "p")]
    P,
    /// Almost complex connection `∇^{JP}` built from `∇^p`.
    #[value(name = "jp")]
    Jp,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classification tables of every pipeline the scene supports.
    Classify(SceneArgs),
    /// Print the coefficients of a distinguished connection.
    Connection {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, value_enum)]
        which: Which,
        /// Family parameter `t` (for G, gc and p).
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
    },
    /// Derived tensors: N_J, G, ω, Lee form, F, A, ...
    Invariants(SceneArgs),
    /// Run a verification suite.
    Verify {
        #[command(flatten)]
        scene: SceneArgs,
        /// all, almost-complex, hermitian, conformal, projective or fixtures.
        #[arg(long, default_value = "all")]
        suite: String,
        /// Seed for randomised checks (overrides the scene).
        #[arg(long)]
        seed: Option<u64>,
        /// Random trials per property (overrides the scene).
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Write a built-in fixture as a scene file.
    Fixture {
        /// Fixture name; `acgeom fixture list` prints them.
        name: String,
        #[arg(long = "param", value_name = "KEY=VALUE")]
        params: Vec<String>,
        /// Output path (stdout when absent).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Index of check ids and anchors.
    Checks,
}

/// Bytes for stdout plus the process exit code.
#[derive(Debug)]
pub struct Output {
    pub stdout: String,
    pub code: i32,
}

fn usage(msg: impl std::fmt::Display) -> Output {
    Output { stdout: format!("error: {msg}\n"), code: EXIT_USAGE }
}

fn parse_params(raw: &[String]) -> Result<Vec<(String, String)>, String> {
    raw.iter()
        .map(|p| match p.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
            _ => Err(format!("parameter {p:?} is not of the form key=value")),
        })
        .collect()
}

fn load(args: &SceneArgs, tolerance: Option<f64>) -> Result<Scene, String> {
    let file = match (&args.scene, &args.fixture) {
        (Some(path), _) => SceneFile::read(path).map_err(|e| e.to_string())?,
        (None, Some(name)) => fixtures::fixture(name, &parse_params(&args.params)?).map_err(|e| e.to_string())?,
        (None, None) => return Err("a scene file or --fixture is required".into()),
    };
    scene::build(&file, tolerance).map_err(|e| e.to_string())
}

fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    }
}

pub fn run(cli: Cli) -> Output {
    let format = cli.format;
    match cli.command {
        Command::Checks => Output { stdout: check_index(format), code: EXIT_OK },
        Command::Fixture { name, params, output } => fixture_command(&name, &params, output),
        Command::Classify(args) => scene_command(&args, cli.tolerance, format, |s| {
            with_scene!(s, d => {
                let mut r = Report::new("classify", d);
                r.classification = classification(d)?;
                Ok(r)
            })
        }),
        Command::Invariants(args) => scene_command(&args, cli.tolerance, format, |s| {
            with_scene!(s, d => {
                let mut r = Report::new("invariants", d);
                r.objects = invariants(d)?;
                Ok(r)
            })
        }),
        Command::Connection { scene, which, t } => scene_command(&scene, cli.tolerance, format, |s| {
            with_scene!(s, d => connection_report(d, which, t.as_deref()))
        }),
        Command::Verify { scene, suite, seed, trials } => {
            let Some(suites) = Suite::select(&suite) else {
                return usage(format!("unknown suite {suite:?}; expected one of {}", Suite::SELECTABLE.join(", ")));
            };
            let mut loaded = match load(&scene, cli.tolerance) {
                Ok(s) => s,
                Err(e) => return usage(e),
            };
            if let Some(seed) = seed {
                loaded.set_seed(seed);
            }
            if let Some(trials) = trials {
                loaded.set_trials(trials);
            }
            let report = with_scene!(&loaded, d => Report::new("verify", d).with_checks(&suite, &run_checks(d, &suites)));
            let code = if report.failed() { EXIT_FAILURES } else { EXIT_OK };
            Output { stdout: emit(&report, format), code }
        }
    }
}

fn scene_command(
    args: &SceneArgs,
    tolerance: Option<f64>,
    format: Format,
    f: impl FnOnce(&Scene) -> Result<Report, GeometryError>,
) -> Output {
    let scene = match load(args, tolerance) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    match f(&scene) {
        Ok(r) => Output { stdout: emit(&r, format), code: EXIT_OK },
        Err(e) => usage(e),
    }
}

fn connection_report<S: Scalar>(d: &SceneData<S>, which: Which, t: Option<&str>) -> Result<Report, GeometryError> {
    let t = match t {
        Some(text) => Some(parse_scalar::<S>(text).ok_or_else(|| GeometryError::Unsupported(format!("--t {text:?} is not a number")))?),
        None => None,
    };
    let missing = |what: &str| GeometryError::Unsupported(format!("connection requires a {what} block"));
    let hd = || -> Result<HermitianData<S>, GeometryError> {
        HermitianData::new(d.metric.clone().ok_or_else(|| missing("metric"))?, d.j.clone(), &d.frame)
    };
    let ps = || -> Result<ProjectiveScene<S>, GeometryError> {
        ProjectiveScene::new(d.projective.as_ref().ok_or_else(|| missing("projective"))?, &d.j)
    };
    if t.is_some() && !matches!(which, Which::G | Which::Gc | Which::P) {
        return Err(GeometryError::Unsupported("--t applies to G, gc and p only".into()));
    }
    let conn: Connection<S> = match which {
        Which::G => {
            let base = reference_connection(d);
            let g = compute_g(&base, &d.j)?;
            let cg = complexify(&base, &g)?;
            match t {
                Some(t) => connection_family(&cg, &g, t)?,
                None => cg,
            }
        }
        Which::Kn => kn_connection(&reference_connection(d), &d.j)?,
        Which::C => characteristic_connection(&hd()?)?.0,
        Which::Gc => {
            if !d.conformal {
                return Err(missing("conformal"));
            }
            let cs = ConformalScene::new(&hd()?)?;
            match t {
                Some(t) => cs.family(t)?,
                None => cs.gc_connection().clone(),
            }
        }
        Which::P => {
            let ps = ps()?;
            match t {
                Some(t) => ps.family(t)?,
                None => ps.p_connection().clone(),
            }
        }
        Which::Jp => ps()?.jp().clone(),
    };
    let mut r = Report::new("connection", d);
    let tol = d.tol();
    r.objects.insert("gamma".into(), dump(conn.gamma(), &d.frame, tol));
    r.objects.insert("torsion".into(), dump(&conn.torsion(), &d.frame, tol));
    r.objects.insert("nabla-j".into(), dump(&conn.covariant_derivative(&d.j)?, &d.frame, tol));
    Ok(r)
}

fn fixture_command(name: &str, params: &[String], output: Option<PathBuf>) -> Output {
    if name == "list" {
        let mut s = String::new();
        for f in FIXTURES {
            let defaults: Vec<String> = f.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            s.push_str(&format!("{:<22} {}\n{:<22} params: {}\n", f.name, f.about, "", defaults.join(" ")));
        }
        return Output { stdout: s, code: EXIT_OK };
    }
    let params = match parse_params(params) {
        Ok(p) => p,
        Err(e) => return usage(e),
    };
    let file = match fixtures::fixture(name, &params) {
        Ok(f) => f,
        Err(e) => return usage(e),
    };
    if let Err(e) = scene::build(&file, None) {
        return usage(e);
    }
    let text = file.to_text();
    match output {
        Some(path) => match std::fs::write(&path, text) {
            Ok(()) => Output { stdout: String::new(), code: EXIT_OK },
            Err(e) => usage(format!("{}: {e}", path.display())),
        },
        None => Output { stdout: text, code: EXIT_OK },
    }
}

/// The docs index: every check id with its anchor and statement.
pub fn check_index(format: Format) -> String {
    match format {
        Format::Json => {
            let rows: Vec<_> = CHECKS
                .iter()
                .map(|c| {
                    serde_json::json!({
                        "id": c.id, "suite": c.suite.label(), "anchor": c.anchor,
                        "statement": c.statement, "randomised": c.randomised,
                    })
                })
                .collect();
            serde_json::to_string_pretty(&rows).expect("plain values") + "\n"
        }
        Format::Text => {
            let mut s = String::from("| id | suite | anchor | statement |\n|---|---|---|---|\n");
            for c in CHECKS {
                s.push_str(&format!("| `{}` | {} | {} | {} |\n", c.id, c.suite.label(), c.anchor, c.statement));
            }
            s
        }
    }
}
