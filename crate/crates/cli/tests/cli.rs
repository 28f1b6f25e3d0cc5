//! Command-line surface: shipped scenes, exit codes and report shapes.

use std::path::PathBuf;

use acgeom::cli::{run, Cli, Output, EXIT_FAILURES, EXIT_OK, EXIT_USAGE};
use acgeom::fixtures::{fixture, SHIPPED};
use acgeom::report::{Report, SCHEMA};
use acgeom::scene::{self, SceneFile};
use clap::Parser;

fn shipped(stem: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{stem}.scene"))
}

fn acgeom(args: &[&str]) -> Output {
    run(Cli::try_parse_from(std::iter::once("acgeom").chain(args.iter().copied())).expect("arguments parse"))
}

#[test]
fn shipped_scenes_match_their_generators() {
    for (stem, name, params) in SHIPPED {
        let params: Vec<(String, String)> = params.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        let generated = fixture(name, &params).unwrap().to_text();
        let on_disk = std::fs::read_to_string(shipped(stem)).unwrap();
        assert_eq!(on_disk, generated, "{stem} is stale; regenerate with `acgeom fixture {name} -o`");
        let parsed = SceneFile::parse(&on_disk).unwrap();
        assert_eq!(parsed.to_text(), on_disk, "{stem} does not round-trip");
        scene::build(&parsed, None).unwrap();
    }
}

#[test]
fn every_shipped_scene_is_listed() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let mut on_disk: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok()?.path().file_stem()?.to_str().map(String::from))
        .collect();
    on_disk.sort();
    let mut listed: Vec<String> = SHIPPED.iter().map(|(s, _, _)| s.to_string()).collect();
    listed.sort();
    assert_eq!(on_disk, listed);
}

#[test]
fn clean_verify_exits_zero_with_a_json_report() {
    let path = shipped("kaehler_flat");
    let out = acgeom(&["--format", "json", "verify", path.to_str().unwrap(), "--trials", "4"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    let report = Report::from_json(&out.stdout).unwrap();
    assert_eq!(report.schema, SCHEMA);
    assert_eq!(report.summary.fail, 0);
    assert!(report.summary.pass > 0);
}

#[test]
fn failing_checks_exit_one() {
    let out = acgeom(&["verify", "--fixture", "maxwell-family", "--suite", "fixtures"]);
    assert_eq!(out.code, EXIT_FAILURES, "{}", out.stdout);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(acgeom(&["verify", "/nonexistent.scene"]).code, EXIT_USAGE);
    assert_eq!(acgeom(&["verify", "--fixture", "kaehler-flat", "--suite", "nope"]).code, EXIT_USAGE);
    assert_eq!(acgeom(&["classify", "--fixture", "no-such-fixture"]).code, EXIT_USAGE);
    assert_eq!(acgeom(&["fixture", "kaehler-flat", "--param", "n=3"]).code, EXIT_USAGE);
    assert_eq!(acgeom(&["connection", "--fixture", "kaehler-flat", "--which", "c", "--t", "1"]).code, EXIT_USAGE);
    assert_eq!(acgeom(&["connection", "--fixture", "kaehler-flat", "--which", "G", "--t", "x"]).code, EXIT_USAGE);
}

#[test]
fn scene_commands_produce_their_objects() {
    let out = acgeom(&["--format", "json", "classify", "--fixture", "iwasawa"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    let report = Report::from_json(&out.stdout).unwrap();
    assert!(report.classification.keys().any(|k| k.starts_with("hermitian.")));

    let out = acgeom(&["--format", "json", "invariants", "--fixture", "maxwell-family"]);
    let report = Report::from_json(&out.stdout).unwrap();
    for key in ["nijenhuis", "g-tensor", "lee-form", "faraday"] {
        assert!(report.objects.contains_key(key), "missing {key}");
    }

    let out = acgeom(&["--format", "json", "connection", "--fixture", "nilmanifold-ak", "--which", "G", "--t", "-1/2"]);
    let report = Report::from_json(&out.stdout).unwrap();
    let nabla_j = &report.objects["nabla-j"];
    assert!(nabla_j.entries.is_empty(), "family member does not preserve J");
}

#[test]
fn fixture_command_writes_loadable_scenes() {
    let out = acgeom(&["fixture", "list"]);
    assert!(out.stdout.contains("maxwell-family"));
    let out = acgeom(&["fixture", "projective-stratum", "--param", "vanish=plus-symm"]);
    assert_eq!(out.code, EXIT_OK, "{}", out.stdout);
    scene::build(&SceneFile::parse(&out.stdout).unwrap(), None).unwrap();
}

#[test]
fn check_index_lists_every_id_once() {
    let text = acgeom(&["checks"]).stdout;
    let json: serde_json::Value = serde_json::from_str(&acgeom(&["--format", "json", "checks"]).stdout).unwrap();
    let rows = json.as_array().unwrap();
    assert_eq!(text.lines().count(), rows.len() + 2);
    let mut ids: Vec<&str> = rows.iter().map(|r| r["id"].as_str().unwrap()).collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), rows.len());
}
