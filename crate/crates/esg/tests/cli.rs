//! End-to-end checks of the `esg` binary: artifact layout, exit codes,
//! stderr diagnostics, and seed handling.

use std::path::Path;
use std::process::{Command, Output};

use esg::classifier::ClassifyReport;
use esg::equiv::{EquivMetrics, SweepReport};
use esg::normalizer::ExecutionScenario;
use esg::pipeline::{GenManifest, ScenarioManifest};
use esg::subject::api::stack_api;
use esg::subject::lang::Sequence;

fn esg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_esg"))
        .args(args)
        .env_remove("ESG_SEED")
        .output()
        .expect("the esg binary runs")
}

fn blacklist() -> String {
    concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/blacklist.txt").to_string()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("esg exits with a code")
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

#[test]
fn classify_json_matches_the_library_report() {
    let out = esg(&[
        "classify",
        "--method",
        "pop()",
        "--blacklist",
        &blacklist(),
        "--mode",
        "both",
        "--seed",
        "1",
        "--json",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: ClassifyReport =
        serde_json::from_slice(&out.stdout).expect("classify --json prints a report");
    assert_eq!(report.target, "pop()");
    assert_eq!(report.allowed.len(), 10);
    assert!(report.allowed.contains(&"pop()".to_string()));
    for observer in [
        "empty()",
        "peek()",
        "search(Object)",
        "capacity()",
        "clone()",
    ] {
        assert!(
            report.pure.contains(&observer.to_string()),
            "missing {observer}"
        );
    }
}

#[test]
fn gen_then_normalize_produces_parseable_artifacts() {
    let tmp = tempfile::TempDir::new().unwrap();
    let seqs = tmp.path().join("seqs");
    let out = esg(&[
        "gen",
        "--method",
        "pop()",
        "--blacklist",
        &blacklist(),
        "--seed",
        "7",
        "--budget",
        "400",
        "--max-len",
        "12",
        "--out",
        seqs.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let manifest: GenManifest =
        serde_json::from_str(&std::fs::read_to_string(seqs.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest.categories.total(), 400);
    assert_eq!(manifest.kept, manifest.files.len());
    assert!(manifest.kept > 0);
    let api = stack_api();
    for file in &manifest.files {
        let text = std::fs::read_to_string(seqs.join(file)).unwrap();
        Sequence::parse(&text, &api).expect("sequence files parse");
    }

    let scns = tmp.path().join("scns");
    let out = esg(&[
        "normalize",
        "--in",
        seqs.to_str().unwrap(),
        "--method",
        "pop()",
        "--min-elems",
        "5",
        "--max-elems",
        "8",
        "--min-distinct",
        "3",
        "--out",
        scns.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let manifest: ScenarioManifest =
        serde_json::from_str(&std::fs::read_to_string(scns.join("manifest.json")).unwrap())
            .unwrap();
    assert!(!manifest.nil);
    let target = api.find("pop()").unwrap();
    for file in &manifest.files {
        let text = std::fs::read_to_string(scns.join(file)).unwrap();
        let seq = Sequence::parse(&text, &api).expect("scenario files parse");
        let scenario =
            ExecutionScenario::from_sequence(seq, &api, target).expect("scenario files revalidate");
        assert!((5..=8).contains(&scenario.element_count));
    }
}

#[test]
fn configuration_failures_exit_one_with_distinct_diagnostics() {
    let tmp = tempfile::TempDir::new().unwrap();
    let out_dir = tmp.path().join("out");
    let unknown_api = esg(&[
        "run",
        "--api",
        "queue",
        "--method",
        "pop()",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&unknown_api), 1);
    assert!(
        stderr(&unknown_api).contains("unknown api"),
        "{}",
        stderr(&unknown_api)
    );

    let missing_target = esg(&[
        "run",
        "--method",
        "frobnicate()",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&missing_target), 1);
    assert!(
        stderr(&missing_target).contains("not found"),
        "{}",
        stderr(&missing_target)
    );

    let bad_blacklist = esg(&[
        "run",
        "--method",
        "pop()",
        "--blacklist",
        tmp.path().join("missing.txt").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&bad_blacklist), 1);
    assert!(
        stderr(&bad_blacklist).contains("cannot read blacklist"),
        "{}",
        stderr(&bad_blacklist)
    );

    let texts = [
        stderr(&unknown_api),
        stderr(&missing_target),
        stderr(&bad_blacklist),
    ];
    let distinct: std::collections::BTreeSet<&String> = texts.iter().collect();
    assert_eq!(distinct.len(), 3, "each failure mode needs its own message");
}

#[test]
fn an_empty_outcome_exits_two_after_writing_its_report() {
    let tmp = tempfile::TempDir::new().unwrap();
    // Nothing may grow the container, so the element-count window is
    // unreachable and the run legitimately produces zero scenarios.
    let deny = tmp.path().join("deny_growth.txt");
    std::fs::write(&deny, "add\npush\ninsert\nset\n").unwrap();
    let out_dir = tmp.path().join("out");
    let out = esg(&[
        "run",
        "--method",
        "pop()",
        "--blacklist",
        deny.to_str().unwrap(),
        "--budget",
        "200",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr(&out));
    let manifest: ScenarioManifest =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("manifest.json")).unwrap())
            .unwrap();
    assert!(manifest.nil);
    assert!(manifest.files.is_empty());
    assert!(out_dir.join("report.json").exists());
}

#[test]
fn the_seed_env_var_is_the_default_seed() {
    let tmp = tempfile::TempDir::new().unwrap();
    let via_env = tmp.path().join("env");
    let via_flag = tmp.path().join("flag");
    let run = |dir: &Path, env_seed: Option<&str>, flag_seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_esg"));
        cmd.args([
            "run",
            "--method",
            "pop()",
            "--blacklist",
            &blacklist(),
            "--budget",
            "400",
            "--out",
            dir.to_str().unwrap(),
        ]);
        cmd.env_remove("ESG_SEED");
        if let Some(seed) = env_seed {
            cmd.env("ESG_SEED", seed);
        }
        if let Some(seed) = flag_seed {
            cmd.args(["--seed", seed]);
        }
        let out = cmd.output().unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    run(&via_env, Some("99"), None);
    run(&via_flag, None, Some("99"));
    let env_manifest = std::fs::read(via_env.join("manifest.json")).unwrap();
    let flag_manifest = std::fs::read(via_flag.join("manifest.json")).unwrap();
    assert_eq!(env_manifest, flag_manifest);
    for entry in std::fs::read_dir(&via_env).unwrap() {
        let name = entry.unwrap().file_name();
        let a = std::fs::read(via_env.join(&name)).unwrap();
        let b = std::fs::read(via_flag.join(&name)).unwrap();
        if name != "report.json" {
            assert_eq!(a, b, "{name:?} differs between env and flag seeding");
        }
    }
}

#[test]
fn eval_scores_a_scenario_directory_and_writes_metrics() {
    let tmp = tempfile::TempDir::new().unwrap();
    let run_dir = tmp.path().join("clear");
    let out = esg(&[
        "run",
        "--method",
        "clear()",
        "--blacklist",
        &blacklist(),
        "--seed",
        "11",
        "--budget",
        "800",
        "--out",
        run_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report = tmp.path().join("metrics.json");
    let out = esg(&[
        "eval",
        "--method",
        "clear()",
        "--scenarios",
        run_dir.to_str().unwrap(),
        "--runs",
        "3",
        "--seed",
        "5",
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let metrics: EquivMetrics =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(metrics.runs, 3);
    assert_eq!(metrics.total, 3);
    assert!(metrics.avg > 0.0);
}

#[test]
fn sweep_honors_the_requested_size_range() {
    let tmp = tempfile::TempDir::new().unwrap();
    let report_path = tmp.path().join("sweep.json");
    let out = esg(&[
        "sweep",
        "--method",
        "clear()",
        "--sizes",
        "2..4",
        "--runs",
        "2",
        "--seed",
        "3",
        "--report",
        report_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let report: SweepReport =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report.named, "removeAllElements()");
    let sizes: Vec<usize> = report.rows.iter().map(|r| r.size).collect();
    assert_eq!(sizes, vec![2, 3, 4]);
    for row in &report.rows {
        assert_eq!(row.runs, 2);
    }
}

#[test]
fn repeat_writes_per_run_directories_and_an_aggregate() {
    let tmp = tempfile::TempDir::new().unwrap();
    let out_dir = tmp.path().join("rep");
    let out = esg(&[
        "repeat",
        "--method",
        "pop()",
        "--blacklist",
        &blacklist(),
        "--seed",
        "20260816",
        "--budget",
        "2000",
        "--out",
        out_dir.to_str().unwrap(),
        "-n",
        "3",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(out_dir.join("aggregate.json").exists());
    for i in 0..3 {
        assert!(out_dir
            .join(format!("run_{i:02}"))
            .join("report.json")
            .exists());
    }
    let aggregate: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("aggregate.json")).unwrap())
            .unwrap();
    assert_eq!(aggregate["runs"], 3);
    assert!(aggregate["min"].as_u64().unwrap() >= 1);
}
