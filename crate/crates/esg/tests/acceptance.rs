//! Acceptance checks for the whole tool: one test per criterion, each
//! printing a single `criterion N: PASS/FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`; the test names carry the
//! same numbering for the default harness output).

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use esg::classifier::{allowed_indices, classify, Blacklist, ClassifyConfig, FilterMode};
use esg::derive_seed;
use esg::equiv::score::{score, sweep_graph_size, GroundTruth};
use esg::equiv::search::{search_equivalences, SearchBudgets};
use esg::equiv::{exhaustive_counterexample, Candidate, MatchPolicy};
use esg::generator::{generate, keep_third_category, GenConfig};
use esg::normalizer::{normalize_pipeline, ExecutionScenario, NormalizeOptions};
use esg::pipeline::{self, builtin_truth, strip_timings, RunConfig};
use esg::subject::api::{stack_api, ParamKind, RetValue, SubjectApi};
use esg::subject::interp::{fingerprint, LastOutcome};
use esg::subject::lang::{Arg, Cast, Sequence, Statement};

/// Base seed all stochastic criteria run from.
const BASE_SEED: u64 = 20_260_816;

/// The fifteen methods the production-floor and well-formedness criteria
/// cover.
const FIFTEEN_METHODS: [&str; 15] = [
    "add(int,Object)",
    "add(Object)",
    "addElement(Object)",
    "clear()",
    "elementAt(int)",
    "firstElement()",
    "get(int)",
    "indexOf(Object)",
    "lastElement()",
    "peek()",
    "pop()",
    "push(Object)",
    "remove(Object)",
    "remove(int)",
    "set(int,Object)",
];

fn report(n: usize, name: &str, result: Result<(), String>) {
    match &result {
        Ok(()) => println!("criterion {n}: PASS - {name}"),
        Err(why) => println!("criterion {n}: FAIL - {name}: {why}"),
    }
    if let Err(why) = result {
        panic!("criterion {n} ({name}) failed: {why}");
    }
}

fn fail(why: impl Into<String>) -> Result<(), String> {
    Err(why.into())
}

fn standard_blacklist() -> Blacklist {
    Blacklist::new(["remove", "clear", "retain", "pop", "setSize"]).expect("patterns are valid")
}

fn blacklist_path() -> PathBuf {
    PathBuf::from(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/fixtures/blacklist.txt"
    ))
}

fn ensure(ok: bool, why: impl FnOnce() -> String, failures: &mut Vec<String>) {
    if !ok {
        failures.push(why());
    }
}

fn finish(failures: Vec<String>) -> Result<(), String> {
    if failures.is_empty() {
        Ok(())
    } else {
        fail(failures.join("; "))
    }
}

#[test]
fn criterion_1_golden_classifier_lists() {
    report(1, "golden classifier lists", check_classifier_lists());
}

fn check_classifier_lists() -> Result<(), String> {
    let started = Instant::now();
    let api = stack_api();
    let target = api.find("pop()").expect("pop() exists");
    let cfg = ClassifyConfig::new(FilterMode::Blacklist, standard_blacklist(), 1);
    let class_report = classify(&api, target, &cfg);
    let allowed_idx = allowed_indices(&api, &class_report);
    let mut failures = Vec::new();

    let expected_allowed = [
        "push(Object)",
        "pop()",
        "add(int,Object)",
        "add(Object)",
        "addAll(int,Collection)",
        "addAll(Collection)",
        "addElement(Object)",
        "set(int,Object)",
        "insertElementAt(Object,int)",
        "setElementAt(Object,int)",
    ];
    ensure(
        class_report.allowed == expected_allowed,
        || format!("allowed list for pop() is {:?}", class_report.allowed),
        &mut failures,
    );
    let from_indices: Vec<String> = allowed_idx
        .iter()
        .map(|&i| api.methods[i].signature())
        .collect();
    ensure(
        from_indices == class_report.allowed,
        || "allowed indices disagree with the report".to_string(),
        &mut failures,
    );

    let mut removed = class_report.decreasing.clone();
    removed.sort_unstable();
    let mut expected_removed = vec![
        "clear()",
        "remove(int)",
        "remove(Object)",
        "removeAll(Collection)",
        "removeAllElements()",
        "removeElement(Object)",
        "removeElementAt(int)",
        "retainAll(Collection)",
        "setSize(int)",
        "pop()",
    ];
    expected_removed.sort_unstable();
    ensure(
        removed == expected_removed,
        || format!("decreasing set is {removed:?}"),
        &mut failures,
    );

    for observer in [
        "empty()",
        "peek()",
        "search(Object)",
        "capacity()",
        "clone()",
        "contains(Object)",
    ] {
        ensure(
            class_report.pure.iter().any(|m| m == observer),
            || format!("pure set misses {observer}"),
            &mut failures,
        );
    }

    ensure(
        started.elapsed() < Duration::from_secs(5),
        || format!("took {:?}", started.elapsed()),
        &mut failures,
    );
    finish(failures)
}

#[test]
fn criterion_2_worked_example_normalization() {
    report(2, "worked-example normalization", check_worked_example());
}

fn check_worked_example() -> Result<(), String> {
    let started = Instant::now();
    let api = stack_api();
    let target = api.find("pop()").expect("pop() exists");
    let raw = "\
s0 = new Stack()
s0.addElement(0)
s1 = new Stack()
s1.addElement(10)
r0 = s1.push(1)
s2 = new Stack()
s2.addElement(1)
b0 = s1.addAll(s2)
s1.add(0, -1)
r1 = s1.pop()
r2 = s1.push(100)
";
    let expected = "\
v0 = new Stack()
v0.addElement(0)
v0.addElement(10)
v1 = v0.push(1)
v0.addElement(1)
v0.add(0, -1)
v2 = v0.pop()
";
    let seq = Sequence::parse(raw, &api).map_err(|e| e.to_string())?;
    let (scenarios, stats) = normalize_pipeline(&[seq], &api, target, &NormalizeOptions::default());
    let mut failures = Vec::new();
    ensure(
        stats.emitted == 1,
        || format!("emitted {}", stats.emitted),
        &mut failures,
    );
    if let Some(scenario) = scenarios.first() {
        ensure(
            scenario.to_text(&api) == expected,
            || format!("normalized to:\n{}", scenario.to_text(&api)),
            &mut failures,
        );
        ensure(
            scenario.element_count == 5,
            || format!("element count {}", scenario.element_count),
            &mut failures,
        );
        let fp = fingerprint(&scenario.seq, &api);
        ensure(
            fp.last == LastOutcome::Value(Some(RetValue::Element(1))),
            || format!("final call produced {:?}", fp.last),
            &mut failures,
        );
    }
    ensure(
        started.elapsed() < Duration::from_secs(1),
        || format!("took {:?}", started.elapsed()),
        &mut failures,
    );
    finish(failures)
}

#[test]
fn criterion_3_scenario_production_floor() {
    report(3, "scenario-production floor", check_production_floor());
}

fn check_production_floor() -> Result<(), String> {
    let mut failures = Vec::new();
    let tmp = tempfile::TempDir::new().expect("tempdir");
    for (i, method) in FIFTEEN_METHODS.iter().enumerate() {
        let started = Instant::now();
        let mut cfg = RunConfig::new("stack", method, tmp.path().join(format!("m{i:02}")));
        cfg.blacklist = Some(blacklist_path());
        cfg.seed = BASE_SEED;
        cfg.budget = 2000;
        let aggregate = match pipeline::repeat(&cfg, 5) {
            Ok(a) => a,
            Err(e) => {
                failures.push(format!("{method}: {e}"));
                continue;
            }
        };
        ensure(
            aggregate.min >= 1,
            || format!("{method}: min {} over 5 runs", aggregate.min),
            &mut failures,
        );
        ensure(
            started.elapsed() < Duration::from_secs(60),
            || format!("{method}: took {:?}", started.elapsed()),
            &mut failures,
        );
    }
    finish(failures)
}

#[test]
fn criterion_4_window_and_well_formedness() {
    report(
        4,
        "window and well-formedness invariants",
        check_well_formedness(),
    );
}

/// Regenerate the production-floor corpus in memory: 15 methods x 5 derived
/// seeds at budget 2000.
fn harvest_corpus(api: &SubjectApi) -> Vec<(usize, ExecutionScenario)> {
    let mut corpus = Vec::new();
    for method in FIFTEEN_METHODS {
        let target = api.find(method).expect("table method exists");
        for run in 0..5u64 {
            let seed = derive_seed(BASE_SEED, run);
            let class_cfg = ClassifyConfig::new(FilterMode::Blacklist, standard_blacklist(), seed);
            let allowed = allowed_indices(api, &classify(api, target, &class_cfg));
            let raw = generate(api, &allowed, target, &GenConfig::new(2000, seed));
            let kept = keep_third_category(raw, api, target);
            let (scenarios, _) =
                normalize_pipeline(&kept, api, target, &NormalizeOptions::default());
            corpus.extend(scenarios.into_iter().map(|s| (target, s)));
        }
    }
    corpus
}

fn check_well_formedness() -> Result<(), String> {
    let api = stack_api();
    let corpus = harvest_corpus(&api);
    let mut failures = Vec::new();
    ensure(
        corpus.len() >= 500,
        || format!("only {} scenarios harvested", corpus.len()),
        &mut failures,
    );

    let mut canonical_texts = BTreeSet::new();
    for (target, scenario) in &corpus {
        let text = scenario.to_text(&api);
        // Ends in a non-raising target call on a single instance: the
        // validating constructor re-checks all three from scratch.
        if let Err(e) = ExecutionScenario::from_sequence(scenario.seq.clone(), &api, *target) {
            failures.push(format!("invalid scenario ({e}):\n{text}"));
            break;
        }
        if !(5..=8).contains(&scenario.element_count) {
            failures.push(format!(
                "element count {} outside [5,8]:\n{text}",
                scenario.element_count
            ));
            break;
        }
        // Arguments are integer literals (plain or list); the only casts are
        // the `(Object)` ones the overload grammar itself requires.
        let plain_literals = scenario.seq.statements.iter().all(|stmt| match stmt {
            Statement::Construct { .. } => true,
            Statement::Invoke { method, args, .. } => {
                let sig = &api.methods[*method];
                args.iter().enumerate().all(|(j, arg)| match arg {
                    Arg::Lit { cast, .. } => {
                        let required =
                            sig.params[j] == ParamKind::Element && sig.needs_element_cast[j];
                        match cast {
                            None => !required,
                            Some(Cast::Object) => required,
                            Some(Cast::Int) => false,
                        }
                    }
                    Arg::ListLit(_) => true,
                    Arg::Var(_) => false,
                })
            }
        });
        if !plain_literals {
            failures.push(format!("non-literal or miscast argument survives:\n{text}"));
            break;
        }
        if !canonical_texts.insert(text.clone()) {
            failures.push(format!("duplicate canonical scenario:\n{text}"));
            break;
        }
    }
    finish(failures)
}

#[test]
fn criterion_5_size_sweep_trend() {
    report(
        5,
        "equivalence-rate trend across container sizes",
        check_size_sweep(),
    );
}

fn check_size_sweep() -> Result<(), String> {
    let started = Instant::now();
    let api = stack_api();
    let truth = GroundTruth::from_json(builtin_truth("stack", "clear()").expect("bundled"))
        .and_then(|t| t.validate(&api))
        .map_err(|e| e.to_string())?;
    let sweep = sweep_graph_size(
        &api,
        &truth,
        11,
        30,
        &SearchBudgets::default(),
        MatchPolicy::relaxed(),
        BASE_SEED,
    );
    let mut failures = Vec::new();

    let empty_row = &sweep.rows[0];
    ensure(
        empty_row.avg == 0.0 && empty_row.named_found == 0,
        || {
            format!(
                "size 0 found avg {} named {}",
                empty_row.avg, empty_row.named_found
            )
        },
        &mut failures,
    );

    for row in &sweep.rows[5..=8] {
        ensure(
            row.named_at_round_one * 10 >= row.runs * 8,
            || {
                format!(
                    "size {}: removeAllElements at round one in {}/{} runs (< 80%)",
                    row.size, row.named_at_round_one, row.runs
                )
            },
            &mut failures,
        );
    }

    let max_inside = sweep.rows[4..=9]
        .iter()
        .map(|r| r.avg)
        .fold(f64::MIN, f64::max);
    let max_outside = sweep
        .rows
        .iter()
        .filter(|r| !(4..=9).contains(&r.size))
        .map(|r| r.avg)
        .fold(f64::MIN, f64::max);
    ensure(
        max_inside > max_outside,
        || format!("peak average {max_inside:.2} does not exceed outside peak {max_outside:.2}"),
        &mut failures,
    );

    ensure(
        started.elapsed() < Duration::from_secs(600),
        || format!("took {:?}", started.elapsed()),
        &mut failures,
    );
    finish(failures)
}

#[test]
fn criterion_6_known_equivalence_oracles() {
    report(
        6,
        "known equivalences survive the exhaustive oracle",
        check_known_equivalences(),
    );
}

fn check_known_equivalences() -> Result<(), String> {
    let api = stack_api();
    let mut failures = Vec::new();
    let cases: [(&str, &str); 4] = [
        ("clear()", "removeAllElements()"),
        ("pop()", "remove(size() - 1)"),
        ("push(Object)", "add(x0)"),
        ("push(Object)", "addElement(x0)"),
    ];
    for (target_sig, body) in cases {
        let target = api.find(target_sig).expect("target exists");
        let candidate = match Candidate::parse(body, &api, target) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("{body}: {e}"));
                continue;
            }
        };
        if let Some((state, args)) =
            exhaustive_counterexample(&api, target, &candidate, MatchPolicy::relaxed())
        {
            failures.push(format!(
                "{body} vs {target_sig}: counterexample at state {state:?}, args {args:?}"
            ));
        }
    }
    finish(failures)
}

#[test]
fn criterion_7_run_determinism() {
    report(7, "byte-identical reruns", check_run_determinism());
}

fn check_run_determinism() -> Result<(), String> {
    let tmp = tempfile::TempDir::new().expect("tempdir");
    let dirs = [tmp.path().join("first"), tmp.path().join("second")];
    for dir in &dirs {
        let output = Command::new(env!("CARGO_BIN_EXE_esg"))
            .args([
                "run",
                "--api",
                "stack",
                "--method",
                "pop()",
                "--blacklist",
                blacklist_path().to_str().unwrap(),
                "--seed",
                "7",
                "--budget",
                "2000",
                "--max-len",
                "12",
                "--min-elems",
                "5",
                "--max-elems",
                "8",
                "--min-distinct",
                "3",
                "--out",
                dir.to_str().unwrap(),
            ])
            .env_remove("ESG_SEED")
            .output()
            .map_err(|e| e.to_string())?;
        if output.status.code() != Some(0) {
            return fail(format!(
                "run exited {:?}: {}",
                output.status.code(),
                String::from_utf8_lossy(&output.stderr)
            ));
        }
    }

    let mut failures = Vec::new();
    let list = |dir: &PathBuf| -> Vec<String> {
        let mut names: Vec<String> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        names
    };
    let names = list(&dirs[0]);
    ensure(
        names == list(&dirs[1]),
        || "file lists differ".to_string(),
        &mut failures,
    );
    ensure(
        names.iter().any(|n| n.ends_with(".scn")),
        || "no scenario files were produced".to_string(),
        &mut failures,
    );
    for name in &names {
        let first = std::fs::read(dirs[0].join(name)).unwrap();
        let second = std::fs::read(dirs[1].join(name)).unwrap();
        if name == "report.json" {
            let strip = |bytes: &[u8]| {
                strip_timings(std::str::from_utf8(bytes).unwrap()).expect("report parses")
            };
            ensure(
                strip(&first) == strip(&second),
                || "reports differ beyond timings".to_string(),
                &mut failures,
            );
        } else {
            ensure(
                first == second,
                || format!("{name} differs between identical runs"),
                &mut failures,
            );
        }
    }
    finish(failures)
}

#[test]
fn criterion_8_heterogeneity_recall_trend() {
    report(
        8,
        "heterogeneity filter keeps recall",
        check_heterogeneity_trend(),
    );
}

fn check_heterogeneity_trend() -> Result<(), String> {
    let api = stack_api();
    let truth = GroundTruth::from_json(builtin_truth("stack", "push(Object)").expect("bundled"))
        .and_then(|t| t.validate(&api))
        .map_err(|e| e.to_string())?;
    let target = truth.target;
    let class_cfg = ClassifyConfig::new(FilterMode::Blacklist, standard_blacklist(), 1);
    let allowed = allowed_indices(&api, &classify(&api, target, &class_cfg));
    let budgets = SearchBudgets::default();

    // A deliberately value-starved literal pool, so unfiltered runs feed the
    // search monoculture scenarios the heterogeneity filter would drop.
    let skewed_pool = vec![0, 0, 0, 1, 10];
    let mut recalls = Vec::new();
    let mut filtered_dropped = 0usize;
    for min_distinct in [3usize, 1] {
        let opts = NormalizeOptions {
            window_lo: 5,
            window_hi: 8,
            min_distinct,
        };
        let mut outcomes = Vec::new();
        for run in 0..30u64 {
            let mut gen_cfg = GenConfig::new(2000, derive_seed(BASE_SEED, run));
            gen_cfg.pool = skewed_pool.clone();
            let raw = generate(&api, &allowed, target, &gen_cfg);
            let kept = keep_third_category(raw, &api, target);
            let (scenarios, stats) = normalize_pipeline(&kept, &api, target, &opts);
            if min_distinct > 1 {
                filtered_dropped += stats.heterogeneity_dropped;
            }
            let take = scenarios.len().min(5);
            outcomes.push(search_equivalences(
                &api,
                target,
                &scenarios[..take],
                &budgets,
                MatchPolicy::relaxed(),
                derive_seed(BASE_SEED, 1_000_000 + run),
            ));
        }
        let metrics = score(&api, &truth, &outcomes, MatchPolicy::relaxed());
        match metrics.recall {
            Some(recall) => recalls.push(recall),
            None => return fail(format!("no recall with min_distinct {min_distinct}")),
        }
    }

    let mut failures = Vec::new();
    ensure(
        recalls[0] >= recalls[1],
        || {
            format!(
                "recall with filter {:.3} < without {:.3}",
                recalls[0], recalls[1]
            )
        },
        &mut failures,
    );
    ensure(
        filtered_dropped > 0,
        || "the heterogeneity filter never engaged, so the comparison is vacuous".to_string(),
        &mut failures,
    );
    finish(failures)
}
