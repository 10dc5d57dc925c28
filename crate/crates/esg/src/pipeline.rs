//! End-to-end orchestration: method filtering → sequence generation →
//! scenario normalization, with optional equivalence-search scoring, plus the
//! artifact formats the CLI persists (sequence/scenario files, manifests, and
//! machine-readable reports).
//!
//! Everything here is deterministic for a fixed configuration: reports
//! serialize to byte-identical JSON across repeated runs, with wall-clock
//! timings isolated in a single `timings_ms` object so callers can exclude
//! them when comparing (see [`strip_timings`]).

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{
    allowed_indices, classify, Blacklist, BlacklistError, ClassifyConfig, ClassifyReport,
    FilterMode,
};
use crate::derive_seed;
use crate::equiv::score::{score, EquivMetrics, GroundTruth, TruthError, ValidatedTruth};
use crate::equiv::search::{search_equivalences, SearchBudgets, SearchOutcome};
use crate::equiv::MatchPolicy;
use crate::generator::{categorize, generate, keep_third_category, GenConfig, SequenceCategory};
use crate::normalizer::{normalize_pipeline, ExecutionScenario, NormalizeOptions, NormalizeStats};
use crate::subject::api::{stack_api, SubjectApi};
use crate::subject::lang::Sequence;

/// Names of the subject APIs compiled into the binary.
pub const BUILTIN_APIS: &[&str] = &["stack"];

/// Look up a subject API by registry name.
pub fn builtin_api(name: &str) -> Option<SubjectApi> {
    match name {
        "stack" => Some(stack_api()),
        _ => None,
    }
}

/// Bundled reference equivalence lists, keyed by (api, target signature).
/// Used by `sweep` (and `eval` when no explicit file is given).
pub fn builtin_truth(api: &str, signature: &str) -> Option<&'static str> {
    if api != "stack" {
        return None;
    }
    match signature {
        "clear()" => Some(include_str!("../fixtures/truth/clear.json")),
        "pop()" => Some(include_str!("../fixtures/truth/pop.json")),
        "push(Object)" => Some(include_str!("../fixtures/truth/push.json")),
        "addElement(Object)" => Some(include_str!("../fixtures/truth/addElement.json")),
        "peek()" => Some(include_str!("../fixtures/truth/peek.json")),
        "firstElement()" => Some(include_str!("../fixtures/truth/firstElement.json")),
        "remove(Object)" => Some(include_str!("../fixtures/truth/remove_object.json")),
        _ => None,
    }
}

/// Scoring settings attached to a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    /// Reference equivalence list. `None` falls back to the bundled list for
    /// the target, when one exists.
    pub truth: Option<PathBuf>,
    /// Independent search runs to score.
    pub runs: usize,
    /// Compare return values across kinds instead of relaxing them.
    pub strict_returns: bool,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            truth: None,
            runs: 30,
            strict_returns: false,
        }
    }
}

/// Full configuration of one pipeline run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Subject API registry name.
    pub api: String,
    /// Target method, as a full signature such as `pop()` or `push(Object)`.
    pub target: String,
    /// Blacklist file; `None` means no name patterns.
    pub blacklist: Option<PathBuf>,
    /// How decreasing methods are identified.
    pub mode: FilterMode,
    /// Base RNG seed for probing, generation, and scoring streams.
    pub seed: u64,
    /// Generation budget (sequences attempted).
    pub budget: usize,
    /// Maximum statements per generated sequence.
    pub max_len: usize,
    /// Probability of forcing a closing target call; `None` keeps the
    /// generator default.
    pub target_bias: Option<f64>,
    /// Integer literal pool override; `None` keeps the generator default.
    pub pool: Option<Vec<i64>>,
    /// Smallest pre-target element count kept.
    pub window_lo: usize,
    /// Largest pre-target element count kept.
    pub window_hi: usize,
    /// Required distinct pre-target values (1 disables the filter).
    pub min_distinct: usize,
    /// Where scenario files, the manifest, and the report are written.
    pub out_dir: PathBuf,
    /// Score the emitted scenarios when set.
    pub eval: Option<EvalSettings>,
}

impl RunConfig {
    /// A runnable default configuration for the given API, target, and
    /// output directory.
    pub fn new(api: &str, target: &str, out_dir: impl Into<PathBuf>) -> Self {
        RunConfig {
            api: api.to_string(),
            target: target.to_string(),
            blacklist: None,
            mode: FilterMode::Blacklist,
            seed: 0,
            budget: 2000,
            max_len: 12,
            target_bias: None,
            pool: None,
            window_lo: 5,
            window_hi: 8,
            min_distinct: 3,
            out_dir: out_dir.into(),
            eval: None,
        }
    }
}

/// Anything that can stop the pipeline. Each variant renders a distinct
/// diagnostic; the CLI maps all of them to exit code 1.
#[derive(Debug, Error)]
pub enum PipelineError {
    /// The API name is not in the built-in registry.
    #[error("unknown api `{0}` (built-in apis: stack)")]
    UnknownApi(String),
    /// The target signature does not name a method of the API.
    #[error("target method `{target}` not found in api `{api}`")]
    TargetNotFound {
        /// API that was searched.
        api: String,
        /// Signature that failed to resolve.
        target: String,
    },
    /// The blacklist file could not be read.
    #[error("cannot read blacklist `{path}`: {source}")]
    BlacklistUnreadable {
        /// Path that failed.
        path: PathBuf,
        /// Underlying I/O error.
        source: std::io::Error,
    },
    /// The blacklist file was read but its contents are not usable.
    #[error("invalid blacklist `{path}`: {source}")]
    BlacklistInvalid {
        /// Path that failed.
        path: PathBuf,
        /// Underlying parse error.
        source: BlacklistError,
    },
    /// A numeric or structural setting is out of range.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The reference equivalence list could not be read.
    #[error("cannot read truth file `{path}`: {source}")]
    TruthUnreadable {
        /// Path that failed.
        path: PathBuf,
        /// Underlying I/O error.
        source: std::io::Error,
    },
    /// The reference equivalence list is malformed or inconsistent.
    #[error("invalid truth `{origin}`: {source}")]
    TruthInvalid {
        /// File path or registry key the list came from.
        origin: String,
        /// Underlying validation error.
        source: TruthError,
    },
    /// No reference list was given and none is bundled for the target.
    #[error("no bundled truth for `{0}`; pass an explicit truth file")]
    NoBundledTruth(String),
    /// Artifact I/O failed.
    #[error("cannot access `{path}`: {source}")]
    Io {
        /// Path that failed.
        path: PathBuf,
        /// Underlying I/O error.
        source: std::io::Error,
    },
    /// An artifact file exists but does not parse back.
    #[error("malformed artifact `{path}`: {reason}")]
    Malformed {
        /// Path that failed.
        path: PathBuf,
        /// What was wrong with it.
        reason: String,
    },
}

/// A validated configuration bound to a concrete API.
#[derive(Debug)]
pub struct ResolvedRun {
    /// The subject API.
    pub api: SubjectApi,
    /// Target method index into `api.methods`.
    pub target: usize,
    /// Parsed blacklist (empty when no file was given).
    pub blacklist: Blacklist,
}

/// Resolve and validate a configuration: unknown API, unresolvable target,
/// and unreadable blacklist each surface as their own error.
pub fn resolve(cfg: &RunConfig) -> Result<ResolvedRun, PipelineError> {
    let api = builtin_api(&cfg.api).ok_or_else(|| PipelineError::UnknownApi(cfg.api.clone()))?;
    let target = api
        .find(&cfg.target)
        .ok_or_else(|| PipelineError::TargetNotFound {
            api: cfg.api.clone(),
            target: cfg.target.clone(),
        })?;
    let blacklist = load_blacklist(cfg.blacklist.as_deref())?;
    if cfg.window_lo > cfg.window_hi {
        return Err(PipelineError::Config(format!(
            "window lower bound {} exceeds upper bound {}",
            cfg.window_lo, cfg.window_hi
        )));
    }
    if cfg.min_distinct < 1 {
        return Err(PipelineError::Config(
            "min-distinct must be at least 1".into(),
        ));
    }
    gen_config(cfg)
        .validate()
        .map_err(|e| PipelineError::Config(e.to_string()))?;
    if let Some(eval) = &cfg.eval {
        if eval.runs < 1 {
            return Err(PipelineError::Config("eval runs must be at least 1".into()));
        }
    }
    Ok(ResolvedRun {
        api,
        target,
        blacklist,
    })
}

/// Read and parse a blacklist file; `None` yields the empty blacklist.
pub fn load_blacklist(path: Option<&Path>) -> Result<Blacklist, PipelineError> {
    match path {
        None => Ok(Blacklist::empty()),
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|source| PipelineError::BlacklistUnreadable {
                    path: path.to_path_buf(),
                    source,
                })?;
            Blacklist::parse(&text).map_err(|source| PipelineError::BlacklistInvalid {
                path: path.to_path_buf(),
                source,
            })
        }
    }
}

/// Load a reference equivalence list from a file, or from the bundled set
/// when no file is given.
pub fn load_truth(
    api: &SubjectApi,
    api_name: &str,
    signature: &str,
    path: Option<&Path>,
) -> Result<ValidatedTruth, PipelineError> {
    let (origin, text) = match path {
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|source| PipelineError::TruthUnreadable {
                    path: path.to_path_buf(),
                    source,
                })?;
            (path.display().to_string(), text)
        }
        None => {
            let text = builtin_truth(api_name, signature)
                .ok_or_else(|| PipelineError::NoBundledTruth(signature.to_string()))?;
            (format!("bundled:{signature}"), text.to_string())
        }
    };
    GroundTruth::from_json(&text)
        .and_then(|t| t.validate(api))
        .map_err(|source| PipelineError::TruthInvalid { origin, source })
}

fn gen_config(cfg: &RunConfig) -> GenConfig {
    let mut gen = GenConfig::new(cfg.budget, cfg.seed);
    gen.max_length = cfg.max_len;
    if let Some(bias) = cfg.target_bias {
        gen.target_bias = bias;
    }
    if let Some(pool) = &cfg.pool {
        gen.pool = pool.clone();
    }
    gen
}

/// How many raw sequences fell into each behavioral class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryCounts {
    /// Sequences that never invoke the target.
    pub no_target: usize,
    /// Sequences whose final target invocation raises.
    pub target_raises: usize,
    /// Sequences ending in a successful target call (the convertible class).
    pub target_normal: usize,
}

impl CategoryCounts {
    /// Tally a batch of raw sequences.
    pub fn tally(seqs: &[Sequence], api: &SubjectApi, target: usize) -> Self {
        let mut counts = CategoryCounts::default();
        for seq in seqs {
            match categorize(seq, api, target) {
                SequenceCategory::NoTarget => counts.no_target += 1,
                SequenceCategory::TargetRaises => counts.target_raises += 1,
                SequenceCategory::TargetNormal => counts.target_normal += 1,
            }
        }
        counts
    }

    /// Total sequences tallied.
    pub fn total(&self) -> usize {
        self.no_target + self.target_raises + self.target_normal
    }
}

/// Wall-clock phase durations, in milliseconds. Kept in one object so
/// determinism checks can drop them wholesale.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseTimings {
    /// Method filtering.
    pub classify_ms: u64,
    /// Random sequence generation.
    pub generate_ms: u64,
    /// Normalization of kept sequences into scenarios.
    pub convert_ms: u64,
    /// Whole run, including artifact writing and optional scoring.
    pub total_ms: u64,
}

/// Everything one run did, as written to `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// Subject API name.
    pub api: String,
    /// Target signature.
    pub target: String,
    /// Filtering mode used.
    pub mode: FilterMode,
    /// Base seed of this run.
    pub seed: u64,
    /// Generation budget.
    pub budget: usize,
    /// Element-count window, inclusive.
    pub window: (usize, usize),
    /// Heterogeneity threshold (1 = disabled).
    pub min_distinct: usize,
    /// The generator's allowed-method menu, in declaration order.
    pub allowed: Vec<String>,
    /// Raw sequence tallies per behavioral class.
    pub categories: CategoryCounts,
    /// Per-stage normalization drop counts.
    pub normalize: NormalizeStats,
    /// Scenarios emitted.
    pub emitted: usize,
    /// True when the run produced no scenarios (the empty outcome).
    pub nil: bool,
    /// Scenario file names, relative to the output directory.
    pub files: Vec<String>,
    /// Scoring results, when requested.
    pub eval: Option<EquivMetrics>,
    /// Wall-clock phase timings.
    pub timings_ms: PhaseTimings,
}

/// In-memory result of [`run`]: the report plus the scenarios themselves.
pub struct RunOutput {
    /// The persisted report.
    pub report: RunReport,
    /// Scenarios, in emission order (matches `report.files`).
    pub scenarios: Vec<ExecutionScenario>,
}

/// Execute one full pipeline run and persist its artifacts.
///
/// Writes `scenario_NNN.scn` files, `manifest.json`, and `report.json` into
/// `cfg.out_dir`. Returns the report and scenarios; an empty scenario list is
/// reported (`nil = true`), not an error.
pub fn run(cfg: &RunConfig) -> Result<RunOutput, PipelineError> {
    let resolved = resolve(cfg)?;
    let api = &resolved.api;
    let started = Instant::now();

    let classify_cfg = ClassifyConfig::new(cfg.mode, resolved.blacklist.clone(), cfg.seed);
    let class_report = classify(api, resolved.target, &classify_cfg);
    let allowed = allowed_indices(api, &class_report);
    let classify_ms = started.elapsed().as_millis() as u64;

    let gen_started = Instant::now();
    let raw = generate(api, &allowed, resolved.target, &gen_config(cfg));
    let categories = CategoryCounts::tally(&raw, api, resolved.target);
    let kept = keep_third_category(raw, api, resolved.target);
    let generate_ms = gen_started.elapsed().as_millis() as u64;

    let convert_started = Instant::now();
    let opts = NormalizeOptions {
        window_lo: cfg.window_lo,
        window_hi: cfg.window_hi,
        min_distinct: cfg.min_distinct,
    };
    let (scenarios, stats) = normalize_pipeline(&kept, api, resolved.target, &opts);
    let convert_ms = convert_started.elapsed().as_millis() as u64;

    let eval = match &cfg.eval {
        None => None,
        Some(settings) => Some(evaluate_scenarios(
            api,
            &cfg.api,
            resolved.target,
            &scenarios,
            settings,
            cfg.seed,
        )?),
    };

    let files = write_scenarios(&cfg.out_dir, api, &scenarios)?;
    let manifest = ScenarioManifest {
        api: cfg.api.clone(),
        target: cfg.target.clone(),
        window: (cfg.window_lo, cfg.window_hi),
        min_distinct: cfg.min_distinct,
        stats,
        nil: scenarios.is_empty(),
        files: files.clone(),
    };
    write_json(&cfg.out_dir.join("manifest.json"), &manifest)?;

    let mut report = RunReport {
        api: cfg.api.clone(),
        target: cfg.target.clone(),
        mode: cfg.mode,
        seed: cfg.seed,
        budget: cfg.budget,
        window: (cfg.window_lo, cfg.window_hi),
        min_distinct: cfg.min_distinct,
        allowed: class_report.allowed.clone(),
        categories,
        normalize: stats,
        emitted: scenarios.len(),
        nil: scenarios.is_empty(),
        files,
        eval,
        timings_ms: PhaseTimings {
            classify_ms,
            generate_ms,
            convert_ms,
            total_ms: started.elapsed().as_millis() as u64,
        },
    };
    report.timings_ms.total_ms = started.elapsed().as_millis() as u64;
    write_json(&cfg.out_dir.join("report.json"), &report)?;

    Ok(RunOutput { report, scenarios })
}

/// Score emitted scenarios against a reference list: one search per run seed,
/// pooled into the usual metrics.
fn evaluate_scenarios(
    api: &SubjectApi,
    api_name: &str,
    target: usize,
    scenarios: &[ExecutionScenario],
    settings: &EvalSettings,
    base_seed: u64,
) -> Result<EquivMetrics, PipelineError> {
    let truth = load_truth(
        api,
        api_name,
        &api.methods[target].signature(),
        settings.truth.as_deref(),
    )?;
    let policy = if settings.strict_returns {
        MatchPolicy::strict()
    } else {
        MatchPolicy::relaxed()
    };
    Ok(evaluate(
        api,
        &truth,
        scenarios,
        settings.runs,
        base_seed,
        policy,
    ))
}

/// Run the equivalence search `runs` times over one scenario set and score
/// the outcomes. Search seeds live in their own stream block
/// (`derive_seed(base, 1_000_000 + run)`) so a seed shared with generation
/// never replays the same stream.
pub fn evaluate(
    api: &SubjectApi,
    truth: &ValidatedTruth,
    scenarios: &[ExecutionScenario],
    runs: usize,
    base_seed: u64,
    policy: MatchPolicy,
) -> EquivMetrics {
    let budgets = SearchBudgets::default();
    let outcomes: Vec<SearchOutcome> = (0..runs)
        .map(|r| {
            let seed = derive_seed(base_seed, 1_000_000 + r as u64);
            search_equivalences(api, truth.target, scenarios, &budgets, policy, seed)
        })
        .collect();
    score(api, truth, &outcomes, policy)
}

/// Aggregate of `n` independent runs with derived seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatReport {
    /// Subject API name.
    pub api: String,
    /// Target signature.
    pub target: String,
    /// Seed the per-run seeds derive from.
    pub base_seed: u64,
    /// Number of runs aggregated.
    pub runs: usize,
    /// Fewest scenarios any run emitted.
    pub min: usize,
    /// Most scenarios any run emitted.
    pub max: usize,
    /// Mean scenarios per run.
    pub avg: f64,
    /// True when every run came up empty.
    pub nil: bool,
    /// The individual run reports, in run order.
    pub reports: Vec<RunReport>,
}

/// Run the pipeline `n` times with seeds derived from `cfg.seed`, writing
/// each run's artifacts to `run_NN/` under `cfg.out_dir` and the aggregate to
/// `aggregate.json`.
pub fn repeat(cfg: &RunConfig, n: usize) -> Result<RepeatReport, PipelineError> {
    if n < 1 {
        return Err(PipelineError::Config(
            "repeat count must be at least 1".into(),
        ));
    }
    let mut reports = Vec::with_capacity(n);
    for i in 0..n {
        let mut run_cfg = cfg.clone();
        run_cfg.seed = derive_seed(cfg.seed, i as u64);
        run_cfg.out_dir = cfg.out_dir.join(format!("run_{i:02}"));
        reports.push(run(&run_cfg)?.report);
    }
    let counts: Vec<usize> = reports.iter().map(|r| r.emitted).collect();
    let min = counts.iter().copied().min().unwrap_or(0);
    let max = counts.iter().copied().max().unwrap_or(0);
    let avg = counts.iter().sum::<usize>() as f64 / n as f64;
    let aggregate = RepeatReport {
        api: cfg.api.clone(),
        target: cfg.target.clone(),
        base_seed: cfg.seed,
        runs: n,
        min,
        max,
        avg,
        nil: max == 0,
        reports,
    };
    write_json(&cfg.out_dir.join("aggregate.json"), &aggregate)?;
    Ok(aggregate)
}

/// Manifest for a directory of generated `.seq` files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenManifest {
    /// Subject API name.
    pub api: String,
    /// Target signature.
    pub target: String,
    /// Generation seed.
    pub seed: u64,
    /// Generation budget.
    pub budget: usize,
    /// Raw sequence tallies per behavioral class.
    pub categories: CategoryCounts,
    /// Sequences written (the convertible class only).
    pub kept: usize,
    /// Sequence file names, relative to the directory.
    pub files: Vec<String>,
}

/// Generate sequences and persist the convertible ones as `.seq` files plus
/// a `manifest.json` with per-class counts. Returns the manifest.
pub fn gen_to_dir(cfg: &RunConfig) -> Result<GenManifest, PipelineError> {
    let resolved = resolve(cfg)?;
    let api = &resolved.api;
    let classify_cfg = ClassifyConfig::new(cfg.mode, resolved.blacklist.clone(), cfg.seed);
    let class_report = classify(api, resolved.target, &classify_cfg);
    let allowed = allowed_indices(api, &class_report);
    let raw = generate(api, &allowed, resolved.target, &gen_config(cfg));
    let categories = CategoryCounts::tally(&raw, api, resolved.target);
    let kept = keep_third_category(raw, api, resolved.target);

    fs::create_dir_all(&cfg.out_dir).map_err(|source| PipelineError::Io {
        path: cfg.out_dir.clone(),
        source,
    })?;
    let mut files = Vec::with_capacity(kept.len());
    for (i, seq) in kept.iter().enumerate() {
        let name = format!("case_{i:05}.seq");
        let path = cfg.out_dir.join(&name);
        fs::write(&path, seq.to_text(api)).map_err(|source| PipelineError::Io { path, source })?;
        files.push(name);
    }
    let manifest = GenManifest {
        api: cfg.api.clone(),
        target: cfg.target.clone(),
        seed: cfg.seed,
        budget: cfg.budget,
        categories,
        kept: kept.len(),
        files,
    };
    write_json(&cfg.out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Manifest for a directory of normalized `.scn` files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioManifest {
    /// Subject API name.
    pub api: String,
    /// Target signature.
    pub target: String,
    /// Element-count window, inclusive.
    pub window: (usize, usize),
    /// Heterogeneity threshold (1 = disabled).
    pub min_distinct: usize,
    /// Per-stage drop counts.
    pub stats: NormalizeStats,
    /// True when no scenario survived (the empty outcome).
    pub nil: bool,
    /// Scenario file names, relative to the directory.
    pub files: Vec<String>,
}

/// Normalize a directory of `.seq` files into `.scn` scenarios plus a
/// `manifest.json` with per-stage drop counts. Returns the manifest.
pub fn normalize_dir(
    api: &SubjectApi,
    api_name: &str,
    target: usize,
    in_dir: &Path,
    out_dir: &Path,
    opts: &NormalizeOptions,
) -> Result<ScenarioManifest, PipelineError> {
    if opts.window_lo > opts.window_hi {
        return Err(PipelineError::Config(format!(
            "window lower bound {} exceeds upper bound {}",
            opts.window_lo, opts.window_hi
        )));
    }
    let seqs = read_sequences(in_dir, api)?;
    let (scenarios, stats) = normalize_pipeline(&seqs, api, target, opts);
    let files = write_scenarios(out_dir, api, &scenarios)?;
    let manifest = ScenarioManifest {
        api: api_name.to_string(),
        target: api.methods[target].signature(),
        window: (opts.window_lo, opts.window_hi),
        min_distinct: opts.min_distinct,
        stats,
        nil: scenarios.is_empty(),
        files,
    };
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    Ok(manifest)
}

/// Write scenarios as `scenario_NNN.scn` under `dir`, returning file names.
pub fn write_scenarios(
    dir: &Path,
    api: &SubjectApi,
    scenarios: &[ExecutionScenario],
) -> Result<Vec<String>, PipelineError> {
    fs::create_dir_all(dir).map_err(|source| PipelineError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut files = Vec::with_capacity(scenarios.len());
    for (i, scenario) in scenarios.iter().enumerate() {
        let name = format!("scenario_{i:03}.scn");
        let path = dir.join(&name);
        fs::write(&path, scenario.to_text(api))
            .map_err(|source| PipelineError::Io { path, source })?;
        files.push(name);
    }
    Ok(files)
}

/// Read every `.seq` file in a directory, in file-name order.
pub fn read_sequences(dir: &Path, api: &SubjectApi) -> Result<Vec<Sequence>, PipelineError> {
    read_statement_files(dir, "seq", |path, text| {
        Sequence::parse(text, api).map_err(|e| PipelineError::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    })
}

/// Read every `.scn` file in a directory, in file-name order, revalidating
/// each as an execution scenario for `target`.
pub fn read_scenarios(
    dir: &Path,
    api: &SubjectApi,
    target: usize,
) -> Result<Vec<ExecutionScenario>, PipelineError> {
    read_statement_files(dir, "scn", |path, text| {
        let seq = Sequence::parse(text, api).map_err(|e| PipelineError::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        ExecutionScenario::from_sequence(seq, api, target).map_err(|e| PipelineError::Malformed {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    })
}

fn read_statement_files<T>(
    dir: &Path,
    ext: &str,
    mut parse: impl FnMut(&Path, &str) -> Result<T, PipelineError>,
) -> Result<Vec<T>, PipelineError> {
    let entries = fs::read_dir(dir).map_err(|source| PipelineError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let text = fs::read_to_string(&path).map_err(|source| PipelineError::Io {
            path: path.clone(),
            source,
        })?;
        out.push(parse(&path, &text)?);
    }
    Ok(out)
}

/// Serialize a value as pretty JSON (with trailing newline) to `path`.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| PipelineError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    let mut text = serde_json::to_string_pretty(value)
        .expect("report types serialize without fallible map keys");
    text.push('\n');
    fs::write(path, text).map_err(|source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Remove every `timings_ms` object from a JSON report, recursively, and
/// re-serialize. Two runs of the same configuration agree byte-for-byte on
/// this stripped form; only wall-clock noise differs.
pub fn strip_timings(report_json: &str) -> Result<String, serde_json::Error> {
    fn scrub(value: &mut serde_json::Value) {
        match value {
            serde_json::Value::Object(map) => {
                map.remove("timings_ms");
                for v in map.values_mut() {
                    scrub(v);
                }
            }
            serde_json::Value::Array(items) => {
                for v in items {
                    scrub(v);
                }
            }
            _ => {}
        }
    }
    let mut value: serde_json::Value = serde_json::from_str(report_json)?;
    scrub(&mut value);
    Ok(format!("{value:#}\n"))
}

/// Re-export of the classifier's report for CLI convenience.
pub type FilterReport = ClassifyReport;
