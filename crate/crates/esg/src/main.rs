//! `esg` — synthesize and score execution scenarios for a modeled
//! stack/vector container API.
//!
//! Exit codes: `0` when the command succeeded and, for scenario-producing
//! commands, produced at least one artifact; `2` when a pipeline completed
//! but emitted nothing (the empty outcome); `1` for configuration or runtime
//! errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use esg::classifier::{classify, ClassifyConfig, FilterMode};
use esg::equiv::search::SearchBudgets;
use esg::equiv::{sweep_graph_size, MatchPolicy};
use esg::normalizer::NormalizeOptions;
use esg::pipeline::{
    self, evaluate, gen_to_dir, load_blacklist, load_truth, normalize_dir, read_scenarios,
    write_json, EvalSettings, PipelineError, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "esg",
    version,
    about = "Generate method-call scenarios ending in a target method, and score them\nby searching for observationally equivalent method sequences."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the API's methods and print the generator's allowed list.
    Classify(ClassifyArgs),
    /// Generate random sequences; keep the ones ending in a working target call.
    Gen(GenArgs),
    /// Normalize a directory of sequences into execution scenarios.
    Normalize(NormalizeArgs),
    /// Full pipeline: classify, generate, normalize, optionally score.
    Run(RunArgs),
    /// Run the full pipeline n times with derived seeds and aggregate.
    Repeat(RepeatArgs),
    /// Score a scenario directory by equivalence search against a reference list.
    Eval(EvalArgs),
    /// Score one canonical scenario per container size across a size range.
    Sweep(SweepArgs),
}

/// Options shared by every command that resolves an API and target method.
#[derive(Args)]
struct TargetArgs {
    /// Subject API name (built-in: stack).
    #[arg(long, default_value = "stack")]
    api: String,
    /// Target method as a full signature, e.g. "pop()" or "push(Object)".
    #[arg(long)]
    method: String,
    /// Base RNG seed.
    #[arg(long, env = "ESG_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// Name-pattern file for methods the generator must not call.
    #[arg(long)]
    blacklist: Option<PathBuf>,
    /// How shrinking methods are identified: blacklist, probe, or both.
    #[arg(long, default_value = "both")]
    mode: FilterMode,
    /// Print the full report as JSON instead of text.
    #[arg(long)]
    json: bool,
}

/// Generation knobs shared by `gen`, `run`, and `repeat`.
#[derive(Args)]
struct GenKnobs {
    /// Name-pattern file for methods the generator must not call.
    #[arg(long)]
    blacklist: Option<PathBuf>,
    /// How shrinking methods are identified: blacklist, probe, or both.
    #[arg(long, default_value = "blacklist")]
    mode: FilterMode,
    /// Sequences to attempt.
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    /// Maximum statements per sequence.
    #[arg(long, default_value_t = 12)]
    max_len: usize,
    /// Probability of forcing a closing target call.
    #[arg(long)]
    target_bias: Option<f64>,
    /// Integer literal pool, comma-separated (e.g. "-1,0,1,10").
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pool: Option<Vec<i64>>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    knobs: GenKnobs,
    /// Directory for .seq files and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct WindowKnobs {
    /// Smallest pre-target element count kept.
    #[arg(long, default_value_t = 5)]
    min_elems: usize,
    /// Largest pre-target element count kept.
    #[arg(long, default_value_t = 8)]
    max_elems: usize,
    /// Required distinct pre-target values (1 disables the filter).
    #[arg(long, default_value_t = 3)]
    min_distinct: usize,
}

#[derive(Args)]
struct NormalizeArgs {
    /// Directory of .seq files to normalize.
    #[arg(long = "in")]
    in_dir: PathBuf,
    /// Subject API name (built-in: stack).
    #[arg(long, default_value = "stack")]
    api: String,
    /// Target method as a full signature.
    #[arg(long)]
    method: String,
    #[command(flatten)]
    window: WindowKnobs,
    /// Directory for .scn files and manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    knobs: GenKnobs,
    #[command(flatten)]
    window: WindowKnobs,
    /// Directory for scenarios, manifest.json, and report.json.
    #[arg(long)]
    out: PathBuf,
    /// Score the scenarios against this reference list (JSON).
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Score the scenarios with this many search runs (enables scoring
    /// against the bundled reference list when --truth is absent).
    #[arg(long)]
    eval_runs: Option<usize>,
    /// Compare return values across kinds instead of relaxing them.
    #[arg(long)]
    strict_returns: bool,
}

#[derive(Args)]
struct RepeatArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Independent runs to aggregate.
    #[arg(short = 'n', long = "count", default_value_t = 5)]
    count: usize,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// Directory of .scn files to score.
    #[arg(long)]
    scenarios: PathBuf,
    /// Reference list (JSON); defaults to the bundled list for the target.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Independent search runs.
    #[arg(long, default_value_t = 30)]
    runs: usize,
    /// Compare return values across kinds instead of relaxing them.
    #[arg(long)]
    strict_returns: bool,
    /// Where the metrics report (JSON) is written.
    #[arg(long)]
    report: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    target: TargetArgs,
    /// Inclusive container-size range, e.g. "0..11".
    #[arg(long, default_value = "0..11")]
    sizes: String,
    /// Independent search runs per size.
    #[arg(long, default_value_t = 30)]
    runs: usize,
    /// Reference list (JSON); defaults to the bundled list for the target.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Compare return values across kinds instead of relaxing them.
    #[arg(long)]
    strict_returns: bool,
    /// Where the per-size report (JSON) is written.
    #[arg(long)]
    report: PathBuf,
}

fn main() -> ExitCode {
    // Restore default SIGPIPE so `esg ... | head` terminates quietly instead
    // of panicking on a closed stdout.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

/// Exit code for commands whose success is "artifacts were produced".
fn produced(count: usize) -> ExitCode {
    if count > 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn dispatch(command: Command) -> Result<ExitCode, PipelineError> {
    match command {
        Command::Classify(args) => run_classify(args),
        Command::Gen(args) => run_gen(args),
        Command::Normalize(args) => run_normalize(args),
        Command::Run(args) => run_run(args),
        Command::Repeat(args) => run_repeat(args),
        Command::Eval(args) => run_eval(args),
        Command::Sweep(args) => run_sweep(args),
    }
}

/// Resolve the (api, target) pair every command starts from.
fn resolve_target(
    api_name: &str,
    method: &str,
) -> Result<(esg::subject::api::SubjectApi, usize), PipelineError> {
    let api = pipeline::builtin_api(api_name)
        .ok_or_else(|| PipelineError::UnknownApi(api_name.to_string()))?;
    let target = api
        .find(method)
        .ok_or_else(|| PipelineError::TargetNotFound {
            api: api_name.to_string(),
            target: method.to_string(),
        })?;
    Ok((api, target))
}

fn run_classify(args: ClassifyArgs) -> Result<ExitCode, PipelineError> {
    let (api, target) = resolve_target(&args.target.api, &args.target.method)?;
    let blacklist = load_blacklist(args.blacklist.as_deref())?;
    let cfg = ClassifyConfig::new(args.mode, blacklist, args.target.seed);
    let report = classify(&api, target, &cfg);
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("reports serialize")
        );
    } else {
        let section = |label: &str, names: &[String]| {
            println!("{label} ({}):", names.len());
            for name in names {
                println!("  {name}");
            }
        };
        println!(
            "api: {} | target: {} | mode: {}",
            report.api, report.target, report.mode
        );
        section("pure (removed)", &report.pure);
        section("decreasing (removed)", &report.decreasing);
        section("increasing", &report.increasing);
        section("node-mutating", &report.node_mutating);
        section("allowed", &report.allowed);
    }
    Ok(ExitCode::SUCCESS)
}

fn base_run_config(target: &TargetArgs, knobs: &GenKnobs, out: PathBuf) -> RunConfig {
    let mut cfg = RunConfig::new(&target.api, &target.method, out);
    cfg.blacklist = knobs.blacklist.clone();
    cfg.mode = knobs.mode;
    cfg.seed = target.seed;
    cfg.budget = knobs.budget;
    cfg.max_len = knobs.max_len;
    cfg.target_bias = knobs.target_bias;
    cfg.pool = knobs.pool.clone();
    cfg
}

fn run_gen(args: GenArgs) -> Result<ExitCode, PipelineError> {
    let cfg = base_run_config(&args.target, &args.knobs, args.out.clone());
    let manifest = gen_to_dir(&cfg)?;
    println!(
        "kept {} of {} sequences (no-target {}, raising {}) -> {}",
        manifest.kept,
        manifest.categories.total(),
        manifest.categories.no_target,
        manifest.categories.target_raises,
        args.out.display()
    );
    Ok(produced(manifest.kept))
}

fn run_normalize(args: NormalizeArgs) -> Result<ExitCode, PipelineError> {
    let (api, target) = resolve_target(&args.api, &args.method)?;
    let opts = NormalizeOptions {
        window_lo: args.window.min_elems,
        window_hi: args.window.max_elems,
        min_distinct: args.window.min_distinct,
    };
    let manifest = normalize_dir(&api, &args.api, target, &args.in_dir, &args.out, &opts)?;
    let s = &manifest.stats;
    println!(
        "emitted {} of {} (no-target {}, merge {}, window {}, heterogeneity {}, duplicate {}) -> {}",
        s.emitted,
        s.input,
        s.no_usable_target,
        s.merge_dropped,
        s.window_dropped,
        s.heterogeneity_dropped,
        s.duplicates_dropped,
        args.out.display()
    );
    if manifest.nil {
        println!("no scenarios survived normalization");
    }
    Ok(produced(manifest.stats.emitted))
}

fn full_run_config(args: &RunArgs) -> RunConfig {
    let mut cfg = base_run_config(&args.target, &args.knobs, args.out.clone());
    cfg.window_lo = args.window.min_elems;
    cfg.window_hi = args.window.max_elems;
    cfg.min_distinct = args.window.min_distinct;
    if args.truth.is_some() || args.eval_runs.is_some() {
        cfg.eval = Some(EvalSettings {
            truth: args.truth.clone(),
            runs: args.eval_runs.unwrap_or(30),
            strict_returns: args.strict_returns,
        });
    }
    cfg
}

fn run_run(args: RunArgs) -> Result<ExitCode, PipelineError> {
    let cfg = full_run_config(&args);
    let out = pipeline::run(&cfg)?;
    let r = &out.report;
    println!(
        "classify {} allowed | generate {} raw ({} convertible) | emit {} scenarios -> {}",
        r.allowed.len(),
        r.categories.total(),
        r.categories.target_normal,
        r.emitted,
        cfg.out_dir.display()
    );
    if let Some(metrics) = &r.eval {
        println!(
            "eval: avg {:.2} | max-r {} | max-t {}/{} | precision {} | recall {} | iterations {}",
            metrics.avg,
            metrics.max_r,
            metrics.max_t,
            metrics.total,
            fmt_opt(metrics.precision),
            fmt_opt(metrics.recall),
            fmt_opt(metrics.iterations),
        );
    }
    if r.nil {
        println!("empty outcome: no scenario fits the window");
    }
    Ok(produced(r.emitted))
}

fn run_repeat(args: RepeatArgs) -> Result<ExitCode, PipelineError> {
    let cfg = full_run_config(&args.run);
    let aggregate = pipeline::repeat(&cfg, args.count)?;
    println!(
        "{} runs: min {} | max {} | avg {:.2} scenarios -> {}",
        aggregate.runs,
        aggregate.min,
        aggregate.max,
        aggregate.avg,
        cfg.out_dir.display()
    );
    Ok(produced(if aggregate.nil { 0 } else { 1 }))
}

fn run_eval(args: EvalArgs) -> Result<ExitCode, PipelineError> {
    let (api, target) = resolve_target(&args.target.api, &args.target.method)?;
    let truth = load_truth(
        &api,
        &args.target.api,
        &args.target.method,
        args.truth.as_deref(),
    )?;
    if truth.target != target {
        return Err(PipelineError::Config(format!(
            "truth file targets `{}`, not `{}`",
            api.methods[truth.target].signature(),
            args.target.method
        )));
    }
    let scenarios = read_scenarios(&args.scenarios, &api, target)?;
    if scenarios.is_empty() {
        return Err(PipelineError::Config(format!(
            "no .scn files found in `{}`",
            args.scenarios.display()
        )));
    }
    let policy = if args.strict_returns {
        MatchPolicy::strict()
    } else {
        MatchPolicy::relaxed()
    };
    let metrics = evaluate(
        &api,
        &truth,
        &scenarios,
        args.runs,
        args.target.seed,
        policy,
    );
    write_json(&args.report, &metrics)?;
    println!(
        "{} over {} runs: avg {:.2} | max-r {} | max-t {}/{} | precision {} | recall {} | iterations {} -> {}",
        args.target.method,
        metrics.runs,
        metrics.avg,
        metrics.max_r,
        metrics.max_t,
        metrics.total,
        fmt_opt(metrics.precision),
        fmt_opt(metrics.recall),
        fmt_opt(metrics.iterations),
        args.report.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn run_sweep(args: SweepArgs) -> Result<ExitCode, PipelineError> {
    let (api, _target) = resolve_target(&args.target.api, &args.target.method)?;
    let (lo, hi) = parse_sizes(&args.sizes)?;
    let truth = load_truth(
        &api,
        &args.target.api,
        &args.target.method,
        args.truth.as_deref(),
    )?;
    let policy = if args.strict_returns {
        MatchPolicy::strict()
    } else {
        MatchPolicy::relaxed()
    };
    let budgets = SearchBudgets::default();
    let mut report = sweep_graph_size(
        &api,
        &truth,
        hi,
        args.runs,
        &budgets,
        policy,
        args.target.seed,
    );
    report.rows.retain(|row| row.size >= lo);
    write_json(&args.report, &report)?;
    println!("target {} | named {}", report.target, report.named);
    println!("size  avg    prec   iters  found@1  found");
    for row in &report.rows {
        println!(
            "{:>4}  {:<5.2}  {:<5}  {:<5}  {:>7}  {:>5}",
            row.size,
            row.avg,
            fmt_opt(row.precision),
            fmt_opt(row.iterations),
            row.named_at_round_one,
            row.named_found,
        );
    }
    println!("-> {}", args.report.display());
    Ok(ExitCode::SUCCESS)
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{v:.2}"),
        None => "-".to_string(),
    }
}

/// Parse an inclusive size range written as `lo..hi` (or a single size).
fn parse_sizes(text: &str) -> Result<(usize, usize), PipelineError> {
    let parse_end = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| PipelineError::Config(format!("invalid size range `{text}`")))
    };
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (parse_end(lo)?, parse_end(hi)?),
        None => {
            let size = parse_end(text)?;
            (size, size)
        }
    };
    if lo > hi {
        return Err(PipelineError::Config(format!(
            "size range `{text}` runs backwards"
        )));
    }
    if hi > 12 {
        return Err(PipelineError::Config(format!(
            "size range `{text}` exceeds the canonical-scenario cap of 12"
        )));
    }
    Ok((lo, hi))
}
