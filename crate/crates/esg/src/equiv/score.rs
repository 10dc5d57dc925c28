//! Scoring equivalence-search runs against known ground truth.
//!
//! A [`GroundTruth`] file lists, for one target method, every equivalent
//! body expressible in the candidate language, plus one *named* entry whose
//! discovery round is tracked separately (the headline sequence for that
//! target). Scoring compares the bodies accepted by a batch of independent
//! search runs against that list:
//!
//! * `avg` / `max_r` — mean and maximum number of listed equivalences found
//!   per run,
//! * `max_t` / `recall` — distinct listed equivalences found across all
//!   runs, absolute and as a fraction of the total,
//! * `precision` — pooled over every acceptance: an acceptance is correct
//!   when it is listed in the ground truth or proven equivalent by the
//!   exhaustive checker (the list covers the expressible space, but the
//!   checker keeps scoring honest if the two ever drift),
//! * `iterations` — median, over runs that found the named entry, of the
//!   synthesize/validate round in which it was accepted.
//!
//! [`sweep_graph_size`] reruns the search from a single synthetic test point
//! of growing container size and reports one metrics row per size — the
//! how-much-state-does-the-search-need curve.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::derive_seed;
use crate::equiv::candidate::{exhaustive_counterexample, Candidate, CandidateError, MatchPolicy};
use crate::equiv::search::{
    search_equivalences_from_points, SearchBudgets, SearchOutcome, TestPoint,
};
use crate::subject::api::{ArgValue, ParamKind, SubjectApi};

/// Declarative ground truth for one target method, as stored on disk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    /// Target method signature, e.g. `"push(Object)"`.
    pub target: String,
    /// Declared number of known equivalences; must match `known.len()`.
    pub total: usize,
    /// The tracked headline equivalence; must appear in `known`.
    pub named: String,
    /// Every known equivalent body, written in the candidate language.
    pub known: Vec<String>,
}

/// Problems loading or validating a ground-truth file.
#[derive(Debug, thiserror::Error)]
pub enum TruthError {
    #[error("malformed ground-truth JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("ground truth names unknown target `{0}`")]
    UnknownTarget(String),
    #[error("ground truth declares {declared} equivalences but lists {listed}")]
    TotalMismatch { declared: usize, listed: usize },
    #[error("ground-truth entry `{entry}` does not parse: {source}")]
    Entry {
        entry: String,
        source: CandidateError,
    },
    #[error("ground-truth entries `{0}` are listed twice (after canonicalization)")]
    Duplicate(String),
    #[error("named equivalence `{0}` is not in the known list")]
    NamedNotKnown(String),
}

/// A ground truth checked against the API: entries parsed, texts
/// canonicalized, the named entry confirmed to be listed.
#[derive(Debug, Clone)]
pub struct ValidatedTruth {
    /// Target method index.
    pub target: usize,
    /// Number of known equivalences.
    pub total: usize,
    /// Canonical text of the named equivalence.
    pub named: String,
    /// Canonical texts of all known equivalences.
    pub known: BTreeSet<String>,
    /// The parsed bodies, in file order.
    pub entries: Vec<Candidate>,
}

impl GroundTruth {
    /// Parse a ground-truth JSON document.
    pub fn from_json(text: &str) -> Result<GroundTruth, TruthError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Check the file against an API and canonicalize its entries.
    pub fn validate(&self, api: &SubjectApi) -> Result<ValidatedTruth, TruthError> {
        let target = api
            .find(&self.target)
            .ok_or_else(|| TruthError::UnknownTarget(self.target.clone()))?;
        if self.total != self.known.len() {
            return Err(TruthError::TotalMismatch {
                declared: self.total,
                listed: self.known.len(),
            });
        }
        let mut known = BTreeSet::new();
        let mut entries = Vec::new();
        for entry in &self.known {
            let cand =
                Candidate::parse(entry, api, target).map_err(|source| TruthError::Entry {
                    entry: entry.clone(),
                    source,
                })?;
            if !known.insert(cand.text(api)) {
                return Err(TruthError::Duplicate(cand.text(api)));
            }
            entries.push(cand);
        }
        let named = Candidate::parse(&self.named, api, target)
            .map_err(|source| TruthError::Entry {
                entry: self.named.clone(),
                source,
            })?
            .text(api);
        if !known.contains(&named) {
            return Err(TruthError::NamedNotKnown(named));
        }
        Ok(ValidatedTruth {
            target,
            total: self.total,
            named,
            known,
            entries,
        })
    }
}

/// Aggregated metrics for a batch of search runs against one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivMetrics {
    /// Number of runs scored.
    pub runs: usize,
    /// Total known equivalences for the target.
    pub total: usize,
    /// Mean listed equivalences found per run.
    pub avg: f64,
    /// Maximum listed equivalences found by any single run.
    pub max_r: usize,
    /// Distinct listed equivalences found across all runs.
    pub max_t: usize,
    /// Pooled fraction of acceptances that are genuine equivalences.
    /// `None` when no run accepted anything.
    pub precision: Option<f64>,
    /// `max_t / total`. `None` when there are no runs to score.
    pub recall: Option<f64>,
    /// Median round in which the named equivalence was accepted, over the
    /// runs that found it. `None` when no run found it.
    pub iterations: Option<f64>,
}

fn median(mut values: Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    })
}

/// Score a batch of independent search runs against ground truth.
pub fn score(
    api: &SubjectApi,
    truth: &ValidatedTruth,
    outcomes: &[SearchOutcome],
    policy: MatchPolicy,
) -> EquivMetrics {
    // An acceptance is genuine if listed, or — drift guard — if the
    // exhaustive checker cannot distinguish it from the target.
    let mut genuine_cache: BTreeMap<String, bool> = BTreeMap::new();
    let mut per_run_true = Vec::new();
    let mut union_true: BTreeSet<String> = BTreeSet::new();
    let mut pooled_tp = 0usize;
    let mut pooled_total = 0usize;
    let mut named_rounds = Vec::new();

    for outcome in outcomes {
        let mut run_true: BTreeSet<String> = BTreeSet::new();
        for f in &outcome.found {
            let text = f.candidate.text(api);
            let genuine = *genuine_cache.entry(text.clone()).or_insert_with(|| {
                truth.known.contains(&text)
                    || exhaustive_counterexample(api, truth.target, &f.candidate, policy).is_none()
            });
            pooled_total += 1;
            if genuine {
                pooled_tp += 1;
            }
            // Count toward avg/max/recall only when listed: the oracle keeps
            // precision honest about unlisted-but-genuine acceptances (longer
            // bodies with the same effect), but the listed space is the
            // denominator, so only it can fill the numerator.
            if truth.known.contains(&text) {
                run_true.insert(text.clone());
            }
            // A run accepts each body at most once, so this fires at most
            // once per outcome.
            if text == truth.named {
                named_rounds.push(f.rounds as f64);
            }
        }
        union_true.extend(run_true.iter().cloned());
        per_run_true.push(run_true.len());
    }

    let runs = outcomes.len();
    let avg = if runs == 0 {
        0.0
    } else {
        per_run_true.iter().sum::<usize>() as f64 / runs as f64
    };
    let max_r = per_run_true.iter().copied().max().unwrap_or(0);
    let max_t = union_true.len();
    EquivMetrics {
        runs,
        total: truth.total,
        avg,
        max_r,
        max_t,
        precision: if pooled_total == 0 {
            None
        } else {
            Some(pooled_tp as f64 / pooled_total as f64)
        },
        recall: if runs == 0 {
            None
        } else {
            Some(max_t as f64 / truth.total as f64)
        },
        iterations: median(named_rounds),
    }
}

/// Fixed value palette for sweep pre-states: index `k` is the `k`-th element
/// pushed, so size-`n` sweeps start from the first `n` values.
pub const SWEEP_PALETTE: [i64; 12] = [0, 1, 10, -1, 7, 42, 100, 3, 5, 2, 4, 6];

/// The synthetic test point used for a sweep at one container size.
pub fn sweep_point(api: &SubjectApi, target: usize, size: usize) -> TestPoint {
    assert!(
        size <= SWEEP_PALETTE.len(),
        "sweep sizes are capped by the palette"
    );
    let pre_state = SWEEP_PALETTE[..size].to_vec();
    let args = api.methods[target]
        .params
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let v = SWEEP_PALETTE[(size + j) % SWEEP_PALETTE.len()];
            match p {
                ParamKind::Element | ParamKind::Int => ArgValue::Scalar(v),
                ParamKind::Collection => ArgValue::List(vec![v]),
            }
        })
        .collect();
    TestPoint { pre_state, args }
}

/// One row of a graph-size sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    /// Container size the runs started from.
    pub size: usize,
    /// Mean listed equivalences found per run.
    pub avg: f64,
    /// Pooled precision at this size (`None` when nothing was accepted).
    pub precision: Option<f64>,
    /// Median acceptance round of the named equivalence (`None` if unfound).
    pub iterations: Option<f64>,
    /// Runs (out of `runs`) that found the named equivalence.
    pub named_found: usize,
    /// Runs that accepted the named equivalence in their first round.
    pub named_at_round_one: usize,
    /// Independent runs at this size.
    pub runs: usize,
}

/// A full graph-size sweep for one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// Target method signature.
    pub target: String,
    /// Canonical text of the tracked named equivalence.
    pub named: String,
    /// One row per container size, ascending from zero.
    pub rows: Vec<SweepRow>,
}

/// Rerun the search at every container size from 0 to `max_size`, `runs`
/// independent seeds each, scoring each size separately.
#[allow(clippy::too_many_arguments)]
pub fn sweep_graph_size(
    api: &SubjectApi,
    truth: &ValidatedTruth,
    max_size: usize,
    runs: usize,
    budgets: &SearchBudgets,
    policy: MatchPolicy,
    base_seed: u64,
) -> SweepReport {
    let mut rows = Vec::new();
    for size in 0..=max_size {
        let point = sweep_point(api, truth.target, size);
        let outcomes: Vec<SearchOutcome> = (0..runs)
            .map(|run| {
                let seed = derive_seed(base_seed, (size * 1_000_003 + run) as u64);
                search_equivalences_from_points(
                    api,
                    truth.target,
                    vec![point.clone()],
                    budgets,
                    policy,
                    seed,
                )
            })
            .collect();
        let metrics = score(api, truth, &outcomes, policy);
        let mut named_found = 0;
        let mut named_at_round_one = 0;
        for outcome in &outcomes {
            if let Some(f) = outcome
                .found
                .iter()
                .find(|f| f.candidate.text(api) == truth.named)
            {
                named_found += 1;
                if f.rounds == 1 {
                    named_at_round_one += 1;
                }
            }
        }
        rows.push(SweepRow {
            size,
            avg: metrics.avg,
            precision: metrics.precision,
            iterations: metrics.iterations,
            named_found,
            named_at_round_one,
            runs,
        });
    }
    SweepReport {
        target: api.methods[truth.target].signature(),
        named: truth.named.clone(),
        rows,
    }
}
