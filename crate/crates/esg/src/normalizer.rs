//! Phase 2, second half: turn raw generated sequences into execution
//! scenarios.
//!
//! An [`ExecutionScenario`] is a sequence that (a) operates on exactly one
//! container instance, (b) ends with an invocation of the target method that
//! completes normally, and (c) replays without raising anywhere. The
//! normalizer produces scenarios from raw sequences in six steps, in this
//! order:
//!
//! 1. **Truncate** after the last successful target invocation; sequences
//!    with none are unusable.
//! 2. **Merge receivers**: re-target every statement, in program order, onto
//!    the first-constructed instance. Calls that pass another instance as an
//!    argument (`addAll(s2)` style) are dropped — their collection argument
//!    no longer exists after the merge. Merged sequences that fail to replay,
//!    or that lost their closing target call, are dropped and counted.
//! 3. **Specialize values**: replace variable arguments by the literal values
//!    they carried at runtime and strip redundant casts, so scenarios read as
//!    plain integer programs.
//! 4. **Window filter**: keep scenarios whose container holds between `lo`
//!    and `hi` elements (default 5–8) just before the target call.
//! 5. **Heterogeneity filter**: keep scenarios whose pre-target contents show
//!    at least `min(min_distinct, element_count)` distinct values
//!    (`min_distinct` 1 disables the filter).
//! 6. **De-duplicate** scenarios that are syntactically identical after
//!    canonical variable renaming; the first occurrence wins.
//!
//! An empty result is the NIL outcome: a report-worthy fact, not an error.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::subject::api::{ParamKind, RetValue, SubjectApi};
use crate::subject::interp::{exec_statement, replay, VarValue};
use crate::subject::lang::{Arg, Cast, Provenance, Sequence, Statement};

/// Tunable settings for the scenario filters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeOptions {
    /// Minimum pre-target element count (inclusive).
    pub window_lo: usize,
    /// Maximum pre-target element count (inclusive).
    pub window_hi: usize,
    /// Required distinct pre-target values, capped by the element count;
    /// 1 disables the heterogeneity filter.
    pub min_distinct: usize,
}

impl Default for NormalizeOptions {
    fn default() -> Self {
        NormalizeOptions {
            window_lo: 5,
            window_hi: 8,
            min_distinct: 3,
        }
    }
}

/// Why each input sequence did or did not survive normalization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeStats {
    /// Sequences fed into the pipeline.
    pub input: usize,
    /// Dropped: no successful target invocation to truncate after.
    pub no_usable_target: usize,
    /// Dropped during receiver merging (failed replay or lost the final
    /// target call).
    pub merge_dropped: usize,
    /// Dropped by the element-count window.
    pub window_dropped: usize,
    /// Dropped by the heterogeneity filter.
    pub heterogeneity_dropped: usize,
    /// Dropped as syntactic duplicates after canonical renaming.
    pub duplicates_dropped: usize,
    /// Scenarios emitted.
    pub emitted: usize,
}

/// A normalized, single-instance sequence ending in a successful target call.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionScenario {
    /// The canonicalized statement sequence.
    pub seq: Sequence,
    /// Target method, as an index into `api.methods`.
    pub target: usize,
    /// Container contents immediately before the final target call.
    pub pre_target_state: Vec<i64>,
    /// Element count immediately before the final target call.
    pub element_count: usize,
    /// Distinct values among the pre-target contents.
    pub distinct_values: usize,
}

/// Why a sequence is not a valid execution scenario.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioError {
    /// A scenario needs at least a construct and a target call.
    #[error("the sequence is empty")]
    Empty,
    /// The last statement must invoke the target method.
    #[error("the last statement does not invoke the target method")]
    LastNotTarget,
    /// Scenarios drive exactly one container instance.
    #[error("the sequence constructs {0} instances; scenarios construct exactly 1")]
    InstanceCount(usize),
    /// Every statement must execute, the target call included.
    #[error("replay raises {kind} at statement {index}")]
    ReplayRaises {
        /// Exception kind raised.
        kind: crate::subject::api::ExceptionKind,
        /// 0-based statement index that raised.
        index: usize,
    },
}

impl ExecutionScenario {
    /// Validate a sequence as a scenario and compute its observables. The
    /// stored sequence is canonicalized.
    pub fn from_sequence(
        seq: Sequence,
        api: &SubjectApi,
        target: usize,
    ) -> Result<Self, ScenarioError> {
        let Some(last) = seq.statements.last() else {
            return Err(ScenarioError::Empty);
        };
        match last {
            Statement::Invoke { method, .. } if *method == target => {}
            _ => return Err(ScenarioError::LastNotTarget),
        }
        let instances = seq.instance_count();
        if instances != 1 {
            return Err(ScenarioError::InstanceCount(instances));
        }
        let trace = replay(&seq, api);
        if let Some((index, kind)) = trace.aborted {
            return Err(ScenarioError::ReplayRaises { kind, index });
        }
        // Single instance: every step's receiver is that instance, so the
        // state before the final statement is the state after the one
        // preceding it.
        let n = seq.statements.len();
        let pre_target_state = if n >= 2 {
            trace.steps[n - 2].receiver_state_after.clone()
        } else {
            Vec::new()
        };
        let element_count = pre_target_state.len();
        let distinct_values = pre_target_state.iter().collect::<BTreeSet<_>>().len();
        Ok(ExecutionScenario {
            seq: seq.canonicalized(),
            target,
            pre_target_state,
            element_count,
            distinct_values,
        })
    }

    /// The scenario as statement text.
    pub fn to_text(&self, api: &SubjectApi) -> String {
        self.seq.to_text(api)
    }
}

/// Truncation failure: the sequence never successfully invokes the target.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("no successful target invocation to truncate after")]
pub struct NoUsableTarget;

/// Drop everything after the last target invocation that executed and
/// completed normally.
pub fn truncate_after_target(
    seq: &Sequence,
    api: &SubjectApi,
    target: usize,
) -> Result<Sequence, NoUsableTarget> {
    let trace = replay(seq, api);
    let last_ok = seq
        .statements
        .iter()
        .enumerate()
        .take(trace.executed())
        .rev()
        .find(|(i, stmt)| {
            matches!(stmt, Statement::Invoke { method, .. } if *method == target)
                && trace.steps[*i].outcome.is_ok()
        })
        .map(|(i, _)| i);
    match last_ok {
        Some(i) => Ok(Sequence {
            statements: seq.statements[..=i].to_vec(),
            provenance: Provenance::Transformed,
        }),
        None => Err(NoUsableTarget),
    }
}

/// Why a merged sequence was discarded.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum MergeDrop {
    /// The closing target call passed another instance as an argument and
    /// was dropped with it.
    #[error("merging dropped the final target invocation")]
    LostFinalTarget,
    /// The merged statements no longer replay to completion.
    #[error("the merged sequence raises on replay")]
    ReplayRaised,
}

/// Re-target every statement onto the first-constructed instance.
///
/// Statements are kept in program order; constructs of other instances are
/// removed, and so is any invocation that passes an instance as an argument
/// (after the merge there is no second instance to pass). Bindings are kept:
/// dropped invocations only ever bind booleans, which nothing can reference.
/// Single-instance input comes back unchanged.
///
/// The result must still replay to completion and still end with the target
/// invocation; otherwise it is reported as dropped.
pub fn merge_receivers(
    seq: &Sequence,
    api: &SubjectApi,
    target: usize,
) -> Result<Sequence, MergeDrop> {
    if seq.instance_count() <= 1 {
        return Ok(seq.clone());
    }
    let subjects: BTreeSet<&str> = seq
        .statements
        .iter()
        .filter_map(|s| match s {
            Statement::Construct { var } => Some(var.as_str()),
            Statement::Invoke { .. } => None,
        })
        .collect();
    let keep_var = seq
        .statements
        .iter()
        .find_map(|s| match s {
            Statement::Construct { var } => Some(var.clone()),
            Statement::Invoke { .. } => None,
        })
        .expect("instance_count > 1 implies a construct");

    let mut kept_construct = false;
    let mut statements = Vec::with_capacity(seq.statements.len());
    for stmt in &seq.statements {
        match stmt {
            Statement::Construct { .. } => {
                if !kept_construct {
                    statements.push(Statement::Construct {
                        var: keep_var.clone(),
                    });
                    kept_construct = true;
                }
            }
            Statement::Invoke {
                binding,
                receiver: _,
                method,
                args,
            } => {
                let passes_instance = args
                    .iter()
                    .any(|a| matches!(a, Arg::Var(name) if subjects.contains(name.as_str())));
                if passes_instance {
                    continue;
                }
                statements.push(Statement::Invoke {
                    binding: binding.clone(),
                    receiver: keep_var.clone(),
                    method: *method,
                    args: args.clone(),
                });
            }
        }
    }

    let ends_in_target =
        matches!(statements.last(), Some(Statement::Invoke { method, .. }) if *method == target);
    if !ends_in_target {
        return Err(MergeDrop::LostFinalTarget);
    }
    let merged = Sequence {
        statements,
        provenance: Provenance::Transformed,
    };
    if !replay(&merged, api).completed() {
        return Err(MergeDrop::ReplayRaised);
    }
    Ok(merged)
}

/// Replace variable arguments by the literal values they carried at runtime
/// and normalize casts: every argument becomes a plain integer or list
/// literal, and the only casts left are the ones overload resolution needs
/// (`remove((Object)5)` keeps its cast, `push((Object)1)` loses it).
///
/// Statements that replay never reaches are copied unchanged.
pub fn specialize_values(seq: &Sequence, api: &SubjectApi) -> Sequence {
    let mut vars: BTreeMap<String, VarValue> = BTreeMap::new();
    let mut live = true;
    let statements = seq
        .statements
        .iter()
        .map(|stmt| {
            let specialized = match stmt {
                Statement::Construct { .. } => stmt.clone(),
                Statement::Invoke {
                    binding,
                    receiver,
                    method,
                    args,
                } => {
                    let sig = &api.methods[*method];
                    let new_args: Vec<Arg> = args
                        .iter()
                        .enumerate()
                        .map(|(j, arg)| {
                            let required_cast = if sig.params[j] == ParamKind::Element
                                && sig.needs_element_cast[j]
                            {
                                Some(Cast::Object)
                            } else {
                                None
                            };
                            match arg {
                                Arg::Lit { value, .. } => Arg::Lit {
                                    value: *value,
                                    cast: required_cast,
                                },
                                Arg::ListLit(items) => Arg::ListLit(items.clone()),
                                Arg::Var(name) => match (live, vars.get(name)) {
                                    (true, Some(VarValue::Value(RetValue::Element(v)))) => {
                                        Arg::Lit {
                                            value: *v,
                                            cast: required_cast,
                                        }
                                    }
                                    (true, Some(VarValue::Value(RetValue::Int(v)))) => Arg::Lit {
                                        value: *v,
                                        cast: None,
                                    },
                                    (true, Some(VarValue::Value(RetValue::Collection(items)))) => {
                                        Arg::ListLit(items.clone())
                                    }
                                    (true, Some(VarValue::Subject(state))) => {
                                        Arg::ListLit(state.clone())
                                    }
                                    _ => arg.clone(),
                                },
                            }
                        })
                        .collect();
                    Statement::Invoke {
                        binding: binding.clone(),
                        receiver: receiver.clone(),
                        method: *method,
                        args: new_args,
                    }
                }
            };
            if live {
                // Advance the environment with the *original* statement; the
                // rewritten arguments denote the same runtime values.
                let record = exec_statement(api, stmt, &mut vars);
                if !record.outcome.is_ok() {
                    live = false;
                }
            }
            specialized
        })
        .collect();
    Sequence {
        statements,
        provenance: Provenance::Transformed,
    }
}

/// Pre-target element count of a single-instance sequence ending in a target
/// call; the scenario constructor computes and caches the same number.
pub fn element_count(seq: &Sequence, api: &SubjectApi) -> usize {
    assert_eq!(
        seq.instance_count(),
        1,
        "element counts are defined for single-instance sequences"
    );
    let trace = replay(seq, api);
    let n = seq.statements.len();
    if n >= 2 {
        trace
            .steps
            .get(n - 2)
            .map_or(0, |s| s.receiver_state_after.len())
    } else {
        0
    }
}

/// Keep scenarios whose pre-target element count lies in `[lo, hi]`.
pub fn filter_window(
    scenarios: Vec<ExecutionScenario>,
    lo: usize,
    hi: usize,
) -> Vec<ExecutionScenario> {
    scenarios
        .into_iter()
        .filter(|s| (lo..=hi).contains(&s.element_count))
        .collect()
}

/// Keep scenarios with at least `min(min_distinct, element_count)` distinct
/// pre-target values. `min_distinct` 1 keeps everything.
pub fn heterogeneity_filter(
    scenarios: Vec<ExecutionScenario>,
    min_distinct: usize,
) -> Vec<ExecutionScenario> {
    scenarios
        .into_iter()
        .filter(|s| s.distinct_values >= min_distinct.min(s.element_count))
        .collect()
}

/// Drop scenarios whose canonical text already appeared; first wins. Two
/// scenarios with the same calls in a different order are different texts and
/// both survive.
pub fn dedupe_syntactic(
    scenarios: Vec<ExecutionScenario>,
    api: &SubjectApi,
) -> Vec<ExecutionScenario> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    scenarios
        .into_iter()
        .filter(|s| seen.insert(s.to_text(api)))
        .collect()
}

/// Run the whole pipeline over raw sequences.
pub fn normalize_pipeline(
    seqs: &[Sequence],
    api: &SubjectApi,
    target: usize,
    opts: &NormalizeOptions,
) -> (Vec<ExecutionScenario>, NormalizeStats) {
    let mut stats = NormalizeStats {
        input: seqs.len(),
        ..NormalizeStats::default()
    };
    let mut scenarios = Vec::new();
    for seq in seqs {
        let truncated = match truncate_after_target(seq, api, target) {
            Ok(t) => t,
            Err(NoUsableTarget) => {
                stats.no_usable_target += 1;
                continue;
            }
        };
        let merged = match merge_receivers(&truncated, api, target) {
            Ok(m) => m,
            Err(_) => {
                stats.merge_dropped += 1;
                continue;
            }
        };
        let specialized = specialize_values(&merged, api);
        let scenario = ExecutionScenario::from_sequence(specialized, api, target)
            .expect("truncated and merged sequences satisfy the scenario invariants");
        scenarios.push(scenario);
    }

    let before = scenarios.len();
    let scenarios = filter_window(scenarios, opts.window_lo, opts.window_hi);
    stats.window_dropped = before - scenarios.len();

    let before = scenarios.len();
    let scenarios = heterogeneity_filter(scenarios, opts.min_distinct);
    stats.heterogeneity_dropped = before - scenarios.len();

    let before = scenarios.len();
    let scenarios = dedupe_syntactic(scenarios, api);
    stats.duplicates_dropped = before - scenarios.len();

    stats.emitted = scenarios.len();
    (scenarios, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::{allowed_indices, classify, Blacklist, ClassifyConfig, FilterMode};
    use crate::generator::{generate, keep_third_category, GenConfig};
    use crate::subject::api::stack_api;
    use crate::subject::interp::{fingerprint, LastOutcome};

    fn parse(text: &str) -> Sequence {
        Sequence::parse(text, &stack_api()).expect("test programs parse")
    }

    /// The worked example: three interleaved instances, a bulk call passing
    /// one instance into another, and a trailing call after the target.
    const RAW: &str = "\
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

    const NORMALIZED: &str = "\
v0 = new Stack()
v0.addElement(0)
v0.addElement(10)
v1 = v0.push(1)
v0.addElement(1)
v0.add(0, -1)
v2 = v0.pop()
";

    #[test]
    fn the_worked_example_normalizes_to_its_known_scenario() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        let (scenarios, stats) =
            normalize_pipeline(&[parse(RAW)], &api, target, &NormalizeOptions::default());
        assert_eq!(stats.emitted, 1);
        let scenario = &scenarios[0];
        assert_eq!(scenario.to_text(&api), NORMALIZED);
        assert_eq!(scenario.element_count, 5);
        assert_eq!(scenario.pre_target_state, vec![-1, 0, 10, 1, 1]);
        assert_eq!(scenario.distinct_values, 4);
        // The scenario still ends with pop returning the same element.
        let fp = fingerprint(&scenario.seq, &api);
        assert_eq!(fp.last, LastOutcome::Value(Some(RetValue::Element(1))));
    }

    #[test]
    fn truncation_stops_at_the_last_successful_target_call() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        let seq = parse("v0 = new Stack()\nv0.push(1)\nr0 = v0.pop()\nv0.push(2)\n");
        let truncated = truncate_after_target(&seq, &api, target).unwrap();
        assert_eq!(truncated.statements.len(), 3);

        // The final pop raises; the successful one before it is the cut point.
        let seq = parse("v0 = new Stack()\nv0.push(1)\nr0 = v0.pop()\nr1 = v0.pop()\n");
        let truncated = truncate_after_target(&seq, &api, target).unwrap();
        assert_eq!(truncated.statements.len(), 3);

        let seq = parse("v0 = new Stack()\nv0.push(1)\n");
        assert_eq!(
            truncate_after_target(&seq, &api, target),
            Err(NoUsableTarget)
        );

        let seq = parse("v0 = new Stack()\nr0 = v0.pop()\n");
        assert_eq!(
            truncate_after_target(&seq, &api, target),
            Err(NoUsableTarget)
        );
    }

    #[test]
    fn merging_a_single_instance_sequence_changes_nothing() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        let seq = parse("v0 = new Stack()\nv0.push(1)\nr0 = v0.pop()\n");
        assert_eq!(merge_receivers(&seq, &api, target), Ok(seq));
    }

    #[test]
    fn merging_drops_calls_that_pass_an_instance() {
        let api = stack_api();
        let target = api.find("push(Object)").unwrap();
        let seq = parse(
            "s0 = new Stack()\ns1 = new Stack()\ns1.addElement(3)\nb0 = s0.addAll(s1)\nr0 = s0.push(7)\n",
        );
        let merged = merge_receivers(&seq, &api, target).unwrap();
        assert_eq!(
            merged.to_text(&api),
            "s0 = new Stack()\ns0.addElement(3)\nr0 = s0.push(7)\n"
        );
    }

    #[test]
    fn merging_reports_a_lost_final_target() {
        let api = stack_api();
        let target = api.find("addAll(Collection)").unwrap();
        // The closing target call itself passes the second instance.
        let seq =
            parse("s0 = new Stack()\ns1 = new Stack()\ns1.addElement(3)\nb0 = s0.addAll(s1)\n");
        assert_eq!(
            merge_receivers(&seq, &api, target),
            Err(MergeDrop::LostFinalTarget)
        );
    }

    #[test]
    fn specialization_resolves_variables_and_normalizes_casts() {
        let api = stack_api();
        // r0 carries the runtime value 5; the redundant (Object) on push goes
        // away; the (Object) on remove stays because resolution needs it.
        let seq = parse(
            "v0 = new Stack()\nr0 = v0.push(5)\nv0.push((Object)1)\nv0.push(r0)\nb0 = v0.remove((Object)5)\nb1 = v0.remove((Integer)0)\n",
        );
        let specialized = specialize_values(&seq, &api);
        assert_eq!(
            specialized.to_text(&api),
            "v0 = new Stack()\nr0 = v0.push(5)\nv0.push(1)\nv0.push(5)\nb0 = v0.remove((Object)5)\nb1 = v0.remove(0)\n"
        );
    }

    #[test]
    fn specialization_is_idempotent_and_survives_a_round_trip() {
        let api = stack_api();
        let seq = parse(
            "v0 = new Stack()\nr0 = v0.push(5)\nv0.push(r0)\nv0.addAll([1, 2])\nb0 = v0.remove((Object)5)\n",
        );
        let once = specialize_values(&seq, &api);
        let twice = specialize_values(&once, &api);
        assert_eq!(once, twice);
        let reparsed = Sequence::parse(&once.to_text(&api), &api).unwrap();
        assert_eq!(
            specialize_values(&reparsed, &api).to_text(&api),
            once.to_text(&api)
        );
    }

    #[test]
    fn specialization_literalizes_instance_arguments_by_snapshot() {
        let api = stack_api();
        let seq = parse("s0 = new Stack()\ns1 = new Stack()\ns1.addElement(3)\nb0 = s0.addAll(s1)\ns1.addElement(4)\n");
        let specialized = specialize_values(&seq, &api);
        assert_eq!(
            specialized.to_text(&api),
            "s0 = new Stack()\ns1 = new Stack()\ns1.addElement(3)\nb0 = s0.addAll([3])\ns1.addElement(4)\n",
            "the argument is the contents at call time, not at the end"
        );
    }

    #[test]
    fn element_count_reads_the_state_before_the_final_call() {
        let api = stack_api();
        let seq = parse("v0 = new Stack()\nv0.addAll([1, 2, 3])\nv0.clear()\n");
        assert_eq!(
            element_count(&seq, &api),
            3,
            "the count precedes the target call"
        );
        let seq = parse("v0 = new Stack()\nr0 = v0.pop()\n");
        assert_eq!(element_count(&seq, &api), 0);
    }

    #[test]
    fn window_filter_is_inclusive_on_both_ends() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        let mk = |n: usize| {
            let mut text = String::from("v0 = new Stack()\n");
            for i in 0..n {
                text.push_str(&format!("v0.push({i})\n"));
            }
            text.push_str("r0 = v0.pop()\n");
            ExecutionScenario::from_sequence(parse(&text), &api, target).unwrap()
        };
        let all: Vec<ExecutionScenario> = (3..=9).map(mk).collect();
        let kept = filter_window(all, 5, 8);
        let counts: Vec<usize> = kept.iter().map(|s| s.element_count).collect();
        assert_eq!(counts, vec![5, 6, 7, 8]);
    }

    #[test]
    fn heterogeneity_keeps_mixed_contents_and_drops_monocultures() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        let mixed = ExecutionScenario::from_sequence(
            parse("v0 = new Stack()\nv0.addAll([-1, 0, 10, 1, 1])\nr0 = v0.pop()\n"),
            &api,
            target,
        )
        .unwrap();
        let uniform = ExecutionScenario::from_sequence(
            parse("v0 = new Stack()\nv0.addAll([5, 5, 5, 5, 5])\nr0 = v0.pop()\n"),
            &api,
            target,
        )
        .unwrap();
        let kept = heterogeneity_filter(vec![mixed.clone(), uniform.clone()], 3);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].distinct_values, 4);
        // min_distinct 1 disables the filter.
        let kept = heterogeneity_filter(vec![mixed, uniform], 1);
        assert_eq!(kept.len(), 2);
    }

    #[test]
    fn short_but_fully_distinct_contents_pass_the_capped_threshold() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        // Two elements, two distinct values: the requirement caps at the
        // element count, so this passes even with min_distinct 3.
        let tiny = ExecutionScenario::from_sequence(
            parse("v0 = new Stack()\nv0.addAll([4, 9])\nr0 = v0.pop()\n"),
            &api,
            target,
        )
        .unwrap();
        assert_eq!(heterogeneity_filter(vec![tiny], 3).len(), 1);
    }

    #[test]
    fn dedupe_compares_canonical_text_and_keeps_first() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        let a = parse("v0 = new Stack()\nv0.push(1)\nr0 = v0.pop()\n");
        let b = parse("box = new Stack()\nbox.push(1)\nresult = box.pop()\n");
        let c = parse("v0 = new Stack()\nv0.push(2)\nr0 = v0.pop()\n");
        let scenarios: Vec<ExecutionScenario> = [a, b, c]
            .into_iter()
            .map(|s| ExecutionScenario::from_sequence(s, &api, target).unwrap())
            .collect();
        let kept = dedupe_syntactic(scenarios, &api);
        assert_eq!(kept.len(), 2, "differently named duplicates collapse");
    }

    #[test]
    fn scenario_validation_rejects_each_broken_shape() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        let err = ExecutionScenario::from_sequence(
            Sequence {
                statements: vec![],
                provenance: Provenance::Parsed,
            },
            &api,
            target,
        )
        .unwrap_err();
        assert_eq!(err, ScenarioError::Empty);

        let err =
            ExecutionScenario::from_sequence(parse("v0 = new Stack()\nv0.push(1)\n"), &api, target)
                .unwrap_err();
        assert_eq!(err, ScenarioError::LastNotTarget);

        let err = ExecutionScenario::from_sequence(
            parse("v0 = new Stack()\nv1 = new Stack()\nv0.push(1)\nr0 = v0.pop()\n"),
            &api,
            target,
        )
        .unwrap_err();
        assert_eq!(err, ScenarioError::InstanceCount(2));

        let err = ExecutionScenario::from_sequence(
            parse("v0 = new Stack()\nr0 = v0.pop()\n"),
            &api,
            target,
        )
        .unwrap_err();
        assert!(matches!(err, ScenarioError::ReplayRaises { index: 1, .. }));
    }

    #[test]
    fn pipeline_counts_every_drop_and_is_idempotent() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        let blacklist = Blacklist::new(["remove", "clear", "retain", "pop", "setSize"]).unwrap();
        let report = classify(
            &api,
            target,
            &ClassifyConfig::new(FilterMode::Blacklist, blacklist, 0),
        );
        let allowed = allowed_indices(&api, &report);
        let raw = generate(&api, &allowed, target, &GenConfig::new(600, 11));
        let third = keep_third_category(raw, &api, target);
        let opts = NormalizeOptions::default();
        let (scenarios, stats) = normalize_pipeline(&third, &api, target, &opts);

        assert_eq!(stats.input, third.len());
        assert_eq!(
            stats.input,
            stats.no_usable_target
                + stats.merge_dropped
                + stats.window_dropped
                + stats.heterogeneity_dropped
                + stats.duplicates_dropped
                + stats.emitted,
            "every input is accounted for exactly once"
        );
        assert!(
            stats.emitted > 0,
            "a 600-sequence run yields at least one scenario"
        );

        for s in &scenarios {
            assert_eq!(s.seq.instance_count(), 1);
            assert!((5..=8).contains(&s.element_count));
            let revalidated =
                ExecutionScenario::from_sequence(s.seq.clone(), &api, target).unwrap();
            assert_eq!(&revalidated, s);
        }

        // Feeding the emitted scenarios back through changes nothing.
        let seqs: Vec<Sequence> = scenarios.iter().map(|s| s.seq.clone()).collect();
        let (again, restats) = normalize_pipeline(&seqs, &api, target, &opts);
        assert_eq!(restats.emitted, scenarios.len());
        let texts: Vec<String> = scenarios.iter().map(|s| s.to_text(&api)).collect();
        let retexts: Vec<String> = again.iter().map(|s| s.to_text(&api)).collect();
        assert_eq!(texts, retexts);
    }

    #[test]
    fn an_unsatisfiable_window_reports_nil_rather_than_failing() {
        let api = stack_api();
        let target = api.find("pop()").unwrap();
        let seq = parse("v0 = new Stack()\nv0.addAll([1, 2, 3, 4, 5])\nr0 = v0.pop()\n");
        let opts = NormalizeOptions {
            window_lo: 50,
            window_hi: 80,
            min_distinct: 3,
        };
        let (scenarios, stats) = normalize_pipeline(&[seq], &api, target, &opts);
        assert!(scenarios.is_empty());
        assert_eq!(stats.window_dropped, 1);
        assert_eq!(stats.emitted, 0);
    }
}
