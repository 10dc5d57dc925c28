//! Sequence replay and behavior fingerprints.
//!
//! Replay executes a sequence statement by statement against fresh container
//! instances. A raising statement *is* recorded — with the receiver left
//! unchanged, as the API guarantees — and ends the replay; statements after
//! it never execute. Replay is total and deterministic: the same sequence
//! always produces the same trace.
//!
//! A [`Fingerprint`] summarizes everything an external observer can see of a
//! single-instance sequence: the final container contents (as
//! `[size, element 0, element 1, …]`) plus the result of the final executed
//! statement — a return value or an exception kind.

use std::collections::BTreeMap;

use super::api::{ArgValue, ExceptionKind, Outcome, RetValue, SubjectApi};
use super::lang::{Arg, Sequence, Statement};

/// Runtime contents of one bound variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarValue {
    /// A live container instance.
    Subject(Vec<i64>),
    /// A bound method result.
    Value(RetValue),
}

/// Record of one executed statement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepRecord {
    /// What the statement's call produced. Constructs record `Ok(None)`.
    pub outcome: Outcome,
    /// Contents of the statement's receiver (or of the fresh instance, for a
    /// construct) immediately after the statement.
    pub receiver_state_after: Vec<i64>,
}

/// The complete result of replaying a sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayTrace {
    /// One record per executed statement, in program order.
    pub steps: Vec<StepRecord>,
    /// Set when replay ended early: index of the raising statement and the
    /// exception kind. The raising statement has the last entry in `steps`.
    pub aborted: Option<(usize, ExceptionKind)>,
    /// Every variable's contents after the last executed statement.
    pub final_vars: BTreeMap<String, VarValue>,
}

impl ReplayTrace {
    /// Number of statements that actually executed.
    pub fn executed(&self) -> usize {
        self.steps.len()
    }

    /// True when every statement executed without raising.
    pub fn completed(&self) -> bool {
        self.aborted.is_none()
    }

    /// Final contents of the variable, if it is a container instance.
    pub fn subject_state(&self, var: &str) -> Option<&Vec<i64>> {
        match self.final_vars.get(var) {
            Some(VarValue::Subject(state)) => Some(state),
            _ => None,
        }
    }
}

/// Execute one statement against a live variable environment, binding any
/// variable the statement introduces. Used by whole-sequence replay and by
/// the generator, which executes statements as it appends them.
pub(crate) fn exec_statement(
    api: &SubjectApi,
    stmt: &Statement,
    vars: &mut BTreeMap<String, VarValue>,
) -> StepRecord {
    match stmt {
        Statement::Construct { var } => {
            vars.insert(var.clone(), VarValue::Subject(Vec::new()));
            StepRecord {
                outcome: Outcome::Ok(None),
                receiver_state_after: Vec::new(),
            }
        }
        Statement::Invoke {
            binding,
            receiver,
            method,
            args,
        } => {
            // Arguments are resolved to value snapshots first, so a call
            // like `s.addAll(s)` sees the receiver's pre-call contents.
            let arg_values: Vec<ArgValue> = args.iter().map(|a| resolve_arg(a, vars)).collect();
            let sig = &api.methods[*method];
            let state = match vars.get_mut(receiver) {
                Some(VarValue::Subject(state)) => state,
                _ => unreachable!("parser guarantees subject receivers"),
            };
            let outcome = api.apply(sig, state, &arg_values);
            let record = StepRecord {
                outcome: outcome.clone(),
                receiver_state_after: state.clone(),
            };
            if let Outcome::Ok(value) = outcome {
                if let Some(name) = binding {
                    let value = value.expect("bindings to void methods are rejected at parse");
                    vars.insert(name.clone(), VarValue::Value(value));
                }
            }
            record
        }
    }
}

/// Execute the sequence from scratch and record what happened.
pub fn replay(seq: &Sequence, api: &SubjectApi) -> ReplayTrace {
    let mut vars: BTreeMap<String, VarValue> = BTreeMap::new();
    let mut steps = Vec::with_capacity(seq.statements.len());
    let mut aborted = None;

    for (index, stmt) in seq.statements.iter().enumerate() {
        let record = exec_statement(api, stmt, &mut vars);
        let raised = record.outcome.raised();
        steps.push(record);
        if let Some(kind) = raised {
            aborted = Some((index, kind));
            break;
        }
    }
    ReplayTrace {
        steps,
        aborted,
        final_vars: vars,
    }
}

pub(crate) fn resolve_arg(arg: &Arg, vars: &BTreeMap<String, VarValue>) -> ArgValue {
    match arg {
        Arg::Lit { value, .. } => ArgValue::Scalar(*value),
        Arg::ListLit(items) => ArgValue::List(items.clone()),
        Arg::Var(name) => match vars.get(name) {
            Some(VarValue::Subject(state)) => ArgValue::List(state.clone()),
            Some(VarValue::Value(RetValue::Element(v)))
            | Some(VarValue::Value(RetValue::Int(v))) => ArgValue::Scalar(*v),
            Some(VarValue::Value(RetValue::Collection(items))) => ArgValue::List(items.clone()),
            _ => unreachable!("parser guarantees bound, kind-correct arguments"),
        },
    }
}

/// The last thing a replay produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LastOutcome {
    /// The final executed statement returned this value (`None` for void).
    Value(Option<RetValue>),
    /// The final executed statement raised.
    Raised(ExceptionKind),
}

/// Everything an external observer can see after running a single-instance
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    /// `[size, element 0, element 1, …]` of the instance's final contents.
    pub observable: Vec<i64>,
    /// Result of the final executed statement.
    pub last: LastOutcome,
}

/// The observable projection of a raw container state.
pub fn observable_of(state: &[i64]) -> Vec<i64> {
    let mut v = Vec::with_capacity(state.len() + 1);
    v.push(state.len() as i64);
    v.extend_from_slice(state);
    v
}

/// Fingerprint a sequence that operates on exactly one container instance.
///
/// Panics if the sequence constructs zero or several instances; callers
/// fingerprint only normalized, single-instance scenarios.
pub fn fingerprint(seq: &Sequence, api: &SubjectApi) -> Fingerprint {
    assert_eq!(
        seq.instance_count(),
        1,
        "fingerprint requires a single-instance sequence"
    );
    let trace = replay(seq, api);
    let state = trace
        .final_vars
        .values()
        .find_map(|v| match v {
            VarValue::Subject(state) => Some(state.clone()),
            VarValue::Value(_) => None,
        })
        .expect("single-instance sequence has a subject variable");
    let last = match trace.aborted {
        Some((_, kind)) => LastOutcome::Raised(kind),
        None => match trace.steps.last() {
            Some(step) => match &step.outcome {
                Outcome::Ok(v) => LastOutcome::Value(v.clone()),
                Outcome::Raised(_) => unreachable!("raised steps set `aborted`"),
            },
            None => LastOutcome::Value(None),
        },
    };
    Fingerprint {
        observable: observable_of(&state),
        last,
    }
}

/// Size of the object graph reachable from a container state: the container
/// itself plus one node per element.
pub fn graph_size(state: &[i64]) -> u64 {
    1 + state.len() as u64
}
