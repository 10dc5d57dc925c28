//! Phase 2, first half: feedback-directed random sequence generation.
//!
//! Sequences are built one statement at a time and *executed as they grow*:
//! a statement is only appended once its replay outcome is known, so every
//! emitted sequence is guaranteed to execute all statements — except possibly
//! the last, because a raising statement is kept and terminates its sequence,
//! which is emitted as-is. That preserves the raw material for the
//! "ends with the target raising" category instead of discarding it.
//!
//! Each sequence grows by a uniformly chosen action per step: extend a random
//! live instance with a random allowed call, construct another instance (up
//! to a cap), or stop. When a sequence reaches its natural end without
//! raising, a biased coin (`target_bias`, default 0.5) decides whether to
//! close it with an invocation of the target method; sequences that never
//! invoke the target are still emitted, because the category split is itself
//! a reported distribution.
//!
//! Every categorized sequence falls into exactly one class, and only the
//! third is worth normalizing:
//!
//! 1. [`SequenceCategory::NoTarget`] — the target is never invoked.
//! 2. [`SequenceCategory::TargetRaises`] — the last target invocation raises
//!    (or never gets to execute).
//! 3. [`SequenceCategory::TargetNormal`] — the last target invocation
//!    completes, so the sequence witnesses a successful target call.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::subject::api::{ParamKind, SubjectApi};
use crate::subject::interp::{exec_statement, VarValue};
use crate::subject::lang::{Arg, Cast, Provenance, Sequence, Statement};

/// Settings for one generation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    /// Number of sequences to generate.
    pub budget: usize,
    /// Maximum statements per sequence, constructs included.
    pub max_length: usize,
    /// Literal values sampled for element arguments and list literals.
    pub pool: Vec<i64>,
    /// Maximum container instances per sequence.
    pub max_receivers: usize,
    /// Probability of closing a naturally ended sequence with a target call.
    pub target_bias: f64,
    /// Seed; equal configurations generate byte-identical sequences.
    pub seed: u64,
}

impl GenConfig {
    /// Standard settings: sequences up to 12 statements over up to 3
    /// instances, a small heterogeneous literal pool, and an even coin for
    /// the closing target call.
    pub fn new(budget: usize, seed: u64) -> Self {
        GenConfig {
            budget,
            max_length: 12,
            pool: vec![-1, 0, 1, 10, 100, 7, 42],
            max_receivers: 3,
            target_bias: 0.5,
            seed,
        }
    }

    /// Check the settings make sense.
    pub fn validate(&self) -> Result<(), GenConfigError> {
        if self.budget < 1 {
            return Err(GenConfigError::BudgetTooSmall);
        }
        if self.max_length < 2 {
            return Err(GenConfigError::MaxLengthTooSmall);
        }
        if self.pool.is_empty() {
            return Err(GenConfigError::EmptyPool);
        }
        if self.max_receivers < 1 {
            return Err(GenConfigError::NoReceivers);
        }
        if !(0.0..=1.0).contains(&self.target_bias) {
            return Err(GenConfigError::BiasOutOfRange(self.target_bias));
        }
        Ok(())
    }
}

/// A nonsensical generation setting.
#[derive(Debug, Error, PartialEq)]
pub enum GenConfigError {
    /// At least one sequence must be requested.
    #[error("budget must be at least 1")]
    BudgetTooSmall,
    /// One statement can never reach a target invocation after a construct.
    #[error("max-length must be at least 2")]
    MaxLengthTooSmall,
    /// Element arguments need something to sample from.
    #[error("the literal pool must not be empty")]
    EmptyPool,
    /// Sequences operate on at least one instance.
    #[error("max-receivers must be at least 1")]
    NoReceivers,
    /// A probability lives in [0, 1].
    #[error("target-bias {0} is not a probability")]
    BiasOutOfRange(f64),
}

/// Which of the three classes a sequence falls into, relative to a target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceCategory {
    /// No statement invokes the target.
    NoTarget,
    /// The last target invocation raises, or replay never reaches it.
    TargetRaises,
    /// The last target invocation executes and completes normally.
    TargetNormal,
}

/// Generate `cfg.budget` sequences over the allowed methods.
///
/// `allowed` and `target` are indices into `api.methods`; the allowed list
/// must contain the target (the classifier guarantees this). Generation is
/// deterministic: equal inputs yield equal sequences, byte for byte.
pub fn generate(
    api: &SubjectApi,
    allowed: &[usize],
    target: usize,
    cfg: &GenConfig,
) -> Vec<Sequence> {
    cfg.validate()
        .expect("validated by callers before generation");
    assert!(
        allowed.contains(&target),
        "the allowed list always retains the target"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.budget)
        .map(|_| generate_one(api, allowed, target, cfg, &mut rng))
        .collect()
}

fn generate_one(
    api: &SubjectApi,
    allowed: &[usize],
    target: usize,
    cfg: &GenConfig,
    rng: &mut ChaCha8Rng,
) -> Sequence {
    let mut builder = Builder {
        api,
        pool: &cfg.pool,
        statements: Vec::new(),
        vars: BTreeMap::new(),
        subjects: Vec::new(),
        element_vars: Vec::new(),
        next_var: 0,
    };
    builder.construct(rng);

    // Grow while leaving one slot for the closing target invocation.
    let mut raised = false;
    while builder.statements.len() < cfg.max_length - 1 {
        let can_construct = builder.subjects.len() < cfg.max_receivers;
        let action = rng.gen_range(0..if can_construct { 3 } else { 2 });
        match action {
            0 => break, // stop: the sequence ends naturally
            1 => {
                let method = allowed[rng.gen_range(0..allowed.len())];
                if builder.invoke(method, rng).is_err() {
                    raised = true;
                    break; // a raising statement terminates the sequence
                }
            }
            _ => builder.construct(rng),
        }
    }

    if !raised && builder.statements.len() < cfg.max_length && rng.gen_bool(cfg.target_bias) {
        let _ = builder.invoke(target, rng);
    }

    Sequence {
        statements: builder.statements,
        provenance: Provenance::Generated { seed: cfg.seed },
    }
}

/// Incremental sequence construction with live execution state.
struct Builder<'a> {
    api: &'a SubjectApi,
    pool: &'a [i64],
    statements: Vec<Statement>,
    vars: BTreeMap<String, VarValue>,
    subjects: Vec<String>,
    element_vars: Vec<String>,
    next_var: usize,
}

impl Builder<'_> {
    fn fresh_var(&mut self) -> String {
        let name = format!("v{}", self.next_var);
        self.next_var += 1;
        name
    }

    fn construct(&mut self, _rng: &mut ChaCha8Rng) {
        let var = self.fresh_var();
        let stmt = Statement::Construct { var: var.clone() };
        exec_statement(self.api, &stmt, &mut self.vars);
        self.statements.push(stmt);
        self.subjects.push(var);
    }

    /// Append one invocation of `method` on a random live instance. Returns
    /// `Err(())` when the call raised, which terminates the sequence.
    fn invoke(&mut self, method: usize, rng: &mut ChaCha8Rng) -> Result<(), ()> {
        let receiver = self.subjects[rng.gen_range(0..self.subjects.len())].clone();
        let receiver_len = match &self.vars[&receiver] {
            VarValue::Subject(state) => state.len() as i64,
            VarValue::Value(_) => unreachable!("subjects list holds only instances"),
        };
        let sig = &self.api.methods[method];
        let args: Vec<Arg> = sig
            .params
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                self.sample_arg(p, sig.needs_element_cast[j], receiver_len, &receiver, rng)
            })
            .collect();
        let binding = if sig.ret == crate::subject::api::RetKind::None {
            None
        } else {
            Some(self.fresh_var())
        };
        let stmt = Statement::Invoke {
            binding: binding.clone(),
            receiver,
            method,
            args,
        };
        let record = exec_statement(self.api, &stmt, &mut self.vars);
        self.statements.push(stmt);
        if record.outcome.is_ok() {
            if let Some(name) = binding {
                if matches!(
                    self.vars.get(&name),
                    Some(VarValue::Value(crate::subject::api::RetValue::Element(_)))
                ) {
                    self.element_vars.push(name);
                }
            }
            Ok(())
        } else {
            Err(())
        }
    }

    fn sample_arg(
        &self,
        param: ParamKind,
        needs_cast: bool,
        receiver_len: i64,
        receiver: &str,
        rng: &mut ChaCha8Rng,
    ) -> Arg {
        match param {
            ParamKind::Element => {
                // Mostly pool literals; sometimes reuse an element-valued
                // variable, which later normalization resolves to a literal.
                if !self.element_vars.is_empty() && rng.gen_bool(0.15) {
                    Arg::Var(self.element_vars[rng.gen_range(0..self.element_vars.len())].clone())
                } else {
                    let value = self.pool[rng.gen_range(0..self.pool.len())];
                    let cast = if needs_cast { Some(Cast::Object) } else { None };
                    Arg::Lit { value, cast }
                }
            }
            // Positions within (or just at the end of) the receiver: valid
            // for insertions, and only occasionally out of range for
            // positional reads and writes, so raises stay a minority.
            ParamKind::Int => Arg::Lit {
                value: rng.gen_range(0..=receiver_len),
                cast: None,
            },
            ParamKind::Collection => {
                // Sometimes pass a *different* live instance instead of a
                // list literal; receiver merging later drops such calls.
                let others: Vec<&String> = self
                    .subjects
                    .iter()
                    .filter(|s| s.as_str() != receiver)
                    .collect();
                if !others.is_empty() && rng.gen_bool(0.25) {
                    Arg::Var(others[rng.gen_range(0..others.len())].clone())
                } else {
                    let n = rng.gen_range(0..=3usize);
                    Arg::ListLit(
                        (0..n)
                            .map(|_| self.pool[rng.gen_range(0..self.pool.len())])
                            .collect(),
                    )
                }
            }
        }
    }
}

/// Classify a sequence relative to a target method (an index into
/// `api.methods`).
pub fn categorize(seq: &Sequence, api: &SubjectApi, target: usize) -> SequenceCategory {
    let invocations = seq.invocations_of(target);
    let Some(&last) = invocations.last() else {
        return SequenceCategory::NoTarget;
    };
    let trace = crate::subject::interp::replay(seq, api);
    if last >= trace.executed() {
        // Replay aborted before the last target invocation could run, so the
        // sequence never witnesses a successful final target call.
        return SequenceCategory::TargetRaises;
    }
    match trace.aborted {
        Some((index, _)) if index == last => SequenceCategory::TargetRaises,
        _ => SequenceCategory::TargetNormal,
    }
}

/// Keep only the sequences whose last target invocation completes normally.
pub fn keep_third_category(seqs: Vec<Sequence>, api: &SubjectApi, target: usize) -> Vec<Sequence> {
    seqs.into_iter()
        .filter(|s| categorize(s, api, target) == SequenceCategory::TargetNormal)
        .collect()
}
