//! Counterexample-guided search for equivalent bodies.
//!
//! The loop mirrors the classic synthesize/validate cycle. **Synthesis**
//! works in generations: it samples a batch of random candidate bodies,
//! keeps every one whose behavior matches the target on all test points
//! (initially one point per execution scenario: the container contents just
//! before the final target call, plus that call's argument values), and
//! returns one of the matches with the fewest calls — anti-bloat pressure on
//! length, a uniform draw among the distinct shortest matches standing in
//! for whichever individual a population would converge to. **Validation**
//! then hunts for a counterexample state on which the winner and the target
//! disagree. A counterexample is added to the
//! point set and the cycle repeats; a candidate that survives validation is
//! accepted as an equivalence and excluded from further sampling, and the
//! search continues for more.
//!
//! Search effort is metered in *steps*: a flat charge per sampled candidate
//! plus, for every point it is evaluated on, a charge that grows
//! quadratically with the container size — evaluating against big states is
//! expensive, which is what makes very large scenarios less productive under
//! a fixed budget. Each counterexample round also pays a restart charge:
//! the synthesis population has to re-converge against the grown point set,
//! which dominates everything else the loop does. The run ends when the step
//! budget is exhausted or after too many consecutive counterexample rounds.
//!
//! Candidate literals are seeded from the values observed in the test points
//! (plus `-1, 0, 1`), so scenarios with richer contents widen the space of
//! expressible bodies — and, symmetrically, value-poor scenarios leave the
//! sampler blind to exotic constants. Size arithmetic (`size() - k`) is
//! drawn only for scalar positions: element lists hold values, and index
//! expressions have no business inside them.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equiv::candidate::{
    behaviors_match, eval_candidate, CandArg, CandCall, Candidate, MatchPolicy, ScalarExpr,
};
use crate::normalizer::ExecutionScenario;
use crate::subject::api::{ArgValue, ParamKind, SubjectApi};
use crate::subject::interp::{exec_statement, resolve_arg};
use crate::subject::lang::Statement;

/// One behavioral probe: a starting state and argument values for the target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestPoint {
    /// Container contents before the target call.
    pub pre_state: Vec<i64>,
    /// The target invocation's argument values.
    pub args: Vec<ArgValue>,
}

/// Effort caps for one search run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudgets {
    /// Shared step budget for synthesis (sampling + point evaluation).
    pub synth_steps: u64,
    /// Candidates sampled per generation; the simplest point-matching
    /// candidate of a generation goes to validation.
    pub generation: usize,
    /// Flat step charge per sampled candidate.
    pub candidate_overhead: u64,
    /// Step charge per counterexample round (the synthesis population
    /// re-converges against the grown point set).
    pub restart_cost: u64,
    /// States tried per validation before a candidate is accepted.
    pub cex_states: usize,
    /// Consecutive counterexample rounds before the run gives up.
    pub max_rounds: u64,
}

impl Default for SearchBudgets {
    fn default() -> Self {
        SearchBudgets {
            synth_steps: 150_000,
            generation: 180,
            candidate_overhead: 48,
            restart_cost: 120_000,
            cex_states: 400,
            max_rounds: 8,
        }
    }
}

/// An accepted equivalence and the round it was accepted in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoundEquivalence {
    /// The accepted body.
    pub candidate: Candidate,
    /// 1-based count of synthesize/validate rounds since the previous
    /// acceptance: 1 means the first synthesized candidate survived
    /// validation outright.
    pub rounds: u64,
}

/// Everything one search run produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOutcome {
    /// Accepted equivalences in acceptance order.
    pub found: Vec<FoundEquivalence>,
    /// Counterexample rounds since the last acceptance when the run ended.
    pub trailing_rounds: u64,
    /// Counterexample points added during the run.
    pub points_added: usize,
}

impl SearchOutcome {
    /// Canonical texts of the accepted bodies.
    pub fn texts(&self, api: &SubjectApi) -> Vec<String> {
        self.found.iter().map(|f| f.candidate.text(api)).collect()
    }
}

/// Derive the test point an execution scenario contributes: its pre-target
/// contents and the concrete values of the final call's arguments.
pub fn test_point(api: &SubjectApi, scenario: &ExecutionScenario) -> TestPoint {
    let (last, prefix) = scenario
        .seq
        .statements
        .split_last()
        .expect("scenarios have at least two statements");
    let mut vars = BTreeMap::new();
    for stmt in prefix {
        exec_statement(api, stmt, &mut vars);
    }
    let Statement::Invoke { args, .. } = last else {
        unreachable!("scenarios end in an invocation");
    };
    TestPoint {
        pre_state: scenario.pre_target_state.clone(),
        args: args.iter().map(|a| resolve_arg(a, &vars)).collect(),
    }
}

/// Step cost of evaluating a body of `calls` calls against a state of
/// `state_len` elements.
fn eval_cost(calls: usize, state_len: usize) -> u64 {
    (1 + calls as u64) * (1 + state_len as u64).pow(2)
}

/// Literals the sampler may use: `-1, 0, 1` plus every value observed in the
/// point states and arguments.
fn literal_pool(points: &[TestPoint]) -> Vec<i64> {
    let mut pool: BTreeSet<i64> = [-1, 0, 1].into();
    for p in points {
        pool.extend(p.pre_state.iter().copied());
        for a in &p.args {
            match a {
                ArgValue::Scalar(v) => {
                    pool.insert(*v);
                }
                ArgValue::List(items) => pool.extend(items.iter().copied()),
            }
        }
    }
    pool.into_iter().collect()
}

/// Where a scalar expression is being drawn for: a scalar argument may be a
/// literal, size arithmetic, or a parameter reference; a list item holds a
/// value, so size arithmetic is not drawn there.
#[derive(Clone, Copy, PartialEq, Eq)]
enum ScalarPos {
    Arg,
    ListItem,
}

fn sample_scalar(
    rng: &mut ChaCha8Rng,
    pool: &[i64],
    scalar_params: &[usize],
    pos: ScalarPos,
) -> ScalarExpr {
    let r: f64 = rng.gen();
    match pos {
        ScalarPos::Arg if scalar_params.is_empty() => {
            // Renormalize the literal/size split when the target has no
            // scalar parameters to reference.
            if r < 0.5625 {
                ScalarExpr::Lit(pool[rng.gen_range(0..pool.len())])
            } else {
                ScalarExpr::SizeRel(rng.gen_range(0..=2))
            }
        }
        ScalarPos::Arg => {
            if r < 0.45 {
                ScalarExpr::Lit(pool[rng.gen_range(0..pool.len())])
            } else if r < 0.80 {
                ScalarExpr::SizeRel(rng.gen_range(0..=2))
            } else {
                ScalarExpr::Param(scalar_params[rng.gen_range(0..scalar_params.len())])
            }
        }
        ScalarPos::ListItem if scalar_params.is_empty() => {
            ScalarExpr::Lit(pool[rng.gen_range(0..pool.len())])
        }
        ScalarPos::ListItem => {
            // Same literal/parameter ratio as scalar arguments carry.
            if r < 0.69 {
                ScalarExpr::Lit(pool[rng.gen_range(0..pool.len())])
            } else {
                ScalarExpr::Param(scalar_params[rng.gen_range(0..scalar_params.len())])
            }
        }
    }
}

fn sample_candidate(
    api: &SubjectApi,
    palette: &[usize],
    pool: &[i64],
    scalar_params: &[usize],
    rng: &mut ChaCha8Rng,
) -> Candidate {
    let r: f64 = rng.gen();
    let len = if r < 0.85 {
        1
    } else if r < 0.95 {
        2
    } else {
        3
    };
    let calls = (0..len)
        .map(|_| {
            let method = palette[rng.gen_range(0..palette.len())];
            let args = api.methods[method]
                .params
                .iter()
                .map(|p| match p {
                    ParamKind::Element | ParamKind::Int => {
                        CandArg::Scalar(sample_scalar(rng, pool, scalar_params, ScalarPos::Arg))
                    }
                    ParamKind::Collection => {
                        let r: f64 = rng.gen();
                        let n = if r < 0.30 {
                            0
                        } else if r < 0.75 {
                            1
                        } else {
                            2
                        };
                        CandArg::List(
                            (0..n)
                                .map(|_| {
                                    sample_scalar(rng, pool, scalar_params, ScalarPos::ListItem)
                                })
                                .collect(),
                        )
                    }
                })
                .collect();
            CandCall { method, args }
        })
        .collect();
    Candidate { calls }
}

/// Sample generations of candidates until one matches the target on every
/// point, spending from `budget`; within a generation, a uniform draw among
/// the distinct matches with the fewest calls wins. Returns `None` when the
/// budget runs out, when previously accepted bodies (in `exclusions`) cover
/// every match, or — the signal guard — when every point has an empty
/// pre-state, which carries too little behavior to support any claim of
/// equivalence.
#[allow(clippy::too_many_arguments)]
pub fn synthesize_candidate(
    api: &SubjectApi,
    target: usize,
    points: &[TestPoint],
    exclusions: &BTreeSet<String>,
    budgets: &SearchBudgets,
    policy: MatchPolicy,
    budget: &mut i64,
    rng: &mut ChaCha8Rng,
) -> Option<Candidate> {
    if points.iter().all(|p| p.pre_state.is_empty()) {
        return None;
    }
    let palette: Vec<usize> = (0..api.methods.len()).filter(|&m| m != target).collect();
    let pool = literal_pool(points);
    let scalar_params: Vec<usize> = api.methods[target]
        .params
        .iter()
        .enumerate()
        .filter(|(_, p)| **p != ParamKind::Collection)
        .map(|(i, _)| i)
        .collect();
    // The target's behavior on each point is fixed; compute it once.
    let expected: Vec<(Vec<i64>, crate::subject::api::Outcome)> = points
        .iter()
        .map(|p| {
            let mut state = p.pre_state.clone();
            let out = api.apply(&api.methods[target], &mut state, &p.args);
            (state, out)
        })
        .collect();

    while *budget > 0 {
        // One generation. Anti-bloat pressure acts on call count; among the
        // distinct matches with the fewest calls, any individual may be the
        // one the population converged to, so one is drawn uniformly.
        let mut matches: BTreeMap<String, Candidate> = BTreeMap::new();
        let mut fewest_calls = usize::MAX;
        for _ in 0..budgets.generation {
            if *budget <= 0 {
                break;
            }
            *budget -= budgets.candidate_overhead as i64;
            let cand = sample_candidate(api, &palette, &pool, &scalar_params, rng);
            let text = cand.text(api);
            if exclusions.contains(&text) {
                continue;
            }
            let mut matched = true;
            for (point, (want_state, want_out)) in points.iter().zip(&expected) {
                *budget -= eval_cost(cand.calls.len(), point.pre_state.len()) as i64;
                let mut state = point.pre_state.clone();
                let out = eval_candidate(&cand, api, &mut state, &point.args);
                if !behaviors_match(policy, want_out, want_state, &out, &state) {
                    matched = false;
                    break;
                }
            }
            if matched {
                fewest_calls = fewest_calls.min(cand.calls.len());
                matches.entry(text).or_insert(cand);
            }
        }
        let shortest: Vec<&Candidate> = matches
            .values()
            .filter(|c| c.calls.len() == fewest_calls)
            .collect();
        if !shortest.is_empty() {
            return Some(shortest[rng.gen_range(0..shortest.len())].clone());
        }
    }
    None
}

fn cartesian(options: &[Vec<ArgValue>]) -> Vec<Vec<ArgValue>> {
    let mut tuples = vec![Vec::new()];
    for opts in options {
        let mut next = Vec::new();
        for tuple in &tuples {
            for opt in opts {
                let mut t = tuple.clone();
                t.push(opt.clone());
                next.push(t);
            }
        }
        tuples = next;
    }
    tuples
}

/// Values used when validation invents states and arguments at random.
const VALIDATION_PALETTE: [i64; 10] = [-1, 0, 1, 2, 3, 5, 7, 10, 42, 100];

/// Hunt for a state and argument tuple on which the candidate's behavior
/// differs from the target's: first every small state over `{-1, 0, 1}` with
/// pool-valued arguments, then randomly grown states, up to `cex_states`
/// trials in total. `None` means the candidate survived validation.
pub fn find_counterexample(
    api: &SubjectApi,
    target: usize,
    cand: &Candidate,
    budgets: &SearchBudgets,
    policy: MatchPolicy,
    rng: &mut ChaCha8Rng,
) -> Option<TestPoint> {
    let mismatch = |state: &[i64], args: &[ArgValue]| -> bool {
        let mut t_state = state.to_vec();
        let t_out = api.apply(&api.methods[target], &mut t_state, args);
        let mut c_state = state.to_vec();
        let c_out = eval_candidate(cand, api, &mut c_state, args);
        !behaviors_match(policy, &t_out, &t_state, &c_out, &c_state)
    };

    let mut trials = 0usize;

    // Systematic phase: all states of length 0..=3 over {-1, 0, 1}.
    let mut states = vec![Vec::new()];
    let mut frontier = vec![Vec::<i64>::new()];
    for _ in 0..3 {
        let mut next = Vec::new();
        for s in &frontier {
            for v in [-1i64, 0, 1] {
                let mut grown = s.clone();
                grown.push(v);
                next.push(grown);
            }
        }
        states.extend(next.iter().cloned());
        frontier = next;
    }
    let arg_options: Vec<Vec<ArgValue>> = api.methods[target]
        .params
        .iter()
        .map(|p| match p {
            ParamKind::Element | ParamKind::Int => {
                vec![
                    ArgValue::Scalar(-1),
                    ArgValue::Scalar(0),
                    ArgValue::Scalar(1),
                ]
            }
            ParamKind::Collection => vec![
                ArgValue::List(vec![]),
                ArgValue::List(vec![-1]),
                ArgValue::List(vec![0, 1]),
            ],
        })
        .collect();
    for state in &states {
        for args in cartesian(&arg_options) {
            if trials >= budgets.cex_states {
                break;
            }
            trials += 1;
            if mismatch(state, &args) {
                return Some(TestPoint {
                    pre_state: state.clone(),
                    args,
                });
            }
        }
    }

    // Random phase: larger states and argument values, half drawn from the
    // state itself to probe value coincidences.
    while trials < budgets.cex_states {
        trials += 1;
        let len = rng.gen_range(0..=8);
        let state: Vec<i64> = (0..len)
            .map(|_| VALIDATION_PALETTE[rng.gen_range(0..VALIDATION_PALETTE.len())])
            .collect();
        let args: Vec<ArgValue> = api.methods[target]
            .params
            .iter()
            .map(|p| match p {
                ParamKind::Element | ParamKind::Int => {
                    let v = if !state.is_empty() && rng.gen_bool(0.5) {
                        state[rng.gen_range(0..state.len())]
                    } else {
                        VALIDATION_PALETTE[rng.gen_range(0..VALIDATION_PALETTE.len())]
                    };
                    ArgValue::Scalar(v)
                }
                ParamKind::Collection => {
                    let n = rng.gen_range(0..=2);
                    ArgValue::List(
                        (0..n)
                            .map(|_| VALIDATION_PALETTE[rng.gen_range(0..VALIDATION_PALETTE.len())])
                            .collect(),
                    )
                }
            })
            .collect();
        if mismatch(&state, &args) {
            return Some(TestPoint {
                pre_state: state,
                args,
            });
        }
    }
    None
}

/// Run the full synthesize/validate loop against explicit test points.
pub fn search_equivalences_from_points(
    api: &SubjectApi,
    target: usize,
    mut points: Vec<TestPoint>,
    budgets: &SearchBudgets,
    policy: MatchPolicy,
    seed: u64,
) -> SearchOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut budget = budgets.synth_steps as i64;
    let mut exclusions: BTreeSet<String> = BTreeSet::new();
    let mut found = Vec::new();
    let mut rounds_since_accept = 0u64;
    let mut points_added = 0usize;

    while let Some(cand) = synthesize_candidate(
        api,
        target,
        &points,
        &exclusions,
        budgets,
        policy,
        &mut budget,
        &mut rng,
    ) {
        match find_counterexample(api, target, &cand, budgets, policy, &mut rng) {
            Some(cex) => {
                points.push(cex);
                points_added += 1;
                rounds_since_accept += 1;
                budget -= budgets.restart_cost as i64;
                if rounds_since_accept >= budgets.max_rounds {
                    break;
                }
            }
            None => {
                exclusions.insert(cand.text(api));
                found.push(FoundEquivalence {
                    candidate: cand,
                    rounds: rounds_since_accept + 1,
                });
                rounds_since_accept = 0;
            }
        }
    }
    SearchOutcome {
        found,
        trailing_rounds: rounds_since_accept,
        points_added,
    }
}

/// Run the loop against the points derived from a set of execution scenarios.
pub fn search_equivalences(
    api: &SubjectApi,
    target: usize,
    scenarios: &[ExecutionScenario],
    budgets: &SearchBudgets,
    policy: MatchPolicy,
    seed: u64,
) -> SearchOutcome {
    let points = scenarios.iter().map(|s| test_point(api, s)).collect();
    search_equivalences_from_points(api, target, points, budgets, policy, seed)
}
