//! Behavioral-equivalence synthesis for subject-API methods.
//!
//! Given a target method and a handful of test points (container state +
//! argument values, typically taken from execution scenarios), this module
//! searches for *equivalent bodies*: short call sequences over the rest of
//! the API that are behaviorally indistinguishable from the target. The
//! pieces:
//!
//! * [`candidate`] — the candidate body language (parse, print, evaluate),
//!   behavioral matching policies, and an exhaustive small-state equivalence
//!   checker used as the final arbiter in scoring,
//! * [`search`] — the budgeted synthesize/validate loop that proposes random
//!   bodies, confirms them on the points, and grows the point set with
//!   counterexamples,
//! * [`score`] — ground-truth files and the metrics (per-run averages,
//!   pooled precision, recall, named-entry discovery round) plus the
//!   graph-size sweep.

pub mod candidate;
pub mod score;
pub mod search;

pub use candidate::{
    behaviors_match, eval_candidate, exhaustive_counterexample, CandArg, CandCall, Candidate,
    CandidateError, MatchPolicy, ScalarExpr,
};
pub use score::{
    score, sweep_graph_size, sweep_point, EquivMetrics, GroundTruth, SweepReport, SweepRow,
    TruthError, ValidatedTruth, SWEEP_PALETTE,
};
pub use search::{
    find_counterexample, search_equivalences, search_equivalences_from_points,
    synthesize_candidate, test_point, FoundEquivalence, SearchBudgets, SearchOutcome, TestPoint,
};
