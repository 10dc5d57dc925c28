//! The subject under test: a modeled integer container with a stack/vector
//! flavored public API, plus the small statement language used to drive it.
//!
//! * [`api`] — method signatures and execution semantics. The container state
//!   is a plain `Vec<i64>`; every method is a total, deterministic function of
//!   the state and its arguments.
//! * [`lang`] — the textual statement language (`v0 = new Stack()`,
//!   `v0.push(1)`, …): parsing, printing, and canonical variable renaming.
//! * [`interp`] — sequence replay, per-step traces, and state fingerprints
//!   used to compare behaviors.

pub mod api;
pub mod interp;
pub mod lang;

pub use api::{
    ArgValue, ExceptionKind, MethodSig, Outcome, ParamKind, RetKind, RetValue, SubjectApi,
};
pub use interp::{Fingerprint, LastOutcome, ReplayTrace, StepRecord};
pub use lang::{Arg, Cast, ParseError, Provenance, Sequence, Statement};
