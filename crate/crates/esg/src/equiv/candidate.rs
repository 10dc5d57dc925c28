//! The candidate language for equivalent-sequence synthesis.
//!
//! A [`Candidate`] is a short body — at most a few calls on an implicit
//! receiver — proposed as behaviorally equivalent to a single invocation of
//! the target method. Arguments are scalar expressions over the target's own
//! parameters (`x0`, `x1`, …), integer literals, and the receiver-relative
//! form `size() - k`, plus list literals of those. Candidates construct no
//! fresh instances and never call the target method itself.
//!
//! Equivalence is judged observationally by [`behaviors_match`]: run the
//! target and the candidate from the same state with the same parameter
//! values, then compare final contents and outcomes. Exceptions must agree in
//! kind; return values are compared exactly under the strict policy, and only
//! when both sides return the same kind of value under the relaxed default
//! (so a `push` returning its argument can still match an `add` returning a
//! boolean).

use thiserror::Error;

use crate::subject::api::{ArgValue, Outcome, ParamKind, SubjectApi};
use crate::subject::lang::Cast;

/// A scalar argument expression inside a candidate body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScalarExpr {
    /// An integer literal.
    Lit(i64),
    /// The target invocation's `i`-th argument (`x{i}`); scalar
    /// parameters only.
    Param(usize),
    /// The receiver's current size minus a constant: `size() - k`
    /// (`size()` when `k` is 0), evaluated at each call.
    SizeRel(u32),
}

impl ScalarExpr {
    /// Evaluate against the receiver's current length and the target's
    /// argument values.
    fn eval(&self, state_len: usize, params: &[ArgValue]) -> i64 {
        match self {
            ScalarExpr::Lit(v) => *v,
            ScalarExpr::Param(i) => match &params[*i] {
                ArgValue::Scalar(v) => *v,
                ArgValue::List(_) => {
                    unreachable!("parsing rejects collection parameters in scalar position")
                }
            },
            ScalarExpr::SizeRel(k) => state_len as i64 - i64::from(*k),
        }
    }

    fn text(&self) -> String {
        match self {
            ScalarExpr::Lit(v) => v.to_string(),
            ScalarExpr::Param(i) => format!("x{i}"),
            ScalarExpr::SizeRel(0) => "size()".to_string(),
            ScalarExpr::SizeRel(k) => format!("size() - {k}"),
        }
    }
}

/// One argument of a candidate call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CandArg {
    /// A scalar expression, bound to an element or index parameter.
    Scalar(ScalarExpr),
    /// A list of scalar expressions, bound to a collection parameter.
    List(Vec<ScalarExpr>),
}

/// One call in a candidate body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandCall {
    /// Index into the subject's method table.
    pub method: usize,
    /// Arguments, one per parameter.
    pub args: Vec<CandArg>,
}

/// A candidate body: zero or more calls on the implicit receiver.
///
/// The empty body is the do-nothing candidate; it is expressible (and useful
/// as a false-positive probe in tests) but never sampled by the search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    /// Calls in execution order.
    pub calls: Vec<CandCall>,
}

/// Why a candidate body failed to parse.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CandidateError {
    /// Malformed text at the given column (1-based, per call segment).
    #[error("syntax error at column {col}")]
    Syntax {
        /// 1-based column within the offending call.
        col: usize,
    },
    /// No method of this simple name exists.
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    /// No overload of the name takes this many arguments.
    #[error("`{name}` does not take {given} argument(s)")]
    Arity {
        /// Simple method name.
        name: String,
        /// Number of arguments written.
        given: usize,
    },
    /// An argument's shape fits no overload.
    #[error("argument {position} of `{name}` has the wrong kind")]
    Kind {
        /// Simple method name.
        name: String,
        /// 0-based argument position.
        position: usize,
    },
    /// Several overloads fit equally well; a cast is needed.
    #[error("call to `{0}` is ambiguous; cast the argument")]
    Ambiguous(String),
    /// `x{i}` does not name a scalar parameter of the target.
    #[error("`x{0}` does not name a scalar parameter of the target")]
    UnknownParam(usize),
    /// Candidate bodies may not invoke the target method.
    #[error("candidate bodies may not call the target method")]
    SelfCall,
}

/// A parsed argument before overload resolution.
enum RawArg {
    Scalar {
        expr: ScalarExpr,
        cast: Option<Cast>,
    },
    List(Vec<ScalarExpr>),
}

struct Lex {
    chars: Vec<char>,
    pos: usize,
}

impl Lex {
    fn new(text: &str) -> Self {
        Lex {
            chars: text.chars().collect(),
            pos: 0,
        }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.get(self.pos), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), CandidateError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(CandidateError::Syntax { col: self.col() })
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.chars.get(self.pos), Some(c) if c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(self.chars[start..self.pos].iter().collect())
        }
    }

    fn digits(&mut self) -> Option<u64> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.chars.get(self.pos), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            self.chars[start..self.pos]
                .iter()
                .collect::<String>()
                .parse()
                .ok()
        }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }
}

impl Candidate {
    /// The do-nothing candidate.
    pub fn empty() -> Self {
        Candidate { calls: Vec::new() }
    }

    /// Parse a body like `removeElementAt(0); push(x0)` against the target
    /// method's parameters. Whitespace is free; the empty string is the
    /// do-nothing candidate. Bare scalar arguments prefer index parameters
    /// when a call is overloaded; an `(Object)` cast forces the element
    /// binding and `(Integer)` the index binding.
    pub fn parse(text: &str, api: &SubjectApi, target: usize) -> Result<Self, CandidateError> {
        if text.trim().is_empty() {
            return Ok(Candidate::empty());
        }
        let calls = text
            .split(';')
            .map(|segment| parse_call(segment, api, target))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Candidate { calls })
    }

    /// Canonical text of the body: calls joined by `"; "`, with exactly the
    /// casts overload resolution requires. Reparsing the text yields an equal
    /// candidate. The empty body renders as the empty string.
    pub fn text(&self, api: &SubjectApi) -> String {
        self.calls
            .iter()
            .map(|call| {
                let sig = &api.methods[call.method];
                let args = call
                    .args
                    .iter()
                    .enumerate()
                    .map(|(j, arg)| match arg {
                        CandArg::Scalar(expr) => {
                            if sig.needs_element_cast[j] {
                                format!("(Object){}", expr.text())
                            } else {
                                expr.text()
                            }
                        }
                        CandArg::List(items) => {
                            let inner = items
                                .iter()
                                .map(ScalarExpr::text)
                                .collect::<Vec<_>>()
                                .join(", ");
                            format!("[{inner}]")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(", ");
                format!("{}({args})", sig.name)
            })
            .collect::<Vec<_>>()
            .join("; ")
    }

    /// True when the body invokes the given method anywhere.
    pub fn calls_method(&self, method: usize) -> bool {
        self.calls.iter().any(|c| c.method == method)
    }
}

fn parse_call(segment: &str, api: &SubjectApi, target: usize) -> Result<CandCall, CandidateError> {
    let mut lex = Lex::new(segment);
    let name = lex
        .ident()
        .ok_or(CandidateError::Syntax { col: lex.col() })?;
    lex.expect('(')?;
    let mut raw_args = Vec::new();
    if !lex.eat(')') {
        loop {
            raw_args.push(parse_arg(&mut lex, api, target)?);
            if lex.eat(')') {
                break;
            }
            lex.expect(',')?;
        }
    }
    if !lex.at_end() {
        return Err(CandidateError::Syntax { col: lex.col() });
    }
    let method = resolve_overload(&name, &raw_args, api)?;
    if method == target {
        return Err(CandidateError::SelfCall);
    }
    let args = raw_args
        .into_iter()
        .map(|raw| match raw {
            RawArg::Scalar { expr, .. } => CandArg::Scalar(expr),
            RawArg::List(items) => CandArg::List(items),
        })
        .collect();
    Ok(CandCall { method, args })
}

fn parse_arg(lex: &mut Lex, api: &SubjectApi, target: usize) -> Result<RawArg, CandidateError> {
    match lex.peek() {
        Some('[') => {
            lex.expect('[')?;
            let mut items = Vec::new();
            if !lex.eat(']') {
                loop {
                    items.push(parse_scalar(lex, api, target)?);
                    if lex.eat(']') {
                        break;
                    }
                    lex.expect(',')?;
                }
            }
            Ok(RawArg::List(items))
        }
        Some('(') => {
            lex.expect('(')?;
            let cast = match lex.ident().as_deref() {
                Some("Object") => Cast::Object,
                Some("Integer") => Cast::Int,
                _ => return Err(CandidateError::Syntax { col: lex.col() }),
            };
            lex.expect(')')?;
            let expr = parse_scalar(lex, api, target)?;
            Ok(RawArg::Scalar {
                expr,
                cast: Some(cast),
            })
        }
        _ => {
            let expr = parse_scalar(lex, api, target)?;
            Ok(RawArg::Scalar { expr, cast: None })
        }
    }
}

fn parse_scalar(
    lex: &mut Lex,
    api: &SubjectApi,
    target: usize,
) -> Result<ScalarExpr, CandidateError> {
    match lex.peek() {
        Some('-') => {
            lex.expect('-')?;
            let n = lex
                .digits()
                .ok_or(CandidateError::Syntax { col: lex.col() })?;
            Ok(ScalarExpr::Lit(-(n as i64)))
        }
        Some(c) if c.is_ascii_digit() => {
            let n = lex
                .digits()
                .ok_or(CandidateError::Syntax { col: lex.col() })?;
            Ok(ScalarExpr::Lit(n as i64))
        }
        _ => {
            let word = lex
                .ident()
                .ok_or(CandidateError::Syntax { col: lex.col() })?;
            if word == "size" {
                lex.expect('(')?;
                lex.expect(')')?;
                if lex.eat('-') {
                    let k = lex
                        .digits()
                        .ok_or(CandidateError::Syntax { col: lex.col() })?;
                    Ok(ScalarExpr::SizeRel(k as u32))
                } else {
                    Ok(ScalarExpr::SizeRel(0))
                }
            } else if let Some(digits) = word.strip_prefix('x') {
                let i: usize = digits
                    .parse()
                    .map_err(|_| CandidateError::Syntax { col: lex.col() })?;
                let sig = &api.methods[target];
                if i >= sig.arity() || sig.params[i] == ParamKind::Collection {
                    return Err(CandidateError::UnknownParam(i));
                }
                Ok(ScalarExpr::Param(i))
            } else {
                Err(CandidateError::Syntax { col: lex.col() })
            }
        }
    }
}

/// Pick the overload a call binds to, mirroring the sequence language: exact
/// arity, shape-compatible arguments, and — when several overloads remain —
/// the binding that treats more bare scalars as index parameters wins.
fn resolve_overload(
    name: &str,
    args: &[RawArg],
    api: &SubjectApi,
) -> Result<usize, CandidateError> {
    let overloads = api.overloads(name);
    if overloads.is_empty() {
        return Err(CandidateError::UnknownMethod(name.to_string()));
    }
    let arity_ok: Vec<usize> = overloads
        .iter()
        .copied()
        .filter(|&m| api.methods[m].arity() == args.len())
        .collect();
    if arity_ok.is_empty() {
        return Err(CandidateError::Arity {
            name: name.to_string(),
            given: args.len(),
        });
    }

    let compat = |m: usize, arg: &RawArg, j: usize| -> bool {
        let param = api.methods[m].params[j];
        match arg {
            RawArg::Scalar {
                cast: Some(Cast::Object),
                ..
            } => param == ParamKind::Element,
            RawArg::Scalar {
                cast: Some(Cast::Int),
                ..
            } => param == ParamKind::Int,
            RawArg::Scalar { cast: None, .. } => param != ParamKind::Collection,
            RawArg::List(_) => param == ParamKind::Collection,
        }
    };
    let fits: Vec<usize> = arity_ok
        .iter()
        .copied()
        .filter(|&m| args.iter().enumerate().all(|(j, a)| compat(m, a, j)))
        .collect();
    match fits.len() {
        0 => {
            let m = arity_ok[0];
            let position = args
                .iter()
                .enumerate()
                .find(|(j, a)| !compat(m, a, *j))
                .map_or(0, |(j, _)| j);
            Err(CandidateError::Kind {
                name: name.to_string(),
                position,
            })
        }
        1 => Ok(fits[0]),
        _ => {
            // Prefer the overload that binds more bare scalars to index
            // parameters; a tie is a genuine ambiguity.
            let int_count = |m: usize| {
                args.iter()
                    .enumerate()
                    .filter(|(j, a)| {
                        matches!(a, RawArg::Scalar { cast: None, .. })
                            && api.methods[m].params[*j] == ParamKind::Int
                    })
                    .count()
            };
            let best = fits.iter().copied().map(int_count).max().unwrap();
            let winners: Vec<usize> = fits.into_iter().filter(|&m| int_count(m) == best).collect();
            if winners.len() == 1 {
                Ok(winners[0])
            } else {
                Err(CandidateError::Ambiguous(name.to_string()))
            }
        }
    }
}

/// Run a candidate body against a state, with the target's argument values
/// bound to `x0, x1, …`. Calls execute in order; the first exception aborts
/// the body and becomes its outcome (earlier calls keep their effects — every
/// call checks its preconditions before mutating). The outcome of a completed
/// body is its last call's outcome; the empty body completes with no value.
pub fn eval_candidate(
    cand: &Candidate,
    api: &SubjectApi,
    state: &mut Vec<i64>,
    params: &[ArgValue],
) -> Outcome {
    let mut last = Outcome::Ok(None);
    for call in &cand.calls {
        let args: Vec<ArgValue> = call
            .args
            .iter()
            .map(|a| match a {
                CandArg::Scalar(e) => ArgValue::Scalar(e.eval(state.len(), params)),
                CandArg::List(es) => {
                    ArgValue::List(es.iter().map(|e| e.eval(state.len(), params)).collect())
                }
            })
            .collect();
        last = api.apply(&api.methods[call.method], state, &args);
        if !last.is_ok() {
            return last;
        }
    }
    last
}

/// How return values are compared when both sides complete normally.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchPolicy {
    /// Compare returned values exactly. The default (relaxed) compares them
    /// only when both sides return the same kind of value and otherwise
    /// ignores the returns, so differently-typed returns don't block a
    /// state-equivalent match.
    pub strict_returns: bool,
}

impl MatchPolicy {
    /// The relaxed default.
    pub fn relaxed() -> Self {
        MatchPolicy {
            strict_returns: false,
        }
    }

    /// Exact return comparison.
    pub fn strict() -> Self {
        MatchPolicy {
            strict_returns: true,
        }
    }
}

/// Decide whether one observed behavior matches another: final contents must
/// be equal; exceptions must agree in kind; a raise never matches a normal
/// completion; and returned values are compared per the policy.
pub fn behaviors_match(
    policy: MatchPolicy,
    target_out: &Outcome,
    target_state: &[i64],
    cand_out: &Outcome,
    cand_state: &[i64],
) -> bool {
    if target_state != cand_state {
        return false;
    }
    match (target_out, cand_out) {
        (Outcome::Raised(k1), Outcome::Raised(k2)) => k1 == k2,
        (Outcome::Raised(_), Outcome::Ok(_)) | (Outcome::Ok(_), Outcome::Raised(_)) => false,
        (Outcome::Ok(a), Outcome::Ok(b)) => {
            if policy.strict_returns {
                a == b
            } else {
                match (a, b) {
                    (Some(x), Some(y)) if x.kind() == y.kind() => x == y,
                    _ => true,
                }
            }
        }
    }
}

/// Pool used by the exhaustive small-state oracle.
const EXHAUSTIVE_POOL: [i64; 3] = [-1, 0, 1];
/// Maximum state length the exhaustive oracle enumerates.
const EXHAUSTIVE_MAX_LEN: usize = 5;

/// Search **all** states of at most five elements over the pool `{-1, 0, 1}`,
/// with every combination of pool-valued target arguments, for a state where
/// the candidate's behavior differs from the target's. `None` means the
/// candidate is equivalent on every small state — the decision procedure
/// behind the known-equivalence oracles and true-positive accounting.
pub fn exhaustive_counterexample(
    api: &SubjectApi,
    target: usize,
    cand: &Candidate,
    policy: MatchPolicy,
) -> Option<(Vec<i64>, Vec<ArgValue>)> {
    let arg_space = argument_space(api, target);
    for state in small_states() {
        for args in &arg_space {
            let mut t_state = state.clone();
            let t_out = api.apply(&api.methods[target], &mut t_state, args);
            let mut c_state = state.clone();
            let c_out = eval_candidate(cand, api, &mut c_state, args);
            if !behaviors_match(policy, &t_out, &t_state, &c_out, &c_state) {
                return Some((state, args.clone()));
            }
        }
    }
    None
}

/// Every state of length 0..=5 over the exhaustive pool, shortest first.
fn small_states() -> Vec<Vec<i64>> {
    let mut states = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..EXHAUSTIVE_MAX_LEN {
        let mut next = Vec::new();
        for state in &frontier {
            for &v in &EXHAUSTIVE_POOL {
                let mut s = state.clone();
                s.push(v);
                next.push(s);
            }
        }
        states.extend(next.iter().cloned());
        frontier = next;
    }
    states
}

/// All pool-valued argument tuples for the target's parameters.
fn argument_space(api: &SubjectApi, target: usize) -> Vec<Vec<ArgValue>> {
    let per_param: Vec<Vec<ArgValue>> = api.methods[target]
        .params
        .iter()
        .map(|p| match p {
            ParamKind::Element | ParamKind::Int => EXHAUSTIVE_POOL
                .iter()
                .map(|&v| ArgValue::Scalar(v))
                .collect(),
            ParamKind::Collection => {
                let mut lists = vec![ArgValue::List(vec![])];
                for &a in &EXHAUSTIVE_POOL {
                    lists.push(ArgValue::List(vec![a]));
                    for &b in &EXHAUSTIVE_POOL {
                        lists.push(ArgValue::List(vec![a, b]));
                    }
                }
                lists
            }
        })
        .collect();
    let mut tuples = vec![Vec::new()];
    for options in per_param {
        let mut next = Vec::new();
        for tuple in &tuples {
            for option in &options {
                let mut t = tuple.clone();
                t.push(option.clone());
                next.push(t);
            }
        }
        tuples = next;
    }
    tuples
}
