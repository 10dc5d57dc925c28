//! The textual statement language that drives the subject API.
//!
//! A sequence is a list of newline-separated statements:
//!
//! ```text
//! # comments run to end of line
//! v0 = new Stack()
//! v0.addElement(10)
//! v1 = v0.push(1)
//! v0.addAll([1, 2])
//! v2 = v0.pop()
//! ```
//!
//! Statements are either **constructs** (`VAR = new Stack()`) or **invokes**
//! (`[VAR =] RECEIVER.method(args…)`). Arguments are integer literals, list
//! literals of integers, or previously bound variables. A literal may carry a
//! cast — `(Object)5` or `(Integer)5` — to force which overload it binds when
//! a method name is overloaded on `Element` vs `int` parameters (`remove` is
//! the one such case in the stack API); `(Collection)` is accepted in front of
//! list literals and erased. A bare integer literal prefers the `int`
//! parameter when both overloads would otherwise apply.
//!
//! Parsing is strict: every variable must be bound before use, bindings are
//! single-assignment, receivers must be container instances, argument kinds
//! must match the resolved signature, and void results cannot be bound.
//! Errors carry 1-based line and column positions.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::api::{ParamKind, RetKind, SubjectApi};

/// Cast annotation on an integer literal argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cast {
    /// `(Object)` — bind the literal to an `Element` parameter.
    Object,
    /// `(Integer)` — bind the literal to an `int` parameter.
    Int,
}

/// An argument exactly as written in a statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Arg {
    /// An integer literal, with an optional overload-selecting cast.
    Lit { value: i64, cast: Option<Cast> },
    /// A list literal of integers, e.g. `[1, 2]`.
    ListLit(Vec<i64>),
    /// A reference to a previously bound variable.
    Var(String),
}

impl fmt::Display for Arg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arg::Lit { value, cast: None } => write!(f, "{value}"),
            Arg::Lit {
                value,
                cast: Some(Cast::Object),
            } => write!(f, "(Object){value}"),
            Arg::Lit {
                value,
                cast: Some(Cast::Int),
            } => write!(f, "(Integer){value}"),
            Arg::ListLit(items) => {
                write!(f, "[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
            Arg::Var(name) => write!(f, "{name}"),
        }
    }
}

/// One statement of a sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Statement {
    /// `var = new Stack()` — bind a fresh, empty container instance.
    Construct {
        /// Variable the new instance is bound to.
        var: String,
    },
    /// `[binding =] receiver.method(args…)` — invoke a method.
    Invoke {
        /// Variable the result is bound to, if any.
        binding: Option<String>,
        /// The container instance the method is invoked on.
        receiver: String,
        /// Index of the resolved method in [`SubjectApi::methods`].
        method: usize,
        /// Arguments as written.
        args: Vec<Arg>,
    },
}

impl Statement {
    /// Render the statement in canonical surface syntax.
    pub fn display(&self, api: &SubjectApi) -> String {
        match self {
            Statement::Construct { var } => format!("{var} = new {}()", api.ctor),
            Statement::Invoke {
                binding,
                receiver,
                method,
                args,
            } => {
                let mut out = String::new();
                if let Some(b) = binding {
                    out.push_str(b);
                    out.push_str(" = ");
                }
                out.push_str(receiver);
                out.push('.');
                out.push_str(api.methods[*method].name);
                out.push('(');
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&a.to_string());
                }
                out.push(')');
                out
            }
        }
    }

    /// The variable this statement binds, if any.
    pub fn binds(&self) -> Option<&str> {
        match self {
            Statement::Construct { var } => Some(var),
            Statement::Invoke { binding, .. } => binding.as_deref(),
        }
    }
}

/// How a sequence came to exist; carried for reporting, never serialized
/// into scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Produced by the random generator with this seed.
    Generated {
        /// Seed of the generator run that produced the sequence.
        seed: u64,
    },
    /// Parsed from text.
    Parsed,
    /// Produced by a normalization step from another sequence.
    Transformed,
}

/// A parsed, well-formed statement sequence.
///
/// Well-formedness (bound-before-use, single assignment, kind-correct
/// arguments, subject receivers) is established at construction: either by
/// the parser or by the generator, which builds statements bottom-up against
/// the same rules.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sequence {
    /// Statements in program order.
    pub statements: Vec<Statement>,
    /// Where the sequence came from.
    pub provenance: Provenance,
}

impl Sequence {
    /// Parse a sequence from text. `#` starts a comment; blank lines are
    /// ignored.
    pub fn parse(text: &str, api: &SubjectApi) -> Result<Sequence, ParseError> {
        let mut statements = Vec::new();
        let mut env: BTreeMap<String, VarKind> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let code = match raw.find('#') {
                Some(cut) => &raw[..cut],
                None => raw,
            };
            if code.trim().is_empty() {
                continue;
            }
            let stmt = parse_statement(code, line_no, api, &mut env)?;
            statements.push(stmt);
        }
        Ok(Sequence {
            statements,
            provenance: Provenance::Parsed,
        })
    }

    /// Render the sequence as text: one statement per line, trailing newline.
    pub fn to_text(&self, api: &SubjectApi) -> String {
        let mut out = String::new();
        for stmt in &self.statements {
            out.push_str(&stmt.display(api));
            out.push('\n');
        }
        out
    }

    /// Rename all variables to `v0, v1, …` in binding order.
    ///
    /// Two sequences that differ only in variable names canonicalize to equal
    /// sequences, which is the notion of syntactic identity used for
    /// de-duplication.
    pub fn canonicalized(&self) -> Sequence {
        let mut rename: BTreeMap<String, String> = BTreeMap::new();
        for stmt in &self.statements {
            if let Some(var) = stmt.binds() {
                if !rename.contains_key(var) {
                    let fresh = format!("v{}", rename.len());
                    rename.insert(var.to_string(), fresh);
                }
            }
        }
        let renamed = |name: &str| -> String {
            rename
                .get(name)
                .cloned()
                .unwrap_or_else(|| name.to_string())
        };
        let statements = self
            .statements
            .iter()
            .map(|stmt| match stmt {
                Statement::Construct { var } => Statement::Construct { var: renamed(var) },
                Statement::Invoke {
                    binding,
                    receiver,
                    method,
                    args,
                } => Statement::Invoke {
                    binding: binding.as_deref().map(renamed),
                    receiver: renamed(receiver),
                    method: *method,
                    args: args
                        .iter()
                        .map(|a| match a {
                            Arg::Var(name) => Arg::Var(renamed(name)),
                            other => other.clone(),
                        })
                        .collect(),
                },
            })
            .collect();
        Sequence {
            statements,
            provenance: self.provenance,
        }
    }

    /// Canonical text: the rendering of [`Self::canonicalized`].
    pub fn canonical_text(&self, api: &SubjectApi) -> String {
        self.canonicalized().to_text(api)
    }

    /// Number of `new` statements, i.e. distinct container instances.
    pub fn instance_count(&self) -> usize {
        self.statements
            .iter()
            .filter(|s| matches!(s, Statement::Construct { .. }))
            .count()
    }

    /// Statement indices that invoke the given method.
    pub fn invocations_of(&self, method: usize) -> Vec<usize> {
        self.statements
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Statement::Invoke { method: m, .. } if *m == method => Some(i),
                _ => None,
            })
            .collect()
    }
}

/// What a bound variable holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarKind {
    /// A container instance.
    Subject,
    /// A method result of the given kind.
    Value(RetKind),
}

/// A parse failure with its position in the input.
#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}, column {col}: {kind}")]
pub struct ParseError {
    /// 1-based line of the offending token.
    pub line: usize,
    /// 1-based column of the offending token.
    pub col: usize,
    /// What went wrong.
    pub kind: ParseErrorKind,
}

/// The specific way a statement failed to parse or resolve.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    /// The statement does not fit the grammar.
    #[error("malformed statement: {0}")]
    Syntax(String),
    /// `new` names something other than the API's constructor.
    #[error("unknown constructor `{0}`")]
    UnknownConstructor(String),
    /// No method with this simple name exists.
    #[error("unknown method `{0}`")]
    UnknownMethod(String),
    /// The name exists, but no overload takes this many arguments.
    #[error("method `{name}` cannot take {given} argument(s)")]
    ArityMismatch {
        /// Simple method name.
        name: String,
        /// Number of arguments supplied.
        given: usize,
    },
    /// A variable is referenced before being bound.
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    /// A variable is bound a second time.
    #[error("variable `{0}` is already bound")]
    DuplicateBinding(String),
    /// Several overloads remain possible; a cast is needed.
    #[error("call to `{0}` is ambiguous; add an (Object) or (Integer) cast")]
    AmbiguousCall(String),
    /// An argument cannot bind any overload's parameter of that position.
    #[error("argument {position} of `{name}` has the wrong kind")]
    KindMismatch {
        /// Simple method name.
        name: String,
        /// 1-based argument position.
        position: usize,
    },
    /// A void method's result is bound to a variable.
    #[error("method `{0}` returns nothing; result cannot be bound")]
    VoidBinding(String),
    /// The receiver names a value, not a container instance.
    #[error("receiver `{0}` is not a container instance")]
    ReceiverNotSubject(String),
    /// An integer literal does not fit the value range.
    #[error("malformed integer literal `{0}`")]
    MalformedLiteral(String),
}

/// Character cursor over one line of input, tracking 1-based columns.
struct Cursor {
    chars: Vec<char>,
    pos: usize,
    line: usize,
}

impl Cursor {
    fn new(text: &str, line: usize) -> Self {
        Cursor {
            chars: text.chars().collect(),
            pos: 0,
            line,
        }
    }

    fn col(&self) -> usize {
        self.pos + 1
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            col: self.col(),
            kind,
        }
    }

    fn err_at(&self, col: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            col,
            kind,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(ParseErrorKind::Syntax(format!("expected `{c}`"))))
        }
    }

    fn ident(&mut self) -> Option<(String, usize)> {
        let start_col = self.col();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
            self.pos += 1;
        }
        Some((self.chars[start..self.pos].iter().collect(), start_col))
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let start_col = self.col();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        if !matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            return Err(self.err(ParseErrorKind::Syntax("expected an integer".into())));
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<i64>()
            .map_err(|_| self.err_at(start_col, ParseErrorKind::MalformedLiteral(text.clone())))
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.chars.len()
    }
}

/// Parse one statement in the context of the variables bound so far, binding
/// any variable the statement introduces into `env`.
fn parse_statement(
    code: &str,
    line: usize,
    api: &SubjectApi,
    env: &mut BTreeMap<String, VarKind>,
) -> Result<Statement, ParseError> {
    let mut cur = Cursor::new(code, line);
    cur.skip_ws();
    let (first, first_col) = cur
        .ident()
        .ok_or_else(|| cur.err(ParseErrorKind::Syntax("expected a variable name".into())))?;
    cur.skip_ws();

    if cur.eat('=') {
        cur.skip_ws();
        // Either `var = new Ctor()` or `var = recv.method(…)`.
        let save = cur.pos;
        if let Some((word, word_col)) = cur.ident() {
            if word == "new" {
                cur.skip_ws();
                let (ctor, ctor_col) = cur.ident().ok_or_else(|| {
                    cur.err(ParseErrorKind::Syntax("expected a constructor name".into()))
                })?;
                if ctor != api.ctor {
                    return Err(cur.err_at(ctor_col, ParseErrorKind::UnknownConstructor(ctor)));
                }
                cur.skip_ws();
                cur.expect('(')?;
                cur.skip_ws();
                cur.expect(')')?;
                if !cur.at_end() {
                    return Err(cur.err(ParseErrorKind::Syntax("unexpected trailing input".into())));
                }
                if env.contains_key(&first) {
                    return Err(cur.err_at(first_col, ParseErrorKind::DuplicateBinding(first)));
                }
                env.insert(first.clone(), VarKind::Subject);
                return Ok(Statement::Construct { var: first });
            }
            // Not a construct: `word` is the receiver of a bound invoke.
            let receiver = word;
            let stmt = parse_invoke(
                &mut cur,
                receiver,
                word_col,
                Some((first, first_col)),
                api,
                env,
            )?;
            return Ok(stmt);
        }
        let _ = save;
        return Err(cur.err(ParseErrorKind::Syntax(
            "expected `new` or a receiver".into(),
        )));
    }

    // Unbound invoke: `recv.method(…)`.
    parse_invoke(&mut cur, first, first_col, None, api, env)
}

/// Parse `receiver.method(args…)` with the receiver identifier already
/// consumed, resolve the overload, and apply binding rules.
fn parse_invoke(
    cur: &mut Cursor,
    receiver: String,
    receiver_col: usize,
    binding: Option<(String, usize)>,
    api: &SubjectApi,
    env: &mut BTreeMap<String, VarKind>,
) -> Result<Statement, ParseError> {
    match env.get(&receiver) {
        None => return Err(cur.err_at(receiver_col, ParseErrorKind::UnboundVariable(receiver))),
        Some(VarKind::Value(_)) => {
            return Err(cur.err_at(receiver_col, ParseErrorKind::ReceiverNotSubject(receiver)))
        }
        Some(VarKind::Subject) => {}
    }
    cur.skip_ws();
    cur.expect('.')?;
    let (name, name_col) = cur
        .ident()
        .ok_or_else(|| cur.err(ParseErrorKind::Syntax("expected a method name".into())))?;
    cur.skip_ws();
    cur.expect('(')?;
    let mut args: Vec<Arg> = Vec::new();
    let mut arg_cols: Vec<usize> = Vec::new();
    cur.skip_ws();
    if !cur.eat(')') {
        loop {
            cur.skip_ws();
            arg_cols.push(cur.col());
            args.push(parse_arg(cur, env)?);
            cur.skip_ws();
            if cur.eat(')') {
                break;
            }
            cur.expect(',')?;
        }
    }
    if !cur.at_end() {
        return Err(cur.err(ParseErrorKind::Syntax("unexpected trailing input".into())));
    }

    let method = resolve_overload(api, &name, name_col, &args, &arg_cols, env, cur)?;

    if let Some((bind_name, bind_col)) = binding {
        let sig = &api.methods[method];
        if sig.ret == RetKind::None {
            return Err(cur.err_at(bind_col, ParseErrorKind::VoidBinding(name)));
        }
        if env.contains_key(&bind_name) {
            return Err(cur.err_at(bind_col, ParseErrorKind::DuplicateBinding(bind_name)));
        }
        env.insert(bind_name.clone(), VarKind::Value(sig.ret));
        return Ok(Statement::Invoke {
            binding: Some(bind_name),
            receiver,
            method,
            args,
        });
    }
    Ok(Statement::Invoke {
        binding: None,
        receiver,
        method,
        args,
    })
}

/// Parse a single argument: literal, cast literal, list literal, or variable.
fn parse_arg(cur: &mut Cursor, env: &BTreeMap<String, VarKind>) -> Result<Arg, ParseError> {
    match cur.peek() {
        Some('(') => {
            cur.bump();
            cur.skip_ws();
            let (cast_name, cast_col) = cur
                .ident()
                .ok_or_else(|| cur.err(ParseErrorKind::Syntax("expected a cast type".into())))?;
            cur.skip_ws();
            cur.expect(')')?;
            cur.skip_ws();
            match cast_name.as_str() {
                "Object" => Ok(Arg::Lit {
                    value: cur.integer()?,
                    cast: Some(Cast::Object),
                }),
                "Integer" => Ok(Arg::Lit {
                    value: cur.integer()?,
                    cast: Some(Cast::Int),
                }),
                "Collection" => {
                    // The cast is redundant on a list literal; accept and erase.
                    if cur.peek() == Some('[') {
                        parse_list(cur)
                    } else {
                        Err(cur.err(ParseErrorKind::Syntax(
                            "(Collection) must precede a list literal".into(),
                        )))
                    }
                }
                other => Err(cur.err_at(
                    cast_col,
                    ParseErrorKind::Syntax(format!("unknown cast `({other})`")),
                )),
            }
        }
        Some('[') => parse_list(cur),
        Some(c) if c == '-' || c.is_ascii_digit() => Ok(Arg::Lit {
            value: cur.integer()?,
            cast: None,
        }),
        _ => {
            let col = cur.col();
            let (name, _) = cur
                .ident()
                .ok_or_else(|| cur.err(ParseErrorKind::Syntax("expected an argument".into())))?;
            if !env.contains_key(&name) {
                return Err(cur.err_at(col, ParseErrorKind::UnboundVariable(name)));
            }
            Ok(Arg::Var(name))
        }
    }
}

fn parse_list(cur: &mut Cursor) -> Result<Arg, ParseError> {
    cur.expect('[')?;
    let mut items = Vec::new();
    cur.skip_ws();
    if cur.eat(']') {
        return Ok(Arg::ListLit(items));
    }
    loop {
        cur.skip_ws();
        items.push(cur.integer()?);
        cur.skip_ws();
        if cur.eat(']') {
            break;
        }
        cur.expect(',')?;
    }
    Ok(Arg::ListLit(items))
}

/// Pick the overload the argument shapes select. Bare integer literals prefer
/// `int` parameters; a cast pins the choice. Exactly one overload must
/// survive, otherwise the call is ambiguous or mis-kinded.
fn resolve_overload(
    api: &SubjectApi,
    name: &str,
    name_col: usize,
    args: &[Arg],
    arg_cols: &[usize],
    env: &BTreeMap<String, VarKind>,
    cur: &Cursor,
) -> Result<usize, ParseError> {
    let overloads = api.overloads(name);
    if overloads.is_empty() {
        return Err(cur.err_at(name_col, ParseErrorKind::UnknownMethod(name.to_string())));
    }
    let arity_matched: Vec<usize> = overloads
        .iter()
        .copied()
        .filter(|&i| api.methods[i].arity() == args.len())
        .collect();
    if arity_matched.is_empty() {
        return Err(cur.err_at(
            name_col,
            ParseErrorKind::ArityMismatch {
                name: name.to_string(),
                given: args.len(),
            },
        ));
    }
    let compatible: Vec<usize> = arity_matched
        .iter()
        .copied()
        .filter(|&i| {
            args.iter()
                .zip(&api.methods[i].params)
                .all(|(a, &p)| arg_binds(a, p, env))
        })
        .collect();
    match compatible.len() {
        0 => {
            // Point at the first argument that fails every overload's slot.
            let sig = &api.methods[arity_matched[0]];
            let position = args
                .iter()
                .zip(&sig.params)
                .position(|(a, &p)| !arg_binds(a, p, env))
                .unwrap_or(0);
            Err(cur.err_at(
                arg_cols.get(position).copied().unwrap_or(name_col),
                ParseErrorKind::KindMismatch {
                    name: name.to_string(),
                    position: position + 1,
                },
            ))
        }
        1 => Ok(compatible[0]),
        _ => {
            // Prefer the overload that binds more bare literals to `int`.
            let int_preference = |i: usize| -> usize {
                args.iter()
                    .zip(&api.methods[i].params)
                    .filter(|(a, &p)| {
                        matches!(a, Arg::Lit { cast: None, .. }) && p == ParamKind::Int
                    })
                    .count()
            };
            let best = compatible
                .iter()
                .copied()
                .max_by_key(|&i| int_preference(i))
                .expect("non-empty");
            let best_score = int_preference(best);
            let tied = compatible
                .iter()
                .filter(|&&i| int_preference(i) == best_score)
                .count();
            if tied > 1 {
                return Err(cur.err_at(name_col, ParseErrorKind::AmbiguousCall(name.to_string())));
            }
            Ok(best)
        }
    }
}

/// Whether an argument of this shape can bind a parameter of this kind.
fn arg_binds(arg: &Arg, param: ParamKind, env: &BTreeMap<String, VarKind>) -> bool {
    match arg {
        Arg::Lit { cast: None, .. } => matches!(param, ParamKind::Element | ParamKind::Int),
        Arg::Lit {
            cast: Some(Cast::Object),
            ..
        } => param == ParamKind::Element,
        Arg::Lit {
            cast: Some(Cast::Int),
            ..
        } => param == ParamKind::Int,
        Arg::ListLit(_) => param == ParamKind::Collection,
        Arg::Var(name) => match env.get(name) {
            Some(VarKind::Subject) => param == ParamKind::Collection,
            Some(VarKind::Value(RetKind::Element)) => param == ParamKind::Element,
            Some(VarKind::Value(RetKind::Int)) => param == ParamKind::Int,
            Some(VarKind::Value(RetKind::Collection)) => param == ParamKind::Collection,
            Some(VarKind::Value(RetKind::Bool)) | Some(VarKind::Value(RetKind::None)) | None => {
                false
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subject::api::stack_api;

    fn parse(text: &str) -> Result<Sequence, ParseError> {
        Sequence::parse(text, &stack_api())
    }

    fn parse_ok(text: &str) -> Sequence {
        parse(text).unwrap_or_else(|e| panic!("parse failed: {e}"))
    }

    #[test]
    fn round_trips_a_simple_program() {
        let api = stack_api();
        let text = "v0 = new Stack()\nv0.addElement(10)\nv1 = v0.push(1)\nv2 = v0.pop()\n";
        let seq = parse_ok(text);
        assert_eq!(seq.to_text(&api), text);
        assert_eq!(seq.statements.len(), 4);
        assert_eq!(seq.instance_count(), 1);
    }

    #[test]
    fn ignores_comments_and_blank_lines() {
        let seq = parse_ok("# a comment\n\nv0 = new Stack()\nv0.push(1) # trailing comment\n");
        assert_eq!(seq.statements.len(), 2);
    }

    #[test]
    fn bare_literal_prefers_the_int_overload_of_remove() {
        let api = stack_api();
        let seq = parse_ok("v0 = new Stack()\nv0.push(5)\nv1 = v0.remove(0)\n");
        let Statement::Invoke { method, .. } = &seq.statements[2] else {
            panic!()
        };
        assert_eq!(api.methods[*method].signature(), "remove(int)");
    }

    #[test]
    fn object_cast_selects_the_element_overload_of_remove() {
        let api = stack_api();
        let text = "v0 = new Stack()\nv0.push(5)\nv1 = v0.remove((Object)5)\n";
        let seq = parse_ok(text);
        let Statement::Invoke { method, .. } = &seq.statements[2] else {
            panic!()
        };
        assert_eq!(api.methods[*method].signature(), "remove(Object)");
        assert_eq!(seq.to_text(&api), text, "the cast must survive printing");
    }

    #[test]
    fn integer_cast_is_parsed_and_preserved() {
        let api = stack_api();
        let text = "v0 = new Stack()\nv0.push(5)\nv1 = v0.remove((Integer)0)\n";
        let seq = parse_ok(text);
        let Statement::Invoke { method, .. } = &seq.statements[2] else {
            panic!()
        };
        assert_eq!(api.methods[*method].signature(), "remove(int)");
        assert_eq!(seq.to_text(&api), text);
    }

    #[test]
    fn collection_cast_is_accepted_and_erased() {
        let api = stack_api();
        let seq = parse_ok("v0 = new Stack()\nv0.addAll((Collection)[1, 2])\n");
        assert_eq!(seq.to_text(&api), "v0 = new Stack()\nv0.addAll([1, 2])\n");
    }

    #[test]
    fn list_literals_parse_with_arbitrary_spacing() {
        let api = stack_api();
        let seq = parse_ok("v0 = new Stack()\nv0.addAll([1,2, -3])\nv0.addAll([])\n");
        assert_eq!(
            seq.to_text(&api),
            "v0 = new Stack()\nv0.addAll([1, 2, -3])\nv0.addAll([])\n"
        );
    }

    #[test]
    fn subject_variables_bind_collection_parameters() {
        let api = stack_api();
        let seq = parse_ok("s0 = new Stack()\ns1 = new Stack()\nb0 = s0.addAll(s1)\n");
        let Statement::Invoke { method, .. } = &seq.statements[2] else {
            panic!()
        };
        assert_eq!(api.methods[*method].signature(), "addAll(Collection)");
    }

    #[test]
    fn element_variables_bind_element_parameters_without_casts() {
        let api = stack_api();
        let seq = parse_ok("v0 = new Stack()\nv0.push(5)\nr0 = v0.pop()\nb0 = v0.remove(r0)\n");
        let Statement::Invoke { method, .. } = &seq.statements[3] else {
            panic!()
        };
        assert_eq!(api.methods[*method].signature(), "remove(Object)");
    }

    fn expect_err(text: &str) -> ParseError {
        parse(text).expect_err("parse should fail")
    }

    #[test]
    fn reports_unknown_method_with_position() {
        let err = expect_err("v0 = new Stack()\nv0.shove(1)\n");
        assert_eq!(err.line, 2);
        assert_eq!(err.col, 4);
        assert_eq!(err.kind, ParseErrorKind::UnknownMethod("shove".into()));
    }

    #[test]
    fn reports_arity_mismatch() {
        let err = expect_err("v0 = new Stack()\nv0.push(1, 2)\n");
        assert_eq!(
            err.kind,
            ParseErrorKind::ArityMismatch {
                name: "push".into(),
                given: 2
            }
        );
    }

    #[test]
    fn reports_unbound_variable_in_arguments() {
        let err = expect_err("v0 = new Stack()\nv0.push(ghost)\n");
        assert_eq!(err.kind, ParseErrorKind::UnboundVariable("ghost".into()));
    }

    #[test]
    fn reports_unbound_receiver() {
        let err = expect_err("ghost.push(1)\n");
        assert_eq!(err.line, 1);
        assert_eq!(err.kind, ParseErrorKind::UnboundVariable("ghost".into()));
    }

    #[test]
    fn reports_duplicate_bindings() {
        let err = expect_err("v0 = new Stack()\nv0 = new Stack()\n");
        assert_eq!(err.kind, ParseErrorKind::DuplicateBinding("v0".into()));
        let err = expect_err("v0 = new Stack()\nr0 = v0.pop()\nr0 = v0.pop()\n");
        assert_eq!(err.kind, ParseErrorKind::DuplicateBinding("r0".into()));
    }

    #[test]
    fn reports_void_binding() {
        let err = expect_err("v0 = new Stack()\nr0 = v0.clear()\n");
        assert_eq!(err.kind, ParseErrorKind::VoidBinding("clear".into()));
    }

    #[test]
    fn reports_value_variable_used_as_receiver() {
        let err = expect_err("v0 = new Stack()\nr0 = v0.push(1)\nr0.pop()\n");
        assert_eq!(err.kind, ParseErrorKind::ReceiverNotSubject("r0".into()));
    }

    #[test]
    fn reports_kind_mismatch_for_bool_variable_argument() {
        let err = expect_err("v0 = new Stack()\nb0 = v0.empty()\nv0.push(b0)\n");
        assert_eq!(
            err.kind,
            ParseErrorKind::KindMismatch {
                name: "push".into(),
                position: 1
            }
        );
    }

    #[test]
    fn reports_kind_mismatch_for_list_where_scalar_expected() {
        let err = expect_err("v0 = new Stack()\nv0.push([1])\n");
        assert_eq!(
            err.kind,
            ParseErrorKind::KindMismatch {
                name: "push".into(),
                position: 1
            }
        );
    }

    #[test]
    fn reports_overflowing_literal() {
        let err = expect_err("v0 = new Stack()\nv0.push(99999999999999999999)\n");
        assert_eq!(
            err.kind,
            ParseErrorKind::MalformedLiteral("99999999999999999999".into())
        );
    }

    #[test]
    fn reports_unknown_constructor() {
        let err = expect_err("v0 = new Queue()\n");
        assert_eq!(err.kind, ParseErrorKind::UnknownConstructor("Queue".into()));
    }

    #[test]
    fn reports_trailing_garbage() {
        let err = expect_err("v0 = new Stack() extra\n");
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn canonical_renaming_follows_binding_order() {
        let api = stack_api();
        let seq = parse_ok("box = new Stack()\nbox.addElement(7)\nout = box.pop()\n");
        assert_eq!(
            seq.canonical_text(&api),
            "v0 = new Stack()\nv0.addElement(7)\nv1 = v0.pop()\n"
        );
    }

    #[test]
    fn canonical_renaming_is_safe_when_input_reuses_canonical_names() {
        let api = stack_api();
        // `v1` is bound first here; naive in-place renaming would collide.
        let seq = parse_ok("v1 = new Stack()\nv0 = v1.push(3)\nv2 = v1.pop()\n");
        assert_eq!(
            seq.canonical_text(&api),
            "v0 = new Stack()\nv1 = v0.push(3)\nv2 = v0.pop()\n"
        );
    }

    #[test]
    fn canonicalization_is_idempotent() {
        let api = stack_api();
        let seq = parse_ok("a = new Stack()\nb = new Stack()\na.addElement(1)\nc0 = b.addAll(a)\n");
        let once = seq.canonicalized();
        let twice = once.canonicalized();
        assert_eq!(once.to_text(&api), twice.to_text(&api));
    }
}
