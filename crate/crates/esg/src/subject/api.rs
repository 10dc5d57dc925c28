//! Signatures and execution semantics of the modeled container API.
//!
//! The model is a growable sequence of integers (`Vec<i64>`), index 0 at the
//! bottom and the last index at the top, exposing the classic stack operations
//! plus the vector-style positional and bulk operations they are built on.
//! Elements are modeled as plain `i64` values, so "element" parameters and
//! "int" parameters carry the same scalar type and are distinguished only by
//! their declared [`ParamKind`] (which is what makes `remove(int)` vs
//! `remove(Object)` a genuine overload-resolution question).
//!
//! Every method is a **total, deterministic** function of the receiver state
//! and its arguments: it either returns a value (mutating the receiver in
//! place) or raises one of two exception kinds, in which case the receiver is
//! left unchanged. There is no hidden state, no randomness, and no aliasing —
//! collection arguments are passed by value (snapshot).

use std::fmt;

/// Categories a method parameter accepts.
///
/// `Element` and `Int` are both scalars at runtime; the distinction matters
/// for overload resolution and for printing casts. `Collection` accepts a
/// list of scalars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamKind {
    /// A container element (`Object` in the surface syntax).
    Element,
    /// A primitive integer, e.g. an index or a size.
    Int,
    /// A collection of elements.
    Collection,
}

impl ParamKind {
    /// The name used when printing signatures, e.g. `add(int,Object)`.
    pub fn type_name(self) -> &'static str {
        match self {
            ParamKind::Element => "Object",
            ParamKind::Int => "int",
            ParamKind::Collection => "Collection",
        }
    }
}

/// Categories of method return values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RetKind {
    /// The method returns nothing (`void`).
    None,
    /// The method returns a container element.
    Element,
    /// The method returns a primitive integer (index, size, distance, …).
    Int,
    /// The method returns a boolean.
    Bool,
    /// The method returns a collection of elements.
    Collection,
}

/// Exception outcomes the model can raise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ExceptionKind {
    /// An element was requested from an empty container.
    EmptyContainer,
    /// A positional argument was outside the valid range.
    IndexOutOfBounds,
}

impl fmt::Display for ExceptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExceptionKind::EmptyContainer => write!(f, "empty-container"),
            ExceptionKind::IndexOutOfBounds => write!(f, "index-out-of-bounds"),
        }
    }
}

/// A runtime value produced by a method call.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RetValue {
    /// A container element.
    Element(i64),
    /// A primitive integer.
    Int(i64),
    /// A boolean.
    Bool(bool),
    /// A snapshot of a collection of elements.
    Collection(Vec<i64>),
}

impl RetValue {
    /// The kind of this value.
    pub fn kind(&self) -> RetKind {
        match self {
            RetValue::Element(_) => RetKind::Element,
            RetValue::Int(_) => RetKind::Int,
            RetValue::Bool(_) => RetKind::Bool,
            RetValue::Collection(_) => RetKind::Collection,
        }
    }
}

impl fmt::Display for RetValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RetValue::Element(v) | RetValue::Int(v) => write!(f, "{v}"),
            RetValue::Bool(b) => write!(f, "{b}"),
            RetValue::Collection(vs) => {
                write!(f, "[")?;
                for (i, v) in vs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// An argument value at execution time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArgValue {
    /// A scalar, bound to an `Element` or `Int` parameter.
    Scalar(i64),
    /// A list of scalars, bound to a `Collection` parameter.
    List(Vec<i64>),
}

impl ArgValue {
    fn scalar(&self) -> i64 {
        match self {
            ArgValue::Scalar(v) => *v,
            ArgValue::List(_) => panic!("scalar argument expected; callers kind-check arguments"),
        }
    }

    fn list(&self) -> &[i64] {
        match self {
            ArgValue::List(vs) => vs,
            ArgValue::Scalar(_) => {
                panic!("collection argument expected; callers kind-check arguments")
            }
        }
    }
}

/// The result of executing a single method call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    /// The call completed; `None` for void methods.
    Ok(Option<RetValue>),
    /// The call raised; the receiver is unchanged.
    Raised(ExceptionKind),
}

impl Outcome {
    /// True when the call completed without raising.
    pub fn is_ok(&self) -> bool {
        matches!(self, Outcome::Ok(_))
    }

    /// The exception kind, if the call raised.
    pub fn raised(&self) -> Option<ExceptionKind> {
        match self {
            Outcome::Raised(k) => Some(*k),
            Outcome::Ok(_) => None,
        }
    }
}

/// Internal dispatch tag; one variant per concrete method semantics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Op {
    Push,
    Pop,
    Peek,
    Empty,
    Search,
    AddAt,
    Add,
    AddAllAt,
    AddAll,
    AddElement,
    Set,
    InsertElementAt,
    SetElementAt,
    Capacity,
    CloneAll,
    Contains,
    Get,
    Clear,
    RemoveAt,
    RemoveObj,
    RemoveAll,
    RemoveAllElements,
    RemoveElement,
    RemoveElementAt,
    RetainAll,
    SetSize,
    Size,
    IsEmpty,
    ElementAt,
    FirstElement,
    LastElement,
    IndexOf,
}

/// One public method of the subject API.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodSig {
    /// The class that declares the method in the modeled API surface.
    pub owner: &'static str,
    /// Simple method name, e.g. `"push"`.
    pub name: &'static str,
    /// Parameter kinds in declaration order.
    pub params: Vec<ParamKind>,
    /// Return value kind.
    pub ret: RetKind,
    /// Per-parameter flag: printing a bare integer literal at this position
    /// would resolve to a *different* overload, so an `(Object)` cast is
    /// required to round-trip through the statement language. Only `Element`
    /// parameters shadowed by an `Int` overload are flagged.
    pub needs_element_cast: Vec<bool>,
    op: Op,
}

impl MethodSig {
    /// The full signature, e.g. `"add(int,Object)"`. This is the canonical
    /// identifier for a method: unique within an API.
    pub fn signature(&self) -> String {
        let params: Vec<&str> = self.params.iter().map(|p| p.type_name()).collect();
        format!("{}({})", self.name, params.join(","))
    }

    /// The signature qualified by the declaring class, e.g. `"Stack.pop()"`.
    pub fn qualified(&self) -> String {
        format!("{}.{}", self.owner, self.signature())
    }

    /// Number of parameters.
    pub fn arity(&self) -> usize {
        self.params.len()
    }
}

impl fmt::Display for MethodSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signature())
    }
}

/// A modeled container API: a constructor plus a fixed list of methods in
/// declaration order.
#[derive(Debug, Clone)]
pub struct SubjectApi {
    /// Short name used on the command line, e.g. `"stack"`.
    pub name: &'static str,
    /// Constructor name as written in statements, e.g. `Stack` in
    /// `v0 = new Stack()`.
    pub ctor: &'static str,
    /// All public methods, in declaration order.
    pub methods: Vec<MethodSig>,
}

impl SubjectApi {
    /// A fresh, empty container state.
    pub fn construct(&self) -> Vec<i64> {
        Vec::new()
    }

    /// Find a method by its full signature (`"pop()"`, `"add(int,Object)"`).
    pub fn find(&self, signature: &str) -> Option<usize> {
        self.methods.iter().position(|m| m.signature() == signature)
    }

    /// All methods sharing a simple name, as indices into [`Self::methods`].
    pub fn overloads(&self, name: &str) -> Vec<usize> {
        (0..self.methods.len())
            .filter(|&i| self.methods[i].name == name)
            .collect()
    }

    /// Execute one method call against `state`.
    ///
    /// On a raised outcome the state is left exactly as it was: every raising
    /// path checks its precondition before mutating. Arguments must match the
    /// signature's parameter kinds; the statement layer guarantees this.
    pub fn apply(&self, method: &MethodSig, state: &mut Vec<i64>, args: &[ArgValue]) -> Outcome {
        debug_assert_eq!(args.len(), method.arity(), "arity checked upstream");
        let len = state.len() as i64;
        match method.op {
            Op::Push => {
                let e = args[0].scalar();
                state.push(e);
                Outcome::Ok(Some(RetValue::Element(e)))
            }
            Op::Pop => match state.pop() {
                Some(e) => Outcome::Ok(Some(RetValue::Element(e))),
                None => Outcome::Raised(ExceptionKind::EmptyContainer),
            },
            Op::Peek => match state.last() {
                Some(&e) => Outcome::Ok(Some(RetValue::Element(e))),
                None => Outcome::Raised(ExceptionKind::EmptyContainer),
            },
            Op::Empty => Outcome::Ok(Some(RetValue::Bool(state.is_empty()))),
            Op::Search => {
                // 1-based distance from the top of the nearest occurrence.
                let e = args[0].scalar();
                let found = state.iter().rposition(|&v| v == e);
                let distance = match found {
                    Some(i) => len - i as i64,
                    None => -1,
                };
                Outcome::Ok(Some(RetValue::Int(distance)))
            }
            Op::AddAt => {
                let (i, e) = (args[0].scalar(), args[1].scalar());
                if i < 0 || i > len {
                    return Outcome::Raised(ExceptionKind::IndexOutOfBounds);
                }
                state.insert(i as usize, e);
                Outcome::Ok(None)
            }
            Op::Add => {
                state.push(args[0].scalar());
                Outcome::Ok(Some(RetValue::Bool(true)))
            }
            Op::AddAllAt => {
                let i = args[0].scalar();
                let items = args[1].list();
                if i < 0 || i > len {
                    return Outcome::Raised(ExceptionKind::IndexOutOfBounds);
                }
                let changed = !items.is_empty();
                state.splice(i as usize..i as usize, items.iter().copied());
                Outcome::Ok(Some(RetValue::Bool(changed)))
            }
            Op::AddAll => {
                let items = args[0].list();
                let changed = !items.is_empty();
                state.extend_from_slice(items);
                Outcome::Ok(Some(RetValue::Bool(changed)))
            }
            Op::AddElement => {
                state.push(args[0].scalar());
                Outcome::Ok(None)
            }
            Op::Set => {
                let (i, e) = (args[0].scalar(), args[1].scalar());
                if i < 0 || i >= len {
                    return Outcome::Raised(ExceptionKind::IndexOutOfBounds);
                }
                let old = state[i as usize];
                state[i as usize] = e;
                Outcome::Ok(Some(RetValue::Element(old)))
            }
            Op::InsertElementAt => {
                let (e, i) = (args[0].scalar(), args[1].scalar());
                if i < 0 || i > len {
                    return Outcome::Raised(ExceptionKind::IndexOutOfBounds);
                }
                state.insert(i as usize, e);
                Outcome::Ok(None)
            }
            Op::SetElementAt => {
                let (e, i) = (args[0].scalar(), args[1].scalar());
                if i < 0 || i >= len {
                    return Outcome::Raised(ExceptionKind::IndexOutOfBounds);
                }
                state[i as usize] = e;
                Outcome::Ok(None)
            }
            Op::Capacity => {
                // Default capacity 10, doubling until the contents fit.
                let mut cap: i64 = 10;
                while cap < len {
                    cap *= 2;
                }
                Outcome::Ok(Some(RetValue::Int(cap)))
            }
            Op::CloneAll => Outcome::Ok(Some(RetValue::Collection(state.clone()))),
            Op::Contains => {
                let e = args[0].scalar();
                Outcome::Ok(Some(RetValue::Bool(state.contains(&e))))
            }
            Op::Get | Op::ElementAt => {
                let i = args[0].scalar();
                if state.is_empty() {
                    return Outcome::Raised(ExceptionKind::EmptyContainer);
                }
                if i < 0 || i >= len {
                    return Outcome::Raised(ExceptionKind::IndexOutOfBounds);
                }
                Outcome::Ok(Some(RetValue::Element(state[i as usize])))
            }
            Op::Clear | Op::RemoveAllElements => {
                state.clear();
                Outcome::Ok(None)
            }
            Op::RemoveAt => {
                let i = args[0].scalar();
                if state.is_empty() {
                    return Outcome::Raised(ExceptionKind::EmptyContainer);
                }
                if i < 0 || i >= len {
                    return Outcome::Raised(ExceptionKind::IndexOutOfBounds);
                }
                Outcome::Ok(Some(RetValue::Element(state.remove(i as usize))))
            }
            Op::RemoveObj | Op::RemoveElement => {
                // Remove the first (bottom-most) occurrence, if any.
                let e = args[0].scalar();
                match state.iter().position(|&v| v == e) {
                    Some(i) => {
                        state.remove(i);
                        Outcome::Ok(Some(RetValue::Bool(true)))
                    }
                    None => Outcome::Ok(Some(RetValue::Bool(false))),
                }
            }
            Op::RemoveAll => {
                let items = args[0].list();
                let before = state.len();
                state.retain(|v| !items.contains(v));
                Outcome::Ok(Some(RetValue::Bool(state.len() != before)))
            }
            Op::RemoveElementAt => {
                let i = args[0].scalar();
                if i < 0 || i >= len {
                    return Outcome::Raised(ExceptionKind::IndexOutOfBounds);
                }
                state.remove(i as usize);
                Outcome::Ok(None)
            }
            Op::RetainAll => {
                let items = args[0].list();
                let before = state.len();
                state.retain(|v| items.contains(v));
                Outcome::Ok(Some(RetValue::Bool(state.len() != before)))
            }
            Op::SetSize => {
                // Shrinks by truncation; grows by padding with 0.
                let n = args[0].scalar();
                if n < 0 {
                    return Outcome::Raised(ExceptionKind::IndexOutOfBounds);
                }
                state.resize(n as usize, 0);
                Outcome::Ok(None)
            }
            Op::Size => Outcome::Ok(Some(RetValue::Int(len))),
            Op::IsEmpty => Outcome::Ok(Some(RetValue::Bool(state.is_empty()))),
            Op::FirstElement => match state.first() {
                Some(&e) => Outcome::Ok(Some(RetValue::Element(e))),
                None => Outcome::Raised(ExceptionKind::EmptyContainer),
            },
            Op::LastElement => match state.last() {
                Some(&e) => Outcome::Ok(Some(RetValue::Element(e))),
                None => Outcome::Raised(ExceptionKind::EmptyContainer),
            },
            Op::IndexOf => {
                let e = args[0].scalar();
                let idx = state.iter().position(|&v| v == e).map_or(-1, |i| i as i64);
                Outcome::Ok(Some(RetValue::Int(idx)))
            }
        }
    }
}

/// Build the modeled stack API: the five stack operations plus the vector
/// operations they inherit, in a fixed declaration order.
pub fn stack_api() -> SubjectApi {
    use ParamKind::{Collection, Element, Int};
    let mut methods = vec![
        sig("Stack", "push", vec![Element], RetKind::Element, Op::Push),
        sig("Stack", "pop", vec![], RetKind::Element, Op::Pop),
        sig("Stack", "peek", vec![], RetKind::Element, Op::Peek),
        sig("Stack", "empty", vec![], RetKind::Bool, Op::Empty),
        sig("Stack", "search", vec![Element], RetKind::Int, Op::Search),
        sig(
            "Vector",
            "add",
            vec![Int, Element],
            RetKind::None,
            Op::AddAt,
        ),
        sig("Vector", "add", vec![Element], RetKind::Bool, Op::Add),
        sig(
            "Vector",
            "addAll",
            vec![Int, Collection],
            RetKind::Bool,
            Op::AddAllAt,
        ),
        sig(
            "Vector",
            "addAll",
            vec![Collection],
            RetKind::Bool,
            Op::AddAll,
        ),
        sig(
            "Vector",
            "addElement",
            vec![Element],
            RetKind::None,
            Op::AddElement,
        ),
        sig(
            "Vector",
            "set",
            vec![Int, Element],
            RetKind::Element,
            Op::Set,
        ),
        sig(
            "Vector",
            "insertElementAt",
            vec![Element, Int],
            RetKind::None,
            Op::InsertElementAt,
        ),
        sig(
            "Vector",
            "setElementAt",
            vec![Element, Int],
            RetKind::None,
            Op::SetElementAt,
        ),
        sig("Vector", "capacity", vec![], RetKind::Int, Op::Capacity),
        sig("Vector", "clone", vec![], RetKind::Collection, Op::CloneAll),
        sig(
            "Vector",
            "contains",
            vec![Element],
            RetKind::Bool,
            Op::Contains,
        ),
        sig("Vector", "get", vec![Int], RetKind::Element, Op::Get),
        sig("Vector", "clear", vec![], RetKind::None, Op::Clear),
        sig(
            "Vector",
            "remove",
            vec![Int],
            RetKind::Element,
            Op::RemoveAt,
        ),
        sig(
            "Vector",
            "remove",
            vec![Element],
            RetKind::Bool,
            Op::RemoveObj,
        ),
        sig(
            "Vector",
            "removeAll",
            vec![Collection],
            RetKind::Bool,
            Op::RemoveAll,
        ),
        sig(
            "Vector",
            "removeAllElements",
            vec![],
            RetKind::None,
            Op::RemoveAllElements,
        ),
        sig(
            "Vector",
            "removeElement",
            vec![Element],
            RetKind::Bool,
            Op::RemoveElement,
        ),
        sig(
            "Vector",
            "removeElementAt",
            vec![Int],
            RetKind::None,
            Op::RemoveElementAt,
        ),
        sig(
            "Vector",
            "retainAll",
            vec![Collection],
            RetKind::Bool,
            Op::RetainAll,
        ),
        sig("Vector", "setSize", vec![Int], RetKind::None, Op::SetSize),
        sig("Vector", "size", vec![], RetKind::Int, Op::Size),
        sig("Vector", "isEmpty", vec![], RetKind::Bool, Op::IsEmpty),
        sig(
            "Vector",
            "elementAt",
            vec![Int],
            RetKind::Element,
            Op::ElementAt,
        ),
        sig(
            "Vector",
            "firstElement",
            vec![],
            RetKind::Element,
            Op::FirstElement,
        ),
        sig(
            "Vector",
            "lastElement",
            vec![],
            RetKind::Element,
            Op::LastElement,
        ),
        sig(
            "Vector",
            "indexOf",
            vec![Element],
            RetKind::Int,
            Op::IndexOf,
        ),
    ];
    mark_required_casts(&mut methods);
    SubjectApi {
        name: "stack",
        ctor: "Stack",
        methods,
    }
}

fn sig(
    owner: &'static str,
    name: &'static str,
    params: Vec<ParamKind>,
    ret: RetKind,
    op: Op,
) -> MethodSig {
    let needs_element_cast = vec![false; params.len()];
    MethodSig {
        owner,
        name,
        params,
        ret,
        needs_element_cast,
        op,
    }
}

/// Flag every `Element` parameter that is shadowed by an `Int` parameter in a
/// same-name, same-arity overload whose other positions accept the same
/// argument shapes. A bare integer literal at such a position would resolve
/// to the `Int` overload, so printing the `Element` one needs an `(Object)`
/// cast.
fn mark_required_casts(methods: &mut [MethodSig]) {
    let snapshot: Vec<MethodSig> = methods.to_vec();
    for m in methods.iter_mut() {
        for j in 0..m.params.len() {
            if m.params[j] != ParamKind::Element {
                continue;
            }
            let shadowed = snapshot.iter().any(|o| {
                o.name == m.name
                    && o.arity() == m.arity()
                    && o.params[j] == ParamKind::Int
                    && o.params
                        .iter()
                        .zip(&m.params)
                        .enumerate()
                        .all(|(k, (a, b))| k == j || same_shape(*a, *b))
            });
            if shadowed {
                m.needs_element_cast[j] = true;
            }
        }
    }
}

/// Whether two parameter kinds accept the same bare argument shapes.
fn same_shape(a: ParamKind, b: ParamKind) -> bool {
    let scalar = |k| matches!(k, ParamKind::Element | ParamKind::Int);
    (scalar(a) && scalar(b)) || (a == ParamKind::Collection && b == ParamKind::Collection)
}
