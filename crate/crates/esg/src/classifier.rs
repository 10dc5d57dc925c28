//! Phase 1: decide which API methods the random generator may call.
//!
//! Two families of methods are removed from the generator's menu:
//!
//! * **Pure observers** never change the receiver, so calling them cannot
//!   move the container toward an interesting state. Purity is established
//!   dynamically: each method is probed against a battery of states and
//!   arguments, and counts as pure only if no probe ever observes a state
//!   change. A raised exception is fine — in this API every exception is
//!   checked before mutation, so a raising probe simply contributes no
//!   impurity evidence.
//! * **Decreasing methods** shrink the container. Scenarios need containers
//!   that grow to a useful size, and a generator that may call `clear()` or
//!   `pop()` keeps throwing its own work away. Decreasing methods are
//!   identified either by the same probing (probe mode), by a name blacklist
//!   (blacklist mode), or by the union of both.
//!
//! The *target* method — the one every scenario must end with — is always
//! kept, even if it is pure, decreasing, or blacklisted.
//!
//! Probing also tags the surviving methods as *increasing* (the element count
//! grows) or *node-mutating* (the count is stable but contents change, e.g.
//! `set(int,Object)`). A method with mixed evidence, like `setSize(int)`
//! which can both pad and truncate, counts as decreasing: one shrinking probe
//! outweighs any number of growing ones.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::subject::api::{ArgValue, MethodSig, ParamKind, SubjectApi};

/// Behavior class of a method, as established by probing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodClass {
    /// No probe ever observed a state change.
    Pure,
    /// Some probe grew the element count; none shrank it.
    Increasing,
    /// Some probe shrank the element count.
    Decreasing,
    /// Element count stable, but contents changed.
    NodeMutating,
}

/// How decreasing methods are identified when building the allowed list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterMode {
    /// Remove methods whose simple name matches the blacklist.
    Blacklist,
    /// Remove methods that probing classified as decreasing.
    Probe,
    /// Remove the union of both identifications.
    Both,
}

impl FromStr for FilterMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "blacklist" => Ok(FilterMode::Blacklist),
            "probe" => Ok(FilterMode::Probe),
            "both" => Ok(FilterMode::Both),
            other => Err(format!(
                "unknown filter mode `{other}` (expected blacklist, probe, or both)"
            )),
        }
    }
}

impl fmt::Display for FilterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterMode::Blacklist => write!(f, "blacklist"),
            FilterMode::Probe => write!(f, "probe"),
            FilterMode::Both => write!(f, "both"),
        }
    }
}

/// A list of name patterns identifying methods to remove.
///
/// Matching is a case-insensitive substring test against the *simple* method
/// name, so the pattern `remove` hits every `remove*` overload and relative.
/// The first matching pattern in file order wins, which is only visible in
/// reporting — any match removes the method.
#[derive(Debug, Clone, Default)]
pub struct Blacklist {
    patterns: Vec<String>,
    lowered: Vec<String>,
}

/// A malformed blacklist definition.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlacklistError {
    /// A pattern with no characters can never be meant.
    #[error("line {line}: empty blacklist pattern")]
    EmptyPattern {
        /// 1-based source line.
        line: usize,
    },
    /// The same pattern twice is almost certainly an editing mistake.
    #[error("line {line}: duplicate blacklist pattern `{pattern}`")]
    DuplicatePattern {
        /// 1-based source line.
        line: usize,
        /// The repeated pattern.
        pattern: String,
    },
}

impl Blacklist {
    /// A blacklist that matches nothing.
    pub fn empty() -> Self {
        Blacklist::default()
    }

    /// Build from a list of patterns. Patterns must be non-empty and unique
    /// (case-insensitively, since matching is case-insensitive).
    pub fn new<I, S>(patterns: I) -> Result<Self, BlacklistError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let numbered = patterns
            .into_iter()
            .enumerate()
            .map(|(i, p)| (i + 1, p.into()));
        Self::from_numbered(numbered)
    }

    /// Parse the on-disk format: UTF-8 text, one pattern per line, `#` starts
    /// a comment, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, BlacklistError> {
        let numbered = text.lines().enumerate().filter_map(|(i, raw)| {
            let code = match raw.find('#') {
                Some(cut) => &raw[..cut],
                None => raw,
            };
            let trimmed = code.trim();
            if trimmed.is_empty() && code.trim_start().len() == code.len() && raw.contains('#') {
                // A pure comment line.
                return None;
            }
            if trimmed.is_empty() {
                return None;
            }
            Some((i + 1, trimmed.to_string()))
        });
        Self::from_numbered(numbered)
    }

    fn from_numbered<I>(patterns: I) -> Result<Self, BlacklistError>
    where
        I: IntoIterator<Item = (usize, String)>,
    {
        let mut out = Blacklist::default();
        for (line, pattern) in patterns {
            if pattern.is_empty() {
                return Err(BlacklistError::EmptyPattern { line });
            }
            let lowered = pattern.to_lowercase();
            if out.lowered.contains(&lowered) {
                return Err(BlacklistError::DuplicatePattern { line, pattern });
            }
            out.patterns.push(pattern);
            out.lowered.push(lowered);
        }
        Ok(out)
    }

    /// The patterns, in file order.
    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    /// The first pattern (in file order) whose text occurs in the simple
    /// method name, ignoring case.
    pub fn matches(&self, simple_name: &str) -> Option<&str> {
        let name = simple_name.to_lowercase();
        self.lowered
            .iter()
            .position(|p| name.contains(p.as_str()))
            .map(|i| self.patterns[i].as_str())
    }
}

/// Settings for classification and allowed-list construction.
#[derive(Debug, Clone)]
pub struct ClassifyConfig {
    /// Number of random probes per method, on top of the mandatory battery.
    pub probes: usize,
    /// Seed for the random probes.
    pub seed: u64,
    /// How decreasing methods are identified.
    pub mode: FilterMode,
    /// Patterns for blacklist identification (ignored in probe mode).
    pub blacklist: Blacklist,
}

impl ClassifyConfig {
    /// Defaults: 64 random probes on top of the mandatory battery.
    pub fn new(mode: FilterMode, blacklist: Blacklist, seed: u64) -> Self {
        ClassifyConfig {
            probes: 64,
            seed,
            mode,
            blacklist,
        }
    }
}

/// Everything phase 1 decided, with methods listed by full signature in
/// declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyReport {
    /// API the classification ran against.
    pub api: String,
    /// Target method signature.
    pub target: String,
    /// How decreasing methods were identified.
    pub mode: FilterMode,
    /// Methods probing found pure.
    pub pure: Vec<String>,
    /// Methods probing found increasing.
    pub increasing: Vec<String>,
    /// Methods probing found node-mutating.
    pub node_mutating: Vec<String>,
    /// Methods identified for removal as decreasing under `mode`.
    pub decreasing: Vec<String>,
    /// The generator's menu: declaration order, pure and decreasing methods
    /// removed, the target always present.
    pub allowed: Vec<String>,
}

/// All public methods of the API, in declaration order.
pub fn extract_methods(api: &SubjectApi) -> Vec<MethodSig> {
    api.methods.clone()
}

/// True when probing finds no state change for this method.
pub fn probe_purity(api: &SubjectApi, method: &MethodSig, probes: usize, seed: u64) -> bool {
    classify_method(api, method, probes, seed) == MethodClass::Pure
}

/// Probe one method and classify its effect on the receiver.
pub fn classify_method(
    api: &SubjectApi,
    method: &MethodSig,
    probes: usize,
    seed: u64,
) -> MethodClass {
    let mut increased = false;
    let mut decreased = false;
    let mut mutated = false;
    let mut note = |before: &[i64], after: &[i64]| {
        if before != after {
            if after.len() > before.len() {
                increased = true;
            } else if after.len() < before.len() {
                decreased = true;
            } else {
                mutated = true;
            }
        }
    };

    // The mandatory battery: edge states crossed with a deterministic
    // argument grid, so classification cannot hinge on random luck.
    for state in mandatory_states() {
        for args in argument_grid(method, &state) {
            let mut scratch = state.clone();
            let _ = api.apply(method, &mut scratch, &args);
            note(&state, &scratch);
        }
    }

    // Random probes on top: they can only add evidence, never retract it.
    let mut rng = probe_rng(seed, method);
    for _ in 0..probes {
        let len = rng.gen_range(0..=8usize);
        let state: Vec<i64> = (0..len).map(|_| rng.gen_range(-100..100)).collect();
        let args: Vec<ArgValue> = method
            .params
            .iter()
            .map(|&p| random_arg(p, &state, &mut rng))
            .collect();
        let mut scratch = state.clone();
        let _ = api.apply(method, &mut scratch, &args);
        note(&state, &scratch);
    }

    if decreased {
        // One shrinking probe outweighs everything else (setSize can both
        // pad and truncate; it must count as decreasing).
        MethodClass::Decreasing
    } else if increased {
        MethodClass::Increasing
    } else if mutated {
        MethodClass::NodeMutating
    } else {
        MethodClass::Pure
    }
}

/// Per-method RNG, derived from the run seed and the signature so results do
/// not depend on probing order.
fn probe_rng(seed: u64, method: &MethodSig) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in method.signature().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn mandatory_states() -> Vec<Vec<i64>> {
    vec![vec![], vec![7], vec![3, -1, 0, 7, 10, 42, 5, 100]]
}

/// Value guaranteed to be absent from every mandatory state.
const ABSENT: i64 = 999;

/// Deterministic argument options for one parameter against one state.
fn grid_options(param: ParamKind, state: &[i64]) -> Vec<ArgValue> {
    let len = state.len() as i64;
    let present = state.first().copied().unwrap_or(7);
    match param {
        ParamKind::Element => vec![ArgValue::Scalar(present), ArgValue::Scalar(ABSENT)],
        ParamKind::Int => {
            let mut opts = vec![-1, 0, len - 1, len, len + 2];
            opts.sort_unstable();
            opts.dedup();
            opts.into_iter().map(ArgValue::Scalar).collect()
        }
        ParamKind::Collection => vec![
            ArgValue::List(vec![]),
            ArgValue::List(vec![present, ABSENT]),
            ArgValue::List(vec![ABSENT]),
        ],
    }
}

/// Cartesian product of [`grid_options`] across all parameters.
fn argument_grid(method: &MethodSig, state: &[i64]) -> Vec<Vec<ArgValue>> {
    let mut combos: Vec<Vec<ArgValue>> = vec![vec![]];
    for &param in &method.params {
        let options = grid_options(param, state);
        combos = combos
            .into_iter()
            .flat_map(|base| {
                options.iter().map(move |opt| {
                    let mut next = base.clone();
                    next.push(opt.clone());
                    next
                })
            })
            .collect();
    }
    combos
}

fn random_arg(param: ParamKind, state: &[i64], rng: &mut ChaCha8Rng) -> ArgValue {
    match param {
        ParamKind::Element => {
            if !state.is_empty() && rng.gen_bool(0.5) {
                ArgValue::Scalar(state[rng.gen_range(0..state.len())])
            } else {
                ArgValue::Scalar(rng.gen_range(-100..100))
            }
        }
        ParamKind::Int => ArgValue::Scalar(rng.gen_range(-2..=(state.len() as i64 + 2))),
        ParamKind::Collection => {
            let n = rng.gen_range(0..=3usize);
            ArgValue::List((0..n).map(|_| rng.gen_range(-100..100)).collect())
        }
    }
}

/// Run phase 1: probe every method, identify decreasing methods per the
/// mode, and build the allowed list.
///
/// `target` is an index into `api.methods`; the target always appears in the
/// allowed list at its declaration position, whatever it was classified as.
pub fn classify(api: &SubjectApi, target: usize, cfg: &ClassifyConfig) -> ClassifyReport {
    let classes: Vec<MethodClass> = api
        .methods
        .iter()
        .map(|m| classify_method(api, m, cfg.probes, cfg.seed))
        .collect();

    let blacklisted: Vec<bool> = api
        .methods
        .iter()
        .map(|m| cfg.blacklist.matches(m.name).is_some())
        .collect();

    let removed_as_decreasing = |i: usize| -> bool {
        match cfg.mode {
            FilterMode::Blacklist => blacklisted[i],
            FilterMode::Probe => classes[i] == MethodClass::Decreasing,
            FilterMode::Both => blacklisted[i] || classes[i] == MethodClass::Decreasing,
        }
    };

    let by_class = |want: MethodClass| -> Vec<String> {
        api.methods
            .iter()
            .zip(&classes)
            .filter(|(_, &c)| c == want)
            .map(|(m, _)| m.signature())
            .collect()
    };

    let decreasing: Vec<String> = (0..api.methods.len())
        .filter(|&i| removed_as_decreasing(i))
        .map(|i| api.methods[i].signature())
        .collect();

    let allowed: Vec<String> = (0..api.methods.len())
        .filter(|&i| i == target || (classes[i] != MethodClass::Pure && !removed_as_decreasing(i)))
        .map(|i| api.methods[i].signature())
        .collect();

    ClassifyReport {
        api: api.name.to_string(),
        target: api.methods[target].signature(),
        mode: cfg.mode,
        pure: by_class(MethodClass::Pure),
        increasing: by_class(MethodClass::Increasing),
        node_mutating: by_class(MethodClass::NodeMutating),
        decreasing,
        allowed,
    }
}

/// The allowed methods as indices into `api.methods`, in declaration order.
pub fn allowed_indices(api: &SubjectApi, report: &ClassifyReport) -> Vec<usize> {
    report
        .allowed
        .iter()
        .map(|s| api.find(s).expect("allowed list holds valid signatures"))
        .collect()
}
