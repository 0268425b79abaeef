//! MDP data model, labelings, window objective selectors and validation.
//!
//! States and actions are interned strings mapped to dense indices in
//! first-appearance order. Every index-based tie-break elsewhere in the crate
//! refers to these indices.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::Rational;

/// Which labeling an objective reads: action weights or state priorities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Mp,
    Par,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Kind::Mp => f.write_str("mp"),
            Kind::Par => f.write_str("par"),
        }
    }
}

impl FromStr for Kind {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mp" => Ok(Kind::Mp),
            "par" => Ok(Kind::Par),
            other => Err(SpecError::UnknownKind(other.to_string())),
        }
    }
}

/// Window objective variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Direct fixed window: every window, from the first position on, closes
    /// within `lambda` steps.
    Dfw,
    /// Fixed window: some suffix satisfies the direct fixed window objective.
    Fw,
    /// Bounded window: the fixed window objective holds for some `lambda`.
    Bw,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Dfw => f.write_str("dfw"),
            Variant::Fw => f.write_str("fw"),
            Variant::Bw => f.write_str("bw"),
        }
    }
}

impl FromStr for Variant {
    type Err = SpecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dfw" => Ok(Variant::Dfw),
            "fw" => Ok(Variant::Fw),
            "bw" => Ok(Variant::Bw),
            other => Err(SpecError::UnknownVariant(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("unknown objective kind `{0}` (expected mp or par)")]
    UnknownKind(String),
    #[error("unknown window variant `{0}` (expected dfw, fw or bw)")]
    UnknownVariant(String),
    #[error("malformed objective `{0}` (expected <variant>-<kind>, e.g. fw-par)")]
    MalformedObjective(String),
    #[error("objective {0} requires a window size")]
    MissingLambda(Variant),
    #[error("bounded window objectives take no window size")]
    UnexpectedLambda,
    #[error("window size must be at least 1")]
    ZeroLambda,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("threshold {0} is outside [0, 1]")]
    ThresholdOutOfRange(Rational),
    #[error("objective kind {spec} does not match the model labeling ({model})")]
    KindMismatch { spec: Kind, model: Kind },
}

/// Objective selector: variant, kind and window size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WindowSpec {
    pub variant: Variant,
    pub kind: Kind,
    pub lambda: Option<u32>,
}

impl WindowSpec {
    pub fn new(variant: Variant, kind: Kind, lambda: Option<u32>) -> Result<Self, SpecError> {
        match (variant, lambda) {
            (Variant::Bw, Some(_)) => Err(SpecError::UnexpectedLambda),
            (Variant::Bw, None) => Ok(Self { variant, kind, lambda }),
            (v, None) => Err(SpecError::MissingLambda(v)),
            (_, Some(0)) => Err(SpecError::ZeroLambda),
            (_, Some(_)) => Ok(Self { variant, kind, lambda }),
        }
    }

    pub fn dfw(kind: Kind, lambda: u32) -> Self {
        Self::new(Variant::Dfw, kind, Some(lambda)).expect("lambda must be positive")
    }

    pub fn fw(kind: Kind, lambda: u32) -> Self {
        Self::new(Variant::Fw, kind, Some(lambda)).expect("lambda must be positive")
    }

    pub fn bw(kind: Kind) -> Self {
        Self { variant: Variant::Bw, kind, lambda: None }
    }

    /// Parses `<variant>-<kind>` (e.g. `dfw-par`) together with an optional
    /// window size.
    pub fn parse_objective(objective: &str, lambda: Option<u32>) -> Result<Self, SpecError> {
        let (variant, kind) = objective
            .split_once('-')
            .ok_or_else(|| SpecError::MalformedObjective(objective.to_string()))?;
        Self::new(variant.parse()?, kind.parse()?, lambda)
    }

    /// Window size; panics for bounded objectives.
    pub fn window(&self) -> u32 {
        self.lambda.expect("bounded window objectives have no fixed window size")
    }
}

impl fmt::Display for WindowSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.variant, self.kind)?;
        if let Some(l) = self.lambda {
            write!(f, "(lambda={l})")?;
        }
        Ok(())
    }
}

/// A threshold query: does some strategy reach `threshold` from `initial_state`?
#[derive(Clone, Debug, PartialEq)]
pub struct Query {
    pub initial_state: usize,
    pub threshold: Rational,
    pub spec: WindowSpec,
}

impl Query {
    pub fn new(m: &Mdp, state: &str, threshold: Rational, spec: WindowSpec) -> Result<Self, SpecError> {
        let initial_state = m
            .state_index(state)
            .ok_or_else(|| SpecError::UnknownState(state.to_string()))?;
        if threshold < Rational::zero() || threshold > Rational::one() {
            return Err(SpecError::ThresholdOutOfRange(threshold));
        }
        if spec.kind != m.kind() {
            return Err(SpecError::KindMismatch { spec: spec.kind, model: m.kind() });
        }
        Ok(Self { initial_state, threshold, spec })
    }
}

/// Exactly one labeling per model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Labeling {
    /// Integer weight per action of the alphabet.
    Weights(Vec<i64>),
    /// Natural priority per state.
    Priorities(Vec<u32>),
}

impl Labeling {
    pub fn kind(&self) -> Kind {
        match self {
            Labeling::Weights(_) => Kind::Mp,
            Labeling::Priorities(_) => Kind::Par,
        }
    }
}

/// One enabled action of a state together with its distribution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Choice {
    pub action: usize,
    pub successors: Vec<(usize, Rational)>,
}

impl Choice {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.successors.iter().map(|(t, _)| *t)
    }
}

/// A finite, deadlock-free MDP with rational transition probabilities.
///
/// Immutable once built; construct through [`validate_mdp`], [`Mdp::from_parts`]
/// or [`restrict`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mdp {
    state_names: Vec<String>,
    action_names: Vec<String>,
    choices: Vec<Vec<Choice>>,
    labeling: Labeling,
    state_lookup: HashMap<String, usize>,
    action_lookup: HashMap<String, usize>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("model has no states")]
    NoStates,
    #[error("state `{0}` is declared twice")]
    DuplicateState(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("state `{0}` has no enabled action")]
    DeadlockState(String),
    #[error("action `{action}` is defined twice in state `{state}`")]
    DuplicateAction { state: String, action: String },
    #[error("successor `{target}` is listed twice for `{state}`/`{action}`")]
    DuplicateSuccessor { state: String, action: String, target: String },
    #[error("distribution of `{state}`/`{action}` sums to {sum}, expected 1")]
    DistributionSum { state: String, action: String, sum: Rational },
    #[error("distribution of `{state}`/`{action}` has empty support")]
    EmptySupport { state: String, action: String },
    #[error("probability {probability} of `{state}`/`{action}` -> `{target}` is not positive")]
    NegativeOrZeroProbability { state: String, action: String, target: String, probability: Rational },
    #[error("probability {probability} of `{state}`/`{action}` -> `{target}` exceeds 1")]
    ProbabilityAboveOne { state: String, action: String, target: String, probability: Rational },
    #[error("mixed or missing labeling: {0}")]
    MixedLabeling(String),
    #[error("action `{0}` carries different weights in different states")]
    InconsistentWeight(String),
    #[error("malformed model structure: {0}")]
    Malformed(String),
}

impl Mdp {
    /// Builds a model from dense parts and checks every invariant.
    pub fn from_parts(
        state_names: Vec<String>,
        action_names: Vec<String>,
        choices: Vec<Vec<Choice>>,
        labeling: Labeling,
    ) -> Result<Self, ModelError> {
        if state_names.is_empty() {
            return Err(ModelError::NoStates);
        }
        if choices.len() != state_names.len() {
            return Err(ModelError::Malformed("choice table does not match state count".into()));
        }
        let mut state_lookup = HashMap::with_capacity(state_names.len());
        for (i, name) in state_names.iter().enumerate() {
            if state_lookup.insert(name.clone(), i).is_some() {
                return Err(ModelError::DuplicateState(name.clone()));
            }
        }
        let mut action_lookup = HashMap::with_capacity(action_names.len());
        for (i, name) in action_names.iter().enumerate() {
            if action_lookup.insert(name.clone(), i).is_some() {
                return Err(ModelError::Malformed(format!("action `{name}` interned twice")));
            }
        }
        match &labeling {
            Labeling::Weights(w) if w.len() != action_names.len() => {
                return Err(ModelError::MixedLabeling("weight table does not cover the action alphabet".into()))
            }
            Labeling::Priorities(p) if p.len() != state_names.len() => {
                return Err(ModelError::MixedLabeling("priority table does not cover every state".into()))
            }
            _ => {}
        }
        let n = state_names.len();
        for (s, row) in choices.iter().enumerate() {
            if row.is_empty() {
                return Err(ModelError::DeadlockState(state_names[s].clone()));
            }
            let mut seen = BTreeSet::new();
            for choice in row {
                if choice.action >= action_names.len() {
                    return Err(ModelError::Malformed(format!("action index {} out of range", choice.action)));
                }
                let state = || state_names[s].clone();
                let action = || action_names[choice.action].clone();
                if !seen.insert(choice.action) {
                    return Err(ModelError::DuplicateAction { state: state(), action: action() });
                }
                if choice.successors.is_empty() {
                    return Err(ModelError::EmptySupport { state: state(), action: action() });
                }
                let mut targets = BTreeSet::new();
                let mut sum = Rational::zero();
                for (t, p) in &choice.successors {
                    if *t >= n {
                        return Err(ModelError::Malformed(format!("successor index {t} out of range")));
                    }
                    let target = state_names[*t].clone();
                    if !targets.insert(*t) {
                        return Err(ModelError::DuplicateSuccessor { state: state(), action: action(), target });
                    }
                    if *p <= Rational::zero() {
                        return Err(ModelError::NegativeOrZeroProbability {
                            state: state(),
                            action: action(),
                            target,
                            probability: p.clone(),
                        });
                    }
                    if *p > Rational::one() {
                        return Err(ModelError::ProbabilityAboveOne {
                            state: state(),
                            action: action(),
                            target,
                            probability: p.clone(),
                        });
                    }
                    sum += p;
                }
                if !sum.is_one() {
                    return Err(ModelError::DistributionSum { state: state(), action: action(), sum });
                }
            }
        }
        Ok(Self { state_names, action_names, choices, labeling, state_lookup, action_lookup })
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_actions(&self) -> usize {
        self.action_names.len()
    }

    pub fn state_name(&self, s: usize) -> &str {
        &self.state_names[s]
    }

    pub fn action_name(&self, a: usize) -> &str {
        &self.action_names[a]
    }

    pub fn state_names(&self) -> &[String] {
        &self.state_names
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_lookup.get(name).copied()
    }

    pub fn action_index(&self, name: &str) -> Option<usize> {
        self.action_lookup.get(name).copied()
    }

    /// Enabled actions of `s` with their distributions, in declaration order.
    pub fn choices(&self, s: usize) -> &[Choice] {
        &self.choices[s]
    }

    pub fn choice(&self, s: usize, action: usize) -> Option<&Choice> {
        self.choices[s].iter().find(|c| c.action == action)
    }

    pub fn is_enabled(&self, s: usize, action: usize) -> bool {
        self.choice(s, action).is_some()
    }

    pub fn enabled(&self, s: usize) -> impl Iterator<Item = usize> + '_ {
        self.choices[s].iter().map(|c| c.action)
    }

    /// Enabled action of `s` with the smallest action index.
    pub fn min_action(&self, s: usize) -> usize {
        self.enabled(s).min().expect("deadlock-free")
    }

    pub fn labeling(&self) -> &Labeling {
        &self.labeling
    }

    pub fn kind(&self) -> Kind {
        self.labeling.kind()
    }

    /// Weight of action `a`; `None` for priority-labeled models.
    pub fn weight(&self, a: usize) -> Option<i64> {
        match &self.labeling {
            Labeling::Weights(w) => Some(w[a]),
            Labeling::Priorities(_) => None,
        }
    }

    /// Priority of state `s`; `None` for weight-labeled models.
    pub fn priority(&self, s: usize) -> Option<u32> {
        match &self.labeling {
            Labeling::Priorities(p) => Some(p[s]),
            Labeling::Weights(_) => None,
        }
    }

    /// Largest absolute weight over enabled actions (0 for priority models).
    pub fn max_abs_weight(&self) -> i64 {
        match &self.labeling {
            Labeling::Weights(w) => self
                .choices
                .iter()
                .flatten()
                .map(|c| w[c.action].abs())
                .max()
                .unwrap_or(0),
            Labeling::Priorities(_) => 0,
        }
    }

    /// Largest priority (0 for weight models).
    pub fn max_priority(&self) -> u32 {
        match &self.labeling {
            Labeling::Priorities(p) => p.iter().copied().max().unwrap_or(0),
            Labeling::Weights(_) => 0,
        }
    }

    pub fn is_markov_chain(&self) -> bool {
        self.choices.iter().all(|row| row.len() == 1)
    }

    pub fn num_transitions(&self) -> usize {
        self.choices.iter().flatten().map(|c| c.successors.len()).sum()
    }

    /// Every state with every enabled action.
    pub fn full_selection(&self) -> Selection {
        (0..self.num_states())
            .map(|s| (s, self.enabled(s).collect()))
            .collect()
    }

    pub fn check_kind(&self, kind: Kind) -> Result<(), SpecError> {
        if self.kind() == kind {
            Ok(())
        } else {
            Err(SpecError::KindMismatch { spec: kind, model: self.kind() })
        }
    }

    /// Rebuilds an unchecked description from this model (inverse of
    /// [`validate_mdp`] up to line numbers).
    pub fn to_raw(&self) -> RawMdp {
        let states = (0..self.num_states())
            .map(|s| RawState { name: self.state_names[s].clone(), priority: self.priority(s), line: None })
            .collect();
        let actions = (0..self.num_states())
            .flat_map(|s| {
                self.choices[s].iter().map(move |c| RawAction {
                    state: self.state_names[s].clone(),
                    name: self.action_names[c.action].clone(),
                    weight: self.weight(c.action),
                    successors: c
                        .successors
                        .iter()
                        .map(|(t, p)| RawSuccessor {
                            target: self.state_names[*t].clone(),
                            probability: p.clone(),
                            line: None,
                        })
                        .collect(),
                    line: None,
                })
            })
            .collect();
        RawMdp { kind: self.kind(), states, actions }
    }
}

/// Unchecked model description, as produced by a parser.
#[derive(Clone, Debug, PartialEq)]
pub struct RawMdp {
    pub kind: Kind,
    pub states: Vec<RawState>,
    pub actions: Vec<RawAction>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawState {
    pub name: String,
    pub priority: Option<u32>,
    pub line: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawAction {
    pub state: String,
    pub name: String,
    pub weight: Option<i64>,
    pub successors: Vec<RawSuccessor>,
    pub line: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RawSuccessor {
    pub target: String,
    pub probability: Rational,
    pub line: Option<usize>,
}

/// A model error together with the source line it originates from, if known.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{}{error}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ValidationError {
    pub line: Option<usize>,
    pub error: ModelError,
}

fn at(line: Option<usize>, error: ModelError) -> ValidationError {
    ValidationError { line, error }
}

/// Checks an unchecked description and interns it into an [`Mdp`].
///
/// States keep their declaration order; actions are interned in order of first
/// appearance among the action blocks.
pub fn validate_mdp(raw: &RawMdp) -> Result<Mdp, ValidationError> {
    if raw.states.is_empty() {
        return Err(at(None, ModelError::NoStates));
    }
    let mut state_lookup: HashMap<&str, usize> = HashMap::new();
    let mut priorities = Vec::with_capacity(raw.states.len());
    for st in &raw.states {
        if state_lookup.insert(st.name.as_str(), state_lookup.len()).is_some() {
            return Err(at(st.line, ModelError::DuplicateState(st.name.clone())));
        }
        match (raw.kind, st.priority) {
            (Kind::Par, Some(p)) => priorities.push(p),
            (Kind::Par, None) => {
                return Err(at(st.line, ModelError::MixedLabeling(format!("state `{}` has no priority", st.name))))
            }
            (Kind::Mp, Some(_)) => {
                return Err(at(
                    st.line,
                    ModelError::MixedLabeling(format!("state `{}` has a priority in a weighted model", st.name)),
                ))
            }
            (Kind::Mp, None) => {}
        }
    }

    let mut action_names: Vec<String> = Vec::new();
    let mut action_lookup: HashMap<&str, usize> = HashMap::new();
    let mut weights: Vec<Option<i64>> = Vec::new();
    let mut choices: Vec<Vec<Choice>> = vec![Vec::new(); raw.states.len()];
    for act in &raw.actions {
        let s = *state_lookup
            .get(act.state.as_str())
            .ok_or_else(|| at(act.line, ModelError::UnknownState(act.state.clone())))?;
        let a = *action_lookup.entry(act.name.as_str()).or_insert_with(|| {
            action_names.push(act.name.clone());
            weights.push(None);
            action_names.len() - 1
        });
        match (raw.kind, act.weight) {
            (Kind::Mp, Some(w)) => match weights[a] {
                Some(prev) if prev != w => {
                    return Err(at(act.line, ModelError::InconsistentWeight(act.name.clone())))
                }
                _ => weights[a] = Some(w),
            },
            (Kind::Mp, None) => {
                return Err(at(act.line, ModelError::MixedLabeling(format!("action `{}` has no weight", act.name))))
            }
            (Kind::Par, Some(_)) => {
                return Err(at(
                    act.line,
                    ModelError::MixedLabeling(format!("action `{}` has a weight in a priority model", act.name)),
                ))
            }
            (Kind::Par, None) => {}
        }
        if choices[s].iter().any(|c| c.action == a) {
            return Err(at(
                act.line,
                ModelError::DuplicateAction { state: act.state.clone(), action: act.name.clone() },
            ));
        }
        if act.successors.is_empty() {
            return Err(at(act.line, ModelError::EmptySupport { state: act.state.clone(), action: act.name.clone() }));
        }
        let mut successors = Vec::with_capacity(act.successors.len());
        let mut sum = Rational::zero();
        for succ in &act.successors {
            let t = *state_lookup
                .get(succ.target.as_str())
                .ok_or_else(|| at(succ.line, ModelError::UnknownState(succ.target.clone())))?;
            let describe = || (act.state.clone(), act.name.clone(), succ.target.clone(), succ.probability.clone());
            if succ.probability <= Rational::zero() {
                let (state, action, target, probability) = describe();
                return Err(at(succ.line, ModelError::NegativeOrZeroProbability { state, action, target, probability }));
            }
            if succ.probability > Rational::one() {
                let (state, action, target, probability) = describe();
                return Err(at(succ.line, ModelError::ProbabilityAboveOne { state, action, target, probability }));
            }
            if successors.iter().any(|(u, _)| *u == t) {
                return Err(at(
                    succ.line,
                    ModelError::DuplicateSuccessor {
                        state: act.state.clone(),
                        action: act.name.clone(),
                        target: succ.target.clone(),
                    },
                ));
            }
            sum += &succ.probability;
            successors.push((t, succ.probability.clone()));
        }
        if !sum.is_one() {
            return Err(at(
                act.line,
                ModelError::DistributionSum { state: act.state.clone(), action: act.name.clone(), sum },
            ));
        }
        choices[s].push(Choice { action: a, successors });
    }
    for (s, row) in choices.iter().enumerate() {
        if row.is_empty() {
            return Err(at(raw.states[s].line, ModelError::DeadlockState(raw.states[s].name.clone())));
        }
    }

    let labeling = match raw.kind {
        Kind::Par => Labeling::Priorities(priorities),
        Kind::Mp => Labeling::Weights(weights.into_iter().map(|w| w.unwrap_or(0)).collect()),
    };
    let state_names = raw.states.iter().map(|s| s.name.clone()).collect();
    Mdp::from_parts(state_names, action_names, choices, labeling).map_err(|e| at(None, e))
}

/// Kept states with, for each, the kept subset of its enabled actions.
pub type Selection = BTreeMap<usize, BTreeSet<usize>>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum RestrictError {
    #[error("a sub-MDP needs at least one state")]
    EmptyStateSet,
    #[error("state index {0} is out of range")]
    UnknownState(usize),
    #[error("state `{0}` keeps no action")]
    EmptyActionSet(String),
    #[error("action `{action}` is not enabled in state `{state}`")]
    NotEnabled { state: String, action: String },
    #[error("action `{action}` of `{state}` may leave the kept states (to `{target}`)")]
    ClosureViolation { state: String, action: String, target: String },
}

/// Sub-MDP induced by `keep`; see [`restrict_mapped`] for the index map.
pub fn restrict(m: &Mdp, keep: &Selection) -> Result<Mdp, RestrictError> {
    restrict_mapped(m, keep).map(|(sub, _)| sub)
}

/// Sub-MDP induced by `keep`, together with the map from sub-MDP state indices
/// to the parent's state indices. Kept states retain their relative order and
/// the action alphabet is shared with the parent.
pub fn restrict_mapped(m: &Mdp, keep: &Selection) -> Result<(Mdp, Vec<usize>), RestrictError> {
    if keep.is_empty() {
        return Err(RestrictError::EmptyStateSet);
    }
    let parent: Vec<usize> = keep.keys().copied().collect();
    let mut local = vec![usize::MAX; m.num_states()];
    for (i, &s) in parent.iter().enumerate() {
        if s >= m.num_states() {
            return Err(RestrictError::UnknownState(s));
        }
        local[s] = i;
    }
    let mut choices = Vec::with_capacity(parent.len());
    for (&s, acts) in keep {
        if acts.is_empty() {
            return Err(RestrictError::EmptyActionSet(m.state_name(s).to_string()));
        }
        for &a in acts {
            if !m.is_enabled(s, a) {
                return Err(RestrictError::NotEnabled {
                    state: m.state_name(s).to_string(),
                    action: m.action_name(a).to_string(),
                });
            }
        }
        let mut row = Vec::with_capacity(acts.len());
        for c in m.choices(s).iter().filter(|c| acts.contains(&c.action)) {
            let mut successors = Vec::with_capacity(c.successors.len());
            for (t, p) in &c.successors {
                if local[*t] == usize::MAX {
                    return Err(RestrictError::ClosureViolation {
                        state: m.state_name(s).to_string(),
                        action: m.action_name(c.action).to_string(),
                        target: m.state_name(*t).to_string(),
                    });
                }
                successors.push((local[*t], p.clone()));
            }
            row.push(Choice { action: c.action, successors });
        }
        choices.push(row);
    }
    let labeling = match m.labeling() {
        Labeling::Weights(w) => Labeling::Weights(w.clone()),
        Labeling::Priorities(p) => Labeling::Priorities(parent.iter().map(|&s| p[s]).collect()),
    };
    let names = parent.iter().map(|&s| m.state_name(s).to_string()).collect();
    let sub = Mdp::from_parts(names, m.action_names().to_vec(), choices, labeling)
        .expect("restriction of a valid model is valid");
    Ok((sub, parent))
}
