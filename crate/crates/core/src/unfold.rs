//! Window unfoldings: product of an MDP with the status of the single
//! currently open window.
//!
//! For `mp`, a configuration `(s, l, z)` records that the open window has been
//! open for `l` steps with accumulated weight `z < 0` (`l = 0` means no window
//! is open). For `par`, `(s, l, c)` records the open window's length minus one
//! and its minimum priority `c`. Configurations where the open window exhausted
//! its `lambda` steps form the bad set; their outgoing transitions reset.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::graph::StateSet;
use crate::model::{Choice, Kind, Labeling, Mdp};
use crate::strategy::{materialize, MealyStrategy, StrategyLogic};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum UnfoldError {
    #[error("objective kind {requested} does not match the model labeling ({model})")]
    KindMismatch { requested: Kind, model: Kind },
    #[error("window size must be at least 1")]
    ZeroLambda,
}

/// One unfolding configuration. `acc` is the running sum `z` (mp) or the
/// window's minimum priority `c` (par).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnfoldConfig {
    pub state: usize,
    pub len: u32,
    pub acc: i64,
}

/// The reachable part of the `lambda`-unfolding of a model.
#[derive(Clone, Debug)]
pub struct UnfoldedMdp {
    pub mdp: Mdp,
    pub configs: Vec<UnfoldConfig>,
    pub bad: StateSet,
    /// Initial configuration of each original state.
    pub initial: Vec<usize>,
    pub kind: Kind,
    pub lambda: u32,
    index: HashMap<UnfoldConfig, usize>,
}

impl fmt::Display for UnfoldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.state, self.len, self.acc)
    }
}

/// Successor configuration when playing `a` from `c` and landing in `t`.
pub fn step(m: &Mdp, kind: Kind, lambda: u32, c: UnfoldConfig, a: usize, t: usize) -> UnfoldConfig {
    match kind {
        Kind::Mp => {
            let z = c.acc + m.weight(a).expect("weighted model");
            if c.len < lambda && z < 0 {
                UnfoldConfig { state: t, len: c.len + 1, acc: z }
            } else {
                UnfoldConfig { state: t, len: 0, acc: 0 }
            }
        }
        Kind::Par => {
            let p = m.priority(t).expect("priority model") as i64;
            if c.acc % 2 == 1 && c.len + 1 < lambda {
                UnfoldConfig { state: t, len: c.len + 1, acc: c.acc.min(p) }
            } else {
                UnfoldConfig { state: t, len: 0, acc: p }
            }
        }
    }
}

/// Initial configuration of state `s`.
pub fn initial_config(m: &Mdp, kind: Kind, s: usize) -> UnfoldConfig {
    match kind {
        Kind::Mp => UnfoldConfig { state: s, len: 0, acc: 0 },
        Kind::Par => UnfoldConfig { state: s, len: 0, acc: m.priority(s).expect("priority model") as i64 },
    }
}

/// Whether `c` records a window that stayed open for `lambda` steps.
pub fn is_bad(kind: Kind, lambda: u32, c: UnfoldConfig) -> bool {
    match kind {
        Kind::Mp => c.len == lambda && c.acc < 0,
        Kind::Par => c.len + 1 == lambda && c.acc % 2 == 1,
    }
}

/// Builds the configurations reachable from the initial configuration of
/// every state.
pub fn unfold(m: &Mdp, lambda: u32, kind: Kind) -> Result<UnfoldedMdp, UnfoldError> {
    if m.kind() != kind {
        return Err(UnfoldError::KindMismatch { requested: kind, model: m.kind() });
    }
    if lambda == 0 {
        return Err(UnfoldError::ZeroLambda);
    }
    let floor = -(lambda as i64) * m.max_abs_weight();
    let mut configs: Vec<UnfoldConfig> = Vec::new();
    let mut index: HashMap<UnfoldConfig, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |c: UnfoldConfig, configs: &mut Vec<UnfoldConfig>, queue: &mut VecDeque<usize>| -> usize {
        *index.entry(c).or_insert_with(|| {
            configs.push(c);
            queue.push_back(configs.len() - 1);
            configs.len() - 1
        })
    };
    let initial: Vec<usize> = (0..m.num_states())
        .map(|s| intern(initial_config(m, kind, s), &mut configs, &mut queue))
        .collect();
    let mut choices: Vec<Vec<Choice>> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let c = configs[i];
        debug_assert!(kind == Kind::Par || c.acc >= floor);
        let row: Vec<Choice> = m
            .choices(c.state)
            .iter()
            .map(|ch| Choice {
                action: ch.action,
                successors: ch
                    .successors
                    .iter()
                    .map(|(t, p)| (intern(step(m, kind, lambda, c, ch.action, *t), &mut configs, &mut queue), p.clone()))
                    .collect(),
            })
            .collect();
        if choices.len() <= i {
            choices.resize(i + 1, Vec::new());
        }
        choices[i] = row;
    }
    let names: Vec<String> = configs
        .iter()
        .map(|c| format!("({},{},{})", m.state_name(c.state), c.len, c.acc))
        .collect();
    let labeling = match m.labeling() {
        Labeling::Weights(w) => Labeling::Weights(w.clone()),
        Labeling::Priorities(p) => Labeling::Priorities(configs.iter().map(|c| p[c.state]).collect()),
    };
    let bad = StateSet::from_indices(
        configs.len(),
        configs.iter().enumerate().filter(|(_, c)| is_bad(kind, lambda, **c)).map(|(i, _)| i),
    );
    let mdp = Mdp::from_parts(names, m.action_names().to_vec(), choices, labeling)
        .expect("unfolding of a valid model is valid");
    let index = configs.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    Ok(UnfoldedMdp { mdp, configs, bad, initial, kind, lambda, index })
}

impl UnfoldedMdp {
    pub fn num_configs(&self) -> usize {
        self.configs.len()
    }

    pub fn config_index(&self, c: &UnfoldConfig) -> Option<usize> {
        self.index.get(c).copied()
    }

    /// Original state of configuration `c`.
    pub fn back(&self, c: usize) -> usize {
        self.configs[c].state
    }

    /// Index of the configuration reached from `c` by `a` landing in the
    /// original state `t`.
    pub fn successor(&self, original: &Mdp, c: usize, a: usize, t: usize) -> usize {
        let next = step(original, self.kind, self.lambda, self.configs[c], a, t);
        self.index[&next]
    }

    /// Lifts a memoryless strategy of the unfolding (`actions[c]` per config)
    /// to a Mealy strategy of `original` whose memory is the current config.
    pub fn lift_strategy(&self, original: &Mdp, actions: &[usize]) -> MealyStrategy {
        materialize(original, &Lifted { u: self, original, actions })
    }
}

struct Lifted<'a> {
    u: &'a UnfoldedMdp,
    original: &'a Mdp,
    actions: &'a [usize],
}

impl StrategyLogic for Lifted<'_> {
    type Memory = usize;

    fn initial(&self, s: usize) -> usize {
        self.u.initial[s]
    }

    fn action(&self, _s: usize, c: &usize) -> usize {
        self.actions[*c]
    }

    fn update(&self, c: &usize, a: usize, t: usize) -> usize {
        self.u.successor(self.original, *c, a, t)
    }

    fn label(&self, c: &usize) -> String {
        self.u.mdp.state_name(*c).to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rational;

    /// s (priority 1) -a-> {t, s} evenly; t (priority 0) -b-> t.
    fn escape(kind: Kind) -> Mdp {
        let labeling = match kind {
            Kind::Par => Labeling::Priorities(vec![1, 0]),
            Kind::Mp => Labeling::Weights(vec![-1, 1]),
        };
        Mdp::from_parts(
            vec!["s".into(), "t".into()],
            vec!["a".into(), "b".into()],
            vec![
                vec![Choice { action: 0, successors: vec![(1, rational(1, 2)), (0, rational(1, 2))] }],
                vec![Choice { action: 1, successors: vec![(1, rational(1, 1))] }],
            ],
            labeling,
        )
        .unwrap()
    }

    #[test]
    fn escape_par_lambda_two() {
        let u = unfold(&escape(Kind::Par), 2, Kind::Par).unwrap();
        let mut names: Vec<&str> = u.mdp.state_names().iter().map(|s| s.as_str()).collect();
        names.sort_unstable();
        assert_eq!(names, vec!["(s,0,1)", "(s,1,1)", "(t,0,0)", "(t,1,0)"]);
        let bad: Vec<&str> = u.bad.iter().map(|c| u.mdp.state_name(c)).collect();
        assert_eq!(bad, vec!["(s,1,1)"]);
        assert_eq!(u.back(u.initial[0]), 0);
    }

    #[test]
    fn escape_mp_sizes() {
        let m = escape(Kind::Mp);
        for lambda in 1..5u32 {
            let u = unfold(&m, lambda, Kind::Mp).unwrap();
            let bound = 2 * (lambda as usize + 1) * (lambda as usize + 1);
            assert!(u.num_configs() <= bound);
            // s accumulates -1 per step until the window is bad.
            let worst = UnfoldConfig { state: 0, len: lambda, acc: -(lambda as i64) };
            assert!(u.bad.contains(u.config_index(&worst).unwrap()));
        }
    }

    #[test]
    fn even_priorities_never_bad() {
        let m = Mdp::from_parts(
            vec!["x".into(), "y".into()],
            vec!["go".into()],
            vec![
                vec![Choice { action: 0, successors: vec![(1, rational(1, 1))] }],
                vec![Choice { action: 0, successors: vec![(0, rational(1, 1))] }],
            ],
            Labeling::Priorities(vec![2, 0]),
        )
        .unwrap();
        let u = unfold(&m, 1, Kind::Par).unwrap();
        assert_eq!(u.num_configs(), 2);
        assert!(u.bad.is_empty());
        let sigma = u.lift_strategy(&m, &[0, 0]);
        assert_eq!(sigma.memory_size(), 2);
        assert!(sigma.is_memoryless());
    }

    #[test]
    fn kind_mismatch() {
        assert!(matches!(unfold(&escape(Kind::Par), 2, Kind::Mp), Err(UnfoldError::KindMismatch { .. })));
    }
}
