//! Pure finite-memory (Mealy) strategies.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::hash::Hash;

use thiserror::Error;

use crate::model::Mdp;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum StrategyError {
    #[error("strategy has no action for state `{state}` in memory `{memory}`")]
    PartialStrategy { state: String, memory: String },
    #[error("strategy plays `{action}` in state `{state}`, where it is not enabled")]
    NotEnabled { state: String, action: String },
    #[error("initial memory table covers {got} states, model has {expected}")]
    InitSize { got: usize, expected: usize },
    #[error("memory index {0} out of range")]
    UnknownMemory(usize),
    #[error("memory label `{0}` used twice")]
    DuplicateLabel(String),
}

/// A pure Mealy strategy over a fixed model.
///
/// `update` lists only the transitions that change memory; a missing entry
/// keeps the current memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MealyStrategy {
    memory: Vec<String>,
    init: Vec<usize>,
    next_action: BTreeMap<(usize, usize), usize>,
    update: BTreeMap<(usize, usize, usize), usize>,
}

impl MealyStrategy {
    /// Builds and checks a strategy against `m`, including totality on every
    /// reachable (state, memory) pair.
    pub fn new(
        m: &Mdp,
        memory: Vec<String>,
        init: Vec<usize>,
        next_action: BTreeMap<(usize, usize), usize>,
        update: BTreeMap<(usize, usize, usize), usize>,
    ) -> Result<Self, StrategyError> {
        let mut labels = HashSet::new();
        for l in &memory {
            if !labels.insert(l.as_str()) {
                return Err(StrategyError::DuplicateLabel(l.clone()));
            }
        }
        let sigma = MealyStrategy { memory, init, next_action, update };
        sigma.check(m)?;
        Ok(sigma)
    }

    /// Single-memory strategy playing `actions[s]` in state `s`.
    pub fn memoryless(m: &Mdp, actions: &[usize]) -> Self {
        let next_action = (0..m.num_states()).map(|s| ((s, 0), actions[s])).collect();
        MealyStrategy {
            memory: vec!["q0".to_string()],
            init: vec![0; m.num_states()],
            next_action,
            update: BTreeMap::new(),
        }
    }

    pub fn check(&self, m: &Mdp) -> Result<(), StrategyError> {
        if self.init.len() != m.num_states() {
            return Err(StrategyError::InitSize { got: self.init.len(), expected: m.num_states() });
        }
        let k = self.memory.len();
        let in_range = |q: usize| if q < k { Ok(()) } else { Err(StrategyError::UnknownMemory(q)) };
        for &q in &self.init {
            in_range(q)?;
        }
        for (&(s, q), &a) in &self.next_action {
            in_range(q)?;
            if s >= m.num_states() || a >= m.num_actions() || !m.is_enabled(s, a) {
                return Err(StrategyError::NotEnabled {
                    state: m.state_names().get(s).cloned().unwrap_or_else(|| s.to_string()),
                    action: m.action_names().get(a).cloned().unwrap_or_else(|| a.to_string()),
                });
            }
        }
        for (&(q, _, _), &q2) in &self.update {
            in_range(q)?;
            in_range(q2)?;
        }
        let mut seen = HashSet::new();
        let mut queue: VecDeque<(usize, usize)> = (0..m.num_states()).map(|s| (s, self.init[s])).collect();
        while let Some((s, q)) = queue.pop_front() {
            if !seen.insert((s, q)) {
                continue;
            }
            let a = self.action(s, q).ok_or_else(|| StrategyError::PartialStrategy {
                state: m.state_name(s).to_string(),
                memory: self.memory[q].clone(),
            })?;
            let choice = m.choice(s, a).expect("checked above");
            for t in choice.support() {
                queue.push_back((t, self.next_memory(q, a, t)));
            }
        }
        Ok(())
    }

    pub fn memory_size(&self) -> usize {
        self.memory.len()
    }

    pub fn memory_label(&self, q: usize) -> &str {
        &self.memory[q]
    }

    pub fn memory_labels(&self) -> &[String] {
        &self.memory
    }

    pub fn initial_memory(&self, s: usize) -> usize {
        self.init[s]
    }

    pub fn action(&self, s: usize, q: usize) -> Option<usize> {
        self.next_action.get(&(s, q)).copied()
    }

    /// Memory after playing `a` from memory `q` and moving to `t`.
    pub fn next_memory(&self, q: usize, a: usize, t: usize) -> usize {
        self.update.get(&(q, a, t)).copied().unwrap_or(q)
    }

    pub fn next_action_table(&self) -> &BTreeMap<(usize, usize), usize> {
        &self.next_action
    }

    pub fn update_table(&self) -> &BTreeMap<(usize, usize, usize), usize> {
        &self.update
    }

    pub fn init_table(&self) -> &[usize] {
        &self.init
    }

    /// Whether the strategy never consults its memory: one action per state
    /// regardless of memory.
    pub fn is_memoryless(&self) -> bool {
        let mut per_state: HashMap<usize, usize> = HashMap::new();
        self.next_action.iter().all(|(&(s, _), &a)| *per_state.entry(s).or_insert(a) == a)
    }
}

/// A strategy given by closures over an arbitrary memory type, turned into
/// explicit tables by [`materialize`].
pub trait StrategyLogic {
    type Memory: Clone + Eq + Hash;

    fn initial(&self, s: usize) -> Self::Memory;
    fn action(&self, s: usize, mem: &Self::Memory) -> usize;
    fn update(&self, mem: &Self::Memory, action: usize, t: usize) -> Self::Memory;
    fn label(&self, mem: &Self::Memory) -> String;
}

/// Explores every (state, memory) pair reachable from the initial memories of
/// all states and tabulates the strategy. Memory indices follow discovery
/// order.
pub fn materialize<L: StrategyLogic>(m: &Mdp, logic: &L) -> MealyStrategy {
    let mut ids: HashMap<L::Memory, usize> = HashMap::new();
    let mut mems: Vec<L::Memory> = Vec::new();
    let mut intern = |mem: L::Memory, mems: &mut Vec<L::Memory>| -> usize {
        *ids.entry(mem.clone()).or_insert_with(|| {
            mems.push(mem);
            mems.len() - 1
        })
    };
    let init: Vec<usize> = (0..m.num_states()).map(|s| intern(logic.initial(s), &mut mems)).collect();
    let mut next_action = BTreeMap::new();
    let mut update = BTreeMap::new();
    let mut queue: VecDeque<(usize, usize)> = (0..m.num_states()).map(|s| (s, init[s])).collect();
    let mut seen = HashSet::new();
    while let Some((s, q)) = queue.pop_front() {
        if !seen.insert((s, q)) {
            continue;
        }
        let mem = mems[q].clone();
        let a = logic.action(s, &mem);
        next_action.insert((s, q), a);
        let choice = m.choice(s, a).expect("strategy logic must play enabled actions");
        for t in choice.support() {
            let q2 = intern(logic.update(&mem, a, t), &mut mems);
            if q2 != q {
                update.insert((q, a, t), q2);
            }
            queue.push_back((t, q2));
        }
    }
    let mut used = HashSet::new();
    let memory = mems
        .iter()
        .map(|mem| {
            let base = logic.label(mem);
            let mut label = base.clone();
            let mut k = 1;
            while !used.insert(label.clone()) {
                label = format!("{base}#{k}");
                k += 1;
            }
            label
        })
        .collect();
    MealyStrategy { memory, init, next_action, update }
}
