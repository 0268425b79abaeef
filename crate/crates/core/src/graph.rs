//! Qualitative graph machinery: SCCs, MEC decomposition, probability-0/1
//! reachability and attractors of the two-player interpretation.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap};

use crate::model::{Mdp, Selection};

/// Dense set of state (or node) indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct StateSet(Vec<bool>);

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        StateSet(vec![true; n])
    }

    pub fn from_indices(n: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::empty(n);
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// Universe size, not the number of members.
    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0[i]
    }

    /// Returns true if `i` was not yet a member.
    pub fn insert(&mut self, i: usize) -> bool {
        !std::mem::replace(&mut self.0[i], true)
    }

    pub fn remove(&mut self, i: usize) -> bool {
        std::mem::replace(&mut self.0[i], false)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.0.iter().any(|b| *b)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| i)
    }

    pub fn complement(&self) -> Self {
        StateSet(self.0.iter().map(|b| !b).collect())
    }

    pub fn union(&self, other: &Self) -> Self {
        StateSet(self.0.iter().zip(&other.0).map(|(a, b)| *a || *b).collect())
    }

    pub fn intersection(&self, other: &Self) -> Self {
        StateSet(self.0.iter().zip(&other.0).map(|(a, b)| *a && *b).collect())
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| !*a || *b)
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
}

/// Strongly connected components of the graph `adj`, in reverse topological
/// order: every edge leaving a component points into one listed earlier.
/// Components list their nodes in ascending order.
pub fn sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    const UNVISITED: usize = usize::MAX;
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut counter = 0usize;
    // (node, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().expect("tarjan stack");
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    comp.sort_unstable();
                    out.push(comp);
                }
            }
        }
    }
    out
}

/// Bottom SCCs: components with no edge leaving them.
pub fn bottom_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let comps = sccs(adj);
    let mut comp_of = vec![0usize; adj.len()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    comps
        .iter()
        .enumerate()
        .filter(|(i, c)| c.iter().all(|&v| adj[v].iter().all(|&w| comp_of[w] == *i)))
        .map(|(_, c)| c.clone())
        .collect()
}

/// Support graph of `m`: an edge s -> t whenever some action of s may move to t.
pub fn support_graph(m: &Mdp) -> Vec<Vec<usize>> {
    (0..m.num_states())
        .map(|s| {
            let targets: BTreeSet<usize> = m.choices(s).iter().flat_map(|c| c.support()).collect();
            targets.into_iter().collect()
        })
        .collect()
}

/// Whether the support graph of `m` is strongly connected.
pub fn is_strongly_connected(m: &Mdp) -> bool {
    sccs(&support_graph(m)).len() == 1
}

/// One maximal end-component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mec {
    /// Kept states with their kept actions.
    pub selection: Selection,
}

impl Mec {
    pub fn states(&self) -> impl Iterator<Item = usize> + '_ {
        self.selection.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.selection.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selection.is_empty()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.selection.contains_key(&s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MecDecomposition {
    /// MECs ordered by their smallest state index.
    pub mecs: Vec<Mec>,
    pub membership: Vec<Option<usize>>,
}

/// Maximal end-components by iterated SCC pruning.
pub fn mec_decomposition(m: &Mdp) -> MecDecomposition {
    let n = m.num_states();
    let mut alive_actions: Vec<Vec<usize>> = (0..n).map(|s| (0..m.choices(s).len()).collect()).collect();
    let mut alive = vec![true; n];
    let comps = loop {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|s| {
                if !alive[s] {
                    return Vec::new();
                }
                let t: BTreeSet<usize> = alive_actions[s]
                    .iter()
                    .flat_map(|&ci| m.choices(s)[ci].support())
                    .filter(|&t| alive[t])
                    .collect();
                t.into_iter().collect()
            })
            .collect();
        let comps = sccs(&adj);
        let mut comp_of = vec![usize::MAX; n];
        for (i, c) in comps.iter().enumerate() {
            for &v in c {
                comp_of[v] = i;
            }
        }
        let mut changed = false;
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let before = alive_actions[s].len();
            alive_actions[s].retain(|&ci| m.choices(s)[ci].support().all(|t| alive[t] && comp_of[t] == comp_of[s]));
            if alive_actions[s].len() != before {
                changed = true;
            }
            if alive_actions[s].is_empty() {
                alive[s] = false;
            }
        }
        if !changed {
            break comps;
        }
    };

    let mut mecs: Vec<Mec> = comps
        .into_iter()
        .filter(|c| alive[c[0]])
        .map(|c| Mec {
            selection: c
                .into_iter()
                .map(|s| (s, alive_actions[s].iter().map(|&ci| m.choices(s)[ci].action).collect()))
                .collect(),
        })
        .collect();
    mecs.sort_by_key(|mec| mec.states().next());
    let mut membership = vec![None; n];
    for (i, mec) in mecs.iter().enumerate() {
        for s in mec.states() {
            membership[s] = Some(i);
        }
    }
    MecDecomposition { mecs, membership }
}

/// Predecessor lists: for each state t, the pairs (s, choice position) whose
/// support contains t.
pub fn predecessors(m: &Mdp) -> Vec<Vec<(usize, usize)>> {
    let mut preds = vec![Vec::new(); m.num_states()];
    for s in 0..m.num_states() {
        for (ci, c) in m.choices(s).iter().enumerate() {
            for t in c.support() {
                preds[t].push((s, ci));
            }
        }
    }
    preds
}

/// Probability-0 and probability-1 sets for reaching `target`.
pub fn prob01_reach(m: &Mdp, target: &StateSet) -> (StateSet, StateSet) {
    prob01_reach_avoiding(m, target, &StateSet::empty(m.num_states()))
}

/// Like [`prob01_reach`], with the states of `avoid` (outside `target`) made
/// losing sinks.
pub fn prob01_reach_avoiding(m: &Mdp, target: &StateSet, avoid: &StateSet) -> (StateSet, StateSet) {
    let n = m.num_states();
    let preds = predecessors(m);
    let blocked = |s: usize| avoid.contains(s) && !target.contains(s);

    // Backward search for positive reachability.
    let mut positive = target.clone();
    let mut queue: Vec<usize> = target.iter().collect();
    while let Some(t) = queue.pop() {
        for &(s, _) in &preds[t] {
            if !blocked(s) && positive.insert(s) {
                queue.push(s);
            }
        }
    }
    let prob0 = positive.complement();

    // Greatest fixpoint over U of: states reaching target inside U using
    // actions whose support stays in U.
    let mut u = positive;
    loop {
        let mut v = target.clone();
        let mut queue: Vec<usize> = target.iter().collect();
        while let Some(t) = queue.pop() {
            for &(s, ci) in &preds[t] {
                if v.contains(s) || !u.contains(s) || blocked(s) {
                    continue;
                }
                if m.choices(s)[ci].support().all(|x| u.contains(x)) && v.insert(s) {
                    queue.push(s);
                }
            }
        }
        if v == u {
            break;
        }
        u = v;
    }
    debug_assert_eq!(u.universe(), n);
    (prob0, u)
}

/// The two players of the game interpretation of an MDP.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Player {
    /// Picks the action.
    Controller,
    /// Picks the successor inside the action's support.
    Adversary,
}

/// Two-player interpretation of an MDP: the controller picks an action, the
/// adversary picks any successor in its support.
pub struct GameArena<'a> {
    pub mdp: &'a Mdp,
    preds: Vec<Vec<(usize, usize)>>,
}

impl<'a> GameArena<'a> {
    pub fn new(mdp: &'a Mdp) -> Self {
        GameArena { mdp, preds: predecessors(mdp) }
    }

    pub fn num_nodes(&self) -> usize {
        self.mdp.num_states()
    }
}

/// Nodes from which `player` can force a visit to `target`.
pub fn attractor(arena: &GameArena<'_>, target: &StateSet, player: Player) -> StateSet {
    let m = arena.mdp;
    let mut attr = target.clone();
    // Adversary: per state, number of actions not yet hitting attr.
    // Controller: per (state, choice), number of successors not yet in attr.
    let mut state_count: Vec<usize> = (0..m.num_states()).map(|s| m.choices(s).len()).collect();
    let mut choice_count: Vec<Vec<usize>> = (0..m.num_states())
        .map(|s| m.choices(s).iter().map(|c| c.successors.len()).collect())
        .collect();
    let mut hit: Vec<Vec<bool>> = (0..m.num_states()).map(|s| vec![false; m.choices(s).len()]).collect();
    let mut work: BinaryHeap<Reverse<usize>> = target.iter().map(Reverse).collect();
    while let Some(Reverse(t)) = work.pop() {
        for &(s, ci) in &arena.preds[t] {
            if attr.contains(s) {
                continue;
            }
            let enter = match player {
                Player::Adversary => {
                    if hit[s][ci] {
                        false
                    } else {
                        hit[s][ci] = true;
                        state_count[s] -= 1;
                        state_count[s] == 0
                    }
                }
                Player::Controller => {
                    choice_count[s][ci] -= 1;
                    choice_count[s][ci] == 0
                }
            };
            if enter {
                attr.insert(s);
                work.push(Reverse(s));
            }
        }
    }
    attr
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Choice, Labeling};
    use crate::numeric::Rational;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    /// s -a-> {t:1/2, s:1/2}, t -b-> t
    fn coin_to_sink() -> Mdp {
        Mdp::from_parts(
            vec!["s".into(), "t".into()],
            vec!["a".into(), "b".into()],
            vec![
                vec![Choice { action: 0, successors: vec![(1, r(1, 2)), (0, r(1, 2))] }],
                vec![Choice { action: 1, successors: vec![(1, r(1, 1))] }],
            ],
            Labeling::Priorities(vec![1, 0]),
        )
        .unwrap()
    }

    #[test]
    fn tarjan_orders_sinks_first() {
        let adj = vec![vec![1], vec![2], vec![1, 3], vec![]];
        let comps = sccs(&adj);
        assert_eq!(comps, vec![vec![3], vec![1, 2], vec![0]]);
        assert_eq!(bottom_sccs(&adj), vec![vec![3]]);
    }

    #[test]
    fn mecs_of_coin_to_sink() {
        let d = mec_decomposition(&coin_to_sink());
        assert_eq!(d.mecs.len(), 1);
        assert_eq!(d.mecs[0].selection, [(1, [1].into())].into());
        assert_eq!(d.membership, vec![None, Some(0)]);
    }

    #[test]
    fn prob01_of_coin_to_sink() {
        let m = coin_to_sink();
        let (p0, p1) = prob01_reach(&m, &StateSet::from_indices(2, [1]));
        assert!(p0.is_empty());
        assert_eq!(p1, StateSet::full(2));
        let (p0, p1) = prob01_reach(&m, &StateSet::from_indices(2, [0]));
        assert_eq!(p0, StateSet::from_indices(2, [1]));
        assert_eq!(p1, StateSet::from_indices(2, [0]));
    }

    #[test]
    fn attractor_trivial_targets() {
        let m = coin_to_sink();
        let arena = GameArena::new(&m);
        for player in [Player::Controller, Player::Adversary] {
            assert!(attractor(&arena, &StateSet::empty(2), player).is_empty());
            assert_eq!(attractor(&arena, &StateSet::full(2), player), StateSet::full(2));
        }
        let to_s = StateSet::from_indices(2, [0]);
        assert_eq!(attractor(&arena, &to_s, Player::Adversary), to_s);
        let to_t = StateSet::from_indices(2, [1]);
        assert_eq!(attractor(&arena, &to_t, Player::Adversary), StateSet::full(2));
        assert_eq!(attractor(&arena, &to_t, Player::Controller), to_t);
    }
}
