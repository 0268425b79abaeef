//! Exact evaluation of a fixed Mealy strategy on the chain it induces.

use std::collections::{HashMap, VecDeque};

use num_traits::One;

use super::OracleError;
use crate::graph::{bottom_sccs, StateSet};
use crate::model::{Kind, Mdp, Variant, WindowSpec};
use crate::numeric::{chain_reachability, Rational};
use crate::strategy::MealyStrategy;
use crate::unfold::{unfold, UnfoldedMdp};

/// Finite Markov chain induced by a strategy, with the set of nodes that
/// decides the objective.
pub(crate) struct EvalChain {
    pub rows: Vec<Vec<(usize, Rational)>>,
    /// Start node of each requested state.
    pub starts: Vec<usize>,
    pub goal: Goal,
}

pub(crate) enum Goal {
    /// Objective holds iff these nodes are never visited.
    Avoid(StateSet),
    /// Objective holds iff one of these closed node sets is reached.
    Reach(StateSet),
}

fn partial(m: &Mdp, sigma: &MealyStrategy, s: usize, q: usize) -> OracleError {
    OracleError::PartialStrategy {
        state: m.state_name(s).to_string(),
        memory: sigma.memory_labels().get(q).cloned().unwrap_or_else(|| q.to_string()),
    }
}

/// Reachable part of (node, memory) for a deterministic node successor
/// function `next(node, action, t)` over states `state_of(node)`.
struct Explored {
    keys: Vec<(usize, usize)>,
    actions: Vec<usize>,
    rows: Vec<Vec<(usize, Rational)>>,
    starts: Vec<usize>,
}

fn explore(
    m: &Mdp,
    sigma: &MealyStrategy,
    starts: &[usize],
    start_node: impl Fn(usize) -> usize,
    state_of: impl Fn(usize) -> usize,
    next: impl Fn(usize, usize, usize) -> usize,
) -> Result<Explored, OracleError> {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut keys = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |key: (usize, usize), keys: &mut Vec<(usize, usize)>, queue: &mut VecDeque<usize>| -> usize {
        *index.entry(key).or_insert_with(|| {
            keys.push(key);
            queue.push_back(keys.len() - 1);
            keys.len() - 1
        })
    };
    let start_ids: Vec<usize> = starts
        .iter()
        .map(|&s| {
            if s >= m.num_states() || sigma.init_table().len() != m.num_states() {
                return Err(OracleError::InvalidArgument(format!("state {s} outside the strategy's model")));
            }
            Ok(intern((start_node(s), sigma.initial_memory(s)), &mut keys, &mut queue))
        })
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<Vec<(usize, Rational)>> = Vec::new();
    let mut actions = Vec::new();
    while let Some(i) = queue.pop_front() {
        let (node, q) = keys[i];
        let s = state_of(node);
        let a = sigma.action(s, q).ok_or_else(|| partial(m, sigma, s, q))?;
        let choice = m.choice(s, a).ok_or_else(|| partial(m, sigma, s, q))?;
        let row: Vec<(usize, Rational)> = choice
            .successors
            .iter()
            .map(|(t, p)| (intern((next(node, a, *t), sigma.next_memory(q, a, *t)), &mut keys, &mut queue), p.clone()))
            .collect();
        if rows.len() <= i {
            rows.resize(i + 1, Vec::new());
            actions.resize(i + 1, 0);
        }
        rows[i] = row;
        actions[i] = a;
    }
    Ok(Explored { keys, actions, rows, starts: start_ids })
}

pub(crate) fn evaluation_chain(
    m: &Mdp,
    sigma: &MealyStrategy,
    spec: &WindowSpec,
    starts: &[usize],
) -> Result<EvalChain, OracleError> {
    m.check_kind(spec.kind)
        .map_err(|e| OracleError::InvalidArgument(e.to_string()))?;
    match spec.variant {
        Variant::Dfw | Variant::Fw => {
            let u: UnfoldedMdp = unfold(m, spec.window(), spec.kind)?;
            let ex = explore(m, sigma, starts, |s| u.initial[s], |c| u.back(c), |c, a, t| u.successor(m, c, a, t))?;
            let bad = StateSet::from_indices(ex.keys.len(), (0..ex.keys.len()).filter(|&i| u.bad.contains(ex.keys[i].0)));
            let goal = if spec.variant == Variant::Dfw {
                Goal::Avoid(bad)
            } else {
                let adj = adjacency(&ex.rows);
                let mut good = StateSet::empty(ex.keys.len());
                for comp in bottom_sccs(&adj) {
                    if comp.iter().all(|&v| !bad.contains(v)) {
                        for v in comp {
                            good.insert(v);
                        }
                    }
                }
                Goal::Reach(good)
            };
            Ok(EvalChain { rows: ex.rows, starts: ex.starts, goal })
        }
        Variant::Bw => {
            let ex = explore(m, sigma, starts, |s| s, |s| s, |_, _, t| t)?;
            let adj = adjacency(&ex.rows);
            let mut good = StateSet::empty(ex.keys.len());
            for comp in bottom_sccs(&adj) {
                if bscc_bounded(m, spec.kind, &comp, &ex, &adj) {
                    for v in comp {
                        good.insert(v);
                    }
                }
            }
            Ok(EvalChain { rows: ex.rows, starts: ex.starts, goal: Goal::Reach(good) })
        }
    }
}

fn adjacency(rows: &[Vec<(usize, Rational)>]) -> Vec<Vec<usize>> {
    rows.iter().map(|r| r.iter().map(|(t, _)| *t).collect()).collect()
}

/// Whether every run of a BSCC has bounded open windows, i.e. no path of the
/// BSCC keeps a window open forever.
fn bscc_bounded(m: &Mdp, kind: Kind, comp: &[usize], ex: &Explored, adj: &[Vec<usize>]) -> bool {
    let mut local = HashMap::new();
    for (i, &v) in comp.iter().enumerate() {
        local.insert(v, i);
    }
    let n = comp.len();
    let succ: Vec<Vec<usize>> = comp.iter().map(|v| adj[*v].iter().map(|t| local[t]).collect()).collect();
    match kind {
        Kind::Par => {
            let prio: Vec<u32> = comp.iter().map(|&v| m.priority(ex.keys[v].0).expect("priority model")).collect();
            let mut odd: Vec<u32> = prio.iter().copied().filter(|p| p % 2 == 1).collect();
            odd.sort_unstable();
            odd.dedup();
            for c in odd {
                let alive = infinite_path_nodes(&succ, |v| prio[v] >= c);
                if (0..n).any(|v| alive[v] && prio[v] == c) {
                    return false;
                }
            }
            true
        }
        Kind::Mp => {
            let w: Vec<i64> = comp.iter().map(|&v| m.weight(ex.actions[v]).expect("weighted model")).collect();
            if has_negative_cycle(&succ, &w) {
                return false;
            }
            // Without negative cycles every path sum is at least -(n-1)W, so
            // open windows live in a finite (node, sum) graph.
            let bound = n as i64 * w.iter().map(|x| x.abs()).max().unwrap_or(0).max(1);
            let width = bound as usize;
            let id = |v: usize, z: i64| v * width + (-z - 1) as usize;
            let total = n * width;
            let mut reach = vec![false; total];
            let mut queue = Vec::new();
            for u in 0..n {
                if w[u] < 0 {
                    for &v in &succ[u] {
                        let k = id(v, w[u]);
                        if !reach[k] {
                            reach[k] = true;
                            queue.push((v, w[u]));
                        }
                    }
                }
            }
            let mut edges: Vec<Vec<usize>> = vec![Vec::new(); total];
            while let Some((v, z)) = queue.pop() {
                let z2 = z + w[v];
                if z2 >= 0 {
                    continue;
                }
                assert!(z2 >= -bound, "path sum below bound without negative cycle");
                for &t in &succ[v] {
                    let k = id(t, z2);
                    edges[id(v, z)].push(k);
                    if !reach[k] {
                        reach[k] = true;
                        queue.push((t, z2));
                    }
                }
            }
            let alive = infinite_path_nodes(&edges, |k| reach[k]);
            !alive.iter().any(|a| *a)
        }
    }
}

/// Nodes allowed by `keep` that start an infinite path through allowed nodes.
fn infinite_path_nodes(succ: &[Vec<usize>], keep: impl Fn(usize) -> bool) -> Vec<bool> {
    let n = succ.len();
    let mut alive: Vec<bool> = (0..n).map(&keep).collect();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut out = vec![0usize; n];
    for v in 0..n {
        if !alive[v] {
            continue;
        }
        for &t in &succ[v] {
            if alive[t] {
                out[v] += 1;
                preds[t].push(v);
            }
        }
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| alive[v] && out[v] == 0).collect();
    while let Some(v) = queue.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &p in &preds[v] {
            if alive[p] {
                out[p] -= 1;
                if out[p] == 0 {
                    queue.push(p);
                }
            }
        }
    }
    alive
}

/// Bellman-Ford from a virtual source; edge weight is the weight of the
/// source node's action.
fn has_negative_cycle(succ: &[Vec<usize>], w: &[i64]) -> bool {
    let n = succ.len();
    let mut dist = vec![0i64; n];
    for _ in 0..=n {
        let mut changed = false;
        for v in 0..n {
            for &t in &succ[v] {
                if dist[v] + w[v] < dist[t] {
                    dist[t] = dist[v] + w[v];
                    changed = true;
                }
            }
        }
        if !changed {
            return false;
        }
    }
    true
}

fn values_of(chain: &EvalChain) -> Vec<Rational> {
    match &chain.goal {
        Goal::Avoid(bad) => {
            let hit = chain_reachability(&chain.rows, bad);
            chain.starts.iter().map(|&v| Rational::one() - &hit[v]).collect()
        }
        Goal::Reach(good) => {
            let reach = chain_reachability(&chain.rows, good);
            chain.starts.iter().map(|&v| reach[v].clone()).collect()
        }
    }
}

/// Exact probability that `sigma`, started in `s`, satisfies `spec`.
pub fn eval_strategy_exact(m: &Mdp, sigma: &MealyStrategy, spec: &WindowSpec, s: usize) -> Result<Rational, OracleError> {
    let chain = evaluation_chain(m, sigma, spec, &[s])?;
    Ok(values_of(&chain).remove(0))
}

/// [`eval_strategy_exact`] from every state at once.
pub fn eval_strategy_exact_all(m: &Mdp, sigma: &MealyStrategy, spec: &WindowSpec) -> Result<Vec<Rational>, OracleError> {
    let starts: Vec<usize> = (0..m.num_states()).collect();
    let chain = evaluation_chain(m, sigma, spec, &starts)?;
    Ok(values_of(&chain))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Choice, Labeling};
    use crate::numeric::rational;

    fn cycle(labeling: Labeling) -> Mdp {
        Mdp::from_parts(
            vec!["u".into(), "v".into()],
            vec!["x".into(), "y".into()],
            vec![
                vec![Choice { action: 0, successors: vec![(1, rational(1, 1))] }],
                vec![Choice { action: 1, successors: vec![(0, rational(1, 1))] }],
            ],
            labeling,
        )
        .unwrap()
    }

    #[test]
    fn bw_zero_sum_cycle_is_bounded() {
        let m = cycle(Labeling::Weights(vec![-1, 1]));
        let sigma = MealyStrategy::memoryless(&m, &[0, 1]);
        let v = eval_strategy_exact_all(&m, &sigma, &WindowSpec::bw(Kind::Mp)).unwrap();
        assert_eq!(v, vec![rational(1, 1), rational(1, 1)]);
    }

    #[test]
    fn bw_negative_cycle_is_unbounded() {
        let m = cycle(Labeling::Weights(vec![-2, 1]));
        let sigma = MealyStrategy::memoryless(&m, &[0, 1]);
        let v = eval_strategy_exact_all(&m, &sigma, &WindowSpec::bw(Kind::Mp)).unwrap();
        assert_eq!(v, vec![rational(0, 1), rational(0, 1)]);
    }

    #[test]
    fn bw_parity_cycle() {
        let m = cycle(Labeling::Priorities(vec![1, 0]));
        let sigma = MealyStrategy::memoryless(&m, &[0, 1]);
        let v = eval_strategy_exact(&m, &sigma, &WindowSpec::bw(Kind::Par), 0).unwrap();
        assert_eq!(v, rational(1, 1));
        let m = cycle(Labeling::Priorities(vec![1, 3]));
        let sigma = MealyStrategy::memoryless(&m, &[0, 1]);
        let v = eval_strategy_exact(&m, &sigma, &WindowSpec::bw(Kind::Par), 0).unwrap();
        assert_eq!(v, rational(0, 1));
    }

    #[test]
    fn zero_sum_after_negative_step_stays_open() {
        // u -x(-1)-> v, v -y(0)-> v: the window opened at u never closes.
        let m = Mdp::from_parts(
            vec!["u".into(), "v".into()],
            vec!["x".into(), "y".into()],
            vec![
                vec![Choice { action: 0, successors: vec![(1, rational(1, 1))] }],
                vec![Choice { action: 1, successors: vec![(1, rational(1, 1))] }],
            ],
            Labeling::Weights(vec![-1, 0]),
        )
        .unwrap();
        let sigma = MealyStrategy::memoryless(&m, &[0, 1]);
        for lambda in 1..4 {
            let v = eval_strategy_exact_all(&m, &sigma, &WindowSpec::dfw(Kind::Mp, lambda)).unwrap();
            assert_eq!(v, vec![rational(0, 1), rational(1, 1)]);
            let v = eval_strategy_exact_all(&m, &sigma, &WindowSpec::fw(Kind::Mp, lambda)).unwrap();
            assert_eq!(v, vec![rational(1, 1), rational(1, 1)]);
        }
    }
}
