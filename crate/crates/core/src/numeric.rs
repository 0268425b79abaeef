//! Exact rational arithmetic, linear solving and maximum reachability.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::graph::{prob01_reach_avoiding, sccs, StateSet};
use crate::model::Mdp;

/// Arbitrary-precision rational, always normalized with positive denominator.
pub type Rational = BigRational;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum NumericError {
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub fn rational(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// Formats as `num/den`, always with an explicit denominator.
pub fn format_rational(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `num/den` or a bare integer.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rational::new(n, d))
}

/// Lossy conversion, for reports and sampling only.
pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Solves `a * x = b` exactly.
///
/// Rows are scaled to integers, then reduced by fraction-free (Bareiss)
/// elimination; the pivot is the first row, by index, with a nonzero entry.
pub fn solve_linear_system(a: &[Vec<Rational>], b: &[Rational]) -> Result<Vec<Rational>, NumericError> {
    let n = a.len();
    if b.len() != n || a.iter().any(|row| row.len() != n) {
        return Err(NumericError::Dimension(format!("expected {n}x{n} matrix and length-{n} vector")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut mat: Vec<Vec<BigInt>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let lcm = row.iter().chain(std::iter::once(rhs)).fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            row.iter()
                .chain(std::iter::once(rhs))
                .map(|q| q.numer() * (&lcm / q.denom()))
                .collect()
        })
        .collect();

    let mut prev = BigInt::one();
    for k in 0..n {
        let pivot = (k..n).find(|&r| !mat[r][k].is_zero()).ok_or(NumericError::SingularMatrix)?;
        mat.swap(k, pivot);
        let (top, rest) = mat.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            let factor = row[k].clone();
            for j in k + 1..=n {
                let v = &pivot_row[k] * &row[j] - &factor * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = mat[k][k].clone();
    }

    let mut x = vec![Rational::zero(); n];
    for i in (0..n).rev() {
        let mut acc = Rational::from_integer(mat[i][n].clone());
        for j in i + 1..n {
            if !mat[i][j].is_zero() {
                acc -= Rational::from_integer(mat[i][j].clone()) * &x[j];
            }
        }
        x[i] = acc / Rational::from_integer(mat[i][i].clone());
    }
    Ok(x)
}

/// Sparse Markov chain: row `s` lists `(successor, probability)`.
pub type ChainRows = [Vec<(usize, Rational)>];

/// Exact probability, from every state, of reaching `target` in a Markov
/// chain. States listed in `fixed` keep the given value and are not expanded
/// (targets have value 1 by definition).
pub fn chain_reachability(rows: &ChainRows, target: &StateSet) -> Vec<Rational> {
    let n = rows.len();
    let fixed: Vec<Option<Rational>> = (0..n)
        .map(|s| target.contains(s).then(Rational::one))
        .collect();
    chain_values(rows, &fixed)
}

/// Values of absorbing-style linear equations: `x[s] = fixed[s]` where given,
/// otherwise `x[s] = sum_t p(s,t) x[t]`, with states unable to reach a
/// positive fixed value pinned to 0. Solved block by block over the SCCs.
pub fn chain_values(rows: &ChainRows, fixed: &[Option<Rational>]) -> Vec<Rational> {
    let n = rows.len();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (s, row) in rows.iter().enumerate() {
        if fixed[s].is_none() {
            for (t, _) in row {
                preds[*t].push(s);
            }
        }
    }
    let mut relevant = vec![false; n];
    let mut stack: Vec<usize> = (0..n)
        .filter(|&s| fixed[s].as_ref().is_some_and(|v| v.is_positive()))
        .collect();
    for &s in &stack {
        relevant[s] = true;
    }
    while let Some(t) = stack.pop() {
        for &s in &preds[t] {
            if !relevant[s] {
                relevant[s] = true;
                stack.push(s);
            }
        }
    }

    let mut x: Vec<Rational> = (0..n)
        .map(|s| fixed[s].clone().unwrap_or_else(Rational::zero))
        .collect();
    let free: Vec<bool> = (0..n).map(|s| fixed[s].is_none() && relevant[s]).collect();
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|s| {
            if free[s] {
                rows[s].iter().map(|(t, _)| *t).filter(|&t| free[t]).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut local = vec![usize::MAX; n];
    for comp in sccs(&adj) {
        if !free[comp[0]] {
            continue;
        }
        if comp.len() == 1 {
            let s = comp[0];
            let mut self_p = Rational::zero();
            let mut rhs = Rational::zero();
            for (t, p) in &rows[s] {
                if *t == s {
                    self_p += p;
                } else {
                    rhs += p * &x[*t];
                }
            }
            x[s] = rhs / (Rational::one() - self_p);
            continue;
        }
        for (i, &s) in comp.iter().enumerate() {
            local[s] = i;
        }
        let k = comp.len();
        let mut a = vec![vec![Rational::zero(); k]; k];
        let mut b = vec![Rational::zero(); k];
        for (i, &s) in comp.iter().enumerate() {
            a[i][i] = Rational::one();
            for (t, p) in &rows[s] {
                if local[*t] != usize::MAX {
                    a[i][local[*t]] -= p;
                } else {
                    b[i] += p * &x[*t];
                }
            }
        }
        let sol = solve_linear_system(&a, &b).expect("leaking irreducible block is nonsingular");
        for (i, &s) in comp.iter().enumerate() {
            x[s] = sol[i].clone();
            local[s] = usize::MAX;
        }
    }
    x
}

/// Optimal reachability values with a memoryless strategy attaining them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReachSolution {
    pub values: Vec<Rational>,
    /// Chosen action per state. Meaningful on states with positive value
    /// outside the target; elsewhere the smallest enabled action.
    pub strategy: Vec<usize>,
}

/// Maximum probability of reaching `target`, with an optimal pure memoryless
/// strategy.
pub fn max_reachability(m: &Mdp, target: &StateSet) -> ReachSolution {
    max_reachability_avoiding(m, target, &StateSet::empty(m.num_states()))
}

/// Maximum probability of reaching `target` without first visiting `avoid`.
pub fn max_reachability_avoiding(m: &Mdp, target: &StateSet, avoid: &StateSet) -> ReachSolution {
    let n = m.num_states();
    let (prob0, prob1) = prob01_reach_avoiding(m, target, avoid);
    let mut strategy: Vec<usize> = (0..n).map(|s| m.min_action(s)).collect();
    let mut values: Vec<Rational> = (0..n)
        .map(|s| if prob1.contains(s) { Rational::one() } else { Rational::zero() })
        .collect();

    almost_sure_strategy(m, target, &prob1, &mut strategy);

    let uncertain: Vec<usize> = (0..n).filter(|&s| !prob0.contains(s) && !prob1.contains(s)).collect();
    if uncertain.is_empty() {
        return ReachSolution { values, strategy };
    }

    // Policy iteration on the uncertain states.
    let fixed: Vec<Option<Rational>> = (0..n)
        .map(|s| {
            if prob1.contains(s) {
                Some(Rational::one())
            } else if prob0.contains(s) {
                Some(Rational::zero())
            } else {
                None
            }
        })
        .collect();
    let q_value = |s: usize, ci: usize, v: &[Rational]| -> Rational {
        m.choices(s)[ci].successors.iter().map(|(t, p)| p * &v[*t]).sum()
    };
    // Start from the greedy choice against the qualitative values.
    let mut policy: Vec<usize> = vec![0; n];
    for &s in &uncertain {
        policy[s] = argmax_choice(m, s, |ci| q_value(s, ci, &values));
    }
    loop {
        let rows: Vec<Vec<(usize, Rational)>> = (0..n)
            .map(|s| {
                if fixed[s].is_some() {
                    Vec::new()
                } else {
                    m.choices(s)[policy[s]].successors.clone()
                }
            })
            .collect();
        values = chain_values(&rows, &fixed);
        let mut improved = false;
        for &s in &uncertain {
            let current = q_value(s, policy[s], &values);
            let best = argmax_choice(m, s, |ci| q_value(s, ci, &values));
            if best != policy[s] && q_value(s, best, &values) > current {
                policy[s] = best;
                improved = true;
            }
        }
        if !improved {
            break;
        }
    }
    for &s in &uncertain {
        strategy[s] = m.choices(s)[policy[s]].action;
    }
    ReachSolution { values, strategy }
}

/// Choice position maximizing `score`; ties go to the smallest action index.
fn argmax_choice(m: &Mdp, s: usize, score: impl Fn(usize) -> Rational) -> usize {
    let mut best: Option<(usize, Rational)> = None;
    for (ci, c) in m.choices(s).iter().enumerate() {
        let v = score(ci);
        best = match best {
            None => Some((ci, v)),
            Some((bi, bv)) => {
                let better = v > bv || (v == bv && c.action < m.choices(s)[bi].action);
                if better {
                    Some((ci, v))
                } else {
                    Some((bi, bv))
                }
            }
        };
    }
    best.expect("deadlock-free").0
}

/// On `prob1 \ target`, picks actions that stay inside `prob1` and move
/// closer to the target by BFS layers.
fn almost_sure_strategy(m: &Mdp, target: &StateSet, prob1: &StateSet, strategy: &mut [usize]) {
    let n = m.num_states();
    let preds = crate::graph::predecessors(m);
    let mut layered = target.intersection(prob1);
    let mut frontier: Vec<usize> = layered.iter().collect();
    while !frontier.is_empty() {
        let mut candidates: Vec<usize> = frontier
            .iter()
            .flat_map(|&t| preds[t].iter().map(|&(s, _)| s))
            .filter(|&s| prob1.contains(s) && !layered.contains(s))
            .collect();
        candidates.sort_unstable();
        candidates.dedup();
        let mut next = Vec::new();
        for s in candidates {
            let chosen = m
                .choices(s)
                .iter()
                .filter(|c| c.support().all(|t| prob1.contains(t)) && c.support().any(|t| layered.contains(t)))
                .map(|c| c.action)
                .min();
            if let Some(a) = chosen {
                strategy[s] = a;
                next.push(s);
            }
        }
        for &s in &next {
            layered.insert(s);
        }
        frontier = next;
    }
    debug_assert!(prob1.is_subset(&layered) || n == 0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Choice, Labeling};

    #[test]
    fn solves_small_systems() {
        let id = vec![vec![rational(1, 1), rational(0, 1)], vec![rational(0, 1), rational(1, 1)]];
        let b = vec![rational(3, 7), rational(-2, 1)];
        assert_eq!(solve_linear_system(&id, &b).unwrap(), b);

        let diag = vec![vec![rational(2, 1), rational(0, 1)], vec![rational(0, 1), rational(4, 1)]];
        let ones = vec![rational(1, 1), rational(1, 1)];
        assert_eq!(solve_linear_system(&diag, &ones).unwrap(), vec![rational(1, 2), rational(1, 4)]);

        let zero = vec![vec![rational(0, 1); 2]; 2];
        assert_eq!(solve_linear_system(&zero, &ones), Err(NumericError::SingularMatrix));
    }

    #[test]
    fn needs_row_swap() {
        let a = vec![vec![rational(0, 1), rational(1, 3)], vec![rational(1, 2), rational(1, 1)]];
        let b = vec![rational(1, 1), rational(2, 1)];
        assert_eq!(solve_linear_system(&a, &b).unwrap(), vec![rational(-2, 1), rational(3, 1)]);
    }

    #[test]
    fn rational_text_round_trip() {
        let q = rational(-6, 8);
        assert_eq!(format_rational(&q), "-3/4");
        assert_eq!(parse_rational("-3/4"), Some(q));
        assert_eq!(parse_rational("5"), Some(rational(5, 1)));
        assert_eq!(parse_rational("1/0"), None);
    }

    /// s: a -> {t:1/2, u:1/2}; t, u absorbing.
    fn one_step_coin() -> Mdp {
        Mdp::from_parts(
            vec!["s".into(), "t".into(), "u".into()],
            vec!["a".into(), "b".into()],
            vec![
                vec![Choice { action: 0, successors: vec![(1, rational(1, 2)), (2, rational(1, 2))] }],
                vec![Choice { action: 1, successors: vec![(1, rational(1, 1))] }],
                vec![Choice { action: 1, successors: vec![(2, rational(1, 1))] }],
            ],
            Labeling::Priorities(vec![1, 0, 1]),
        )
        .unwrap()
    }

    #[test]
    fn one_step_coin_values() {
        let m = one_step_coin();
        let sol = max_reachability(&m, &StateSet::from_indices(3, [1]));
        assert_eq!(sol.values, vec![rational(1, 2), rational(1, 1), rational(0, 1)]);
        let sol = max_reachability(&m, &StateSet::from_indices(3, [2]));
        assert_eq!(sol.values[1], rational(0, 1));
    }

    #[test]
    fn policy_iteration_prefers_better_exit() {
        // s: stay (self loop), go -> {t:1/3, u:2/3}, jump -> v; v: back -> s, exit -> {t:1/2, u:1/2}
        let m = Mdp::from_parts(
            vec!["s".into(), "t".into(), "u".into(), "v".into()],
            vec!["stay".into(), "go".into(), "jump".into(), "back".into(), "exit".into(), "loop".into()],
            vec![
                vec![
                    Choice { action: 0, successors: vec![(0, rational(1, 1))] },
                    Choice { action: 1, successors: vec![(1, rational(1, 3)), (2, rational(2, 3))] },
                    Choice { action: 2, successors: vec![(3, rational(1, 1))] },
                ],
                vec![Choice { action: 5, successors: vec![(1, rational(1, 1))] }],
                vec![Choice { action: 5, successors: vec![(2, rational(1, 1))] }],
                vec![
                    Choice { action: 3, successors: vec![(0, rational(1, 1))] },
                    Choice { action: 4, successors: vec![(1, rational(1, 2)), (2, rational(1, 2))] },
                ],
            ],
            Labeling::Priorities(vec![0, 0, 0, 0]),
        )
        .unwrap();
        let sol = max_reachability(&m, &StateSet::from_indices(4, [1]));
        assert_eq!(sol.values[0], rational(1, 2));
        assert_eq!(sol.values[3], rational(1, 2));
        assert_eq!(sol.strategy[0], 2);
        assert_eq!(sol.strategy[3], 4);
    }
}
