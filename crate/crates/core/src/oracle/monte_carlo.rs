//! Monte Carlo estimation on sampled runs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::exact::{evaluation_chain, Goal};
use super::OracleError;
use crate::model::{Kind, Mdp, Variant, WindowSpec};
use crate::numeric::{to_f64, Rational};
use crate::strategy::MealyStrategy;

/// Point estimate with a two-sided 99% Hoeffding interval.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub estimate: f64,
    pub samples: u64,
    pub horizon: u64,
    pub seed: u64,
    pub half_width: f64,
    /// How runs whose outcome is undetermined at the horizon are counted.
    pub convention: String,
}

impl Estimate {
    pub fn contains(&self, value: f64) -> bool {
        (self.estimate - value).abs() <= self.half_width
    }
}

/// Half-width of the 99% Hoeffding interval for `n` Bernoulli samples.
pub fn hoeffding_half_width(n: u64) -> f64 {
    ((2.0f64 / 0.01).ln() / (2.0 * n as f64)).sqrt()
}

/// Cumulative distribution of one row, for inverse-transform sampling.
fn cdf(row: &[(usize, Rational)]) -> Vec<(f64, usize)> {
    let mut acc = 0.0;
    row.iter()
        .map(|(t, p)| {
            acc += to_f64(p);
            (acc, *t)
        })
        .collect()
}

fn sample(rng: &mut ChaCha8Rng, dist: &[(f64, usize)]) -> usize {
    let x: f64 = rng.gen::<f64>() * dist.last().map(|d| d.0).unwrap_or(1.0);
    dist.iter().find(|(c, _)| x < *c).unwrap_or(dist.last().expect("nonempty support")).1
}

fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Estimates the probability that `sigma`, started in `s`, satisfies `spec`.
///
/// DFW runs are checked by a sliding-window monitor over the sampled prefix
/// of length `horizon`; a run counts as a success when no window of the
/// prefix stays open for `lambda` steps (so the estimate can only err
/// upward). FW and BW runs are sampled on the chain induced by `sigma`; a run
/// counts as a success only when it sits in a winning bottom component at the
/// horizon (so the estimate can only err downward).
pub fn monte_carlo(
    m: &Mdp,
    sigma: &MealyStrategy,
    spec: &WindowSpec,
    s: usize,
    n: u64,
    horizon: u64,
    seed: u64,
) -> Result<Estimate, OracleError> {
    if n == 0 {
        return Err(OracleError::InvalidArgument("at least one sample is required".into()));
    }
    if horizon < spec.lambda.unwrap_or(1) as u64 {
        return Err(OracleError::InvalidArgument("horizon must be at least the window size".into()));
    }
    if s >= m.num_states() {
        return Err(OracleError::InvalidArgument(format!("state {s} out of range")));
    }
    m.check_kind(spec.kind).map_err(|e| OracleError::InvalidArgument(e.to_string()))?;
    sigma.check(m).map_err(|e| OracleError::InvalidArgument(e.to_string()))?;

    let (successes, convention) = match spec.variant {
        Variant::Dfw => {
            let lambda = spec.window() as u64;
            let dists: Vec<Vec<Vec<(f64, usize)>>> = (0..m.num_states())
                .map(|st| {
                    let mut per_action = vec![Vec::new(); m.num_actions()];
                    for c in m.choices(st) {
                        per_action[c.action] = cdf(&c.successors);
                    }
                    per_action
                })
                .collect();
            let ok: u64 = (0..n)
                .into_par_iter()
                .map(|run| {
                    let mut rng = run_rng(seed, run);
                    u64::from(monitor_dfw(m, sigma, &dists, spec.kind, lambda, s, horizon, &mut rng))
                })
                .sum();
            (ok, "prefix estimate: runs without a violation within the horizon count as successes".to_string())
        }
        Variant::Fw | Variant::Bw => {
            let chain = evaluation_chain(m, sigma, spec, &[s])?;
            let Goal::Reach(good) = &chain.goal else { unreachable!("FW and BW chains are reachability goals") };
            let dists: Vec<Vec<(f64, usize)>> = chain.rows.iter().map(|r| cdf(r)).collect();
            let start = chain.starts[0];
            let ok: u64 = (0..n)
                .into_par_iter()
                .map(|run| {
                    let mut rng = run_rng(seed, run);
                    let mut node = start;
                    for _ in 0..horizon {
                        node = sample(&mut rng, &dists[node]);
                    }
                    u64::from(good.contains(node))
                })
                .sum();
            (ok, "lower bound estimate: runs undetermined at the horizon count as failures".to_string())
        }
    };
    Ok(Estimate {
        estimate: successes as f64 / n as f64,
        samples: n,
        horizon,
        seed,
        half_width: hoeffding_half_width(n),
        convention,
    })
}

/// Samples one run prefix and reports whether every window anchored in it
/// closes within `lambda` steps. Each open window is tracked individually.
#[allow(clippy::too_many_arguments)]
fn monitor_dfw(
    m: &Mdp,
    sigma: &MealyStrategy,
    dists: &[Vec<Vec<(f64, usize)>>],
    kind: Kind,
    lambda: u64,
    start: usize,
    horizon: u64,
    rng: &mut ChaCha8Rng,
) -> bool {
    // (opening position, running sum or running minimum priority)
    let mut open: Vec<(u64, i64)> = Vec::new();
    let mut s = start;
    let mut q = sigma.initial_memory(start);
    for k in 0..horizon {
        let a = sigma.action(s, q).expect("checked strategy");
        match kind {
            Kind::Par => {
                let p = m.priority(s).expect("priority model") as i64;
                open.push((k, p));
                for w in open.iter_mut() {
                    w.1 = w.1.min(p);
                }
                open.retain(|w| w.1 % 2 == 1);
                if open.iter().any(|w| k + 1 - w.0 >= lambda) {
                    return false;
                }
            }
            Kind::Mp => {
                let wt = m.weight(a).expect("weighted model");
                open.push((k, 0));
                for w in open.iter_mut() {
                    w.1 += wt;
                }
                open.retain(|w| w.1 < 0);
                if open.iter().any(|w| k + 1 - w.0 >= lambda) {
                    return false;
                }
            }
        }
        let t = sample(rng, &dists[s][a]);
        q = sigma.next_memory(q, a, t);
        s = t;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Choice, Labeling};
    use crate::numeric::rational;

    #[test]
    fn deterministic_single_run() {
        // u (1) -> v (0) -> v
        let m = Mdp::from_parts(
            vec!["u".into(), "v".into()],
            vec!["go".into()],
            vec![
                vec![Choice { action: 0, successors: vec![(1, rational(1, 1))] }],
                vec![Choice { action: 0, successors: vec![(1, rational(1, 1))] }],
            ],
            Labeling::Priorities(vec![1, 0]),
        )
        .unwrap();
        let sigma = MealyStrategy::memoryless(&m, &[0, 0]);
        let e = monte_carlo(&m, &sigma, &WindowSpec::dfw(Kind::Par, 2), 0, 1, 10, 7).unwrap();
        assert_eq!(e.estimate, 1.0);
        let e = monte_carlo(&m, &sigma, &WindowSpec::dfw(Kind::Par, 1), 0, 1, 10, 7).unwrap();
        assert_eq!(e.estimate, 0.0);
        let e = monte_carlo(&m, &sigma, &WindowSpec::fw(Kind::Par, 1), 0, 1, 10, 7).unwrap();
        assert_eq!(e.estimate, 1.0);
    }

    #[test]
    fn half_width_shrinks() {
        assert!(hoeffding_half_width(100_000) < 0.01);
        assert!(hoeffding_half_width(100) > hoeffding_half_width(1000));
    }
}
