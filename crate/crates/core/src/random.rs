//! Seeded random model generator for tests and benchmarks.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Choice, Kind, Labeling, Mdp};
use crate::numeric::Rational;

#[derive(Clone, Debug)]
pub struct RandomMdpConfig {
    pub states: usize,
    pub kind: Kind,
    /// Relative weight of drawing 1, 2, ... enabled actions per state.
    pub action_count_weights: Vec<u32>,
    pub max_support: usize,
    /// Weights are drawn from `-max_abs_weight..=max_abs_weight`.
    pub max_abs_weight: i64,
    /// Priorities are drawn from `0..=max_priority`.
    pub max_priority: u32,
}

impl RandomMdpConfig {
    /// Small instances: up to three actions per state, mostly one.
    pub fn small(states: usize, kind: Kind) -> Self {
        RandomMdpConfig {
            states,
            kind,
            action_count_weights: vec![6, 3, 1],
            max_support: 2,
            max_abs_weight: 2,
            max_priority: 3,
        }
    }

    /// Exactly `actions` actions in every state.
    pub fn uniform(states: usize, actions: usize, kind: Kind) -> Self {
        let mut action_count_weights = vec![0; actions];
        action_count_weights[actions - 1] = 1;
        RandomMdpConfig { states, kind, action_count_weights, max_support: 3, max_abs_weight: 2, max_priority: 3 }
    }
}

/// Draws a model; identical `(config, seed)` pairs give identical models.
/// Action `a{s}_{j}` is the `j`-th action of state `s`.
pub fn random_mdp(config: &RandomMdpConfig, seed: u64) -> Mdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.states;
    let counts = WeightedIndex::new(&config.action_count_weights).expect("some positive action-count weight");
    let mut action_names = Vec::new();
    let mut weights = Vec::new();
    let mut choices = Vec::with_capacity(n);
    for s in 0..n {
        let k = counts.sample(&mut rng) + 1;
        let mut row = Vec::with_capacity(k);
        for j in 0..k {
            let action = action_names.len();
            action_names.push(format!("a{s}_{j}"));
            weights.push(rng.gen_range(-config.max_abs_weight..=config.max_abs_weight));
            let support = rng.gen_range(1..=config.max_support.min(n));
            let mut targets = sample(&mut rng, n, support).into_vec();
            targets.sort_unstable();
            let raw: Vec<i64> = targets.iter().map(|_| rng.gen_range(1..=4)).collect();
            let total: i64 = raw.iter().sum();
            let successors = targets
                .into_iter()
                .zip(raw)
                .map(|(t, r)| (t, Rational::new(r.into(), total.into())))
                .collect();
            row.push(Choice { action, successors });
        }
        choices.push(row);
    }
    let labeling = match config.kind {
        Kind::Mp => Labeling::Weights(weights),
        Kind::Par => Labeling::Priorities((0..n).map(|_| rng.gen_range(0..=config.max_priority)).collect()),
    };
    let names = (0..n).map(|s| format!("s{s}")).collect();
    Mdp::from_parts(names, action_names, choices, labeling).expect("generator produces valid models")
}
