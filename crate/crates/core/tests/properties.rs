//! Property tests on seeded random models, each checked against a small
//! independent oracle.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use proptest::prelude::*;
use winmdp::classify::{build_good_strategy, classify_bounded, classify_fixed, lambda_safe_region};
use winmdp::frontend::{parse_model, print_model};
use winmdp::graph::{attractor, is_strongly_connected, mec_decomposition, GameArena, Player, StateSet};
use winmdp::model::{restrict, Selection};
use winmdp::numeric::{chain_reachability, max_reachability};
use winmdp::oracle::eval_strategy_exact_all;
use winmdp::random::{random_mdp, RandomMdpConfig};
use winmdp::unfold::{initial_config, is_bad, step, unfold};
use winmdp::{solve_dfw, solve_fw, Kind, Mdp, MealyStrategy, Rational, WindowSpec};

fn kind_strategy() -> impl Strategy<Value = Kind> {
    prop_oneof![Just(Kind::Mp), Just(Kind::Par)]
}

fn small_mdp(max_states: usize) -> impl Strategy<Value = Mdp> {
    (1..=max_states, kind_strategy(), any::<u64>())
        .prop_map(|(n, kind, seed)| random_mdp(&RandomMdpConfig::small(n, kind), seed))
}

/// Restrictions of `m` to each of its MECs.
fn mec_models(m: &Mdp) -> Vec<Mdp> {
    mec_decomposition(m).mecs.iter().map(|mec| restrict(m, &mec.selection).unwrap()).collect()
}

/// State sets of all MECs by enumerating state subsets: a subset hosts an
/// end-component iff, keeping only actions staying inside it, every state
/// keeps an action and the result is strongly connected.
fn brute_mec_states(m: &Mdp) -> BTreeSet<Vec<usize>> {
    let n = m.num_states();
    let mut ecs: Vec<Vec<usize>> = Vec::new();
    for mask in 1u32..(1 << n) {
        let inside = |s: usize| mask & (1 << s) != 0;
        let mut sel = Selection::new();
        for s in (0..n).filter(|&s| inside(s)) {
            let acts: BTreeSet<usize> =
                m.choices(s).iter().filter(|c| c.support().all(inside)).map(|c| c.action).collect();
            sel.insert(s, acts);
        }
        if sel.values().any(|a| a.is_empty()) {
            continue;
        }
        if is_strongly_connected(&restrict(m, &sel).unwrap()) {
            ecs.push(sel.keys().copied().collect());
        }
    }
    let subset = |a: &Vec<usize>, b: &Vec<usize>| a.iter().all(|x| b.contains(x));
    ecs.iter().filter(|e| !ecs.iter().any(|f| f.len() > e.len() && subset(e, f))).cloned().collect()
}

/// Value of every memoryless strategy for reaching `target`, maximized.
fn brute_max_reach(m: &Mdp, target: &StateSet) -> Vec<Rational> {
    let n = m.num_states();
    let mut best = vec![Rational::zero(); n];
    let mut digits = vec![0usize; n];
    loop {
        let rows: Vec<_> = (0..n).map(|s| m.choices(s)[digits[s]].successors.clone()).collect();
        for (b, v) in best.iter_mut().zip(chain_reachability(&rows, target)) {
            if v > *b {
                *b = v;
            }
        }
        let mut i = 0;
        while i < n {
            digits[i] += 1;
            if digits[i] < m.choices(i).len() {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == n {
            return best;
        }
    }
}

/// Whether some window of the finite run stays open for `lambda` steps.
/// `states` has one more entry than `actions`.
fn naive_window_failure(m: &Mdp, lambda: usize, states: &[usize], actions: &[usize]) -> bool {
    match m.kind() {
        Kind::Par => (0..states.len()).filter(|i| i + lambda <= states.len()).any(|i| {
            let mut min = u32::MAX;
            !(i..i + lambda).any(|j| {
                min = min.min(m.priority(states[j]).unwrap());
                min % 2 == 0
            })
        }),
        Kind::Mp => (0..actions.len()).filter(|i| i + lambda <= actions.len()).any(|i| {
            let mut sum = 0;
            !(i..i + lambda).any(|j| {
                sum += m.weight(actions[j]).unwrap();
                sum >= 0
            })
        }),
    }
}

fn sample_path(m: &Mdp, start: usize, picks: &[(usize, usize)]) -> (Vec<usize>, Vec<usize>) {
    let mut states = vec![start];
    let mut actions = Vec::new();
    let mut s = start;
    for &(ai, ti) in picks {
        let c = &m.choices(s)[ai % m.choices(s).len()];
        let t = c.successors[ti % c.successors.len()].0;
        actions.push(c.action);
        states.push(t);
        s = t;
    }
    (states, actions)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn print_parse_is_fixpoint(m in small_mdp(6)) {
        let text = print_model(&m);
        let back = parse_model(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(print_model(&back), text);
    }

    #[test]
    fn restrict_to_everything_is_identity(m in small_mdp(6)) {
        prop_assert_eq!(restrict(&m, &m.full_selection()).unwrap(), m);
    }

    #[test]
    fn mecs_match_subset_enumeration(m in small_mdp(5)) {
        let dec = mec_decomposition(&m);
        let got: BTreeSet<Vec<usize>> = dec.mecs.iter().map(|mec| mec.states().collect()).collect();
        prop_assert_eq!(got, brute_mec_states(&m));
        for mec in &dec.mecs {
            prop_assert!(is_strongly_connected(&restrict(&m, &mec.selection).unwrap()));
        }
    }

    #[test]
    fn attractor_is_monotone_and_idempotent(m in small_mdp(6), a in any::<u8>(), b in any::<u8>()) {
        let n = m.num_states();
        let small = StateSet::from_indices(n, (0..n).filter(|s| a & (1 << s) != 0));
        let large = small.union(&StateSet::from_indices(n, (0..n).filter(|s| b & (1 << s) != 0)));
        let arena = GameArena::new(&m);
        for player in [Player::Controller, Player::Adversary] {
            let attr = attractor(&arena, &small, player);
            prop_assert!(small.is_subset(&attr));
            prop_assert_eq!(&attractor(&arena, &attr, player), &attr);
            prop_assert!(attr.is_subset(&attractor(&arena, &large, player)));
        }
    }

    #[test]
    fn max_reachability_matches_enumeration(m in small_mdp(5), mask in 1u8..) {
        let n = m.num_states();
        let target = StateSet::from_indices(n, (0..n).filter(|s| mask & (1 << s) != 0));
        let sol = max_reachability(&m, &target);
        prop_assert_eq!(&sol.values, &brute_max_reach(&m, &target));
        // The returned strategy attains the values.
        let rows: Vec<_> = (0..n).map(|s| m.choice(s, sol.strategy[s]).unwrap().successors.clone()).collect();
        prop_assert_eq!(chain_reachability(&rows, &target), sol.values);
    }

    #[test]
    fn unfolding_agrees_with_sliding_windows(
        m in small_mdp(5),
        lambda in 1u32..5,
        picks in proptest::collection::vec((any::<usize>(), any::<usize>()), 0..30),
    ) {
        let (states, actions) = sample_path(&m, 0, &picks);
        let kind = m.kind();
        let mut c = initial_config(&m, kind, states[0]);
        let mut hit = is_bad(kind, lambda, c);
        for (i, &a) in actions.iter().enumerate() {
            c = step(&m, kind, lambda, c, a, states[i + 1]);
            hit |= is_bad(kind, lambda, c);
        }
        prop_assert_eq!(hit, naive_window_failure(&m, lambda as usize, &states, &actions));
    }

    #[test]
    fn unfolding_size_is_bounded(m in small_mdp(6), lambda in 1u32..5) {
        let u = unfold(&m, lambda, m.kind()).unwrap();
        let n = m.num_states();
        let l = lambda as usize;
        let bound = match m.kind() {
            Kind::Par => n * l * (m.max_priority() as usize + 1),
            Kind::Mp => n * (l + 1) * (l * m.max_abs_weight() as usize + 1),
        };
        prop_assert!(u.num_configs() <= bound);
    }

    #[test]
    fn dfw_is_one_exactly_outside_the_bad_attractor(m in small_mdp(5), lambda in 1u32..4) {
        let u = unfold(&m, lambda, m.kind()).unwrap();
        let attr = attractor(&GameArena::new(&u.mdp), &u.bad, Player::Adversary);
        let v = solve_dfw(&m, m.kind(), lambda).unwrap();
        for s in 0..m.num_states() {
            prop_assert_eq!(v.values[s].is_one(), !attr.contains(u.initial[s]));
        }
    }

    #[test]
    fn dfw_grows_with_lambda_and_sits_below_fw(m in small_mdp(5), lambda in 1u32..4) {
        let kind = m.kind();
        let d1 = solve_dfw(&m, kind, lambda).unwrap().values;
        let d2 = solve_dfw(&m, kind, lambda + 1).unwrap().values;
        let f1 = solve_fw(&m, kind, lambda).unwrap().values;
        let f2 = solve_fw(&m, kind, lambda + 1).unwrap().values;
        for s in 0..m.num_states() {
            prop_assert!(d1[s] <= d2[s] && d1[s] <= f1[s] && f1[s] <= f2[s]);
        }
    }

    #[test]
    fn safe_region_grows_with_lambda(m in small_mdp(5), lambda in 1u32..4) {
        for ec in mec_models(&m) {
            let (r1, _) = lambda_safe_region(&ec, ec.kind(), lambda).unwrap();
            let (r2, _) = lambda_safe_region(&ec, ec.kind(), lambda + 1).unwrap();
            prop_assert!(r1.is_subset(&r2));
        }
    }

    #[test]
    fn sub_ec_goodness_lifts_to_the_mec(m in small_mdp(5), lambda in 1u32..4) {
        // A good sub-component makes every enclosing component good.
        for ec in mec_models(&m) {
            let mec_good = classify_fixed(&ec, ec.kind(), lambda).unwrap().is_good();
            for sub in mec_models(&restrict(&ec, &single_action_selection(&ec)).unwrap()) {
                if classify_fixed(&sub, sub.kind(), lambda).unwrap().is_good() {
                    prop_assert!(mec_good);
                }
            }
        }
    }

    #[test]
    fn bounded_classification_is_minimal(m in small_mdp(5)) {
        for ec in mec_models(&m) {
            let st = classify_bounded(&ec, ec.kind(), None).unwrap();
            if let Some(l) = st.lambda_star() {
                prop_assert!(classify_fixed(&ec, ec.kind(), l).unwrap().is_good());
                if l > 1 {
                    prop_assert!(!classify_fixed(&ec, ec.kind(), l - 1).unwrap().is_good());
                }
            } else if ec.kind() == Kind::Par {
                let cap = 2 * ec.num_states() as u32 + 2;
                prop_assert!(!classify_fixed(&ec, Kind::Par, cap).unwrap().is_good());
            }
        }
    }

    #[test]
    fn good_component_strategy_wins_surely(m in small_mdp(5), lambda in 1u32..4) {
        for ec in mec_models(&m) {
            let st = classify_fixed(&ec, ec.kind(), lambda).unwrap();
            if st.is_good() {
                let g = build_good_strategy(&ec, &st).unwrap();
                let values = eval_strategy_exact_all(&ec, &g.strategy, &WindowSpec::fw(ec.kind(), lambda)).unwrap();
                prop_assert!(values.iter().all(|v| v.is_one()));
            }
        }
    }

    #[test]
    fn chains_have_their_only_strategy_value(n in 1usize..6, kind in kind_strategy(), seed in any::<u64>(), lambda in 1u32..4) {
        let mut cfg = RandomMdpConfig::small(n, kind);
        cfg.action_count_weights = vec![1];
        let m = random_mdp(&cfg, seed);
        prop_assert!(m.is_markov_chain());
        let only = MealyStrategy::memoryless(&m, &(0..n).map(|s| m.min_action(s)).collect::<Vec<_>>());
        for spec in [WindowSpec::dfw(kind, lambda), WindowSpec::fw(kind, lambda)] {
            let solved = winmdp::solve(&m, &spec, None).unwrap().values;
            prop_assert_eq!(solved, eval_strategy_exact_all(&m, &only, &spec).unwrap());
        }
    }
}

/// Keeps only the smallest action of every state.
fn single_action_selection(m: &Mdp) -> Selection {
    (0..m.num_states()).map(|s| (s, BTreeSet::from([m.min_action(s)]))).collect()
}

#[test]
fn fair_coin_between_good_and_bad_sinks_has_fw_value_half() {
    let m = parse_model(
        "mdp par\nstate s priority 0\nstate good priority 0\nstate bad priority 1\n\
         action s a\n  good 1/2\n  bad 1/2\naction good g\n  good 1/1\naction bad b\n  bad 1/1\n",
    )
    .unwrap();
    let s = m.state_index("s").unwrap();
    for lambda in 1..=4 {
        let v = solve_fw(&m, Kind::Par, lambda).unwrap();
        assert_eq!(v.values[s], Rational::new(1.into(), 2.into()));
        let reeval = eval_strategy_exact_all(&m, &v.strategy, &v.spec).unwrap();
        assert_eq!(reeval, v.values);
    }
}
