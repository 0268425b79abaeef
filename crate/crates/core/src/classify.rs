//! Classification of end-components: lambda-safe regions, lambda-good and
//! BW-good components, and the reach-then-stay-safe strategies of good ones.
//!
//! All functions take the component as a standalone model (see
//! [`crate::model::restrict`]) and work in its local state indices.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{attractor, is_strongly_connected, GameArena, Player, StateSet};
use crate::model::{Kind, Mdp};
use crate::numeric::max_reachability;
use crate::strategy::{materialize, MealyStrategy, StrategyLogic};
use crate::unfold::{unfold, UnfoldError, UnfoldedMdp};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("sub-model is not an end-component (not strongly connected)")]
    NotAnEc,
    #[error("end-component is not good; no good strategy exists")]
    NotGood,
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
}

/// Winning data of the safety game on the unfolding of a component.
#[derive(Clone, Debug)]
pub struct SafePlan {
    pub unfolding: UnfoldedMdp,
    /// Configurations from which the controller surely avoids the bad set.
    pub safe: StateSet,
    /// Per configuration: the smallest safe action on `safe`, the smallest
    /// enabled action elsewhere.
    pub actions: Vec<usize>,
    /// States whose initial configuration is safe.
    pub region: StateSet,
}

impl SafePlan {
    pub fn is_empty(&self) -> bool {
        self.region.is_empty()
    }
}

/// Solves the safety game of the `lambda`-unfolding of `ec` and returns its
/// winning region over the states of `ec`, with a lifted safe strategy.
pub fn lambda_safe_region(ec: &Mdp, kind: Kind, lambda: u32) -> Result<(StateSet, MealyStrategy), ClassifyError> {
    let plan = safe_plan(ec, kind, lambda)?;
    let strategy = plan.unfolding.lift_strategy(ec, &plan.actions);
    Ok((plan.region, strategy))
}

/// Like [`lambda_safe_region`] but returns the raw game solution.
pub fn safe_plan(ec: &Mdp, kind: Kind, lambda: u32) -> Result<SafePlan, ClassifyError> {
    if !is_strongly_connected(ec) {
        return Err(ClassifyError::NotAnEc);
    }
    Ok(safety_game(ec, kind, lambda)?)
}

/// Safety game on the unfolding of any model (no end-component check).
pub(crate) fn safety_game(m: &Mdp, kind: Kind, lambda: u32) -> Result<SafePlan, UnfoldError> {
    let unfolding = unfold(m, lambda, kind)?;
    let um = &unfolding.mdp;
    let arena = GameArena::new(um);
    let safe = attractor(&arena, &unfolding.bad, Player::Adversary).complement();
    let actions: Vec<usize> = (0..um.num_states())
        .map(|c| {
            if safe.contains(c) {
                um.choices(c)
                    .iter()
                    .filter(|ch| ch.support().all(|d| safe.contains(d)))
                    .map(|ch| ch.action)
                    .min()
                    .expect("safe configurations have a safe action")
            } else {
                um.min_action(c)
            }
        })
        .collect();
    let region = StateSet::from_indices(
        m.num_states(),
        (0..m.num_states()).filter(|&s| safe.contains(unfolding.initial[s])),
    );
    Ok(SafePlan { unfolding, safe, actions, region })
}

/// Outcome of classifying one component.
#[derive(Clone, Debug)]
pub enum EcResult {
    Good {
        lambda_star: u32,
        plan: Box<SafePlan>,
        safe_strategy: MealyStrategy,
    },
    NotGood,
    /// No good window size found up to the cap; not a certificate.
    NotGoodWithinCap(u32),
}

/// Classification of one maximal end-component.
#[derive(Clone, Debug)]
pub struct EcStatus {
    /// Position of the component in the MEC decomposition.
    pub mec: usize,
    pub kind: Kind,
    /// Ambient state index of each local state of the component.
    pub states: Vec<usize>,
    pub result: EcResult,
}

impl EcStatus {
    pub fn is_good(&self) -> bool {
        matches!(self.result, EcResult::Good { .. })
    }

    pub fn lambda_star(&self) -> Option<u32> {
        match &self.result {
            EcResult::Good { lambda_star, .. } => Some(*lambda_star),
            _ => None,
        }
    }

    /// Safe region in ambient state indices (empty unless good).
    pub fn safe_region(&self) -> Vec<usize> {
        match &self.result {
            EcResult::Good { plan, .. } => plan.region.iter().map(|i| self.states[i]).collect(),
            _ => Vec::new(),
        }
    }
}

fn status(ec: &Mdp, kind: Kind, result: EcResult) -> EcStatus {
    EcStatus { mec: 0, kind, states: (0..ec.num_states()).collect(), result }
}

fn good(ec: &Mdp, lambda: u32, plan: SafePlan) -> EcResult {
    let safe_strategy = plan.unfolding.lift_strategy(ec, &plan.actions);
    EcResult::Good { lambda_star: lambda, plan: Box::new(plan), safe_strategy }
}

/// Good for `lambda` iff the safe region is nonempty.
pub fn classify_fixed(mec: &Mdp, kind: Kind, lambda: u32) -> Result<EcStatus, ClassifyError> {
    let plan = safe_plan(mec, kind, lambda)?;
    let result = if plan.is_empty() { EcResult::NotGood } else { good(mec, lambda, plan) };
    Ok(status(mec, kind, result))
}

/// Cap beyond which a parity component that is not good for any tested size
/// is certified not BW-good.
pub fn parity_certified_cap(mec: &Mdp) -> u32 {
    2 * mec.num_states() as u32 + 2
}

/// Default search cap: the certified cap for parity, `|S|^2 * max(W, 1)` for
/// mean-payoff.
pub fn default_cap(mec: &Mdp, kind: Kind) -> u32 {
    match kind {
        Kind::Par => parity_certified_cap(mec),
        Kind::Mp => {
            let n = mec.num_states() as u64;
            let w = mec.max_abs_weight().max(1) as u64;
            (n * n * w).min(u32::MAX as u64) as u32
        }
    }
}

/// Searches the smallest good window size up to `cap` (default
/// [`default_cap`]): doubling, then binary search.
pub fn classify_bounded(mec: &Mdp, kind: Kind, cap: Option<u32>) -> Result<EcStatus, ClassifyError> {
    if !is_strongly_connected(mec) {
        return Err(ClassifyError::NotAnEc);
    }
    let cap = cap.unwrap_or_else(|| default_cap(mec, kind)).max(1);
    let mut cache: BTreeMap<u32, SafePlan> = BTreeMap::new();
    let test = |lambda: u32, cache: &mut BTreeMap<u32, SafePlan>| -> Result<bool, ClassifyError> {
        let plan = safety_game(mec, kind, lambda)?;
        let ok = !plan.is_empty();
        cache.insert(lambda, plan);
        Ok(ok)
    };

    let mut lo = 0u32; // largest size known not good
    let mut hi = None; // smallest size known good
    let mut lambda = 1u32;
    loop {
        if test(lambda, &mut cache)? {
            hi = Some(lambda);
            break;
        }
        lo = lambda;
        if lambda >= cap {
            break;
        }
        lambda = lambda.saturating_mul(2).min(cap);
    }
    let result = match hi {
        None => {
            if kind == Kind::Par && cap >= parity_certified_cap(mec) {
                EcResult::NotGood
            } else {
                EcResult::NotGoodWithinCap(cap)
            }
        }
        Some(mut hi) => {
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if test(mid, &mut cache)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let plan = cache.remove(&hi).expect("tested");
            good(mec, hi, plan)
        }
    };
    Ok(status(mec, kind, result))
}

/// Strategy for a good component: reach the safe region almost surely with a
/// memoryless strategy, then follow the safe strategy from the entry state.
#[derive(Clone, Debug)]
pub struct GoodStrategy {
    pub strategy: MealyStrategy,
    /// Memoryless reach-phase action per state.
    pub reach: Vec<usize>,
    /// States where the safe phase starts.
    pub region: StateSet,
}

/// Memory of a good-component strategy.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum GoodPhase {
    Reach,
    /// Current configuration of the component's unfolding.
    Safe(usize),
}

/// Reach/safe phase logic of a good component, in local indices.
pub struct GoodLogic<'a> {
    pub plan: &'a SafePlan,
    pub reach: &'a [usize],
    pub mec: &'a Mdp,
}

impl GoodLogic<'_> {
    /// Phase on arrival in state `t` from outside the safe phase.
    pub fn enter(&self, t: usize) -> GoodPhase {
        if self.plan.region.contains(t) {
            GoodPhase::Safe(self.plan.unfolding.initial[t])
        } else {
            GoodPhase::Reach
        }
    }

    pub fn act(&self, s: usize, phase: &GoodPhase) -> usize {
        match phase {
            GoodPhase::Reach => self.reach[s],
            GoodPhase::Safe(c) => self.plan.actions[*c],
        }
    }

    pub fn advance(&self, phase: &GoodPhase, a: usize, t: usize) -> GoodPhase {
        match phase {
            GoodPhase::Reach => self.enter(t),
            GoodPhase::Safe(c) => GoodPhase::Safe(self.plan.unfolding.successor(self.mec, *c, a, t)),
        }
    }

    pub fn describe(&self, phase: &GoodPhase) -> String {
        match phase {
            GoodPhase::Reach => "reach".to_string(),
            GoodPhase::Safe(c) => format!("safe{}", self.plan.unfolding.mdp.state_name(*c)),
        }
    }
}

impl StrategyLogic for GoodLogic<'_> {
    type Memory = GoodPhase;

    fn initial(&self, s: usize) -> GoodPhase {
        self.enter(s)
    }

    fn action(&self, s: usize, mem: &GoodPhase) -> usize {
        self.act(s, mem)
    }

    fn update(&self, mem: &GoodPhase, action: usize, t: usize) -> GoodPhase {
        self.advance(mem, action, t)
    }

    fn label(&self, mem: &GoodPhase) -> String {
        self.describe(mem)
    }
}

/// Memoryless actions reaching `region` almost surely inside a component.
pub fn reach_actions(mec: &Mdp, region: &StateSet) -> Vec<usize> {
    max_reachability(mec, region).strategy
}

/// Composes the reach phase and the safe phase of a good component.
pub fn build_good_strategy(mec: &Mdp, status: &EcStatus) -> Result<GoodStrategy, ClassifyError> {
    let EcResult::Good { plan, .. } = &status.result else {
        return Err(ClassifyError::NotGood);
    };
    let reach = reach_actions(mec, &plan.region);
    let strategy = materialize(mec, &GoodLogic { plan, reach: &reach, mec });
    Ok(GoodStrategy { strategy, reach, region: plan.region.clone() })
}
