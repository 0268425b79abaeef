//! Top-level algorithms for DFW, FW and BW objectives and threshold decisions.

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{
    classify_bounded, classify_fixed, reach_actions, safety_game, ClassifyError, EcResult, EcStatus, GoodLogic,
    GoodPhase,
};
use crate::graph::{mec_decomposition, StateSet};
use crate::model::{restrict_mapped, Kind, Mdp, Variant, WindowSpec};
use crate::numeric::{max_reachability, max_reachability_avoiding, Rational};
use crate::strategy::{materialize, MealyStrategy, StrategyLogic};
use crate::unfold::UnfoldError;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SolveError {
    #[error("objective kind {requested} does not match the model labeling ({model})")]
    KindMismatch { requested: Kind, model: Kind },
    #[error("window size must be at least 1")]
    ZeroLambda,
    #[error("objective {0} requires a window size")]
    MissingLambda(Variant),
}

impl From<UnfoldError> for SolveError {
    fn from(e: UnfoldError) -> Self {
        match e {
            UnfoldError::KindMismatch { requested, model } => SolveError::KindMismatch { requested, model },
            UnfoldError::ZeroLambda => SolveError::ZeroLambda,
        }
    }
}

impl From<ClassifyError> for SolveError {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::Unfold(u) => u.into(),
            other => unreachable!("maximal end-components always classify: {other}"),
        }
    }
}

/// Whether values are exact optima or certified lower bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    Exact,
    /// Some mean-payoff component exhausted the window-size cap; values are
    /// lower bounds.
    BoundedByCap,
}

/// Optimal values for every state, with a strategy attaining them.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub spec: WindowSpec,
    pub values: Vec<Rational>,
    pub strategy: MealyStrategy,
    /// Classification of every MEC (empty for DFW).
    pub mec_report: Vec<EcStatus>,
    pub confidence: Confidence,
}

fn check_kind(m: &Mdp, kind: Kind) -> Result<(), SolveError> {
    if m.kind() == kind {
        Ok(())
    } else {
        Err(SolveError::KindMismatch { requested: kind, model: m.kind() })
    }
}

/// Maximum probability of the direct fixed window objective: never reach a
/// bad configuration of the unfolding.
pub fn solve_dfw(m: &Mdp, kind: Kind, lambda: u32) -> Result<Verdict, SolveError> {
    check_kind(m, kind)?;
    let plan = safety_game(m, kind, lambda)?;
    let u = &plan.unfolding;
    let sol = max_reachability_avoiding(&u.mdp, &plan.safe, &u.bad);
    let actions: Vec<usize> = (0..u.num_configs())
        .map(|c| if plan.safe.contains(c) { plan.actions[c] } else { sol.strategy[c] })
        .collect();
    let values = (0..m.num_states()).map(|s| sol.values[u.initial[s]].clone()).collect();
    Ok(Verdict {
        spec: WindowSpec::dfw(kind, lambda),
        values,
        strategy: u.lift_strategy(m, &actions),
        mec_report: Vec::new(),
        confidence: Confidence::Exact,
    })
}

/// Maximum probability of the fixed window objective: reach a lambda-good MEC.
pub fn solve_fw(m: &Mdp, kind: Kind, lambda: u32) -> Result<Verdict, SolveError> {
    check_kind(m, kind)?;
    if lambda == 0 {
        return Err(SolveError::ZeroLambda);
    }
    solve_by_mecs(m, WindowSpec::fw(kind, lambda), |sub| classify_fixed(sub, kind, lambda))
}

/// Maximum probability of the bounded window objective: reach a BW-good MEC.
/// Mean-payoff components are searched up to `cap` (see
/// [`crate::classify::default_cap`]).
pub fn solve_bw(m: &Mdp, kind: Kind, cap: Option<u32>) -> Result<Verdict, SolveError> {
    check_kind(m, kind)?;
    solve_by_mecs(m, WindowSpec::bw(kind), |sub| classify_bounded(sub, kind, cap))
}

/// Dispatches on the variant of `spec`.
pub fn solve(m: &Mdp, spec: &WindowSpec, cap: Option<u32>) -> Result<Verdict, SolveError> {
    match spec.variant {
        Variant::Dfw => solve_dfw(m, spec.kind, spec.lambda.ok_or(SolveError::MissingLambda(Variant::Dfw))?),
        Variant::Fw => solve_fw(m, spec.kind, spec.lambda.ok_or(SolveError::MissingLambda(Variant::Fw))?),
        Variant::Bw => solve_bw(m, spec.kind, cap),
    }
}

fn solve_by_mecs<F>(m: &Mdp, spec: WindowSpec, classify: F) -> Result<Verdict, SolveError>
where
    F: Fn(&Mdp) -> Result<EcStatus, ClassifyError> + Sync,
{
    let dec = mec_decomposition(m);
    let classified: Vec<(Mdp, EcStatus)> = dec
        .mecs
        .par_iter()
        .enumerate()
        .map(|(i, mec)| {
            let (sub, parent) = restrict_mapped(m, &mec.selection).expect("MECs are closed");
            let mut st = classify(&sub)?;
            st.mec = i;
            st.states = parent;
            Ok((sub, st))
        })
        .collect::<Result<_, ClassifyError>>()?;

    let n = m.num_states();
    let mut target = StateSet::empty(n);
    let mut local = vec![usize::MAX; n];
    for (_, st) in &classified {
        for (i, &s) in st.states.iter().enumerate() {
            local[s] = i;
            if st.is_good() {
                target.insert(s);
            }
        }
    }
    let sol = max_reachability(m, &target);

    let reach: Vec<Option<Vec<usize>>> = classified
        .iter()
        .map(|(sub, st)| match &st.result {
            EcResult::Good { plan, .. } => Some(reach_actions(sub, &plan.region)),
            _ => None,
        })
        .collect();
    let logics: Vec<Option<GoodLogic<'_>>> = classified
        .iter()
        .zip(&reach)
        .map(|((sub, st), r)| match (&st.result, r) {
            (EcResult::Good { plan, .. }, Some(r)) => Some(GoodLogic { plan, reach: r, mec: sub }),
            _ => None,
        })
        .collect();
    let stitched = Stitched { membership: &dec.membership, local: &local, logics: &logics, outside: &sol.strategy };
    let strategy = materialize(m, &stitched);

    let confidence = if classified.iter().any(|(_, st)| matches!(st.result, EcResult::NotGoodWithinCap(_))) {
        Confidence::BoundedByCap
    } else {
        Confidence::Exact
    };
    Ok(Verdict {
        spec,
        values: sol.values,
        strategy,
        mec_report: classified.into_iter().map(|(_, st)| st).collect(),
        confidence,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum StitchedMem {
    Outside,
    Inside { mec: usize, phase: GoodPhase },
}

/// Reach the good MECs, then play each good MEC's own strategy.
struct Stitched<'a> {
    membership: &'a [Option<usize>],
    local: &'a [usize],
    logics: &'a [Option<GoodLogic<'a>>],
    outside: &'a [usize],
}

impl StrategyLogic for Stitched<'_> {
    type Memory = StitchedMem;

    fn initial(&self, s: usize) -> StitchedMem {
        match self.membership[s] {
            Some(i) => match &self.logics[i] {
                Some(g) => StitchedMem::Inside { mec: i, phase: g.enter(self.local[s]) },
                None => StitchedMem::Outside,
            },
            None => StitchedMem::Outside,
        }
    }

    fn action(&self, s: usize, mem: &StitchedMem) -> usize {
        match mem {
            StitchedMem::Outside => self.outside[s],
            StitchedMem::Inside { mec, phase } => {
                self.logics[*mec].as_ref().expect("good").act(self.local[s], phase)
            }
        }
    }

    fn update(&self, mem: &StitchedMem, action: usize, t: usize) -> StitchedMem {
        match mem {
            StitchedMem::Outside => self.initial(t),
            StitchedMem::Inside { mec, phase } => {
                debug_assert_eq!(self.membership[t], Some(*mec));
                let g = self.logics[*mec].as_ref().expect("good");
                StitchedMem::Inside { mec: *mec, phase: g.advance(phase, action, self.local[t]) }
            }
        }
    }

    fn label(&self, mem: &StitchedMem) -> String {
        match mem {
            StitchedMem::Outside => "out".to_string(),
            StitchedMem::Inside { mec, phase } => {
                format!("mec{}:{}", mec, self.logics[*mec].as_ref().expect("good").describe(phase))
            }
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum DecisionError {
    #[error("value is below the threshold but only a lower bound (window-size cap exhausted)")]
    UnsoundForCap,
    #[error("threshold must lie in [0, 1]")]
    ThresholdOutOfRange,
}

/// `Ok(true)` iff the value at `s` is at least `alpha`.
pub fn decide_threshold(v: &Verdict, s: usize, alpha: &Rational) -> Result<bool, DecisionError> {
    if *alpha < Rational::from_integer(0.into()) || *alpha > Rational::one() {
        return Err(DecisionError::ThresholdOutOfRange);
    }
    if v.values[s] >= *alpha {
        Ok(true)
    } else if v.confidence == Confidence::BoundedByCap {
        Err(DecisionError::UnsoundForCap)
    } else {
        Ok(false)
    }
}
