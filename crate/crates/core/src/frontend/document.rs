//! JSON result and strategy documents.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::print::print_model;
use crate::classify::{EcResult, EcStatus};
use crate::model::Mdp;
use crate::solver::Confidence;
use crate::strategy::{MealyStrategy, StrategyError};

/// SHA-256 of the canonical printing of `m`.
pub fn model_hash(m: &Mdp) -> String {
    hex::encode(&Sha256::digest(print_model(m).as_bytes())[..])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateValue {
    pub state: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MecReportEntry {
    pub index: usize,
    pub states: Vec<String>,
    /// `good`, `not_good` or `not_good_within_cap`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_star: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u32>,
    pub safe_region: Vec<String>,
}

/// Names states in a MEC classification.
pub fn mec_report(m: &Mdp, report: &[EcStatus]) -> Vec<MecReportEntry> {
    report
        .iter()
        .map(|st| {
            let (status, cap) = match st.result {
                EcResult::Good { .. } => ("good", None),
                EcResult::NotGood => ("not_good", None),
                EcResult::NotGoodWithinCap(cap) => ("not_good_within_cap", Some(cap)),
            };
            MecReportEntry {
                index: st.mec,
                states: st.states.iter().map(|&s| m.state_name(s).to_string()).collect(),
                status: status.to_string(),
                lambda_star: st.lambda_star(),
                cap,
                safe_region: st.safe_region().into_iter().map(|s| m.state_name(s).to_string()).collect(),
            }
        })
        .collect()
}

/// Output of `winmdp check`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub model_hash: String,
    pub objective: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<u32>,
    pub state: String,
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<String>,
    /// `yes`, `no` or `inconclusive`; absent without a threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decision: Option<String>,
    pub confidence: Confidence,
    pub values: Vec<StateValue>,
    pub mec_report: Vec<MecReportEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyDocument>,
    pub warnings: Vec<String>,
    pub timing_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InitEntry {
    pub state: String,
    pub memory: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEntry {
    pub state: String,
    pub memory: String,
    pub action: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateEntry {
    pub memory: String,
    pub action: String,
    pub state: String,
    pub next: String,
}

/// Name-based table form of a Mealy strategy. Update entries list only
/// memory changes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyDocument {
    pub memory: Vec<String>,
    pub init: Vec<InitEntry>,
    pub next_action: Vec<ActionEntry>,
    pub update: Vec<UpdateEntry>,
}

pub fn export_strategy(m: &Mdp, sigma: &MealyStrategy) -> StrategyDocument {
    let label = |q: usize| sigma.memory_label(q).to_string();
    StrategyDocument {
        memory: sigma.memory_labels().to_vec(),
        init: (0..m.num_states())
            .map(|s| InitEntry { state: m.state_name(s).to_string(), memory: label(sigma.initial_memory(s)) })
            .collect(),
        next_action: sigma
            .next_action_table()
            .iter()
            .map(|(&(s, q), &a)| ActionEntry {
                state: m.state_name(s).to_string(),
                memory: label(q),
                action: m.action_name(a).to_string(),
            })
            .collect(),
        update: sigma
            .update_table()
            .iter()
            .map(|(&(q, a, t), &q2)| UpdateEntry {
                memory: label(q),
                action: m.action_name(a).to_string(),
                state: m.state_name(t).to_string(),
                next: label(q2),
            })
            .collect(),
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ImportError {
    #[error("unknown state `{0}` in strategy document")]
    UnknownState(String),
    #[error("unknown action `{0}` in strategy document")]
    UnknownAction(String),
    #[error("unknown memory label `{0}` in strategy document")]
    UnknownMemory(String),
    #[error("no initial memory for state `{0}`")]
    MissingInit(String),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

pub fn import_strategy(m: &Mdp, doc: &StrategyDocument) -> Result<MealyStrategy, ImportError> {
    let mem: HashMap<&str, usize> = doc.memory.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let q = |l: &str| mem.get(l).copied().ok_or_else(|| ImportError::UnknownMemory(l.to_string()));
    let s = |n: &str| m.state_index(n).ok_or_else(|| ImportError::UnknownState(n.to_string()));
    let a = |n: &str| m.action_index(n).ok_or_else(|| ImportError::UnknownAction(n.to_string()));
    let mut init = vec![None; m.num_states()];
    for e in &doc.init {
        init[s(&e.state)?] = Some(q(&e.memory)?);
    }
    let init = init
        .into_iter()
        .enumerate()
        .map(|(i, x)| x.ok_or_else(|| ImportError::MissingInit(m.state_name(i).to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut next_action = BTreeMap::new();
    for e in &doc.next_action {
        next_action.insert((s(&e.state)?, q(&e.memory)?), a(&e.action)?);
    }
    let mut update = BTreeMap::new();
    for e in &doc.update {
        update.insert((q(&e.memory)?, a(&e.action)?, s(&e.state)?), q(&e.next)?);
    }
    Ok(MealyStrategy::new(m, doc.memory.clone(), init, next_action, update)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_model;
    use crate::model::Kind;
    use crate::solver::solve_dfw;

    #[test]
    fn export_import_identity() {
        let m = parse_model("mdp par\nstate s priority 1\nstate t priority 0\naction s a\n  t 1/2\n  s 1/2\naction t b\n  t 1/1\n")
            .unwrap();
        let v = solve_dfw(&m, Kind::Par, 3).unwrap();
        let doc = export_strategy(&m, &v.strategy);
        let back = import_strategy(&m, &doc).unwrap();
        assert_eq!(back, v.strategy);
        let json = serde_json::to_string(&doc).unwrap();
        let reread: StrategyDocument = serde_json::from_str(&json).unwrap();
        assert_eq!(reread, doc);
        assert_eq!(model_hash(&m).len(), 64);
    }

    #[test]
    fn memoryless_document() {
        let m = parse_model("mdp mp\nstate x\naction x a weight 0\n  x 1/1\n").unwrap();
        let doc = export_strategy(&m, &MealyStrategy::memoryless(&m, &[0]));
        assert_eq!(doc.memory.len(), 1);
        assert!(doc.update.is_empty());
    }
}
