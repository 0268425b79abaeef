//! Line-based model format.
//!
//! ```text
//! mdp par                      # or: mdp mp
//! state s1 priority 1          # mp models: state s1
//! action s1 a                  # mp models: action s1 a weight -1
//!   s2 1/2                     # indented successor lines
//!   s1 1/2
//! ```

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use crate::model::{validate_mdp, Kind, Mdp, RawAction, RawMdp, RawState, RawSuccessor, ValidationError};
use crate::numeric::Rational;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax { line, message: message.into() }
}

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<Mdp, ParseError> {
    Ok(validate_mdp(&parse_raw(text)?)?)
}

/// Parses a model without semantic checks.
pub fn parse_raw(text: &str) -> Result<RawMdp, ParseError> {
    let mut kind = None;
    let mut states = Vec::new();
    let mut actions: Vec<RawAction> = Vec::new();
    let mut last_line = 0;
    for (i, full) in text.lines().enumerate() {
        let line = i + 1;
        last_line = line;
        let content = full.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let indented = content.starts_with([' ', '\t']);
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if kind.is_none() {
            match tokens.as_slice() {
                ["mdp", "mp"] if !indented => kind = Some(Kind::Mp),
                ["mdp", "par"] if !indented => kind = Some(Kind::Par),
                _ => return Err(syntax(line, "expected header `mdp mp` or `mdp par`")),
            }
            continue;
        }
        if indented {
            let action = actions
                .last_mut()
                .ok_or_else(|| syntax(line, "successor line outside an action block"))?;
            let [target, prob] = tokens.as_slice() else {
                return Err(syntax(line, "expected successor `<state> <num>/<den>`"));
            };
            action.successors.push(RawSuccessor {
                target: target.to_string(),
                probability: parse_fraction(prob).ok_or_else(|| syntax(line, format!("malformed probability `{prob}`")))?,
                line: Some(line),
            });
            continue;
        }
        match tokens.as_slice() {
            ["state", name] => states.push(RawState { name: name.to_string(), priority: None, line: Some(line) }),
            ["state", name, "priority", p] => {
                let priority = p.parse().map_err(|_| syntax(line, format!("malformed priority `{p}`")))?;
                states.push(RawState { name: name.to_string(), priority: Some(priority), line: Some(line) });
            }
            ["action", state, name] => actions.push(RawAction {
                state: state.to_string(),
                name: name.to_string(),
                weight: None,
                successors: Vec::new(),
                line: Some(line),
            }),
            ["action", state, name, "weight", w] => {
                let weight = w.parse().map_err(|_| syntax(line, format!("malformed weight `{w}`")))?;
                actions.push(RawAction {
                    state: state.to_string(),
                    name: name.to_string(),
                    weight: Some(weight),
                    successors: Vec::new(),
                    line: Some(line),
                });
            }
            ["mdp", ..] => return Err(syntax(line, "duplicate header")),
            _ => return Err(syntax(line, format!("unrecognized line `{}`", content.trim()))),
        }
    }
    let kind = kind.ok_or_else(|| syntax(last_line.max(1), "missing header `mdp mp` or `mdp par`"))?;
    if let Some(a) = actions.iter().find(|a| a.successors.is_empty()) {
        return Err(syntax(a.line.unwrap_or(0), "action block has no successor lines"));
    }
    Ok(RawMdp { kind, states, actions })
}

fn parse_fraction(text: &str) -> Option<Rational> {
    let (n, d) = text.split_once('/')?;
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() || d < BigInt::zero() {
        return None;
    }
    Some(Rational::new(n, d))
}
