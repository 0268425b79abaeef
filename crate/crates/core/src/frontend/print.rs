//! Canonical printing of models in the text format.

use std::fmt::Write;

use crate::model::{Kind, Mdp};
use crate::numeric::format_rational;

/// Prints `m` so that parsing the result yields the same text again. State
/// lines come first in index order, then action blocks grouped by state.
pub fn print_model(m: &Mdp) -> String {
    let mut out = String::new();
    writeln!(out, "mdp {}", m.kind()).unwrap();
    for s in 0..m.num_states() {
        match m.kind() {
            Kind::Par => writeln!(out, "state {} priority {}", m.state_name(s), m.priority(s).unwrap()).unwrap(),
            Kind::Mp => writeln!(out, "state {}", m.state_name(s)).unwrap(),
        }
    }
    for s in 0..m.num_states() {
        for c in m.choices(s) {
            write!(out, "action {} {}", m.state_name(s), m.action_name(c.action)).unwrap();
            if let Some(w) = m.weight(c.action) {
                write!(out, " weight {w}").unwrap();
            }
            out.push('\n');
            for (t, p) in &c.successors {
                writeln!(out, "  {} {}", m.state_name(*t), format_rational(p)).unwrap();
            }
        }
    }
    out
}
