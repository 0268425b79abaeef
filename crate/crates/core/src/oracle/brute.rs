//! Optimal values by enumerating every pure memoryless strategy of the
//! unfolding. Only for tiny instances.

use num_traits::{One, Zero};

use super::OracleError;
use crate::graph::{bottom_sccs, StateSet};
use crate::model::{Mdp, Variant, WindowSpec};
use crate::numeric::{chain_reachability, Rational};
use crate::unfold::unfold;

/// Largest number of candidate strategies [`brute_force_value`] accepts.
pub const BRUTE_FORCE_LIMIT: u128 = 10_000;

/// Number of pure memoryless strategies of the unfolding for `spec`.
pub fn count_memoryless_strategies(m: &Mdp, spec: &WindowSpec) -> Result<u128, OracleError> {
    let u = unfold(m, spec.lambda.ok_or(OracleError::Unsupported(spec.variant))?, spec.kind)?;
    Ok((0..u.num_configs()).fold(1u128, |acc, c| acc.saturating_mul(u.mdp.choices(c).len() as u128)))
}

/// Pointwise maximum, over all pure memoryless strategies of the unfolding,
/// of the DFW (never visit a bad configuration) or FW (end in a bottom
/// component free of bad configurations) probability.
pub fn brute_force_value(m: &Mdp, spec: &WindowSpec) -> Result<Vec<Rational>, OracleError> {
    if spec.variant == Variant::Bw {
        return Err(OracleError::Unsupported(Variant::Bw));
    }
    m.check_kind(spec.kind).map_err(|e| OracleError::InvalidArgument(e.to_string()))?;
    let u = unfold(m, spec.window(), spec.kind)?;
    let um = &u.mdp;
    let k = um.num_states();
    let radix: Vec<usize> = (0..k).map(|c| um.choices(c).len()).collect();
    let candidates = radix.iter().fold(1u128, |acc, r| acc.saturating_mul(*r as u128));
    if candidates > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge { candidates });
    }

    let mut best = vec![Rational::zero(); m.num_states()];
    let mut digits = vec![0usize; k];
    loop {
        let rows: Vec<Vec<(usize, Rational)>> = (0..k).map(|c| um.choices(c)[digits[c]].successors.clone()).collect();
        let values: Vec<Rational> = match spec.variant {
            Variant::Dfw => chain_reachability(&rows, &u.bad)
                .into_iter()
                .map(|p| Rational::one() - p)
                .collect(),
            _ => {
                let adj: Vec<Vec<usize>> = rows.iter().map(|r| r.iter().map(|(t, _)| *t).collect()).collect();
                let mut good = StateSet::empty(k);
                for comp in bottom_sccs(&adj) {
                    if comp.iter().all(|&c| !u.bad.contains(c)) {
                        for c in comp {
                            good.insert(c);
                        }
                    }
                }
                chain_reachability(&rows, &good)
            }
        };
        for s in 0..m.num_states() {
            let v = &values[u.initial[s]];
            if *v > best[s] {
                best[s] = v.clone();
            }
        }
        // Mixed-radix increment.
        let mut pos = 0;
        loop {
            if pos == k {
                return Ok(best);
            }
            digits[pos] += 1;
            if digits[pos] < radix[pos] {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
    }
}
