//! Exact posteriors by exhaustive enumeration of the joint distribution.
//!
//! This is the reference every sampler and transform is checked against, so
//! it deliberately uses nothing but [`Network::joint_probability_dense`].

use crate::error::{BnError, Result};
use crate::network::{Evidence, Network};

/// Default cap on the joint state-space size (2^24 configurations).
pub const DEFAULT_STATE_CAP: u128 = 1 << 24;

/// Environment variable overriding [`DEFAULT_STATE_CAP`].
pub const STATE_CAP_ENV: &str = "BNSIM_STATE_CAP";

/// The cap from `BNSIM_STATE_CAP`, or the default when unset or unparsable.
pub fn state_cap_from_env() -> u128 {
    std::env::var(STATE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_STATE_CAP)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    /// One row per variable; evidence nodes get point masses.
    pub posterior: Vec<Vec<f64>>,
    /// P(E); 1 for empty evidence.
    pub evidence_probability: f64,
}

impl ExactResult {
    pub fn marginal(&self, node: usize) -> &[f64] {
        &self.posterior[node]
    }
}

/// Which end of the configuration space enumeration starts from. Both visit
/// the same set; they differ only in floating-point accumulation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EnumerationOrder {
    #[default]
    Forward,
    Reverse,
}

pub fn exact_inference(net: &Network, evidence: &Evidence) -> Result<ExactResult> {
    exact_inference_with(net, evidence, DEFAULT_STATE_CAP, EnumerationOrder::Forward)
}

pub fn exact_inference_with(
    net: &Network,
    evidence: &Evidence,
    cap: u128,
    order: EnumerationOrder,
) -> Result<ExactResult> {
    evidence.assignment().check(net)?;
    let size = net.state_space_size();
    if size > cap {
        return Err(BnError::Capacity { size, cap });
    }

    let n = net.len();
    let free: Vec<usize> = (0..n).filter(|&i| !evidence.is_observed(i)).collect();
    let mut states = vec![0usize; n];
    for (node, value) in evidence.iter() {
        states[node] = value;
    }
    if order == EnumerationOrder::Reverse {
        for &f in &free {
            states[f] = net.cardinality(f) - 1;
        }
    }

    let mut mass: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; net.cardinality(i)]).collect();
    let mut total = 0.0;
    loop {
        let p = net.joint_probability_dense(&states);
        total += p;
        for (node, &s) in states.iter().enumerate() {
            mass[node][s] += p;
        }
        if !advance(net, &free, &mut states, order) {
            break;
        }
    }

    if total <= 0.0 {
        return Err(BnError::ImpossibleEvidence(String::new()));
    }
    for row in &mut mass {
        for p in row.iter_mut() {
            *p /= total;
        }
    }
    Ok(ExactResult {
        posterior: mass,
        evidence_probability: total,
    })
}

/// Mixed-radix step over the free nodes, last free node fastest. Returns
/// false once the space is exhausted.
fn advance(net: &Network, free: &[usize], states: &mut [usize], order: EnumerationOrder) -> bool {
    for &node in free.iter().rev() {
        let card = net.cardinality(node);
        match order {
            EnumerationOrder::Forward => {
                if states[node] + 1 < card {
                    states[node] += 1;
                    return true;
                }
                states[node] = 0;
            }
            EnumerationOrder::Reverse => {
                if states[node] > 0 {
                    states[node] -= 1;
                    return true;
                }
                states[node] = card - 1;
            }
        }
    }
    false
}
