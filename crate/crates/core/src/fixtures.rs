//! Bundled networks used by the CLI, tests and benchmarks.
//!
//! The cancer network has five binary nodes: A metastatic cancer, B increased
//! total serum calcium, C brain tumor, D coma, E severe headache. State index
//! 0 is `true` throughout.

use crate::io::{parse_evidence, parse_network};
use crate::network::{Cpt, Evidence, Network, Variable};

pub const CANCER_NETWORK_JSON: &str = include_str!("../data/cancer.json");

/// Severe headache observed, coma not observed.
pub const CANCER_EVIDENCE_JSON: &str = include_str!("../data/cancer-evidence.json");

pub fn cancer_network() -> Network {
    parse_network(CANCER_NETWORK_JSON).expect("bundled cancer network is valid")
}

/// `{E = true, D = false}` on [`cancer_network`].
pub fn cancer_evidence(net: &Network) -> Evidence {
    parse_evidence(CANCER_EVIDENCE_JSON, net).expect("bundled evidence resolves")
}

/// Chain `X1 → X2 → … → Xn` where every CPT row is 0/1: the root is
/// certainly `true` and each child copies its parent.
pub fn deterministic_chain(len: usize) -> Network {
    assert!(len >= 1);
    let variables = (1..=len).map(|i| Variable::binary(format!("X{i}"))).collect();
    let mut cpts = vec![Cpt::root(vec![1.0, 0.0])];
    for i in 1..len {
        cpts.push(Cpt::new(vec![i - 1], vec![vec![1.0, 0.0], vec![0.0, 1.0]]));
    }
    Network::new(Some(format!("deterministic-chain-{len}")), variables, cpts)
        .expect("chain is valid")
}
