#![allow(dead_code)]

use bnsim_core::{Cpt, Network, Variable};
use proptest::prelude::*;

/// Raw material for a random network: per node a cardinality, a parent
/// subset of earlier nodes, a declaration rank, and a pool of weights.
#[derive(Debug, Clone)]
pub struct Blueprint {
    pub cards: Vec<usize>,
    pub parents: Vec<Vec<usize>>,
    pub declare: Vec<usize>,
    pub weights: Vec<u8>,
    pub zeros: bool,
}

pub fn blueprint(max_nodes: usize) -> impl Strategy<Value = Blueprint> {
    (1..=max_nodes, any::<bool>()).prop_flat_map(|(n, zeros)| {
        let cards = prop::collection::vec(2usize..=3, n);
        let parents = (0..n)
            .map(|i| {
                if i == 0 {
                    Just(Vec::new()).boxed()
                } else {
                    prop::sample::subsequence((0..i).collect::<Vec<_>>(), 0..=i.min(3)).boxed()
                }
            })
            .collect::<Vec<_>>();
        let declare = Just((0..n).collect::<Vec<_>>()).prop_shuffle();
        let weights = prop::collection::vec(any::<u8>(), 512);
        (cards, parents, declare, weights, Just(zeros)).prop_map(
            |(cards, parents, declare, weights, zeros)| Blueprint {
                cards,
                parents,
                declare,
                weights,
                zeros,
            },
        )
    })
}

impl Blueprint {
    /// Builds the network, declaring node `i` of the generated DAG at
    /// position `declare[i]`. With `zeros`, small weights become exact zeros.
    pub fn build(&self) -> Network {
        let n = self.cards.len();
        let mut pool = self.weights.iter().cycle();
        let mut variables = vec![None; n];
        let mut cpts = vec![None; n];
        for i in 0..n {
            let labels: Vec<String> = (0..self.cards[i]).map(|s| format!("s{s}")).collect();
            let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
            variables[self.declare[i]] = Some(Variable::new(format!("N{i}"), &labels));
            let configs: usize = self.parents[i].iter().map(|&p| self.cards[p]).product();
            let rows = (0..configs)
                .map(|_| {
                    let mut raw: Vec<f64> = (0..self.cards[i])
                        .map(|_| {
                            let w = *pool.next().unwrap();
                            if self.zeros && w < 64 {
                                0.0
                            } else {
                                f64::from(w) + 1.0
                            }
                        })
                        .collect();
                    if raw.iter().all(|&w| w == 0.0) {
                        raw[0] = 1.0;
                    }
                    let total: f64 = raw.iter().sum();
                    raw.iter().map(|w| w / total).collect()
                })
                .collect();
            let parents = self.parents[i].iter().map(|&p| self.declare[p]).collect();
            cpts[self.declare[i]] = Some(Cpt::new(parents, rows));
        }
        Network::new(
            Some("random".into()),
            variables.into_iter().map(Option::unwrap).collect(),
            cpts.into_iter().map(Option::unwrap).collect(),
        )
        .expect("blueprints are valid")
    }
}

/// Every full assignment of `net`, odometer order.
pub fn all_assignments(net: &Network) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut states = vec![0; net.len()];
    loop {
        out.push(states.clone());
        let mut i = 0;
        loop {
            if i == net.len() {
                return out;
            }
            states[i] += 1;
            if states[i] < net.cardinality(i) {
                break;
            }
            states[i] = 0;
            i += 1;
        }
    }
}
