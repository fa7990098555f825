use super::forward::{evidence_likelihood, forward_fill};
use super::Estimate;
use crate::error::{BnError, Result};
use crate::network::{topological_order, Assignment, Evidence, Network};
use crate::rng::RandomStream;

/// Forward-sampling attempts allowed to find a starting state with nonzero
/// evidence likelihood.
pub const MAX_INIT_ATTEMPTS: usize = 10_000;

/// Unnormalized blanket scores of every state of `node` written to `out`;
/// returns their sum. `states` must hold a value for every variable.
#[inline]
fn blanket_scores(
    net: &Network,
    children: &[usize],
    node: usize,
    states: &mut [usize],
    out: &mut [f64],
) -> f64 {
    let saved = states[node];
    let mut total = 0.0;
    for (j, slot) in out.iter_mut().enumerate() {
        states[node] = j;
        let mut score = net.row_for(node, states)[j];
        for &c in children {
            if score == 0.0 {
                break;
            }
            score *= net.row_for(c, states)[states[c]];
        }
        *slot = score;
        total += score;
    }
    states[node] = saved;
    total
}

/// P(node | everything else), which only depends on the node's parents, its
/// children and the children's other parents.
pub fn markov_blanket_distribution(net: &Network, node: usize, others: &Assignment) -> Result<Vec<f64>> {
    if node >= net.len() {
        return Err(BnError::UnknownNode(format!("#{node}")));
    }
    others.check(net)?;
    let mut states = vec![0; net.len()];
    for (v, slot) in states.iter_mut().enumerate() {
        if v != node {
            *slot = others.get(v).ok_or_else(|| {
                BnError::Precondition(format!("node `{}` is unassigned", net.id(v)))
            })?;
        }
    }
    let children = net.children();
    let mut row = vec![0.0; net.cardinality(node)];
    let total = blanket_scores(net, &children[node], node, &mut states, &mut row);
    if total <= 0.0 {
        return Err(BnError::InconsistentState(net.id(node).to_string()));
    }
    for p in &mut row {
        *p /= total;
    }
    Ok(row)
}

/// Gibbs sampling with evidence clamped. Each sweep resamples every free
/// node in topological order; after `burn_in` sweeps every sweep's state is
/// counted once with weight 1.
pub fn run_gibbs(
    net: &Network,
    evidence: &Evidence,
    sweeps: usize,
    rng: &mut RandomStream,
    burn_in: usize,
) -> Result<Estimate> {
    if sweeps <= burn_in {
        return Err(BnError::Precondition(format!(
            "sweeps ({sweeps}) must exceed burn-in ({burn_in})"
        )));
    }
    evidence.assignment().check(net)?;
    let order = topological_order(net)?;
    let clamp = evidence.dense(net.len());
    let observed: Vec<(usize, usize)> = evidence.iter().collect();
    let free: Vec<usize> = order.iter().copied().filter(|&v| clamp[v].is_none()).collect();
    let children = net.children();

    let mut states = vec![0; net.len()];
    let mut attempts = 0;
    loop {
        forward_fill(net, &order, &clamp, &mut states, rng);
        if evidence_likelihood(net, &observed, &states) > 0.0 {
            break;
        }
        attempts += 1;
        if attempts >= MAX_INIT_ATTEMPTS {
            return Err(BnError::Initialization(attempts));
        }
    }

    let max_card = (0..net.len()).map(|v| net.cardinality(v)).max().unwrap_or(0);
    let mut scores = vec![0.0; max_card];
    let mut estimate = Estimate::new(net);
    for sweep in 0..sweeps {
        for &node in &free {
            let row = &mut scores[..net.cardinality(node)];
            let total = blanket_scores(net, &children[node], node, &mut states, row);
            if total <= 0.0 {
                return Err(BnError::InconsistentState(net.id(node).to_string()));
            }
            let target = rng.next_uniform() * total;
            let mut cumulative = 0.0;
            let mut chosen = None;
            for (j, &s) in row.iter().enumerate() {
                if s > 0.0 {
                    cumulative += s;
                    chosen = Some(j);
                    if target < cumulative {
                        break;
                    }
                }
            }
            states[node] = chosen.expect("positive total has a positive score");
        }
        if sweep >= burn_in {
            estimate.record(&states, 1.0);
        } else {
            estimate.trials_run += 1;
        }
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cancer_evidence, cancer_network, deterministic_chain};
    use crate::network::{Cpt, Variable};

    #[test]
    fn blanket_of_c_on_cancer() {
        let net = cancer_network();
        let others = Assignment::from_labels(
            &net,
            &[("A", "true"), ("B", "true"), ("D", "false"), ("E", "true")],
        )
        .unwrap();
        let row = markov_blanket_distribution(&net, 2, &others).unwrap();
        assert!((row[0] - 0.25).abs() < 1e-12);
        assert!((row[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn isolated_node_returns_prior() {
        let net = Network::new(
            None,
            vec![Variable::binary("X"), Variable::binary("Y")],
            vec![Cpt::root(vec![0.3, 0.7]), Cpt::root(vec![0.5, 0.5])],
        )
        .unwrap();
        let mut others = Assignment::new();
        others.insert(1, 0);
        let row = markov_blanket_distribution(&net, 0, &others).unwrap();
        assert!((row[0] - 0.3).abs() < 1e-15);
    }

    #[test]
    fn ignored_by_children_returns_prior() {
        let net = Network::new(
            None,
            vec![Variable::binary("X"), Variable::binary("Y")],
            vec![
                Cpt::root(vec![0.3, 0.7]),
                Cpt::new(vec![0], vec![vec![0.9, 0.1], vec![0.9, 0.1]]),
            ],
        )
        .unwrap();
        let mut others = Assignment::new();
        others.insert(1, 1);
        let row = markov_blanket_distribution(&net, 0, &others).unwrap();
        assert!((row[0] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn all_zero_scores_are_inconsistent() {
        let net = Network::new(
            None,
            vec![Variable::binary("X"), Variable::binary("Y")],
            vec![
                Cpt::root(vec![1.0, 0.0]),
                Cpt::new(vec![0], vec![vec![1.0, 0.0], vec![0.0, 1.0]]),
            ],
        )
        .unwrap();
        let mut others = Assignment::new();
        others.insert(1, 1);
        assert!(matches!(
            markov_blanket_distribution(&net, 0, &others),
            Err(BnError::InconsistentState(_))
        ));
    }

    #[test]
    fn converges_to_prior_without_evidence() {
        let net = cancer_network();
        let mut rng = RandomStream::new(12);
        let est = run_gibbs(&net, &Evidence::empty(), 10_000, &mut rng, 1_000).unwrap();
        let post = est.posterior().unwrap();
        assert!((post[1][0] - 0.32).abs() < 0.03);
        assert_eq!(est.trials_run, 10_000);
        assert_eq!(est.total_weight, 9_000.0);
    }

    #[test]
    fn close_on_cancer_evidence() {
        let net = cancer_network();
        let mut rng = RandomStream::new(13);
        let est = run_gibbs(&net, &cancer_evidence(&net), 2000, &mut rng, 100).unwrap();
        let post = est.posterior().unwrap();
        assert!((post[2][0] - 0.031_128).abs() < 0.05);
    }

    #[test]
    fn fully_observed_is_point_mass_without_draws() {
        let net = cancer_network();
        let ev = Evidence::new(&net, Assignment::from_dense(&[0, 1, 0, 1, 0])).unwrap();
        let mut rng = RandomStream::new(1);
        let est = run_gibbs(&net, &ev, 50, &mut rng, 5).unwrap();
        assert_eq!(rng.position(), 0);
        let post = est.posterior().unwrap();
        assert_eq!(post[1], vec![0.0, 1.0]);
    }

    #[test]
    fn impossible_evidence_fails_initialization() {
        let net = deterministic_chain(3);
        let ev = Evidence::from_labels(&net, &[("X3", "false")]).unwrap();
        let mut rng = RandomStream::new(1);
        assert!(matches!(
            run_gibbs(&net, &ev, 10, &mut rng, 1),
            Err(BnError::Initialization(MAX_INIT_ATTEMPTS))
        ));
    }

    #[test]
    fn burn_in_must_be_smaller() {
        let net = cancer_network();
        let mut rng = RandomStream::new(1);
        assert!(run_gibbs(&net, &Evidence::empty(), 10, &mut rng, 10).is_err());
    }
}
