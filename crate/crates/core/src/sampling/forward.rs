use std::borrow::Cow;

use super::{require_trials, run_trials, select_index, Estimate, TrialSampler};
use crate::error::Result;
use crate::network::{topological_order, Assignment, Evidence, Network};
use crate::rng::RandomStream;

/// Samples every unclamped node in `order` from its CPT row given the
/// already-sampled parents. Clamped nodes keep their value and use no draw.
#[inline]
pub(crate) fn forward_fill(
    net: &Network,
    order: &[usize],
    clamp: &[Option<usize>],
    states: &mut [usize],
    rng: &mut RandomStream,
) {
    for &node in order {
        states[node] = match clamp[node] {
            Some(value) => value,
            None => select_index(net.row_for(node, states), rng.next_uniform()),
        };
    }
}

/// Likelihood of the observations given the parent values in `states`.
#[inline]
pub(crate) fn evidence_likelihood(net: &Network, observed: &[(usize, usize)], states: &[usize]) -> f64 {
    observed
        .iter()
        .map(|&(node, value)| net.row_for(node, states)[value])
        .product()
}

/// One forward pass over `net` with `clamped` nodes fixed.
pub fn forward_sample(net: &Network, clamped: &Assignment, rng: &mut RandomStream) -> Result<Assignment> {
    clamped.check(net)?;
    let order = topological_order(net)?;
    let mut clamp = vec![None; net.len()];
    for (node, value) in clamped.iter() {
        clamp[node] = Some(value);
    }
    let mut states = vec![0; net.len()];
    forward_fill(net, &order, &clamp, &mut states, rng);
    Ok(Assignment::from_dense(&states))
}

/// Product over evidence nodes of P(observed | parents), with parents taken
/// from `assignment` or, for evidence-node parents, from the observations.
pub fn trial_weight(net: &Network, evidence: &Evidence, assignment: &Assignment) -> Result<f64> {
    evidence.assignment().check(net)?;
    assignment.check(net)?;
    let mut values = assignment.clone();
    for (node, value) in evidence.iter() {
        values.insert(node, value);
    }
    let mut weight = 1.0;
    for (node, value) in evidence.iter() {
        weight *= crate::network::local_distribution(net, node, &values)?[value];
    }
    Ok(weight)
}

/// Forward-samples all nodes and accepts a trial only if every sampled
/// evidence node matches its observation.
#[derive(Debug, Clone)]
pub struct LogicSampler<'a> {
    net: &'a Network,
    order: Vec<usize>,
    clamp: Vec<Option<usize>>,
    observed: Vec<(usize, usize)>,
}

impl<'a> LogicSampler<'a> {
    pub fn new(net: &'a Network, evidence: &Evidence) -> Result<Self> {
        evidence.assignment().check(net)?;
        Ok(Self {
            net,
            order: topological_order(net)?,
            clamp: vec![None; net.len()],
            observed: evidence.iter().collect(),
        })
    }
}

impl TrialSampler for LogicSampler<'_> {
    fn sample_into(&mut self, rng: &mut RandomStream, states: &mut [usize]) -> f64 {
        forward_fill(self.net, &self.order, &self.clamp, states, rng);
        if self.observed.iter().all(|&(node, value)| states[node] == value) {
            1.0
        } else {
            0.0
        }
    }

    fn node_count(&self) -> usize {
        self.net.len()
    }
}

/// Forward-samples state nodes only, with evidence clamped, and weights the
/// trial by the evidence likelihood.
#[derive(Debug, Clone)]
pub struct WeightingSampler<'a> {
    net: Cow<'a, Network>,
    order: Vec<usize>,
    clamp: Vec<Option<usize>>,
    observed: Vec<(usize, usize)>,
}

impl<'a> WeightingSampler<'a> {
    pub fn new(net: &'a Network, evidence: &Evidence) -> Result<Self> {
        Self::from_cow(Cow::Borrowed(net), evidence)
    }

    pub fn owned(net: Network, evidence: &Evidence) -> Result<WeightingSampler<'static>> {
        WeightingSampler::from_cow(Cow::Owned(net), evidence)
    }

    fn from_cow(net: Cow<'a, Network>, evidence: &Evidence) -> Result<Self> {
        evidence.assignment().check(&net)?;
        let order = topological_order(&net)?;
        let clamp = evidence.dense(net.len());
        Ok(Self {
            net,
            order,
            clamp,
            observed: evidence.iter().collect(),
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }
}

impl TrialSampler for WeightingSampler<'_> {
    fn sample_into(&mut self, rng: &mut RandomStream, states: &mut [usize]) -> f64 {
        forward_fill(&self.net, &self.order, &self.clamp, states, rng);
        evidence_likelihood(&self.net, &self.observed, states)
    }

    fn node_count(&self) -> usize {
        self.net.len()
    }
}

/// Rejection sampling. The estimate is undefined if no trial is accepted.
pub fn run_logic_sampling(
    net: &Network,
    evidence: &Evidence,
    trials: usize,
    rng: &RandomStream,
) -> Result<Estimate> {
    require_trials(trials)?;
    let mut sampler = LogicSampler::new(net, evidence)?;
    let mut estimate = Estimate::new(net);
    run_trials(&mut sampler, &mut estimate, trials, rng);
    Ok(estimate)
}

/// Likelihood weighting; posteriors are normalized by the total weight.
pub fn run_likelihood_weighting(
    net: &Network,
    evidence: &Evidence,
    trials: usize,
    rng: &RandomStream,
) -> Result<Estimate> {
    require_trials(trials)?;
    let mut sampler = WeightingSampler::new(net, evidence)?;
    let mut estimate = Estimate::new(net);
    run_trials(&mut sampler, &mut estimate, trials, rng);
    Ok(estimate)
}
