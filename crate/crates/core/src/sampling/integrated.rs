use super::forward::forward_fill;
use super::{require_trials, run_trials, Estimate, TrialSampler, WeightingSampler};
use crate::error::Result;
use crate::network::{topological_order, Evidence, Network};
use crate::rng::RandomStream;
use crate::transform::{condition_network, integrate_evidence, ConditionedNetwork, IntegrationMode};

/// Likelihood weighting over a network into which the evidence has been
/// integrated by arc reversal.
///
/// In full mode the evidence nodes are removed after integration and every
/// trial is a plain forward sample of the posterior with weight 1. In
/// partial mode the evidence nodes survive with their new likelihood rows and
/// trials are weighted as usual.
#[derive(Debug, Clone)]
pub enum IntegratedSampler {
    Full {
        conditioned: ConditionedNetwork,
        order: Vec<usize>,
        clamp: Vec<Option<usize>>,
        /// Dense observed values in source-network indexing.
        observed: Vec<Option<usize>>,
        scratch: Vec<usize>,
    },
    Partial(WeightingSampler<'static>),
}

impl IntegratedSampler {
    pub fn new(net: &Network, evidence: &Evidence, mode: IntegrationMode) -> Result<Self> {
        if evidence.is_empty() {
            return Ok(IntegratedSampler::Partial(WeightingSampler::owned(net.clone(), evidence)?));
        }
        let (integrated, _plan) = integrate_evidence(net, evidence, mode)?;
        match mode {
            IntegrationMode::Partial => Ok(IntegratedSampler::Partial(WeightingSampler::owned(
                integrated, evidence,
            )?)),
            IntegrationMode::Full => {
                let conditioned = condition_network(&integrated, evidence)?;
                let order = topological_order(&conditioned.network)?;
                let len = conditioned.network.len();
                Ok(IntegratedSampler::Full {
                    conditioned,
                    order,
                    clamp: vec![None; len],
                    observed: evidence.dense(net.len()),
                    scratch: vec![0; len],
                })
            }
        }
    }
}

impl TrialSampler for IntegratedSampler {
    fn sample_into(&mut self, rng: &mut RandomStream, states: &mut [usize]) -> f64 {
        match self {
            IntegratedSampler::Full {
                conditioned,
                order,
                clamp,
                observed,
                scratch,
            } => {
                forward_fill(&conditioned.network, order, clamp, scratch, rng);
                for (node, value) in observed.iter().enumerate() {
                    if let Some(v) = value {
                        states[node] = *v;
                    }
                }
                for (i, &node) in conditioned.kept.iter().enumerate() {
                    states[node] = scratch[i];
                }
                1.0
            }
            IntegratedSampler::Partial(inner) => inner.sample_into(rng, states),
        }
    }

    fn node_count(&self) -> usize {
        match self {
            IntegratedSampler::Full { observed, .. } => observed.len(),
            IntegratedSampler::Partial(inner) => inner.node_count(),
        }
    }
}

/// Integrates `evidence` with the given mode, then samples. Estimates are
/// reported against the variables of `net`.
pub fn run_lw_integrated(
    net: &Network,
    evidence: &Evidence,
    trials: usize,
    rng: &RandomStream,
    mode: IntegrationMode,
) -> Result<Estimate> {
    require_trials(trials)?;
    let mut sampler = IntegratedSampler::new(net, evidence, mode)?;
    let mut estimate = Estimate::new(net);
    run_trials(&mut sampler, &mut estimate, trials, rng);
    Ok(estimate)
}
