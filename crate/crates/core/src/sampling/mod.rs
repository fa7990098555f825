//! Stochastic simulation: logic sampling, likelihood weighting (plain and
//! over an evidence-integrated network) and Markov-blanket (Gibbs) sampling.
//!
//! The forward-direction samplers draw every trial from its own substream
//! `run_stream.substream(trial_index)`, and visit nodes in topological order
//! consuming exactly one uniform per sampled node. Two samplers that sample
//! the same state nodes in the same order therefore see identical draws for
//! those nodes, trial by trial.

mod forward;
mod gibbs;
mod integrated;

use std::fmt;
use std::str::FromStr;

pub use forward::{
    forward_sample, run_likelihood_weighting, run_logic_sampling, trial_weight, LogicSampler,
    WeightingSampler,
};
pub use gibbs::{markov_blanket_distribution, run_gibbs, MAX_INIT_ATTEMPTS};
pub use integrated::{run_lw_integrated, IntegratedSampler};

use crate::error::{BnError, Result};
use crate::network::{Evidence, Network, NORMALIZATION_TOLERANCE};
use crate::rng::RandomStream;
use crate::transform::IntegrationMode;

/// One simulated trial: a state for every node plus its weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub states: Vec<usize>,
    pub weight: f64,
}

/// Something that produces independent weighted trials.
pub trait TrialSampler {
    /// Writes one trial into `states` (indexed by variable of the source
    /// network) and returns its weight.
    fn sample_into(&mut self, rng: &mut RandomStream, states: &mut [usize]) -> f64;

    /// Number of variables in the source network.
    fn node_count(&self) -> usize;

    fn trial(&mut self, rng: &mut RandomStream) -> Trial {
        let mut states = vec![0; self.node_count()];
        let weight = self.sample_into(rng, &mut states);
        Trial { states, weight }
    }
}

/// Weighted tallies of sampled states.
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    /// Accumulated weight per node and state.
    pub tallies: Vec<Vec<f64>>,
    pub total_weight: f64,
    pub trials_run: u64,
    /// Trials that contributed positive weight. For logic sampling these are
    /// the accepted trials.
    pub trials_accepted: u64,
}

impl Estimate {
    pub fn new(net: &Network) -> Self {
        Self {
            tallies: (0..net.len()).map(|i| vec![0.0; net.cardinality(i)]).collect(),
            total_weight: 0.0,
            trials_run: 0,
            trials_accepted: 0,
        }
    }

    #[inline]
    pub fn record(&mut self, states: &[usize], weight: f64) {
        self.trials_run += 1;
        if weight > 0.0 {
            self.trials_accepted += 1;
            self.total_weight += weight;
            for (row, &s) in self.tallies.iter_mut().zip(states) {
                row[s] += weight;
            }
        }
    }

    pub fn is_defined(&self) -> bool {
        self.total_weight > 0.0
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.trials_run == 0 {
            0.0
        } else {
            self.trials_accepted as f64 / self.trials_run as f64
        }
    }

    /// Normalized posterior rows; undefined when no weight was collected.
    pub fn posterior(&self) -> Result<Vec<Vec<f64>>> {
        if !self.is_defined() {
            return Err(BnError::UndefinedEstimate(format!(
                "no weight collected in {} trials",
                self.trials_run
            )));
        }
        Ok(self
            .tallies
            .iter()
            .map(|row| row.iter().map(|w| w / self.total_weight).collect())
            .collect())
    }
}

/// Inverse-CDF selection: the first index whose cumulative probability
/// exceeds `u`. Zero entries are never chosen.
#[inline]
pub fn select_index(row: &[f64], u: f64) -> usize {
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (j, &p) in row.iter().enumerate() {
        if p > 0.0 {
            cumulative += p;
            last_positive = j;
            if u < cumulative {
                return j;
            }
        }
    }
    // rounding left u above the total
    last_positive
}

/// Draws one state index from a normalized row, consuming one uniform.
pub fn draw_category(row: &[f64], rng: &mut RandomStream) -> Result<usize> {
    let sum: f64 = row.iter().sum();
    if row.is_empty() || row.iter().any(|&p| p < 0.0) || (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(BnError::Precondition(format!("row {row:?} is not a distribution")));
    }
    Ok(select_index(row, rng.next_uniform()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Logic,
    LikelihoodWeighting,
    Integrated(IntegrationMode),
    /// Burn-in sweeps; `None` means 10% of the sweeps.
    Gibbs { burn_in: Option<usize> },
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Logic,
        Algorithm::LikelihoodWeighting,
        Algorithm::Integrated(IntegrationMode::Full),
        Algorithm::Integrated(IntegrationMode::Partial),
        Algorithm::Gibbs { burn_in: None },
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::Logic => "logic",
            Algorithm::LikelihoodWeighting => "lw",
            Algorithm::Integrated(IntegrationMode::Full) => "lw-int-full",
            Algorithm::Integrated(IntegrationMode::Partial) => "lw-int-partial",
            Algorithm::Gibbs { .. } => "gibbs",
        }
    }

    pub fn burn_in_for(sweeps: usize, burn_in: Option<usize>) -> usize {
        burn_in.unwrap_or(sweeps / 10)
    }

    /// One full estimation run with `trials` trials (sweeps for Gibbs).
    pub fn run(
        &self,
        net: &Network,
        evidence: &Evidence,
        trials: usize,
        rng: &RandomStream,
    ) -> Result<Estimate> {
        match *self {
            Algorithm::Logic => run_logic_sampling(net, evidence, trials, rng),
            Algorithm::LikelihoodWeighting => run_likelihood_weighting(net, evidence, trials, rng),
            Algorithm::Integrated(mode) => run_lw_integrated(net, evidence, trials, rng, mode),
            Algorithm::Gibbs { burn_in } => {
                let mut stream = rng.clone();
                run_gibbs(
                    net,
                    evidence,
                    trials,
                    &mut stream,
                    Self::burn_in_for(trials, burn_in),
                )
            }
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Algorithm {
    type Err = BnError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "logic" => Algorithm::Logic,
            "lw" => Algorithm::LikelihoodWeighting,
            "lw-int-full" => Algorithm::Integrated(IntegrationMode::Full),
            "lw-int-partial" => Algorithm::Integrated(IntegrationMode::Partial),
            "gibbs" => Algorithm::Gibbs { burn_in: None },
            other => return Err(BnError::Parse(format!("unknown algorithm `{other}`"))),
        })
    }
}

pub(crate) fn require_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        Err(BnError::Precondition("at least one trial is required".into()))
    } else {
        Ok(())
    }
}

/// Runs `trials` independent trials, trial `t` on `rng.substream(t)`.
pub(crate) fn run_trials<S: TrialSampler>(
    sampler: &mut S,
    estimate: &mut Estimate,
    trials: usize,
    rng: &RandomStream,
) {
    let mut states = vec![0; sampler.node_count()];
    for t in 0..trials {
        let mut stream = rng.substream(t as u64);
        let weight = sampler.sample_into(&mut stream, &mut states);
        estimate.record(&states, weight);
    }
}
