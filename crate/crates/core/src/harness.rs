//! Experiment apparatus: accumulated absolute error, multi-run experiments,
//! trial-count sweeps, log-log convergence slopes, algorithm comparison grids
//! and the extremal-likelihood network family.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{BnError, Result};
use crate::exact::{exact_inference_with, state_cap_from_env, EnumerationOrder, ExactResult};
use crate::network::{Cpt, Evidence, Network, Variable};
use crate::rng::{derive_seed, RandomStream};
use crate::sampling::{Algorithm, Estimate};

/// Σ over `nodes` and their states of |estimate − truth|.
pub fn accumulated_error(estimate: &Estimate, truth: &ExactResult, nodes: &[usize]) -> Result<f64> {
    let posterior = estimate.posterior()?;
    accumulated_error_of(&posterior, truth, nodes)
}

fn accumulated_error_of(posterior: &[Vec<f64>], truth: &ExactResult, nodes: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for &node in nodes {
        let (est, exact) = match (posterior.get(node), truth.posterior.get(node)) {
            (Some(e), Some(t)) if e.len() == t.len() => (e, t),
            _ => {
                return Err(BnError::Precondition(format!(
                    "node #{node} missing from estimate or truth"
                )))
            }
        };
        total += est.iter().zip(exact).map(|(a, b)| (a - b).abs()).sum::<f64>();
    }
    Ok(total)
}

/// Non-evidence nodes in declaration order.
pub fn state_nodes(net: &Network, evidence: &Evidence) -> Vec<usize> {
    (0..net.len()).filter(|&v| !evidence.is_observed(v)).collect()
}

/// Aggregate over the runs of one (algorithm, trials) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub algorithm: String,
    pub trials_per_run: usize,
    /// Runs with a defined estimate.
    pub runs: usize,
    pub failed_runs: usize,
    pub master_seed: u64,
    pub mean_error: f64,
    pub error_spread: f64,
    pub mean_time_per_trial: Duration,
    pub per_run_errors: Vec<f64>,
    /// Posterior estimate averaged over the successful runs.
    pub mean_posterior: Vec<Vec<f64>>,
    /// |estimate − truth| averaged over the successful runs, per node/state.
    pub mean_abs_error: Vec<Vec<f64>>,
}

impl RunStats {
    /// Wall-clock of one run at this trial count.
    pub fn time_per_run(&self) -> Duration {
        self.mean_time_per_trial.mul_f64(self.trials_per_run as f64)
    }
}

/// `sqrt(mean(e²) − mean(e)²)`, clamped at zero against rounding.
pub fn error_spread(errors: &[f64]) -> f64 {
    if errors.is_empty() {
        return 0.0;
    }
    let n = errors.len() as f64;
    let mean = errors.iter().sum::<f64>() / n;
    let mean_sq = errors.iter().map(|e| e * e).sum::<f64>() / n;
    (mean_sq - mean * mean).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentOptions {
    /// Worker threads for the statistics pass; 1 runs everything on the
    /// calling thread. Timing is always measured on a sequential pass.
    pub parallelism: usize,
    /// Sequential timed passes over all runs; each run's fastest time is
    /// kept, which filters out scheduler and interrupt noise.
    pub timing_repeats: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            parallelism: 1,
            timing_repeats: 5,
        }
    }
}

/// Seed of run `index` under `master_seed`.
pub fn run_seed(master_seed: u64, index: usize) -> u64 {
    derive_seed(master_seed, index as u64)
}

/// Computes the truth with the exact oracle and runs the experiment.
pub fn experiment(
    net: &Network,
    evidence: &Evidence,
    algorithm: Algorithm,
    trials_per_run: usize,
    runs: usize,
    master_seed: u64,
    options: ExperimentOptions,
) -> Result<RunStats> {
    let truth = exact_inference_with(net, evidence, state_cap_from_env(), EnumerationOrder::Forward)?;
    experiment_with_truth(net, evidence, &truth, algorithm, trials_per_run, runs, master_seed, options)
}

#[allow(clippy::too_many_arguments)]
pub fn experiment_with_truth(
    net: &Network,
    evidence: &Evidence,
    truth: &ExactResult,
    algorithm: Algorithm,
    trials_per_run: usize,
    runs: usize,
    master_seed: u64,
    options: ExperimentOptions,
) -> Result<RunStats> {
    let nodes = state_nodes(net, evidence);
    run_experiment(
        algorithm.label(),
        trials_per_run,
        runs,
        master_seed,
        truth,
        &nodes,
        options,
        |stream| algorithm.run(net, evidence, trials_per_run, stream),
    )
}

/// Runs `runs` independent estimations through `estimator` (run `i` gets a
/// stream seeded with [`run_seed`]) and aggregates them against `truth`.
#[allow(clippy::too_many_arguments)]
pub fn run_experiment<F>(
    label: &str,
    trials_per_run: usize,
    runs: usize,
    master_seed: u64,
    truth: &ExactResult,
    nodes: &[usize],
    options: ExperimentOptions,
    estimator: F,
) -> Result<RunStats>
where
    F: Fn(&RandomStream) -> Result<Estimate> + Sync,
{
    if runs == 0 || trials_per_run == 0 {
        return Err(BnError::Precondition("runs and trials must be positive".into()));
    }
    let stream = |i: usize| RandomStream::new(run_seed(master_seed, i));

    let timed_pass = || time_runs(runs, master_seed, &estimator);

    let (estimates, mut per_run) = if options.parallelism > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.parallelism)
            .build()
            .map_err(|e| BnError::Precondition(e.to_string()))?;
        let estimates = pool.install(|| {
            (0..runs)
                .into_par_iter()
                .map(|i| estimator(&stream(i)))
                .collect::<Result<Vec<_>>>()
        })?;
        (estimates, timed_pass()?)
    } else {
        let mut per_run = Vec::with_capacity(runs);
        let mut estimates = Vec::with_capacity(runs);
        for i in 0..runs {
            let start = Instant::now();
            let est = estimator(&stream(i))?;
            per_run.push(start.elapsed());
            estimates.push(est);
        }
        (estimates, per_run)
    };
    for _ in 1..options.timing_repeats {
        keep_fastest(&mut per_run, &timed_pass()?);
    }
    let elapsed: Duration = per_run.iter().sum();

    let width: Vec<usize> = truth.posterior.iter().map(Vec::len).collect();
    let mut mean_posterior: Vec<Vec<f64>> = width.iter().map(|&w| vec![0.0; w]).collect();
    let mut mean_abs_error = mean_posterior.clone();
    let mut per_run_errors = Vec::with_capacity(runs);
    let mut failed_runs = 0;
    for est in &estimates {
        let Ok(posterior) = est.posterior() else {
            failed_runs += 1;
            continue;
        };
        per_run_errors.push(accumulated_error_of(&posterior, truth, nodes)?);
        for (node, row) in posterior.iter().enumerate() {
            for (s, &p) in row.iter().enumerate() {
                mean_posterior[node][s] += p;
                mean_abs_error[node][s] += (p - truth.posterior[node][s]).abs();
            }
        }
    }
    let ok = per_run_errors.len();
    if ok == 0 {
        return Err(BnError::UndefinedEstimate(format!(
            "{label}: all {runs} runs of {trials_per_run} trials were undefined"
        )));
    }
    for row in mean_posterior.iter_mut().chain(mean_abs_error.iter_mut()) {
        for v in row.iter_mut() {
            *v /= ok as f64;
        }
    }

    Ok(RunStats {
        algorithm: label.to_string(),
        trials_per_run,
        runs: ok,
        failed_runs,
        master_seed,
        mean_error: per_run_errors.iter().sum::<f64>() / ok as f64,
        error_spread: error_spread(&per_run_errors),
        mean_time_per_trial: elapsed.div_f64((runs * trials_per_run) as f64),
        per_run_errors,
        mean_posterior,
        mean_abs_error,
    })
}

/// Wall-clock of each of `runs` runs in one sequential pass, timing only
/// the estimator calls.
pub fn time_runs<F>(runs: usize, master_seed: u64, estimator: F) -> Result<Vec<Duration>>
where
    F: Fn(&RandomStream) -> Result<Estimate>,
{
    (0..runs)
        .map(|i| {
            let stream = RandomStream::new(run_seed(master_seed, i));
            let start = Instant::now();
            let est = estimator(&stream)?;
            let elapsed = start.elapsed();
            std::hint::black_box(est);
            Ok(elapsed)
        })
        .collect()
}

fn keep_fastest(best: &mut [Duration], pass: &[Duration]) {
    for (b, &p) in best.iter_mut().zip(pass) {
        *b = (*b).min(p);
    }
}

/// One algorithm measured at increasing trial counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub algorithm: String,
    pub points: Vec<RunStats>,
}

#[allow(clippy::too_many_arguments)]
pub fn sweep(
    net: &Network,
    evidence: &Evidence,
    truth: &ExactResult,
    algorithm: Algorithm,
    trials_list: &[usize],
    runs: usize,
    master_seed: u64,
    options: ExperimentOptions,
) -> Result<SweepResult> {
    if trials_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BnError::Precondition("trial counts must strictly increase".into()));
    }
    let points = trials_list
        .iter()
        .map(|&t| experiment_with_truth(net, evidence, truth, algorithm, t, runs, master_seed, options))
        .collect::<Result<_>>()?;
    Ok(SweepResult {
        algorithm: algorithm.label().to_string(),
        points,
    })
}

/// Least-squares slope of log(mean error) against log(trials).
pub fn convergence_slope(sweep: &SweepResult) -> Result<f64> {
    let points: Vec<(f64, f64)> = sweep
        .points
        .iter()
        .map(|p| (p.trials_per_run as f64, p.mean_error))
        .collect();
    loglog_slope(&points)
}

/// Least-squares slope of `ln y` against `ln x`; needs at least 3 points.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 3 {
        return Err(BnError::Precondition(format!(
            "slope needs at least 3 points, got {}",
            points.len()
        )));
    }
    let mut logs = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if y <= 0.0 || y.is_nan() {
            return Err(BnError::UndefinedLog(y));
        }
        if x <= 0.0 {
            return Err(BnError::UndefinedLog(x));
        }
        logs.push((x.ln(), y.ln()));
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(BnError::Precondition("trial counts must not all be equal".into()));
    }
    Ok(sxy / sxx)
}

/// Mean error `stats` would reach if given `budget` wall-clock per run,
/// assuming error ∝ 1/√time.
pub fn error_at_budget(stats: &RunStats, budget: Duration) -> f64 {
    let spent = stats.time_per_run().as_secs_f64();
    stats.mean_error * (spent / budget.as_secs_f64()).sqrt()
}

/// Mean error at `budget` seconds per run read off measured
/// `(seconds per run, mean error)` points: log-log interpolation between the
/// bracketing points, 1/√time extrapolation beyond the measured range.
pub fn error_at_time(points: &[(f64, f64)], budget: f64) -> Result<f64> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    if pts.is_empty() {
        return Err(BnError::Precondition("no measured points".into()));
    }
    for &(t, e) in &pts {
        if t <= 0.0 || e <= 0.0 {
            return Err(BnError::UndefinedLog(if t <= 0.0 { t } else { e }));
        }
    }
    if budget <= 0.0 {
        return Err(BnError::UndefinedLog(budget));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    if budget <= first.0 {
        return Ok(first.1 * (first.0 / budget).sqrt());
    }
    if budget >= last.0 {
        return Ok(last.1 * (last.0 / budget).sqrt());
    }
    let i = pts.partition_point(|p| p.0 <= budget).max(1);
    let ((t0, e0), (t1, e1)) = (pts[i - 1], pts[i]);
    if t1 == t0 {
        return Ok(e0.min(e1));
    }
    let w = (budget.ln() - t0.ln()) / (t1.ln() - t0.ln());
    Ok((e0.ln() + w * (e1.ln() - e0.ln())).exp())
}

/// Binary roots `A0..A{n-1}` with uniform priors, a binary `B` whose CPT row
/// is `(ε, 1−ε)` for every parent configuration, and an observed child `EV`
/// of `B` with `P(ev | b) = ε` and `P(ev | ¬b) = ε²`. The evidence is
/// `EV = true`.
///
/// The evidence favours `b` by a factor `1/ε`, while `b` has prior `ε`, so
/// plain likelihood weighting almost never samples the state that carries
/// the posterior mass. Reversing `B → EV` makes every `EV` likelihood row
/// equal and lets `B` be drawn from its posterior directly.
pub fn generate_extremal_network(n_parents: usize, epsilon: f64) -> Result<(Network, Evidence)> {
    if n_parents == 0 {
        return Err(BnError::Precondition("at least one parent is required".into()));
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(BnError::Precondition(format!(
            "epsilon must lie in (0, 0.5], got {epsilon}"
        )));
    }
    if n_parents > 20 {
        return Err(BnError::Precondition(format!(
            "{n_parents} parents would need 2^{n_parents} CPT rows"
        )));
    }

    let mut variables: Vec<Variable> = (0..n_parents).map(|i| Variable::binary(format!("A{i}"))).collect();
    let mut cpts: Vec<Cpt> = (0..n_parents).map(|_| Cpt::root(vec![0.5, 0.5])).collect();

    variables.push(Variable::binary("B"));
    cpts.push(Cpt::new(
        (0..n_parents).collect(),
        vec![vec![epsilon, 1.0 - epsilon]; 1 << n_parents],
    ));

    let b = n_parents;
    let eps2 = epsilon * epsilon;
    variables.push(Variable::binary("EV"));
    cpts.push(Cpt::new(
        vec![b],
        vec![vec![epsilon, 1.0 - epsilon], vec![eps2, 1.0 - eps2]],
    ));

    let net = Network::new(
        Some(format!("extremal-n{n_parents}-eps{epsilon}")),
        variables,
        cpts,
    )?;
    let evidence = Evidence::from_labels(&net, &[("EV", "true")])?;
    Ok((net, evidence))
}

/// Ratio of the largest to the smallest nonzero likelihood of the observed
/// values across the CPT rows of the evidence nodes.
pub fn likelihood_spread(net: &Network, evidence: &Evidence) -> f64 {
    let values: Vec<f64> = evidence
        .iter()
        .flat_map(|(node, value)| net.cpt(node).rows.iter().map(move |r| r[value]))
        .filter(|&p| p > 0.0)
        .collect();
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    if values.is_empty() {
        1.0
    } else {
        max / min
    }
}

/// One (algorithm, trials) cell of a comparison grid.
#[derive(Debug, Clone)]
pub struct CompareCell {
    pub algorithm: String,
    pub trials: usize,
    pub outcome: std::result::Result<RunStats, String>,
}

#[derive(Debug, Clone)]
pub struct CompareReport {
    pub runs: usize,
    pub master_seed: u64,
    pub truth: ExactResult,
    /// Cells ordered by algorithm, then trials.
    pub cells: Vec<CompareCell>,
}

impl CompareReport {
    pub fn cell(&self, algorithm: &str, trials: usize) -> Option<&CompareCell> {
        self.cells
            .iter()
            .find(|c| c.algorithm == algorithm && c.trials == trials)
    }

    pub fn stats(&self, algorithm: &str, trials: usize) -> Option<&RunStats> {
        self.cell(algorithm, trials).and_then(|c| c.outcome.as_ref().ok())
    }

    /// `(seconds per run, mean error)` points of one algorithm, by trials.
    pub fn error_vs_time(&self, algorithm: &str) -> Vec<(f64, f64)> {
        self.cells
            .iter()
            .filter(|c| c.algorithm == algorithm)
            .filter_map(|c| c.outcome.as_ref().ok())
            .map(|s| (s.time_per_run().as_secs_f64(), s.mean_error))
            .collect()
    }
}

/// Runs every (algorithm, trials) combination. A failing cell is recorded
/// and does not stop the others.
pub fn compare_report(
    net: &Network,
    evidence: &Evidence,
    algorithms: &[Algorithm],
    trials_list: &[usize],
    runs: usize,
    master_seed: u64,
    options: ExperimentOptions,
) -> Result<CompareReport> {
    let truth = exact_inference_with(net, evidence, state_cap_from_env(), EnumerationOrder::Forward)?;
    // cells are timed in interleaved rounds, keeping each run's fastest
    // time, so a burst of machine noise has to hit the same run in every
    // round to show up
    let untimed = ExperimentOptions {
        timing_repeats: 1,
        ..options
    };
    let mut cells = Vec::with_capacity(algorithms.len() * trials_list.len());
    let mut timed = Vec::new();
    for &alg in algorithms {
        for &trials in trials_list {
            let outcome =
                experiment_with_truth(net, evidence, &truth, alg, trials, runs, master_seed, untimed)
                    .map_err(|e| e.to_string());
            if outcome.is_ok() {
                timed.push((cells.len(), alg, trials, vec![Duration::MAX; runs]));
            }
            cells.push(CompareCell {
                algorithm: alg.label().to_string(),
                trials,
                outcome,
            });
        }
    }
    for _ in 0..options.timing_repeats.max(1) {
        for (_, alg, trials, best) in &mut timed {
            let pass = time_runs(runs, master_seed, |s| alg.run(net, evidence, *trials, s))?;
            keep_fastest(best, &pass);
        }
    }
    for (cell, _, trials, best) in timed {
        if let Ok(stats) = &mut cells[cell].outcome {
            let total: Duration = best.iter().sum();
            stats.mean_time_per_trial = total.div_f64((runs * trials) as f64);
        }
    }
    Ok(CompareReport {
        runs,
        master_seed,
        truth,
        cells,
    })
}
