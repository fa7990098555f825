//! CSV result documents.
//!
//! Estimate and comparison results share one column set. `kind` is
//! `estimate` for per-node/state rows and `summary` for per-run or per-cell
//! scalars (`metric`, `value`). Every number is written with 13 significant
//! digits. Wall-clock measurements are kept out of these files so identical
//! inputs give byte-identical output; they go to the plot table instead.

use std::io::Write;

use crate::error::Result;
use crate::exact::ExactResult;
use crate::harness::{CompareReport, RunStats};
use crate::network::{Evidence, Network};
use crate::sampling::Estimate;

pub const RESULT_COLUMNS: [&str; 13] = [
    "kind", "algorithm", "trials", "runs", "seed", "node", "state", "estimate", "truth",
    "abs_error", "metric", "value", "note",
];

fn num(x: f64) -> String {
    format!("{x:.12e}")
}

struct Context<'a> {
    algorithm: &'a str,
    trials: String,
    runs: String,
    seed: String,
}

impl Context<'_> {
    #[allow(clippy::too_many_arguments)]
    fn row<W: Write>(
        &self,
        w: &mut csv::Writer<W>,
        kind: &str,
        node_state: Option<(&str, &str)>,
        values: [Option<f64>; 3],
        metric: &str,
        value: Option<f64>,
        note: &str,
    ) -> Result<()> {
        let (node, state) = node_state.unwrap_or(("", ""));
        let opt = |x: Option<f64>| x.map(num).unwrap_or_default();
        w.write_record([
            kind,
            self.algorithm,
            &self.trials,
            &self.runs,
            &self.seed,
            node,
            state,
            &opt(values[0]),
            &opt(values[1]),
            &opt(values[2]),
            metric,
            &opt(value),
            note,
        ])?;
        Ok(())
    }

    fn summary<W: Write>(&self, w: &mut csv::Writer<W>, metric: &str, value: f64) -> Result<()> {
        self.row(w, "summary", None, [None; 3], metric, Some(value), "")
    }
}

/// One estimate, with truth and absolute error when the oracle ran.
#[allow(clippy::too_many_arguments)]
pub fn write_estimate_csv<W: Write>(
    out: W,
    net: &Network,
    evidence: &Evidence,
    algorithm: &str,
    seed: u64,
    estimate: &Estimate,
    truth: Option<&ExactResult>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_COLUMNS)?;
    let ctx = Context {
        algorithm,
        trials: estimate.trials_run.to_string(),
        runs: "1".into(),
        seed: seed.to_string(),
    };
    let posterior = estimate.posterior()?;
    let mut accumulated = 0.0;
    for (node, row) in posterior.iter().enumerate() {
        for (s, &p) in row.iter().enumerate() {
            let t = truth.map(|t| t.posterior[node][s]);
            let abs = t.map(|t| (p - t).abs());
            if !evidence.is_observed(node) {
                accumulated += abs.unwrap_or(0.0);
            }
            ctx.row(
                &mut w,
                "estimate",
                Some((net.id(node), &net.variable(node).states[s])),
                [Some(p), t, abs],
                "",
                None,
                "",
            )?;
        }
    }
    ctx.summary(&mut w, "total_weight", estimate.total_weight)?;
    ctx.summary(&mut w, "trials_run", estimate.trials_run as f64)?;
    ctx.summary(&mut w, "trials_accepted", estimate.trials_accepted as f64)?;
    if let Some(t) = truth {
        ctx.summary(&mut w, "accumulated_error", accumulated)?;
        ctx.summary(&mut w, "evidence_probability", t.evidence_probability)?;
    }
    w.flush()?;
    Ok(())
}

fn write_cell<W: Write>(w: &mut csv::Writer<W>, net: &Network, evidence: &Evidence, truth: &ExactResult, stats: &RunStats, ctx: &Context) -> Result<()> {
    for node in 0..net.len() {
        if evidence.is_observed(node) {
            continue;
        }
        for (s, label) in net.variable(node).states.iter().enumerate() {
            ctx.row(
                w,
                "estimate",
                Some((net.id(node), label)),
                [
                    Some(stats.mean_posterior[node][s]),
                    Some(truth.posterior[node][s]),
                    Some(stats.mean_abs_error[node][s]),
                ],
                "",
                None,
                "",
            )?;
        }
    }
    ctx.summary(w, "mean_error", stats.mean_error)?;
    ctx.summary(w, "error_spread", stats.error_spread)?;
    ctx.summary(w, "failed_runs", stats.failed_runs as f64)?;
    Ok(())
}

/// Comparison grid. For each cell, estimate rows carry the run-averaged
/// estimate and mean absolute error per state; summary rows carry the mean
/// accumulated error, its spread and the failed-run count.
pub fn write_compare_csv<W: Write>(
    out: W,
    net: &Network,
    evidence: &Evidence,
    report: &CompareReport,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULT_COLUMNS)?;
    for cell in &report.cells {
        let ctx = Context {
            algorithm: &cell.algorithm,
            trials: cell.trials.to_string(),
            runs: report.runs.to_string(),
            seed: report.master_seed.to_string(),
        };
        match &cell.outcome {
            Ok(stats) => write_cell(&mut w, net, evidence, &report.truth, stats, &ctx)?,
            Err(message) => ctx.row(&mut w, "summary", None, [None; 3], "cell_error", None, message)?,
        }
    }
    w.flush()?;
    Ok(())
}

/// Long-format table for plotting: `series,algorithm,trials,x,y` with the
/// series `error_vs_trials`, `log_error_vs_log_trials`, `spread_vs_trials`,
/// `time_per_trial_vs_trials` (seconds) and `error_vs_time` (seconds per run).
pub fn write_plot_table<W: Write>(out: W, report: &CompareReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "algorithm", "trials", "x", "y"])?;
    for cell in &report.cells {
        let Ok(stats) = &cell.outcome else { continue };
        let n = stats.trials_per_run as f64;
        let t = stats.mean_time_per_trial.as_secs_f64();
        let mut series = vec![
            ("error_vs_trials", n, stats.mean_error),
            ("spread_vs_trials", n, stats.error_spread),
            ("time_per_trial_vs_trials", n, t),
            ("error_vs_time", t * n, stats.mean_error),
        ];
        if stats.mean_error > 0.0 {
            series.insert(1, ("log_error_vs_log_trials", n.ln(), stats.mean_error.ln()));
        }
        for (name, x, y) in series {
            w.write_record([
                name,
                &cell.algorithm,
                &cell.trials.to_string(),
                &num(x),
                &num(y),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Exact posteriors: `kind,node,state,value`, then the evidence probability.
pub fn write_exact_csv<W: Write>(out: W, net: &Network, truth: &ExactResult) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["kind", "node", "state", "value"])?;
    for (node, row) in truth.posterior.iter().enumerate() {
        for (s, &p) in row.iter().enumerate() {
            w.write_record(["posterior", net.id(node), &net.variable(node).states[s], &num(p)])?;
        }
    }
    w.write_record(["evidence_probability", "", "", &num(truth.evidence_probability)])?;
    w.flush()?;
    Ok(())
}
