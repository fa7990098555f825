use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bnsim_core::exact::{exact_inference_with, state_cap_from_env, EnumerationOrder};
use bnsim_core::harness::{compare_report, generate_extremal_network, ExperimentOptions};
use bnsim_core::io::{
    parse_evidence, parse_network, serialize_evidence, serialize_network, write_compare_csv,
    write_estimate_csv, write_exact_csv, write_plot_table, NetworkDocument,
};
use bnsim_core::transform::{integrate_evidence, reverse_arc_recorded, IntegrationMode, ReversalPlan};
use bnsim_core::{Algorithm, BnError, Evidence, Network, RandomStream, Result};

/// Exit statuses. clap itself exits with 2 on usage errors.
mod status {
    pub const OTHER: u8 = 1;
    pub const PARSE: u8 = 3;
    pub const VALIDATION: u8 = 4;
    pub const IMPOSSIBLE_EVIDENCE: u8 = 5;
    pub const CAPACITY: u8 = 6;
    pub const UNDEFINED_ESTIMATE: u8 = 7;
}

#[derive(Parser)]
#[command(name = "bnsim", version, about = "Stochastic simulation benchmarks for discrete Bayesian networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact posteriors and evidence probability by enumeration.
    Exact {
        #[command(flatten)]
        input: Input,
        /// Output CSV (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One estimate from one simulation run, as CSV.
    Sample {
        #[arg(long)]
        algorithm: Algorithm,
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Gibbs sweeps discarded before counting (default: a tenth).
        #[arg(long)]
        burn_in: Option<usize>,
        /// Skip the exact oracle; truth and error columns stay empty.
        #[arg(long)]
        no_truth: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Error, spread and timing grid over algorithms and trial counts.
    Compare {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', default_value = "logic,lw,lw-int-full,lw-int-partial,gibbs")]
        algorithms: Vec<Algorithm>,
        #[arg(long, value_delimiter = ',', default_value = "100,200,500,1000,2000")]
        trials_list: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Long-format plot table, including timings.
        #[arg(long)]
        plot_out: Option<PathBuf>,
        /// Worker threads for the statistics pass.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Timed passes per cell; each run's fastest time is kept.
        #[arg(long, default_value_t = 5)]
        timing_repeats: usize,
    },
    /// Arc reversal and evidential integration.
    #[command(subcommand)]
    Transform(TransformCommand),
    /// Network generators.
    #[command(subcommand)]
    Gen(GenCommand),
}

#[derive(Args)]
struct Input {
    #[arg(long)]
    network: PathBuf,
    /// Evidence document; no evidence if omitted.
    #[arg(long)]
    evidence: Option<PathBuf>,
}

#[derive(Args)]
struct TransformOutput {
    /// Transformed network document (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reversal plan as JSON.
    #[arg(long)]
    plan_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TransformCommand {
    ReverseArc {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[command(flatten)]
        output: TransformOutput,
    },
    Integrate {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        evidence: PathBuf,
        #[arg(long, default_value = "full")]
        mode: IntegrationMode,
        #[command(flatten)]
        output: TransformOutput,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Roots A0..A{n-1}, a rare node B and an observed child EV whose
    /// likelihoods differ by a factor 1/epsilon.
    Extremal {
        #[arg(long)]
        parents: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        network_out: Option<PathBuf>,
        #[arg(long)]
        evidence_out: Option<PathBuf>,
    },
}

fn exit_status(err: &BnError) -> u8 {
    match err {
        BnError::Parse(_) | BnError::UnknownNode(_) | BnError::UnknownState { .. } => status::PARSE,
        BnError::Validation(_) | BnError::Cycle(_) | BnError::Structural(_) => status::VALIDATION,
        BnError::ImpossibleEvidence(_) => status::IMPOSSIBLE_EVIDENCE,
        BnError::Capacity { .. } => status::CAPACITY,
        BnError::UndefinedEstimate(_) => status::UNDEFINED_ESTIMATE,
        _ => status::OTHER,
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| BnError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            BnError::Io(io::Error::new(e.kind(), format!("{}: {e}", p.display())))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<()> {
    let mut out = sink(path)?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn load(input: &Input) -> Result<(Network, Evidence)> {
    let net = parse_network(&read(&input.network)?)?;
    let evidence = match &input.evidence {
        Some(path) => parse_evidence(&read(path)?, &net)?,
        None => Evidence::empty(),
    };
    Ok((net, evidence))
}

fn emit_transform(net: &Network, plan: &ReversalPlan, output: &TransformOutput) -> Result<()> {
    write_text(output.out.as_deref(), &serialize_network(net)?)?;
    match &output.plan_out {
        Some(path) => {
            let text = serde_json::to_string_pretty(plan).expect("plans always serialize");
            write_text(Some(path), &text)?;
        }
        None => {
            for (from, to) in plan.arcs() {
                eprintln!("reversed {from} -> {to}");
            }
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Exact { input, out } => {
            let (net, evidence) = load(&input)?;
            let truth = exact_inference_with(&net, &evidence, state_cap_from_env(), EnumerationOrder::Forward)?;
            write_exact_csv(sink(out.as_deref())?, &net, &truth)
        }
        Command::Sample {
            algorithm,
            input,
            trials,
            seed,
            burn_in,
            no_truth,
            out,
        } => {
            let (net, evidence) = load(&input)?;
            let algorithm = match algorithm {
                Algorithm::Gibbs { .. } => Algorithm::Gibbs { burn_in },
                other => other,
            };
            let truth = if no_truth {
                None
            } else {
                Some(exact_inference_with(&net, &evidence, state_cap_from_env(), EnumerationOrder::Forward)?)
            };
            let estimate = algorithm.run(&net, &evidence, trials, &RandomStream::new(seed))?;
            write_estimate_csv(
                sink(out.as_deref())?,
                &net,
                &evidence,
                algorithm.label(),
                seed,
                &estimate,
                truth.as_ref(),
            )
        }
        Command::Compare {
            input,
            algorithms,
            trials_list,
            runs,
            seed,
            out,
            plot_out,
            parallel,
            timing_repeats,
        } => {
            let (net, evidence) = load(&input)?;
            let options = ExperimentOptions {
                parallelism: parallel.max(1),
                timing_repeats: timing_repeats.max(1),
            };
            let report = compare_report(&net, &evidence, &algorithms, &trials_list, runs, seed, options)?;
            for cell in &report.cells {
                if let Err(message) = &cell.outcome {
                    eprintln!("{} at {} trials: {message}", cell.algorithm, cell.trials);
                }
            }
            write_compare_csv(sink(out.as_deref())?, &net, &evidence, &report)?;
            if let Some(path) = plot_out {
                write_plot_table(sink(Some(&path))?, &report)?;
            }
            Ok(())
        }
        Command::Transform(TransformCommand::ReverseArc {
            network,
            from,
            to,
            output,
        }) => {
            let net = parse_network(&read(&network)?)?;
            let (from, to) = (net.require_index(&from)?, net.require_index(&to)?);
            let (reversed, step) = reverse_arc_recorded(&net, from, to)?;
            let plan = ReversalPlan { steps: vec![step] };
            emit_transform(&reversed, &plan, &output)
        }
        Command::Transform(TransformCommand::Integrate {
            network,
            evidence,
            mode,
            output,
        }) => {
            let net = parse_network(&read(&network)?)?;
            let evidence = parse_evidence(&read(&evidence)?, &net)?;
            let (integrated, plan) = integrate_evidence(&net, &evidence, mode)?;
            emit_transform(&integrated, &plan, &output)
        }
        Command::Gen(GenCommand::Extremal {
            parents,
            epsilon,
            network_out,
            evidence_out,
        }) => {
            let (net, evidence) = generate_extremal_network(parents, epsilon)?;
            if network_out.is_none() && evidence_out.is_none() {
                let doc = serde_json::json!({
                    "network": NetworkDocument::from_network(&net)?,
                    "evidence": serde_json::from_str::<serde_json::Value>(&serialize_evidence(&net, &evidence))
                        .expect("evidence documents are JSON"),
                });
                return write_text(None, &serde_json::to_string_pretty(&doc).expect("JSON values serialize"));
            }
            if let Some(path) = network_out {
                write_text(Some(&path), &serialize_network(&net)?)?;
            }
            if let Some(path) = evidence_out {
                write_text(Some(&path), &serialize_evidence(&net, &evidence))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("bnsim: {err}");
            ExitCode::from(exit_status(&err))
        }
    }
}
