use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use simcli::{
    emit_plots, parse_summary, run_experiment, write_outputs, ExperimentConfig, MaxVarSource,
    MeasurementModel, SimError, SimResult,
};
use stiefel_ekf::stats::max_scalar_variance_mc;
use stiefel_ekf::StiefelShape;

#[derive(Parser)]
#[command(name = "simcli", version, about = "Stiefel extended Kalman filter experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_name = "section4|eq-filtering")]
        measurement_model: Option<String>,
        #[arg(long, value_name = "closed_form|mc|file")]
        maxvar_source: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the maximal scalar variance of St(n,k).
    Maxvar {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Render plots from a summary CSV.
    Plot {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config_err<E: std::fmt::Display>(e: E) -> SimError {
    SimError::Config(e.to_string())
}

fn execute(cli: Cli) -> SimResult<()> {
    match cli.command {
        Command::Run {
            config,
            seed,
            jobs,
            measurement_model,
            maxvar_source,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(m) = measurement_model {
                cfg.measurement_model = m.parse::<MeasurementModel>().map_err(config_err)?;
            }
            if let Some(s) = maxvar_source {
                cfg.maxvar_source = s.parse::<MaxVarSource>().map_err(config_err)?;
            }
            if out.is_some() {
                cfg.output_dir = out;
            }
            let result = run_experiment(&cfg, jobs)?;
            let paths = write_outputs(&result, &cfg.resolved_output_dir())?;
            let failed = result.traces.iter().filter(|t| t.error.is_some()).count();
            println!("config hash: {}", result.config_hash);
            println!(
                "{} replicates ({failed} failed), summary: {}",
                result.traces.len(),
                paths.summary.display()
            );
            for p in &paths.plots {
                println!("plot: {}", p.display());
            }
            Ok(())
        }
        Command::Maxvar { n, k, samples, seed } => {
            let shape = StiefelShape::new(n, k).map_err(config_err)?;
            let est = max_scalar_variance_mc(shape, samples, seed)?;
            println!("estimate: {}", est.estimate);
            println!("std_error: {}", est.std_error);
            println!("failure_fraction: {}", est.failure_fraction());
            Ok(())
        }
        Command::Plot { summary, out } => {
            let text = std::fs::read_to_string(&summary).map_err(|e| SimError::io(&summary, e))?;
            let panels = parse_summary(&text)?;
            let prefix = summary
                .parent()
                .and_then(|d| d.file_name())
                .and_then(|s| s.to_str())
                .unwrap_or("summary");
            for p in emit_plots(&panels, &out, prefix)? {
                println!("plot: {}", p.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("simcli: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
