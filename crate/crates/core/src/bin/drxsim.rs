use std::fs::File;
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coalesced_drx::analytic::{PoissonModel, StabilityVerdict};
use coalesced_drx::drx::DrxConfig;
use coalesced_drx::experiment::{emit_csv, run_experiment, ExperimentSpec};

#[derive(Parser)]
#[command(name = "drxsim", version, about = "Coalesced DRX simulator and delay model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment file and write its CSV table.
    Run {
        spec: PathBuf,
        /// Output path; defaults to the file's `output` key, else stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replicate with seeds 1..=n instead of the file's list.
        #[arg(long)]
        seeds: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Parse and validate an experiment file without running it.
    Validate { spec: PathBuf },
    /// Evaluate the Poisson delay model at one operating point.
    Model {
        #[arg(long)]
        rate: f64,
        #[arg(long)]
        q_w: f64,
        #[arg(long, default_value_t = 10.0)]
        t_in: f64,
        #[arg(long, default_value_t = 2.0)]
        t_on: f64,
        #[arg(long, default_value_t = 32.0)]
        t_short: f64,
        #[arg(long, default_value_t = 32.0)]
        t_long: f64,
        #[arg(long, default_value_t = 0)]
        n_short: u32,
        #[arg(long, default_value_t = 1.0)]
        psf: f64,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("drxsim: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> coalesced_drx::Result<()> {
    match cmd {
        Command::Run { spec, out, seeds, jobs } => {
            let mut spec = ExperimentSpec::from_file(&spec)?;
            if let Some(n) = seeds {
                spec.override_seeds(n)?;
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.unwrap_or(0))
                .build()
                .map_err(|e| coalesced_drx::Error::InvalidArgument(e.to_string()))?;
            let rows = pool.install(|| run_experiment(&spec))?;
            match out.or(spec.output) {
                Some(path) => emit_csv(&rows, BufWriter::new(File::create(path)?)),
                None => emit_csv(&rows, io::stdout().lock()),
            }
        }
        Command::Validate { spec } => {
            let spec = ExperimentSpec::from_file(&spec)?;
            println!(
                "{}: {} grid points x {} seeds, horizon {} ms",
                spec.name,
                spec.grid().len(),
                spec.seeds.len(),
                spec.horizon
            );
            Ok(())
        }
        Command::Model { rate, q_w, t_in, t_on, t_short, t_long, n_short, psf } => {
            let cfg = DrxConfig::new(t_in, t_on, t_short, t_long, n_short)?;
            let m = PoissonModel::deterministic(rate, psf, cfg)?;
            println!("E[W]      = {} ms", m.mean_wait(q_w)?);
            println!("dE[W]/dQ  = {} ms/packet", m.slope(q_w)?);
            println!("T_w       = {} ms", m.t_w());
            println!("gamma     = {}", m.gamma());
            let verdict = match m.stability(q_w)? {
                StabilityVerdict::Stable => "stable".to_string(),
                StabilityVerdict::Unstable => "unstable".to_string(),
                StabilityVerdict::ConditionallyStable(q) => format!("stable for q_w* >= {q}"),
            };
            println!("stability = {verdict}");
            Ok(())
        }
    }
}
