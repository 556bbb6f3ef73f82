//! `michell` — drive the vanishing-weight optimal-design experiments from
//! the command line.
//!
//! Subcommands map one-to-one onto the library experiments; each writes
//! `report.csv`, figures, and `run-manifest.txt` into its output directory.
//!
//! Exit codes: `0` all tolerance checks passed, `2` the run finished but a
//! tolerance check failed, `1` runtime error (bad file, solver failure),
//! `64` usage error.

mod config;
mod run;

use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::config::{parse_config, Experiment};

#[derive(Parser)]
#[command(
    name = "michell",
    version,
    about = "Vanishing-weight optimal design: integrand checks, truss LPs, \
             and continuum stress solvers",
    arg_required_else_help = true
)]
struct Cli {
    /// Worker threads for parallel sections (deterministic; all current
    /// sections are single-pass, so values above 1 change nothing yet).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample the pointwise integrand inequalities (chain, seams, cone,
    /// monotonicity, scaling) and report violations.
    CheckIntegrands {
        /// Tensor draws per lambda (alternating 2D and 3D).
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        /// Comma-separated ascending lambda list.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1e2, 1e4])]
        lambdas: Vec<f64>,
        /// RNG seed.
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Solve the certified ground-structure LP for a truss instance file.
    TrussLp {
        /// Truss instance (plain-text nodes/bars/loads/supports format).
        instance: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Minimize the limit energy over stress fields balancing a configured
    /// load.
    SolveLimit(ConfigArgs),
    /// Warm-started finite-lambda sweep over the configured lambda list.
    SolveLambda(ConfigArgs),
    /// Rasterize a weighted truss and verify the energy-recovery bounds.
    Recovery(ConfigArgs),
    /// Full sweep on a named instance: LP target, limit solve, finite-lambda
    /// envelope.
    GammaSweep(ConfigArgs),
}

#[derive(clap::Args)]
struct ConfigArgs {
    /// Run configuration file (sectioned key = value format).
    config: PathBuf,
    /// Override the output directory from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Cmd {
    fn expected_experiment(&self) -> Option<Experiment> {
        match self {
            Cmd::SolveLimit(_) => Some(Experiment::SolveLimit),
            Cmd::SolveLambda(_) => Some(Experiment::SolveLambda),
            Cmd::Recovery(_) => Some(Experiment::Recovery),
            Cmd::GammaSweep(_) => Some(Experiment::GammaSweep),
            _ => None,
        }
    }
}

fn run_config_command(args: &ConfigArgs, expected: Experiment) -> anyhow::Result<bool> {
    let mut cfg = parse_config(&args.config)?;
    if cfg.experiment != expected {
        anyhow::bail!(
            "config {} declares experiment `{}` but the `{expected}` subcommand was invoked",
            args.config.display(),
            cfg.experiment
        );
    }
    if let Some(out) = &args.out {
        cfg.out = out.clone();
    }
    run::dispatch_config(&cfg)
}

fn main() {
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return code;
        }
    };
    if cli.threads == 0 {
        eprintln!("--threads must be at least 1");
        return 64;
    }
    let expected = cli.cmd.expected_experiment();
    let outcome = match &cli.cmd {
        Cmd::CheckIntegrands { samples, lambdas, seed, out } => {
            if lambdas.is_empty() || lambdas.windows(2).any(|w| !(w[0] < w[1])) {
                eprintln!("--lambdas must be a nonempty ascending list");
                return 64;
            }
            run::check_integrands(*samples, lambdas, *seed, out)
        }
        Cmd::TrussLp { instance, out } => run::truss_lp(instance, out),
        Cmd::SolveLimit(a) | Cmd::SolveLambda(a) | Cmd::Recovery(a) | Cmd::GammaSweep(a) => {
            run_config_command(a, expected.expect("config subcommand"))
        }
    };
    match outcome {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("tolerance checks failed (see report.csv)");
            2
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
