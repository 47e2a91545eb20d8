use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;

#[derive(Parser, Debug)]
#[command(name = "cdmd", version, about = "Compartmental DMD pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a simulator from a config file and write its snapshots.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit DMD model(s) to the leading columns of a snapshot file.
    Fit {
        #[arg(long)]
        snapshots: PathBuf,
        /// Target rank, or `full`.
        #[arg(long, default_value = "full")]
        rank: RankArg,
        #[arg(long, value_enum, default_value_t = Mode::Coupled)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        oversample: usize,
        #[arg(long, default_value_t = 2)]
        power_iters: usize,
        /// Train on the first ceil(fraction * columns) columns.
        #[arg(long, default_value_t = 1.0)]
        train_fraction: f64,
        /// Model path. Uncoupled mode writes `<stem>.<compartment>.<ext>`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate model(s) on a time grid and write the result as snapshots.
    Reconstruct {
        /// Repeat for uncoupled models; rows are stacked in the order given.
        #[arg(long = "model", required = true)]
        models: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        t_start: f64,
        /// Defaults to the end of the training window.
        #[arg(long)]
        t_end: Option<f64>,
        /// Defaults to the model time step.
        #[arg(long)]
        t_step: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a reconstruction against reference snapshots.
    Diagnose {
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        reconstruction: PathBuf,
        /// Compartment names or indices, comma separated.
        #[arg(long)]
        subset: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        rel_tol: f64,
        /// Fail if any relative L2 error exceeds this.
        #[arg(long)]
        max_l2: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy)]
pub enum RankArg {
    Full,
    Fixed(usize),
}

impl std::str::FromStr for RankArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "full" {
            return Ok(RankArg::Full);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive integer or `full`, got `{s}`")),
            Ok(r) => Ok(RankArg::Fixed(r)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Coupled,
    Uncoupled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Randomized,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, out, seed } => commands::simulate(&config, &out, seed),
        Command::Fit {
            snapshots,
            rank,
            mode,
            backend,
            seed,
            oversample,
            power_iters,
            train_fraction,
            out,
        } => {
            let backend = match backend {
                BackendArg::Exact => cdmd_core::Backend::Exact,
                BackendArg::Randomized => cdmd_core::Backend::Randomized {
                    seed,
                    oversample,
                    power_iters,
                },
            };
            commands::fit(&snapshots, rank, mode, backend, train_fraction, &out)
        }
        Command::Reconstruct {
            models,
            t_start,
            t_end,
            t_step,
            out,
        } => commands::reconstruct(&models, t_start, t_end, t_step, &out),
        Command::Diagnose {
            reference,
            reconstruction,
            subset,
            rel_tol,
            max_l2,
            out,
        } => commands::diagnose(&reference, &reconstruction, subset.as_deref(), rel_tol, max_l2, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
