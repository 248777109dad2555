//! Command-line laboratory for weighted Ginzburg-Landau pinning experiments.
//!
//! Every subcommand reads one TOML experiment description, derives a short
//! hash of the effective (post-override) configuration, and stamps that hash
//! into every artifact it writes. Exit codes: 0 success (including solver
//! non-convergence, which is reported in-band), 2 configuration errors,
//! 3 runtime precondition failures.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, SweepSection};
use output::OutDir;

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or config file; exits 2 before any solve starts.
    Config(String),
    /// Violated precondition or I/O failure at run time; exits 3.
    Run(String),
}

#[derive(Parser)]
#[command(
    name = "glpin",
    version,
    about = "numerical laboratory for pinned Ginzburg-Landau vortices",
    arg_required_else_help = true
)]
struct Cli {
    /// TOML experiment description (required by every subcommand)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override the [output] dir from the config
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the growth functional and profile invariants over R
    #[command(name = "compute-i")]
    ComputeI {
        /// Comma-separated outer radii, overriding [iquant] r_values
        #[arg(long = "R", value_name = "R1,R2,...", value_delimiter = ',')]
        r: Option<Vec<f64>>,
        /// Budget constant, overriding [iquant] c
        #[arg(long)]
        c: Option<f64>,
    },
    /// Solve and tabulate the maximizing radial modulus profile
    Profile,
    /// Projected gradient descent at a single epsilon
    Minimize {
        /// Run at this epsilon instead of the first sweep value
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Projected gradient descent across the whole epsilon sweep
    Sweep {
        /// Worker threads; 1 warm-starts stages, >1 solves points independently
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Assemble matched trial fields and compare against the expansion
    Trial,
    /// Evaluate the perforated-annulus lower bound and its slack
    Bound,
    /// Least-squares fit of sweep energies against the expansion terms
    Fit {
        /// Energy CSV to fit; defaults to this config's sweep summary
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
    },
    /// Check structural hypotheses of the configured problem
    Validate,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config <FILE> is required".into()))?;
    let mut cfg = ExperimentConfig::load(&path)?;

    // Merge flag overrides into the config *before* hashing so the stamp
    // always names the effective experiment.
    if let Some(dir) = &cli.out_dir {
        cfg.output.dir = dir.to_string_lossy().into_owned();
    }
    match &cli.command {
        Command::ComputeI { r, c } => {
            if let Some(r) = r {
                cfg.iquant.r_values = r.clone();
            }
            if let Some(c) = c {
                cfg.iquant.c = *c;
            }
        }
        Command::Minimize {
            epsilon: Some(eps), ..
        } => {
            cfg.sweep = SweepSection {
                epsilons: Some(vec![*eps]),
                first: None,
                ratio: None,
                count: None,
            };
        }
        Command::Fit { input: Some(p) } => {
            cfg.fit.input = Some(p.to_string_lossy().into_owned());
        }
        Command::Sweep { workers } => {
            if *workers == 0 {
                return Err(CliError::Config("workers must be at least 1".into()));
            }
        }
        _ => {}
    }
    cfg.validate()?;

    let out = OutDir::create(&cfg.output.dir, &cfg.hash(), cfg.output.svg)?;
    match cli.command {
        Command::ComputeI { .. } => commands::compute_i_cmd(&cfg, &out),
        Command::Profile => commands::profile_cmd(&cfg, &out),
        Command::Minimize { .. } => commands::minimize_cmd(&cfg, &out),
        Command::Sweep { workers } => commands::sweep_cmd(&cfg, &out, workers),
        Command::Trial => commands::trial_cmd(&cfg, &out),
        Command::Bound => commands::bound_cmd(&cfg, &out),
        Command::Fit { .. } => commands::fit_cmd(&cfg, &out),
        Command::Validate => commands::validate_cmd(&cfg, &out),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
