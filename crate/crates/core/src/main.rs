//! Command-line front end: build witnesses, check optimality, run the
//! lambda_max sweep, compute SPAs, and minimize over product states.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ewopt::error::Error;
use ewopt::experiments::{
    cmd_check_optimality, cmd_spa, cmd_sweep, read_witness, read_zeros, write_witness, SweepSpec,
};
use ewopt::seesaw::{min_product_expectation, SeesawConfig};
use ewopt::witness::{hakye_witness, HaKyeParams};

/// Seed used when no --seed is given; overridable through the environment.
const SEED_ENV: &str = "EWOPT_SEED";

#[derive(Parser)]
#[command(name = "ewopt", version, about = "Entanglement witness optimality toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a family witness and write it as JSON.
    BuildHakye(BuildArgs),
    /// Decide nonoptimality of a witness from its product zero set.
    CheckOptimality(CheckArgs),
    /// Map lambda_max over the (theta, b) grid and write a CSV.
    Sweep(SweepArgs),
    /// Structural physical approximation of a witness, with PPT and
    /// realignment records of the resulting state.
    Spa(SpaArgs),
    /// Minimize <e,f|W|e,f> over product vectors.
    MinProduct(MinProductArgs),
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    theta: f64,
    #[arg(long)]
    b: f64,
    /// Accept the closure of the parameter family (theta = 0, |theta| = pi/3,
    /// b = 1 at theta = 0).
    #[arg(long)]
    allow_boundary: bool,
    #[arg(long)]
    label: Option<String>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CheckArgs {
    witness: PathBuf,
    /// JSON file with the product zero set; mutually exclusive with --discover.
    #[arg(long, conflicts_with = "discover")]
    zeros: Option<PathBuf>,
    /// Discover the zero set by random-restart minimization.
    #[arg(long)]
    discover: bool,
    #[arg(long, default_value_t = 1000)]
    restarts: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Strict-positivity threshold for the verdict; defaults to
    /// 1e-7 times the Frobenius norm of the witness.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON file with a full sweep specification; flags override its fields.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Reduced grid: theta step 0.1, b step 0.2, 200 restarts.
    #[arg(long, conflicts_with = "full")]
    fast: bool,
    /// Full grid: theta step 0.05, b step 0.1, 1000 restarts.
    #[arg(long)]
    full: bool,
    #[arg(long)]
    theta_min: Option<f64>,
    #[arg(long)]
    theta_max: Option<f64>,
    #[arg(long)]
    theta_step: Option<f64>,
    #[arg(long)]
    b_min: Option<f64>,
    #[arg(long)]
    b_max: Option<f64>,
    #[arg(long)]
    b_step: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    lambda_tol: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct SpaArgs {
    witness: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MinProductArgs {
    witness: PathBuf,
    #[arg(long, default_value_t = 1000)]
    restarts: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn env_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0)
}

fn emit(text: String, output: Option<&PathBuf>) -> Result<(), Error> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run() -> Result<(), Error> {
    match Cli::parse().command {
        Command::BuildHakye(args) => {
            let params = HaKyeParams::new(args.theta, args.b);
            let mut witness = hakye_witness(&params, args.allow_boundary)?;
            if let Some(label) = args.label {
                witness = witness.with_matrix(witness.matrix().clone(), label)?;
            }
            write_witness(&witness, &args.output)?;
            eprintln!("wrote {}", args.output.display());
        }
        Command::CheckOptimality(args) => {
            let witness = read_witness(&args.witness)?;
            let zeros = match &args.zeros {
                Some(path) => Some(read_zeros(path)?),
                None if args.discover => None,
                None => {
                    return Err(Error::InvalidParams(
                        "pass --zeros <file> or --discover".into(),
                    ))
                }
            };
            let cfg = SeesawConfig {
                restarts: args.restarts,
                seed: args.seed.unwrap_or_else(env_seed),
                ..SeesawConfig::default()
            };
            let tol = args
                .tol
                .unwrap_or_else(|| 1e-7 * witness.frobenius_norm());
            let report = cmd_check_optimality(&witness, zeros, &cfg, tol)?;
            emit(serde_json::to_string_pretty(&report).unwrap(), args.output.as_ref())?;
        }
        Command::Sweep(args) => {
            let mut spec = match &args.spec {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    serde_json::from_str::<SweepSpec>(&text)
                        .map_err(|e| Error::Parse(format!("sweep spec: {e}")))?
                }
                None if args.fast => SweepSpec::fast(),
                None => SweepSpec::default(),
            };
            if args.fast && args.spec.is_some() {
                return Err(Error::InvalidParams(
                    "--fast cannot be combined with --spec".into(),
                ));
            }
            spec.seed = env_seed();
            macro_rules! override_field {
                ($($flag:ident => $field:ident),*) => {
                    $(if let Some(v) = args.$flag { spec.$field = v; })*
                };
            }
            override_field!(
                theta_min => theta_min, theta_max => theta_max, theta_step => theta_step,
                b_min => b_min, b_max => b_max, b_step => b_step,
                restarts => restarts, seed => seed, lambda_tol => lambda_tol
            );
            let cells = cmd_sweep(&spec, &args.output)?;
            eprintln!("wrote {} rows to {}", cells.len(), args.output.display());
        }
        Command::Spa(args) => {
            let witness = read_witness(&args.witness)?;
            let report = cmd_spa(&witness)?;
            emit(serde_json::to_string_pretty(&report).unwrap(), args.output.as_ref())?;
        }
        Command::MinProduct(args) => {
            let witness = read_witness(&args.witness)?;
            let cfg = SeesawConfig {
                restarts: args.restarts,
                max_iters: args.max_iters,
                seed: args.seed.unwrap_or_else(env_seed),
                ..SeesawConfig::default()
            };
            let result = min_product_expectation(&witness, &cfg)?;
            let json = serde_json::json!({
                "value": result.value,
                "converged": result.converged,
                "iterations": result.iterations,
                "restarts": cfg.restarts,
                "argmin": {
                    "e": result.argmin.e().entries().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                    "f": result.argmin.f().entries().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                },
            });
            emit(serde_json::to_string_pretty(&json).unwrap(), args.output.as_ref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
