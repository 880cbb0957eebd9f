use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser};
use unigraph_cli::{exit_code, run, CliError, Command, GlueSetting, Params, RunConfig, Target};

/// Builds and certifies uniform metric graphs close to the Euclidean and
/// hyperbolic planes.
#[derive(Parser)]
#[command(name = "unigraph", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Args)]
struct Flags {
    /// JSON config; flags given alongside override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `sqrt2_minus_1`, `golden_conjugate` or a number in (0, 1).
    #[arg(long)]
    alpha: Option<String>,
    /// Lattice half-width, or index range for sequence and profile checks.
    #[arg(long)]
    n: Option<u32>,
    /// Glue length, or `auto`.
    #[arg(long)]
    m: Option<GlueSetting>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// What `export` writes.
    #[arg(long, value_enum)]
    target: Option<Target>,
}

fn resolve(cli: Cli) -> Result<RunConfig, CliError> {
    let f = cli.flags;
    let file = match &f.config {
        Some(path) => Params::from_json(&std::fs::read_to_string(path)?)?,
        None => Params::default(),
    };
    let flags = Params {
        alpha: f.alpha,
        n: f.n,
        m: f.m,
        radius: f.radius,
        epsilon: f.epsilon,
        delta: f.delta,
        seed: f.seed,
        samples: f.samples,
        out: f.out,
        target: f.target,
        ..Params::default()
    };
    RunConfig::resolve(cli.command, file.overlay(flags))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(cli).and_then(|cfg| run(&cfg));
    match &result {
        Ok(o) => {
            for f in &o.files {
                println!("{}", f.display());
            }
            if !o.passed {
                eprintln!("one or more asserted bounds failed; see summary.json");
            }
        }
        Err(e) => eprintln!("{e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
