use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swlab::{diff, run, CliError, Experiment, ExperimentConfig, RunRequest};

#[derive(Parser)]
#[command(name = "swlab", version, about = "Seiberg-Witten numerical laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML or JSON experiment config; defaults apply without one.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output prefix for <prefix>.csv, <prefix>.json, <prefix>.manifest.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiffArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel dimension and gap of D_a over a grid of twists.
    Badpoints(RunArgs),
    /// Spectrum of D_a or of the model operator B_a.
    Spectrum(RunArgs),
    /// Gap constants c(r), δ(r), δ₀(r) against sampled eigensolves.
    Gaps(RunArgs),
    /// Spectral flow of a seeded random symmetric family.
    Flow(RunArgs),
    /// Gradient descent on the Chern-Simons-Dirac functional.
    CsdDescent(RunArgs),
    /// Signed counts of critical points from their Hessians.
    Chi(RunArgs),
    /// λ_L of a glued neck over a list of half-lengths.
    NeckSweep(RunArgs),
    /// λ(Δ_L) and λ(Δ_L²) of the one-dimensional Laplace model.
    #[command(name = "delta-L")]
    DeltaL(RunArgs),
    /// Splitting of spectral flow into body flows plus a Maslov index.
    MasSf(RunArgs),
    /// Algebraic intersection number of two polylines.
    Intersect(RunArgs),
    /// Fieldwise comparison of two CSV or JSON data files.
    Diff(DiffArgs),
}

fn fail(e: CliError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, args) = match cli.command {
        Command::Badpoints(a) => (Experiment::Badpoints, a),
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Gaps(a) => (Experiment::Gaps, a),
        Command::Flow(a) => (Experiment::Flow, a),
        Command::CsdDescent(a) => (Experiment::CsdDescent, a),
        Command::Chi(a) => (Experiment::Chi, a),
        Command::NeckSweep(a) => (Experiment::NeckSweep, a),
        Command::DeltaL(a) => (Experiment::DeltaL, a),
        Command::MasSf(a) => (Experiment::MasSf, a),
        Command::Intersect(a) => (Experiment::Intersect, a),
        Command::Diff(d) => {
            return match diff::diff_reports(&d.a, &d.b, d.tol) {
                Ok(r) => {
                    println!("{}", serde_json::to_string_pretty(&r).expect("report serializes"));
                    if r.equal {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => fail(e),
            };
        }
    };
    let config = match &args.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => return fail(e),
        },
        None => ExperimentConfig::default(),
    };
    let req = RunRequest { experiment, config, seed: args.seed, out: args.out, threads: None };
    match run(req) {
        Ok(m) => {
            for f in &m.outputs {
                println!("{}  {}", f.sha256, f.path);
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(e),
    }
}
