use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use afrelay::asymptotic::estimate_expectations;
use afrelay::harness::{figure_preset, load_sweep_spec, run_sweep, write_per_trial, write_results, PRESET_NAMES};
use afrelay::verify::{haar_fourth_moments, lemma3_trials, rotated_moments};
use afrelay::{SeedSpec, Stream};

#[derive(Parser)]
#[command(name = "afrelay", version, about = "Relay beamforming simulator for dual-hop MIMO AF networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a figure preset or a sweep described in a TOML file.
    Simulate(SimulateArgs),
    /// Print eigenvalue expectations E1..E4 for one side of the relay.
    Expectations(ExpectationArgs),
    /// Run the Haar-moment and eigenvalue-lemma oracles.
    Verify {
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config", value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the preset or file trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Overrides the preset or file master seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Also write per-trial rates to this file.
    #[arg(long)]
    per_trial: Option<PathBuf>,
}

#[derive(Args)]
struct ExpectationArgs {
    #[arg(long = "M", default_value_t = 4)]
    m: usize,
    /// CSI-error power of the side (`e²`).
    #[arg(long = "e2", default_value_t = 0.0)]
    e_sq: f64,
    /// Regularizer; `inf` gives the α-scaled limit.
    #[arg(long)]
    alpha: f64,
    #[arg(long = "L", default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn simulate(args: SimulateArgs) -> afrelay::Result<()> {
    let mut spec = match (&args.preset, &args.config) {
        (Some(name), _) => figure_preset(name)?,
        (None, Some(path)) => load_sweep_spec(path)?,
        (None, None) => unreachable!("clap requires one of --preset/--config"),
    };
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(s) = args.seed {
        spec.seed = SeedSpec::new(s, 0);
    }
    let rows = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| afrelay::Error::InvalidArgument(e.to_string()))?
            .install(|| run_sweep(&spec))?,
        None => run_sweep(&spec)?,
    };
    write_results(&rows, &args.out)?;
    if let Some(path) = &args.per_trial {
        write_per_trial(&rows, path)?;
    }
    let skipped = rows.iter().filter(|r| r.skipped.is_some()).count();
    eprintln!("wrote {} rows to {} ({skipped} skipped)", rows.len(), args.out.display());
    Ok(())
}

fn expectations(args: ExpectationArgs) -> afrelay::Result<()> {
    let e = estimate_expectations(args.m, args.e_sq, args.alpha, args.samples, SeedSpec::new(args.seed, 0))?;
    println!("M = {}\ne_sq = {}\nalpha = {}\nL = {}", args.m, args.e_sq, args.alpha, args.samples);
    println!("E1 = {:.10}\nE2 = {:.10}\nE3 = {:.10}\nE4 = {:.10}", e.e1, e.e2, e.e3, e.e4);
    Ok(())
}

fn verify(samples: usize, seed: u64) -> afrelay::Result<bool> {
    let mut ok = true;
    let mut report = |name: &str, pass: bool, detail: String| {
        ok &= pass;
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    };

    let h = haar_fourth_moments(4, samples, SeedSpec::new(seed, 0));
    for (name, e) in [("E|Q_ik|^4", h.same_entry), ("E|Q_ik|^2|Q_lk|^2", h.same_column), ("E{Q_il Q*_ml Q*_ir Q_mr}", h.cross)] {
        report(name, e.z_score().abs() <= 3.0, format!("{:.6} vs {:.6} (z = {:.2})", e.mean, e.expected, e.z_score()));
    }

    let mut rng: Stream = SeedSpec::new(seed, 1).derive_stream();
    let lambdas = afrelay::random_matrix::gram_eigenvalues(&afrelay::random_matrix::sample_gaussian_matrix(4, 4, 1.0, &mut rng)?);
    let r = rotated_moments(&lambdas, samples, SeedSpec::new(seed, 2))?;
    for (name, e) in [("mu(lambda)", r.diagonal), ("nu(lambda)", r.off_diagonal)] {
        report(name, e.relative_error() <= 0.01, format!("{:.6} vs {:.6}", e.mean, e.expected));
    }

    let trials = lemma3_trials(4, 100, 1e-3, SeedSpec::new(seed, 3))?;
    let worst = trials.iter().map(|t| (t.grid_maximizer - t.claimed).abs()).fold(0.0, f64::max);
    report("alpha = C/D maximizer", worst <= 2e-3, format!("worst |grid - C/D| = {worst:.4} over {} draws", trials.len()));
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args).map(|_| true),
        Command::Expectations(args) => expectations(args).map(|_| true),
        Command::Verify { samples, seed } => verify(samples, seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
