use clap::{Parser, Subcommand};

use ulb_cli::commands::{extend, profile, rdot, sweep, verify};
use ulb_cli::errors::CliResult;

/// Unbounded liquid bridge computations: spectral profile solves, T(sigma)
/// sweeps with spectral differentiation, variation-equation experiments,
/// asymptotic extension, and cross-check verification. Artifacts are
/// byte-deterministic CSVs plus SVG figures, with a JSON manifest per run.
#[derive(Parser)]
#[command(name = "ulb", version, about)]
struct Cli {
    /// Worker threads for row-parallel sweeps (default: all cores; the
    /// BRIDGE_THREADS environment variable overrides this flag).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one bridge profile and plot its generating curve.
    Profile(profile::ProfileArgs),
    /// Sweep T(sigma) on a Chebyshev grid and differentiate it.
    SweepT(sweep::SweepArgs),
    /// Integrate the variation equations over a T table.
    Rdot(rdot::RdotArgs),
    /// Splice small-radius asymptotics onto a table and re-run rdot.
    Extend(extend::ExtendArgs),
    /// Run the cross-check battery on one radius or a whole table.
    Verify(verify::VerifyArgs),
}

fn effective_threads(flag: Option<usize>) -> usize {
    std::env::var("BRIDGE_THREADS")
        .ok()
        .and_then(|v| v.parse().ok())
        .or(flag)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1)
}

fn dispatch(cli: &Cli, threads: usize) -> CliResult<i32> {
    match &cli.command {
        Command::Profile(args) => profile::run(args, threads),
        Command::SweepT(args) => sweep::run(args, threads),
        Command::Rdot(args) => rdot::run(args, threads),
        Command::Extend(args) => extend::run(args, threads),
        Command::Verify(args) => verify::run(args, threads),
    }
}

fn main() {
    let cli = Cli::parse();
    let threads = effective_threads(cli.threads);
    if rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .is_err()
    {
        // The global pool can only be configured once; fall back silently.
    }
    match dispatch(&cli, threads) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
