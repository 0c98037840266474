//! Thin command-line front end; all logic lives in the library.
//!
//! Exit codes: 0 success, 2 config error, 3 numerical failure,
//! 4 acceptance-check failure (`--check`).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use phaselab::config::RunConfig;
use phaselab::run;
use phaselab::Error;

#[derive(Parser)]
#[command(name = "phaselab", version, about = "two-phase degenerate free boundary laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Run the built-in acceptance checks; failures exit 4.
    #[arg(long)]
    check: bool,
    /// Seed override for randomized pieces.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimize a gamma > 0 instance.
    Solve(Common),
    /// Reach gamma = 0 through the decreasing-gamma continuation.
    #[command(name = "continue")]
    Continue(Common),
    /// Measure regularity diagnostics on a solution.
    Diagnose(Common),
    /// Emit a closed-form or brute-force oracle solution.
    Oracle(Common),
    /// Scan a (gamma, p, q) grid and tabulate exponents.
    Sweep(Common),
    /// Summarize the reports in an artifact directory.
    Report {
        /// Artifact directory to summarize.
        #[arg(long)]
        out: PathBuf,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NumericalFailure(_)
        | Error::ReplacementNonConvergence { .. }
        | Error::Io(_) => 3,
        _ => 2,
    }
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    if let Some(threads) = common.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let mut config = RunConfig::from_file(&common.config)?;
    if let Some(out) = &common.out {
        config.output_dir = Some(out.clone());
    }
    if common.plot {
        config.plot = true;
    }
    if let Some(seed) = common.seed {
        config.seed = Some(seed);
    }
    Ok(config)
}

fn finish(check: Option<bool>, converged: bool, what: &str) -> ExitCode {
    if let Some(false) = check {
        eprintln!("{what}: acceptance check failed");
        return ExitCode::from(4);
    }
    if !converged {
        eprintln!("{what}: not converged");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| -> Result<ExitCode, Error> {
        match &cli.command {
            Command::Solve(common) => {
                let config = load(common)?;
                let outcome = run::cmd_solve(&config, common.check)?;
                println!(
                    "solve: converged {} energy {:.10} -> {}",
                    outcome.report.converged,
                    outcome.report.final_energy.total,
                    outcome.artifacts.out_dir.display()
                );
                Ok(finish(outcome.check_passed, outcome.report.converged, "solve"))
            }
            Command::Continue(common) => {
                let config = load(common)?;
                let outcome = run::cmd_continue(&config, common.check)?;
                println!(
                    "continue: converged {} J0 {:.10} -> {}",
                    outcome.report.converged,
                    outcome.report.j0_per_stage.last().unwrap_or(&f64::NAN),
                    outcome.artifacts.out_dir.display()
                );
                Ok(finish(outcome.check_passed, outcome.report.converged, "continue"))
            }
            Command::Diagnose(common) => {
                let config = load(common)?;
                let outcome = run::cmd_diagnose(&config, common.check)?;
                println!(
                    "diagnose: {} interface points -> {}",
                    outcome.regularity.interface_points,
                    outcome.artifacts.out_dir.display()
                );
                Ok(finish(outcome.check_passed, true, "diagnose"))
            }
            Command::Oracle(common) => {
                let config = load(common)?;
                let outcome = run::cmd_oracle(&config)?;
                println!("oracle -> {}", outcome.artifacts.out_dir.display());
                Ok(ExitCode::SUCCESS)
            }
            Command::Sweep(common) => {
                let config = load(common)?;
                let outcome = run::cmd_sweep(&config, common.check)?;
                println!(
                    "sweep: {} rows -> {}",
                    outcome.rows.len(),
                    outcome.artifacts.out_dir.display()
                );
                Ok(finish(outcome.check_passed, true, "sweep"))
            }
            Command::Report { out } => {
                print!("{}", run::cmd_report(out)?);
                Ok(ExitCode::SUCCESS)
            }
        }
    })();
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
