use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod config;
mod run;

use config::Task;

/// Optical-length distances, Hopf-Lax solutions and Monge checks on Carnot groups.
#[derive(Parser)]
#[command(name = "subhj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distance field and shortest paths from one source.
    Distance(Args),
    /// Hopf-Lax solution of the Dirichlet problem.
    Solve(Args),
    /// Monge residuals of a field at probe points.
    Verify(Args),
    /// Comparison of solutions with ordered boundary data.
    Compare(Args),
    /// Stability under a converging sequence of Hamiltonians.
    Stability(Args),
    /// Convergence of graph distances under refinement.
    Probe(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    spacing: Option<f64>,
}

fn threads_from_env() {
    let Ok(v) = std::env::var("SUBHJ_THREADS") else { return };
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("SUBHJ_THREADS ignored: {e}");
            }
        }
        _ => log::warn!("SUBHJ_THREADS={v:?} is not a positive integer; ignored"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    threads_from_env();
    let (task, args) = match cli.command {
        Command::Distance(a) => (Task::Distance, a),
        Command::Solve(a) => (Task::Solve, a),
        Command::Verify(a) => (Task::Verify, a),
        Command::Compare(a) => (Task::Compare, a),
        Command::Stability(a) => (Task::Stability, a),
        Command::Probe(a) => (Task::Probe, a),
    };
    let ov = run::Overrides { out: args.out, seed: args.seed, spacing: args.spacing };
    ExitCode::from(run::run(task, &args.config, &ov) as u8)
}
