use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use bidomain_periodic::experiment::{cmd_equilibria, cmd_norms, cmd_solve, cmd_verify, describe, ExperimentConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bidomain", version, about = "Time-periodic bidomain solves and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory; overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the frequency and quadrature loops.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Rest states, linearizations and the stability predicate.
    Equilibria,
    /// Periodic solution by contraction about the configured rest state.
    Solve,
    /// Sector bound, seminorm oracle, inverse roundtrip, cross-validation.
    Verify,
    /// Interpolation-space norms of the forcing.
    Norms,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::example(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.out {
        cfg.output.dir = out;
    }
    let out = cfg.output.dir.clone();
    match cli.command {
        Command::Equilibria => {
            let report = cmd_equilibria(&cfg, &out)?;
            print!("{}", report.to_table());
            Ok(true)
        }
        Command::Solve => match cmd_solve(&cfg, &out) {
            Ok(o) => {
                let r = &o.report;
                println!("converged after {} outer iterations", r.outer_iterations);
                println!("contraction ratios {:?}", r.contraction_ratios);
                println!("residual {:.3e}", r.residual.unwrap_or(f64::NAN));
                println!("wrote {} to {}", o.files.join(", "), out.display());
                Ok(true)
            }
            Err(e) => {
                eprintln!("solve failed: {}", describe(&e));
                eprintln!("partial report written to {}", out.join("report.json").display());
                Ok(false)
            }
        },
        Command::Verify => {
            let report = cmd_verify(&cfg, &out)?;
            for c in &report.checks {
                println!("{:<40} {:?} value {:.3e} ({})", c.name, c.status, c.value, c.detail);
            }
            for c in report.failures() {
                eprintln!("FAILED {}: {:.3e} vs {:.3e}", c.name, c.value, c.threshold);
            }
            Ok(report.all_passed)
        }
        Command::Norms => {
            let report = cmd_norms(&cfg, &out)?;
            println!("||I||_Lp(L2)  = {:.6e}", report.bochner_l2);
            println!("||I||_Lp(D_A) = {:.6e}", report.bochner_da);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
