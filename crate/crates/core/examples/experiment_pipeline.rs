//! Runs the config-driven pipeline (equilibria, verify, solve) on the
//! bundled FitzHugh-Nagumo config and lists the artifacts.

use std::path::Path;

use bidomain_periodic::experiment::{cmd_equilibria, cmd_solve, cmd_verify, ExperimentConfig};

fn main() -> bidomain_periodic::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/fhn_origin.json");
    let cfg = ExperimentConfig::load(&path)?;
    let out = std::env::temp_dir().join("bidomain-pipeline");

    print!("{}", cmd_equilibria(&cfg, &out)?.to_table());
    let verify = cmd_verify(&cfg, &out)?;
    for c in &verify.checks {
        println!("{:<24} {:?} {:.3e}", c.name, c.status, c.value);
    }
    let solved = cmd_solve(&cfg, &out)?;
    println!("{} outer iterations, files {:?} in {}", solved.report.outer_iterations, solved.files, out.display());
    Ok(())
}
