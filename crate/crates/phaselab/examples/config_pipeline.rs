//! Drive the whole pipeline from a JSON run configuration, the same way
//! the `phaselab` binary does, and print the artifact summary.
//!
//! ```bash
//! cargo run --release --example config_pipeline
//! ```

use phaselab::config::RunConfig;
use phaselab::{run, Result};

const CONFIG: &str = r#"{
    "schema_version": 1,
    "problem": {
        "p": 2.0,
        "gamma": 0.0,
        "lambda_plus": 2.0,
        "lambda_minus": 1.0,
        "domain": {"Interval": {"a": -1.0, "b": 1.0}},
        "boundary": {"Ends": {"left": -1.0, "right": 1.0}}
    },
    "solver": {"grid_n": 512},
    "diagnostics": {"log_lipschitz": true},
    "plot": true,
    "seed": 7
}"#;

fn main() -> Result<()> {
    let mut config = RunConfig::from_json(CONFIG)?;
    let out = std::env::temp_dir().join("phaselab_config_pipeline");
    config.output_dir = Some(out.clone());

    let outcome = run::cmd_continue(&config, true)?;
    println!(
        "continuation converged: {} | acceptance checks passed: {:?}",
        outcome.report.converged, outcome.check_passed
    );
    println!("artifacts:");
    for f in &outcome.artifacts.files {
        println!("  {}", f.display());
    }
    println!();
    print!("{}", run::cmd_report(&out)?);
    Ok(())
}
