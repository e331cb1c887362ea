//! Loads a scenario file and runs it as the `propagate` subcommand would.
//!
//! cargo run --release --example run_config -- configs/beam_pair.toml target/fig3a

use std::path::PathBuf;

use slowlight::config::ScenarioConfig;
use slowlight::runner::run_propagate;

fn main() -> slowlight::Result<()> {
    let mut args = std::env::args().skip(1);
    let config_path = PathBuf::from(
        args.next()
            .unwrap_or_else(|| "configs/beam_pair.toml".into()),
    );
    let out = PathBuf::from(args.next().unwrap_or_else(|| "target/run_config".into()));
    let config = ScenarioConfig::from_file(&config_path, false)?;
    for w in &config.warnings {
        eprintln!("warning: {w}");
    }
    let outcome = run_propagate(&config, &out)?;
    for m in &outcome.modes {
        println!(
            "{:>13}: spreading {:+.2}%, fidelity {:.4}, ln T {:.3}",
            m.mode,
            100.0 * m.spreading,
            m.fidelity,
            m.final_report.log_transmission
        );
    }
    for w in &outcome.metadata.warnings {
        println!("warning: {w}");
    }
    println!("config hash {}", outcome.metadata.config_hash);
    Ok(())
}
