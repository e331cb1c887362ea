//! Runs the bundled waist sweep: one beam at Δ = −Γ over four Rayleigh
//! lengths of its own waist, for w₀ ∈ {1, 2, 4, 8}·π/k₀.
//!
//! cargo run --release --example waist_sweep

use std::path::Path;

use slowlight::config::ScenarioConfig;
use slowlight::runner::run_sweep;

fn main() -> slowlight::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let config = ScenarioConfig::from_file(&root.join("configs/waist_sweep.toml"), true)?;
    let out = root.join("target/waist_sweep");
    let (rows, meta) = run_sweep(&config, &out)?;
    println!("{:>6} {:>10} {:>12}", "w0/f", "spreading", "ln T");
    for r in rows {
        match r.result {
            Ok(m) => println!(
                "{:>6} {:>9.2}% {:>12.1}",
                r.value,
                100.0 * m.spreading,
                m.log_transmission
            ),
            Err(e) => println!("{:>6} error: {e}", r.value),
        }
    }
    println!("{} artifacts under {}", meta.artifacts.len(), out.display());
    Ok(())
}
