//! Tabulates χ(Δ, k⊥)/α against k⊥/k₀ at Γ = 2Γp for several detunings.
//!
//! cargo run --example chi_scan

use slowlight::config::ChiScanSpec;
use slowlight::runner::chi_scan;
use slowlight::MediumParams;

fn main() -> slowlight::Result<()> {
    // Γ = 1, Γp = 1/2, D = 1 so that k₀ = 1
    let medium = MediumParams::new(1.0, 0.5, 1.0, 1.0, 0.0)?;
    let spec = ChiScanSpec {
        k_max_over_k0: 4.0,
        points: 9,
        deltas_over_gamma: vec![0.0, -1.0, 1.0],
    };
    for curve in chi_scan(&medium, &spec)? {
        println!("delta/gamma = {:+.1}", curve.delta_over_gamma);
        println!("  {:>8} {:>12} {:>12}", "k/k0", "Im chi/a", "Re chi/a");
        for (k, im, re) in curve.rows {
            println!("  {k:>8.2} {im:>12.6} {re:>12.6}");
        }
    }
    let q = medium.with_delta(-1.0)?.quadratic_expansion();
    println!("at delta = -gamma: c_im = {}, c_re = {}", q.c_im, q.c_re);
    Ok(())
}
