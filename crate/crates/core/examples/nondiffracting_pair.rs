//! Two Gaussians (w₀ = π/k₀ = 100 μm, 3w₀ apart) over one Rayleigh length in
//! free space, on Raman resonance, and at Δ = −Γ.
//!
//! cargo run --release --example nondiffracting_pair

use std::f64::consts::PI;

use slowlight::diagnostics::{default_beam_window, total_power, DiagnosticsReport};
use slowlight::medium::design_medium;
use slowlight::sources::{beam_row, composite_beams};
use slowlight::{DesignTargets, OpticalParams, PropagationMode, Propagator, TransverseGrid};

fn main() -> slowlight::Result<()> {
    let optics = OpticalParams::new(795e-9)?;
    let w0 = 100e-6;
    let medium = design_medium(&DesignTargets {
        wavelength: optics.wavelength(),
        k0: PI / w0,
        gamma_over_gammap: 2.0,
        diffusion: Some(11e-4),
        gamma: None,
    })?;
    let grid = TransverseGrid::new(512, 512, 12.5e-6, 12.5e-6)?;
    let beams = beam_row(2, w0, 3.0 * w0);
    let centers: Vec<_> = beams.iter().map(|b| b.center).collect();
    let input = composite_beams(&grid, &beams)?;
    let window = default_beam_window(&input, &centers);
    let p0 = total_power(&input);
    let z = optics.rayleigh_length(w0);

    let modes = [
        ("free space", PropagationMode::FreeSpace),
        (
            "resonant",
            PropagationMode::Eit {
                medium: medium.with_delta(0.0)?,
            },
        ),
        ("delta = -gamma", PropagationMode::Eit { medium }),
    ];
    println!("z = z_R = {:.3} cm", z * 100.0);
    for (name, mode) in modes {
        let out = Propagator::new(mode, optics, &grid).propagate_referenced(&input, z)?;
        let before = DiagnosticsReport::measure(&input, 0.0, 0.0, p0, &centers, window)?;
        let after =
            DiagnosticsReport::measure(&out.field, z, out.log_power_scale(), p0, &centers, window)?;
        let change: Vec<String> = before
            .per_beam
            .iter()
            .zip(&after.per_beam)
            .map(|(a, b)| format!("{:+.1}%", 100.0 * (b.width_x / a.width_x - 1.0)))
            .collect();
        println!(
            "{name:>15}: width change {} | ln T = {:.3}",
            change.join(", "),
            after.log_transmission
        );
    }
    Ok(())
}
