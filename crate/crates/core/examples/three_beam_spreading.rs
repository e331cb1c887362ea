//! Three beams 4w₀ apart over four Rayleigh lengths at Δ = −Γ, 40 slices.
//! Prints the per-beam width growth against z.
//!
//! cargo run --release --example three_beam_spreading

use std::f64::consts::PI;

use slowlight::diagnostics::{default_beam_window, total_power, DiagnosticsReport};
use slowlight::medium::design_medium;
use slowlight::sources::{beam_row, composite_beams};
use slowlight::{
    DesignTargets, OpticalParams, PropagationMode, PropagationPlan, Propagator, TransverseGrid,
};

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
    let beams = beam_row(3, w0, 4.0 * w0);
    let centers: Vec<_> = beams.iter().map(|b| b.center).collect();
    let input = composite_beams(&grid, &beams)?;
    let window = default_beam_window(&input, &centers);
    let p0 = total_power(&input);
    let z_r = optics.rayleigh_length(w0);
    let plan = PropagationPlan::uniform(4.0 * z_r, 40)?;

    for (name, mode) in [
        ("free space", PropagationMode::FreeSpace),
        ("eit", PropagationMode::Eit { medium }),
    ] {
        println!("{name}");
        let slices =
            Propagator::new(mode, optics, &grid).propagate_slices_referenced(&input, &plan)?;
        let w_in =
            DiagnosticsReport::measure(&input, 0.0, 0.0, p0, &centers, window)?.mean_beam_width_x();
        for s in slices.iter().step_by(5) {
            let r = DiagnosticsReport::measure(
                &s.field,
                s.z,
                s.log_power_scale(),
                p0,
                &centers,
                window,
            )?;
            println!(
                "  z/z_R = {:4.2}  growth {:+6.1}%  ln T = {:8.2}",
                s.z / z_r,
                100.0 * (r.mean_beam_width_x() / w_in - 1.0),
                r.log_transmission
            );
        }
    }
    Ok(())
}
