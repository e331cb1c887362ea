//! Designs a medium that cancels diffraction for 100 μm features at 795 nm
//! with D = 11 cm²/s, and prints the derived quantities.
//!
//! cargo run --example design_medium

use std::f64::consts::PI;

use slowlight::medium::design_medium;
use slowlight::{DesignTargets, OpticalParams};

fn main() -> slowlight::Result<()> {
    let optics = OpticalParams::new(795e-9)?;
    let feature = 100e-6;
    for ratio in [1.0, 2.0, 4.0] {
        let m = design_medium(&DesignTargets {
            wavelength: optics.wavelength(),
            k0: PI / feature,
            gamma_over_gammap: ratio,
            diffusion: Some(11e-4),
            gamma: None,
        })?;
        let z_r = optics.rayleigh_length(feature);
        println!("Gamma/Gamma_p = {ratio}");
        println!("  alpha      = {:.4} 1/m", m.alpha());
        println!("  Gamma      = {:.6e} 1/s", m.gamma());
        println!(
            "  v_g        = {:.2} m/s (q D = {:.2} m/s)",
            m.group_velocity()?,
            optics.carrier_wavenumber() * m.diffusion()
        );
        println!("  z_R        = {:.4} cm", z_r * 100.0);
        println!("  kappa z_R  = {:.4}", m.absorption_kappa() * z_r);
        println!("  residual   = {:e}", m.check_cancellation(&optics));
    }
    Ok(())
}
