//! Propagates the block letters "EIT" (50 μm strokes) over two Rayleigh
//! lengths in free space and in the diffraction-cancelling medium, writing
//! input and output heatmaps to `target/eit_letters/`.
//!
//! cargo run --release --example eit_letters [-- --write-image data/eit_letters.pgm]

use std::f64::consts::PI;
use std::path::PathBuf;

use slowlight::diagnostics::image_fidelity;
use slowlight::medium::design_medium;
use slowlight::pgm::GrayImage;
use slowlight::sources::{eit_letters, AmplitudeMapping, ImageMask};
use slowlight::{DesignTargets, OpticalParams, PropagationMode, Propagator, TransverseGrid};

fn heatmap(field: &slowlight::ComplexField) -> GrayImage {
    let i = field.intensity();
    let peak = i.iter().cloned().fold(0.0, f64::max);
    let g = field.grid();
    GrayImage::new(
        g.nx(),
        g.ny(),
        i.iter().map(|v| (255.0 * v / peak).round() as u8).collect(),
    )
}

fn main() -> slowlight::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let image = eit_letters(4);
    if let Some(pos) = args.iter().position(|a| a == "--write-image") {
        let path = PathBuf::from(
            args.get(pos + 1)
                .map(String::as_str)
                .unwrap_or("eit_letters.pgm"),
        );
        image.write(&path)?;
        println!("wrote {}", path.display());
    }

    let optics = OpticalParams::new(795e-9)?;
    let feature = 50e-6;
    let medium = design_medium(&DesignTargets {
        wavelength: optics.wavelength(),
        k0: PI / feature,
        gamma_over_gammap: 2.0,
        diffusion: Some(11e-4),
        gamma: None,
    })?;
    let grid = TransverseGrid::new(256, 256, 12.5e-6, 12.5e-6)?;
    let input =
        ImageMask::new(&image, 12.5e-6, AmplitudeMapping::SquareRoot)?.to_field(&grid, 2.0)?;
    let z = 2.0 * optics.rayleigh_length(feature);

    let out_dir = PathBuf::from("target/eit_letters");
    std::fs::create_dir_all(&out_dir).map_err(|e| slowlight::Error::io(&out_dir, e))?;
    heatmap(&input).write(&out_dir.join("input.pgm"))?;
    for (name, mode) in [
        ("free_space", PropagationMode::FreeSpace),
        ("eit", PropagationMode::Eit { medium }),
    ] {
        let out = Propagator::new(mode, optics, &grid).propagate_referenced(&input, z)?;
        heatmap(&out.field).write(&out_dir.join(format!("{name}.pgm")))?;
        println!(
            "{name:>10}: fidelity {:.4}",
            image_fidelity(&input, &out.field)?
        );
    }
    println!("heatmaps in {}", out_dir.display());
    Ok(())
}
