//! Boundary conditions `Ω(r⊥; z = 0)`: Gaussian beams and raster masks.
//!
//! Waists are field 1/e radii, `Ω ∝ exp(−r²/w₀²)`, which is the convention
//! under which the Rayleigh length is `z_R = q w₀²/2`. The intensity 1/e²
//! radius is the same number.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pgm::GrayImage;
use crate::spectral::{ComplexField, Representation, TransverseGrid};

/// Minimum number of samples per waist radius.
pub const WAIST_RESOLUTION: f64 = 4.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamSpec {
    pub waist: f64,
    pub center: (f64, f64),
    pub amplitude: Complex64,
}

impl BeamSpec {
    pub fn centered(waist: f64) -> Self {
        BeamSpec {
            waist,
            center: (0.0, 0.0),
            amplitude: Complex64::new(1.0, 0.0),
        }
    }

    pub fn at(waist: f64, x: f64, y: f64) -> Self {
        BeamSpec {
            waist,
            center: (x, y),
            amplitude: Complex64::new(1.0, 0.0),
        }
    }
}

/// `count` unit-amplitude beams on the x axis, `separation` apart and
/// centered on the origin.
pub fn beam_row(count: usize, waist: f64, separation: f64) -> Vec<BeamSpec> {
    let offset = 0.5 * (count as f64 - 1.0);
    (0..count)
        .map(|i| BeamSpec::at(waist, (i as f64 - offset) * separation, 0.0))
        .collect()
}

fn check_beam(grid: &TransverseGrid, spec: &BeamSpec) -> Result<()> {
    if !(spec.waist.is_finite() && spec.waist > 0.0) {
        return Err(Error::config(
            "source.waist",
            format!("must be > 0, got {}", spec.waist),
        ));
    }
    let pitch = grid.dx().max(grid.dy());
    if spec.waist < WAIST_RESOLUTION * pitch {
        return Err(Error::config(
            "source.waist",
            format!(
                "waist {} is under-resolved: the resolution guard requires waist >= {} x pitch ({})",
                spec.waist,
                WAIST_RESOLUTION,
                WAIST_RESOLUTION * pitch
            ),
        ));
    }
    Ok(())
}

pub fn gaussian_beam(grid: &TransverseGrid, spec: &BeamSpec) -> Result<ComplexField> {
    check_beam(grid, spec)?;
    let (x0, y0) = spec.center;
    let inv_w2 = 1.0 / (spec.waist * spec.waist);
    Ok(ComplexField::from_fn(grid, |x, y| {
        let r2 = (x - x0).powi(2) + (y - y0).powi(2);
        spec.amplitude * (-r2 * inv_w2).exp()
    }))
}

/// Pointwise sum of Gaussian beams.
pub fn composite_beams(grid: &TransverseGrid, specs: &[BeamSpec]) -> Result<ComplexField> {
    let (first, rest) = specs
        .split_first()
        .ok_or_else(|| Error::config("source.beams", "beam list is empty"))?;
    let mut field = gaussian_beam(grid, first)?;
    for spec in rest {
        let beam = gaussian_beam(grid, spec)?;
        field
            .values_mut()
            .iter_mut()
            .zip(beam.values())
            .for_each(|(a, b)| *a += b);
    }
    Ok(field)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeMapping {
    /// Amplitude proportional to gray level.
    Linear,
    /// Amplitude proportional to √gray, so intensity follows the gray level.
    #[default]
    SquareRoot,
}

impl AmplitudeMapping {
    fn apply(self, gray: f64) -> f64 {
        match self {
            AmplitudeMapping::Linear => gray,
            AmplitudeMapping::SquareRoot => gray.sqrt(),
        }
    }
}

/// Grayscale amplitude mask with a physical pixel pitch.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageMask {
    width: usize,
    height: usize,
    /// Gray levels in [0, 1], row-major, top row first.
    levels: Vec<f64>,
    pitch: f64,
    mode: AmplitudeMapping,
}

impl ImageMask {
    pub fn new(image: &GrayImage, pitch: f64, mode: AmplitudeMapping) -> Result<Self> {
        if !(pitch.is_finite() && pitch > 0.0) {
            return Err(Error::config(
                "source.image.pitch",
                format!("must be > 0, got {pitch}"),
            ));
        }
        let levels = image
            .pixels
            .iter()
            .map(|&p| p as f64 / image.maxval as f64)
            .collect();
        Ok(ImageMask {
            width: image.width,
            height: image.height,
            levels,
            pitch,
            mode,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    /// Embeds the mask at the grid center with zero phase. Each pixel covers
    /// an integer block of grid samples; the pixel pitch must be a whole
    /// multiple of the grid pitch. `blur_px` is the standard deviation of an
    /// optional Gaussian pre-blur in image pixels (0 disables it).
    pub fn to_field(&self, grid: &TransverseGrid, blur_px: f64) -> Result<ComplexField> {
        let block = |d: f64, key: &str| -> Result<usize> {
            let m = (self.pitch / d).round();
            if m < 1.0 || (m * d - self.pitch).abs() > 1e-9 * self.pitch {
                return Err(Error::config(
                    key,
                    format!(
                        "image pitch {} is not a whole multiple of the grid pitch {d}",
                        self.pitch
                    ),
                ));
            }
            Ok(m as usize)
        };
        let mx = block(grid.dx(), "source.image.pitch")?;
        let my = block(grid.dy(), "source.image.pitch")?;
        let (w, h) = (self.width * mx, self.height * my);
        if w > grid.nx() || h > grid.ny() {
            return Err(Error::config(
                "source.image",
                format!(
                    "image spans {w}x{h} samples but the grid is {}x{}",
                    grid.nx(),
                    grid.ny()
                ),
            ));
        }
        let (ox, oy) = ((grid.nx() - w) / 2, (grid.ny() - h) / 2);
        let mut amp = vec![0.0; grid.len()];
        for py in 0..self.height {
            for px in 0..self.width {
                let a = self.mode.apply(self.levels[py * self.width + px]);
                for sy in 0..my {
                    let row = (oy + py * my + sy) * grid.nx();
                    for sx in 0..mx {
                        amp[row + ox + px * mx + sx] = a;
                    }
                }
            }
        }
        if blur_px > 0.0 {
            gaussian_blur(
                &mut amp,
                grid.nx(),
                grid.ny(),
                blur_px * mx as f64,
                blur_px * my as f64,
            );
        }
        let values = amp.into_iter().map(|a| Complex64::new(a, 0.0)).collect();
        ComplexField::from_values(grid, values, Representation::Real)
    }
}

/// Reads a binary PGM and embeds it on `grid`.
pub fn load_raster(
    path: &Path,
    grid: &TransverseGrid,
    pitch: f64,
    mode: AmplitudeMapping,
    blur_px: f64,
) -> Result<ComplexField> {
    let image = GrayImage::read(path)?;
    ImageMask::new(&image, pitch, mode)?.to_field(grid, blur_px)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as isize;
    let mut k: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp())
        .collect();
    let sum: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= sum);
    k
}

/// Separable Gaussian blur with zero boundary.
fn gaussian_blur(data: &mut [f64], nx: usize, ny: usize, sigma_x: f64, sigma_y: f64) {
    let convolve = |src: &[f64], n: usize, stride: usize, count: usize, step: usize, k: &[f64]| {
        let r = (k.len() / 2) as isize;
        let mut out = vec![0.0; src.len()];
        for line in 0..count {
            let base = line * step;
            for i in 0..n as isize {
                let mut acc = 0.0;
                for (t, w) in k.iter().enumerate() {
                    let s = i + t as isize - r;
                    if s >= 0 && (s as usize) < n {
                        acc += w * src[base + s as usize * stride];
                    }
                }
                out[base + i as usize * stride] = acc;
            }
        }
        out
    };
    let kx = gaussian_kernel(sigma_x);
    let ky = gaussian_kernel(sigma_y);
    let rows = convolve(data, nx, 1, ny, nx, &kx);
    let cols = convolve(&rows, ny, nx, nx, 1, &ky);
    data.copy_from_slice(&cols);
}

/// Fraction of spectral power at `|k⊥| > threshold_ratio · k0`.
pub fn band_limit_report(field: &ComplexField, k0: f64, threshold_ratio: f64) -> Result<f64> {
    let spectrum = match field.representation() {
        Representation::Real => field.to_spectrum()?,
        Representation::Spectral => field.clone(),
    };
    let cutoff_sq = (threshold_ratio * k0).powi(2);
    let total = spectrum.sum_sq();
    if total == 0.0 {
        return Ok(0.0);
    }
    let outside: f64 = spectrum
        .grid()
        .kperp_sq()
        .iter()
        .zip(spectrum.values())
        .filter(|(k2, _)| **k2 > cutoff_sq)
        .map(|(_, v)| v.norm_sqr())
        .sum();
    Ok(outside / total)
}

/// Block letters "EIT" with strokes `stroke` pixels wide, white on black,
/// with a one-stroke margin. The image is `13·stroke × 7·stroke` pixels.
pub fn eit_letters(stroke: usize) -> GrayImage {
    let s = stroke.max(1);
    let (w, h) = (13 * s, 7 * s);
    let mut pixels = vec![0u8; w * h];
    let mut fill = |cx: usize, cy: usize, cw: usize, ch: usize| {
        for y in cy * s..(cy + ch) * s {
            for x in cx * s..(cx + cw) * s {
                pixels[y * w + x] = 255;
            }
        }
    };
    // cells are stroke-sized; letters occupy rows 1..6
    // E at columns 1..4
    fill(1, 1, 1, 5);
    fill(1, 1, 3, 1);
    fill(1, 3, 3, 1);
    fill(1, 5, 3, 1);
    // I at columns 5..8
    fill(6, 1, 1, 5);
    fill(5, 1, 3, 1);
    fill(5, 5, 3, 1);
    // T at columns 9..12
    fill(9, 1, 3, 1);
    fill(10, 1, 1, 5);
    GrayImage::new(w, h, pixels)
}
