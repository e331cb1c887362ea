//! Field measurements: power, centroid, second-moment widths, per-beam
//! widths, cross-sections and image fidelity.
//!
//! Widths use the 2σ convention on the intensity distribution, so a Gaussian
//! `exp(−r²/w₀²)` reports exactly `w₀`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ComplexField;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

/// `Σ|Ω|² dx dy`.
pub fn total_power(field: &ComplexField) -> f64 {
    field.sum_sq() * field.grid().dx() * field.grid().dy()
}

struct Moments {
    weight: f64,
    mean_x: f64,
    mean_y: f64,
    var_x: f64,
    var_y: f64,
}

/// Weight of a sample at offset `d` from a window center: 1 inside, 1/2 on
/// the edge (shared with a touching window), 0 outside.
fn window_weight(d: f64, half: f64, pitch: f64) -> f64 {
    let edge = (d.abs() - half) / pitch;
    if edge < -1e-9 {
        1.0
    } else if edge <= 1e-9 {
        0.5
    } else {
        0.0
    }
}

/// Intensity moments, optionally restricted to the window
/// `[cx, cy, half_x, half_y]`.
fn moments(field: &ComplexField, window: Option<[f64; 4]>) -> Result<Moments> {
    let grid = field.grid();
    let xs = grid.xs();
    let ys = grid.ys();
    let wx: Vec<f64> = match window {
        Some(b) => xs
            .iter()
            .map(|&x| window_weight(x - b[0], b[2], grid.dx()))
            .collect(),
        None => vec![1.0; xs.len()],
    };
    let wy: Vec<f64> = match window {
        Some(b) => ys
            .iter()
            .map(|&y| window_weight(y - b[1], b[3], grid.dy()))
            .collect(),
        None => vec![1.0; ys.len()],
    };
    let (mut w, mut sx, mut sy) = (0.0, 0.0, 0.0);
    for (j, &y) in ys.iter().enumerate() {
        if wy[j] == 0.0 {
            continue;
        }
        let row = &field.values()[j * grid.nx()..(j + 1) * grid.nx()];
        for (i, (&x, v)) in xs.iter().zip(row).enumerate() {
            let p = v.norm_sqr() * wx[i] * wy[j];
            w += p;
            sx += p * x;
            sy += p * y;
        }
    }
    if !(w > 0.0) {
        return Err(Error::Domain(
            "field has zero power; moments are undefined".into(),
        ));
    }
    let (mx, my) = (sx / w, sy / w);
    let (mut vx, mut vy) = (0.0, 0.0);
    for (j, &y) in ys.iter().enumerate() {
        if wy[j] == 0.0 {
            continue;
        }
        let row = &field.values()[j * grid.nx()..(j + 1) * grid.nx()];
        for (i, (&x, v)) in xs.iter().zip(row).enumerate() {
            let p = v.norm_sqr() * wx[i] * wy[j];
            vx += p * (x - mx) * (x - mx);
            vy += p * (y - my) * (y - my);
        }
    }
    Ok(Moments {
        weight: w,
        mean_x: mx,
        mean_y: my,
        var_x: vx / w,
        var_y: vy / w,
    })
}

/// Intensity-weighted centroid.
pub fn centroid(field: &ComplexField) -> Result<(f64, f64)> {
    let m = moments(field, None)?;
    Ok((m.mean_x, m.mean_y))
}

/// `2·sqrt(⟨(x − ⟨x⟩)²⟩)` with intensity weighting.
pub fn second_moment_width(field: &ComplexField, axis: Axis) -> Result<f64> {
    let m = moments(field, None)?;
    Ok(2.0
        * match axis {
            Axis::X => m.var_x,
            Axis::Y => m.var_y,
        }
        .sqrt())
}

/// Free-space Gaussian width `w₀·sqrt(1 + z²/z_R²)` with `z_R = q w₀²/2`.
pub fn gaussian_width_law(w0: f64, q: f64, z: f64) -> f64 {
    let z_r = 0.5 * q * w0 * w0;
    w0 * (1.0 + (z / z_r).powi(2)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamWidth {
    /// Nominal window center.
    pub center: (f64, f64),
    /// Measured intensity centroid inside the window.
    pub centroid: (f64, f64),
    pub width_x: f64,
    pub width_y: f64,
}

/// Second-moment widths inside square windows of half-width `window`
/// around each center. Windows must not overlap.
pub fn per_beam_widths(
    field: &ComplexField,
    centers: &[(f64, f64)],
    window: f64,
) -> Result<Vec<BeamWidth>> {
    if !(window > 0.0) {
        return Err(Error::config("diagnostics.window", "window must be > 0"));
    }
    for (a, ca) in centers.iter().enumerate() {
        for cb in &centers[a + 1..] {
            if (ca.0 - cb.0).abs() < 2.0 * window && (ca.1 - cb.1).abs() < 2.0 * window {
                return Err(Error::config(
                    "diagnostics.window",
                    format!("windows of half-width {window} around {ca:?} and {cb:?} overlap"),
                ));
            }
        }
    }
    centers
        .iter()
        .map(|&(cx, cy)| {
            let m = moments(field, Some([cx, cy, window, window]))?;
            Ok(BeamWidth {
                center: (cx, cy),
                centroid: (m.mean_x, m.mean_y),
                width_x: 2.0 * m.var_x.sqrt(),
                width_y: 2.0 * m.var_y.sqrt(),
            })
        })
        .collect()
}

/// Default per-beam window half-width: half the smallest center spacing, or
/// the whole grid for a single beam.
pub fn default_beam_window(field: &ComplexField, centers: &[(f64, f64)]) -> f64 {
    let mut min_sep = f64::INFINITY;
    for (a, ca) in centers.iter().enumerate() {
        for cb in &centers[a + 1..] {
            let sep = (ca.0 - cb.0).abs().max((ca.1 - cb.1).abs());
            min_sep = min_sep.min(sep);
        }
    }
    if min_sep.is_finite() {
        0.5 * min_sep
    } else {
        let g = field.grid();
        (g.nx() as f64 * g.dx()).max(g.ny() as f64 * g.dy())
    }
}

/// Intensity along the `y = 0` row (`Axis::X`) or `x = 0` column (`Axis::Y`),
/// optionally scaled to unit maximum.
pub fn cross_section(field: &ComplexField, axis: Axis, normalize: bool) -> Vec<f64> {
    let g = field.grid();
    let mut profile: Vec<f64> = match axis {
        Axis::X => {
            let j = g.ny() / 2;
            field.values()[j * g.nx()..(j + 1) * g.nx()]
                .iter()
                .map(|v| v.norm_sqr())
                .collect()
        }
        Axis::Y => {
            let i = g.nx() / 2;
            (0..g.ny()).map(|j| field.at(i, j).norm_sqr()).collect()
        }
    };
    if normalize {
        let peak = profile.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            profile.iter_mut().for_each(|p| *p /= peak);
        }
    }
    profile
}

/// Zero-lag normalized cross-correlation (Pearson) of the peak-normalized
/// intensities of two fields on the same grid.
pub fn image_fidelity(input: &ComplexField, output: &ComplexField) -> Result<f64> {
    if !input.grid().same_shape(output.grid()) {
        return Err(Error::Usage(
            "fidelity needs fields on the same grid".into(),
        ));
    }
    let normalized = |f: &ComplexField| -> Result<Vec<f64>> {
        let i = f.intensity();
        let peak = i.iter().cloned().fold(0.0, f64::max);
        if !(peak > 0.0) {
            return Err(Error::Domain("fidelity of a zero-power field".into()));
        }
        Ok(i.into_iter().map(|v| v / peak).collect())
    };
    let a = normalized(input)?;
    let b = normalized(output)?;
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        let (dx, dy) = (x - ma, y - mb);
        cov += dx * dy;
        va += dx * dx;
        vb += dy * dy;
    }
    if va == 0.0 || vb == 0.0 {
        // a uniform intensity only correlates with another uniform one
        return Ok(if va == vb { 1.0 } else { 0.0 });
    }
    Ok((cov / (va * vb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub z: f64,
    pub total_power: f64,
    pub centroid: (f64, f64),
    pub width_x: f64,
    pub width_y: f64,
    pub per_beam: Vec<BeamWidth>,
    /// `P(z)/P(0)`.
    pub transmission: f64,
    /// `ln(P(z)/P(0))`, finite even when the transmission underflows.
    pub log_transmission: f64,
}

impl DiagnosticsReport {
    /// Measures `field`, whose physical intensity is `|field|²·exp(log_power_scale)`,
    /// against an input power `input_power`.
    pub fn measure(
        field: &ComplexField,
        z: f64,
        log_power_scale: f64,
        input_power: f64,
        centers: &[(f64, f64)],
        window: f64,
    ) -> Result<Self> {
        let m = moments(field, None)?;
        let raw = m.weight * field.grid().dx() * field.grid().dy();
        let log_transmission = raw.ln() + log_power_scale - input_power.ln();
        let per_beam = if centers.is_empty() {
            Vec::new()
        } else {
            per_beam_widths(field, centers, window)?
        };
        Ok(DiagnosticsReport {
            z,
            total_power: raw * log_power_scale.exp(),
            centroid: (m.mean_x, m.mean_y),
            width_x: 2.0 * m.var_x.sqrt(),
            width_y: 2.0 * m.var_y.sqrt(),
            per_beam,
            transmission: log_transmission.exp(),
            log_transmission,
        })
    }

    /// Mean per-beam x width (or the overall x width without beams).
    pub fn mean_beam_width_x(&self) -> f64 {
        if self.per_beam.is_empty() {
            return self.width_x;
        }
        self.per_beam.iter().map(|b| b.width_x).sum::<f64>() / self.per_beam.len() as f64
    }
}
