//! Independent reference implementations for the integration tests:
//! direct (non-FFT) DFTs and the susceptibility in real arithmetic.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Susceptibility via `a = Γ + Dk²`: returns `(Re χ, Im χ)`.
pub fn chi_oracle(alpha: f64, gp: f64, g: f64, d: f64, delta: f64, k_sq: f64) -> (f64, f64) {
    let a = g + d * k_sq;
    let den = a * a + delta * delta;
    (alpha * gp * delta / den, alpha - alpha * gp * a / den)
}

/// Plain-tuple complex arithmetic keeps this module independent of the
/// library's complex type.
pub type C = (f64, f64);

fn mul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

/// Direct 1D DFT with sign `sign` on a strided line, unitary scaling.
fn dft_line(line: &[C], sign: f64) -> Vec<C> {
    let n = line.len();
    let twiddles: Vec<C> = (0..n)
        .map(|m| {
            let t = sign * 2.0 * PI * m as f64 / n as f64;
            (t.cos(), t.sin())
        })
        .collect();
    let norm = 1.0 / (n as f64).sqrt();
    (0..n)
        .map(|k| {
            let mut acc = (0.0, 0.0);
            for (j, v) in line.iter().enumerate() {
                let p = mul(*v, twiddles[(j * k) % n]);
                acc.0 += p.0;
                acc.1 += p.1;
            }
            (acc.0 * norm, acc.1 * norm)
        })
        .collect()
}

/// Direct separable 2D DFT, row-major `nx × ny`.
pub fn dft2(values: &[C], nx: usize, ny: usize, sign: f64) -> Vec<C> {
    let mut rows: Vec<C> = Vec::with_capacity(values.len());
    for j in 0..ny {
        rows.extend(dft_line(&values[j * nx..(j + 1) * nx], sign));
    }
    let mut out = vec![(0.0, 0.0); values.len()];
    for i in 0..nx {
        let col: Vec<C> = (0..ny).map(|j| rows[j * nx + i]).collect();
        for (j, v) in dft_line(&col, sign).into_iter().enumerate() {
            out[j * nx + i] = v;
        }
    }
    out
}

/// Angular frequency of DFT bin `m` on `n` samples of pitch `d`.
pub fn bin_k(m: usize, n: usize, d: f64) -> f64 {
    let signed = if m < n / 2 {
        m as f64
    } else {
        m as f64 - n as f64
    };
    2.0 * PI * signed / (n as f64 * d)
}

pub struct OracleMedium {
    pub alpha: f64,
    pub gamma_p: f64,
    pub gamma: f64,
    pub diffusion: f64,
    pub delta: f64,
}

/// Propagates by direct DFTs: `Ω(k;z) = Ω(k;0) exp[i(χ − k²/(2q))z]`.
/// `medium = None` is free space.
#[allow(clippy::too_many_arguments)]
pub fn propagate_oracle(
    input: &[C],
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    q: f64,
    medium: Option<&OracleMedium>,
    z: f64,
) -> Vec<C> {
    let mut spec = dft2(input, nx, ny, -1.0);
    for j in 0..ny {
        let ky = bin_k(j, ny, dy);
        for i in 0..nx {
            let kx = bin_k(i, nx, dx);
            let k2 = kx * kx + ky * ky;
            let (re, im) = match medium {
                Some(m) => chi_oracle(m.alpha, m.gamma_p, m.gamma, m.diffusion, m.delta, k2),
                None => (0.0, 0.0),
            };
            // exp(i(re + i·im − k²/2q)z) = exp(−im z) · e^{i(re − k²/2q)z}
            let phase = (re - k2 / (2.0 * q)) * z;
            let mag = (-im * z).exp();
            let v = &mut spec[j * nx + i];
            *v = mul(*v, (mag * phase.cos(), mag * phase.sin()));
        }
    }
    dft2(&spec, nx, ny, 1.0)
}

/// Pearson correlation of peak-normalized intensities.
pub fn fidelity_oracle(a: &[C], b: &[C]) -> f64 {
    let inten = |f: &[C]| -> Vec<f64> {
        let v: Vec<f64> = f.iter().map(|c| c.0 * c.0 + c.1 * c.1).collect();
        let peak = v.iter().cloned().fold(0.0, f64::max);
        v.into_iter().map(|x| x / peak).collect()
    };
    let (x, y) = (inten(a), inten(b));
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut c, mut vx, mut vy) = (0.0, 0.0, 0.0);
    for (p, r) in x.iter().zip(&y) {
        c += (p - mx) * (r - my);
        vx += (p - mx) * (p - mx);
        vy += (r - my) * (r - my);
    }
    c / (vx * vy).sqrt()
}

/// Letters scene: 256² samples at 12.5 μm, 50 μm strokes, k₀ = π/50 μm,
/// Γ = 2Γp, D = 11 cm²/s, two Rayleigh lengths of a 50 μm waist.
pub mod letters {
    pub const N: usize = 256;
    pub const PITCH: f64 = 12.5e-6;
    pub const FEATURE: f64 = 50e-6;
    pub const STROKE_PX: usize = 4;
    pub const BLUR_PX: f64 = 2.0;
    pub const DIFFUSION: f64 = 11e-4;
    pub const GAMMA_OVER_GAMMAP: f64 = 2.0;
    pub const WAVELENGTH: f64 = 795e-9;
    pub const Z_RAYLEIGH: f64 = 2.0;

    /// Frozen from the direct-DFT reference run (`oracle_reference` test).
    pub const ORACLE_FIDELITY_EIT: f64 = 0.953979530295002;
    pub const ORACLE_FIDELITY_FREE: f64 = 0.811739028986454;
    pub const ORACLE_MARGIN: f64 = 0.142240501308549;
}
