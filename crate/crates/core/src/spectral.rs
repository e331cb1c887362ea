//! Sampled transverse plane, its conjugate momentum grid, and the unitary
//! 2D transform between them.
//!
//! Forward transform: `F[k] = (nx·ny)^{-1/2} Σ_r f[r] e^{−i k·r}`, inverse with
//! the opposite sign and the same prefactor, so `Σ|f|² = Σ|F|²` holds in both
//! representations. Fields are row-major with `ny` rows of `nx` samples; `x`
//! varies fastest.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TransverseGrid {
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    kx: Vec<f64>,
    ky: Vec<f64>,
}

fn k_axis(n: usize, d: f64) -> Vec<f64> {
    let dk = 2.0 * PI / (n as f64 * d);
    (0..n)
        .map(|i| {
            if i < n / 2 {
                i as f64 * dk
            } else {
                (i as f64 - n as f64) * dk
            }
        })
        .collect()
}

impl TransverseGrid {
    pub const MIN_SAMPLES: usize = 16;

    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64) -> Result<Self> {
        for (key, n) in [("grid.nx", nx), ("grid.ny", ny)] {
            if !n.is_power_of_two() || n < Self::MIN_SAMPLES {
                return Err(Error::config(
                    key,
                    format!("must be a power of two >= {}, got {n}", Self::MIN_SAMPLES),
                ));
            }
        }
        for (key, d) in [("grid.dx", dx), ("grid.dy", dy)] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::config(key, format!("pitch must be > 0, got {d}")));
            }
        }
        Ok(TransverseGrid {
            nx,
            ny,
            dx,
            dy,
            kx: k_axis(nx, dx),
            ky: k_axis(ny, dy),
        })
    }

    /// Square grid of `n × n` samples spanning `window` per axis.
    pub fn square(n: usize, window: f64) -> Result<Self> {
        let pitch = window / n as f64;
        TransverseGrid::new(n, n, pitch, pitch)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Angular spatial frequencies along x in transform order.
    pub fn kx(&self) -> &[f64] {
        &self.kx
    }

    pub fn ky(&self) -> &[f64] {
        &self.ky
    }

    pub fn dkx(&self) -> f64 {
        2.0 * PI / (self.nx as f64 * self.dx)
    }

    pub fn dky(&self) -> f64 {
        2.0 * PI / (self.ny as f64 * self.dy)
    }

    /// Sample coordinate along x; the grid is centered, with `x = 0` at
    /// column `nx/2`.
    pub fn x(&self, i: usize) -> f64 {
        (i as f64 - (self.nx / 2) as f64) * self.dx
    }

    pub fn y(&self, j: usize) -> f64 {
        (j as f64 - (self.ny / 2) as f64) * self.dy
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn ys(&self) -> Vec<f64> {
        (0..self.ny).map(|j| self.y(j)).collect()
    }

    /// `k⊥²` at every spectral bin, row-major.
    pub fn kperp_sq(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len());
        for &ky in &self.ky {
            out.extend(self.kx.iter().map(|&kx| kx * kx + ky * ky));
        }
        out
    }

    pub fn same_shape(&self, other: &TransverseGrid) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.dx == other.dx && self.dy == other.dy
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    Real,
    Spectral,
}

/// Complex envelope on a grid. The optical carrier is never represented.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    grid: TransverseGrid,
    values: Vec<Complex64>,
    representation: Representation,
}

impl ComplexField {
    pub fn zeros(grid: &TransverseGrid, representation: Representation) -> Self {
        ComplexField {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid: grid.clone(),
            representation,
        }
    }

    pub fn from_values(
        grid: &TransverseGrid,
        values: Vec<Complex64>,
        representation: Representation,
    ) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Usage(format!(
                "field has {} values but the grid holds {}",
                values.len(),
                grid.len()
            )));
        }
        Ok(ComplexField {
            grid: grid.clone(),
            values,
            representation,
        })
    }

    /// Real-space field sampled from `f(x, y)`.
    pub fn from_fn(grid: &TransverseGrid, mut f: impl FnMut(f64, f64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            let y = grid.y(j);
            values.extend((0..grid.nx).map(|i| f(grid.x(i), y)));
        }
        ComplexField {
            grid: grid.clone(),
            values,
            representation: Representation::Real,
        }
    }

    pub fn grid(&self) -> &TransverseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `Σ|values|²` without the area element.
    pub fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn scale(&mut self, c: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self + other`, both on the same grid and representation.
    pub fn add(&self, other: &ComplexField) -> Result<Self> {
        self.check_compatible(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(ComplexField {
            grid: self.grid.clone(),
            values,
            representation: self.representation,
        })
    }

    pub fn check_compatible(&self, other: &ComplexField) -> Result<()> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::Usage("fields live on different grids".into()));
        }
        if self.representation != other.representation {
            return Err(Error::Usage(
                "fields are in different representations".into(),
            ));
        }
        Ok(())
    }

    fn expect(&self, rep: Representation) -> Result<()> {
        if self.representation != rep {
            return Err(Error::Usage(format!(
                "expected a {rep:?} field, got {:?}",
                self.representation
            )));
        }
        Ok(())
    }

    pub fn to_spectrum(&self) -> Result<ComplexField> {
        self.clone().into_spectrum()
    }

    pub fn into_spectrum(mut self) -> Result<ComplexField> {
        self.expect(Representation::Real)?;
        fft2(
            &mut self.values,
            self.grid.nx,
            self.grid.ny,
            FftDirection::Forward,
        );
        self.representation = Representation::Spectral;
        Ok(self)
    }

    pub fn to_real(&self) -> Result<ComplexField> {
        self.clone().into_real()
    }

    pub fn into_real(mut self) -> Result<ComplexField> {
        self.expect(Representation::Spectral)?;
        fft2(
            &mut self.values,
            self.grid.nx,
            self.grid.ny,
            FftDirection::Inverse,
        );
        self.representation = Representation::Real;
        Ok(self)
    }

    /// Writes `<base>.bin` (little-endian f32, interleaved re/im, row-major,
    /// no header) and `<base>.json` (the sidecar). Returns both paths.
    pub fn write_raw(&self, base: &Path, z: f64) -> Result<(PathBuf, PathBuf)> {
        let bin = base.with_extension("bin");
        let json = base.with_extension("json");
        fs::write(&bin, self.raw_bytes()).map_err(|e| Error::io(&bin, e))?;
        let sidecar = RawSidecar {
            nx: self.grid.nx,
            ny: self.grid.ny,
            dx: self.grid.dx,
            dy: self.grid.dy,
            z,
            units: "m".into(),
            representation: self.representation,
        };
        let text =
            serde_json::to_string_pretty(&sidecar).map_err(|e| Error::Serialize(e.to_string()))?;
        fs::write(&json, text).map_err(|e| Error::io(&json, e))?;
        Ok((bin, json))
    }

    /// Body of the raw dump format.
    pub fn raw_bytes(&self) -> Vec<u8> {
        let mut bytes = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            bytes.extend_from_slice(&(v.re as f32).to_le_bytes());
            bytes.extend_from_slice(&(v.im as f32).to_le_bytes());
        }
        bytes
    }

    /// Reads a raw dump written by [`ComplexField::write_raw`]; `base` may
    /// name either file or neither extension. Returns the field and its `z`.
    pub fn read_raw(base: &Path) -> Result<(ComplexField, f64)> {
        let bin = base.with_extension("bin");
        let json = base.with_extension("json");
        let text = fs::read_to_string(&json).map_err(|e| Error::io(&json, e))?;
        let sidecar: RawSidecar = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: json.clone(),
            message: e.to_string(),
        })?;
        if sidecar.units != "m" {
            return Err(Error::Format {
                path: json,
                message: format!("unsupported units {:?}", sidecar.units),
            });
        }
        let grid = TransverseGrid::new(sidecar.nx, sidecar.ny, sidecar.dx, sidecar.dy)?;
        let bytes = fs::read(&bin).map_err(|e| Error::io(&bin, e))?;
        if bytes.len() != grid.len() * 8 {
            return Err(Error::Format {
                path: bin,
                message: format!("expected {} bytes, found {}", grid.len() * 8, bytes.len()),
            });
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| {
                let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
                let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
                Complex64::new(re as f64, im as f64)
            })
            .collect();
        Ok((
            ComplexField {
                grid,
                values,
                representation: sidecar.representation,
            },
            sidecar.z,
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawSidecar {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub z: f64,
    pub units: String,
    pub representation: Representation,
}

type PlanCache = Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>;

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<PlanCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (n, direction == FftDirection::Forward);
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard
        .entry(key)
        .or_insert_with(|| FftPlanner::new().plan_fft(n, direction))
        .clone()
}

/// Unitary 2D transform in place. Rows and columns are transformed
/// independently, so the result does not depend on the thread count.
fn fft2(values: &mut [Complex64], nx: usize, ny: usize, direction: FftDirection) {
    let row_plan = plan(nx, direction);
    let col_plan = plan(ny, direction);

    values
        .par_chunks_mut(nx)
        .for_each(|row| row_plan.process(row));

    let mut transposed = vec![Complex64::new(0.0, 0.0); nx * ny];
    transposed
        .par_chunks_mut(ny)
        .enumerate()
        .for_each(|(i, col)| {
            for (j, c) in col.iter_mut().enumerate() {
                *c = values[j * nx + i];
            }
            col_plan.process(col);
        });

    let norm = 1.0 / ((nx * ny) as f64).sqrt();
    values.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
        for (i, v) in row.iter_mut().enumerate() {
            *v = transposed[i * ny + j] * norm;
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &TransverseGrid, seed: u64) -> ComplexField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        ComplexField::from_values(grid, values, Representation::Real).unwrap()
    }

    fn rel_diff(a: &ComplexField, b: &ComplexField) -> f64 {
        let num: f64 = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum();
        (num / b.sum_sq()).sqrt()
    }

    #[test]
    fn grid_axes() {
        let g = TransverseGrid::new(16, 32, 1.0, 0.5).unwrap();
        assert!((g.dkx() - 2.0 * PI / 16.0).abs() < 1e-15);
        assert!((g.kx()[1] - 2.0 * PI / 16.0).abs() < 1e-15);
        assert!((g.dkx() * 16.0 * 1.0 - 2.0 * PI).abs() < 1e-14);
        assert_eq!(g.kx()[0], 0.0);
        assert!(g.kx()[8] < 0.0);
        assert!((g.kx()[8].abs() - PI).abs() < 1e-14);

        let g = TransverseGrid::new(512, 512, 12.5e-6, 12.5e-6).unwrap();
        let kmax = g.kx().iter().fold(0.0f64, |m, k| m.max(k.abs()));
        assert!((kmax - PI / 12.5e-6).abs() < 1e-6);
        assert!((kmax / (PI * 1e4) - 8.0).abs() < 1e-12);

        let a = TransverseGrid::new(64, 64, 3e-6, 3e-6).unwrap();
        let b = TransverseGrid::new(64, 64, 3e-6, 3e-6).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn grid_validation() {
        assert!(TransverseGrid::new(48, 64, 1.0, 1.0).is_err());
        assert!(TransverseGrid::new(8, 8, 1.0, 1.0).is_err());
        assert!(TransverseGrid::new(64, 64, 0.0, 1.0).is_err());
        assert!(TransverseGrid::new(64, 64, 1.0, -1.0).is_err());
    }

    #[test]
    fn uniform_field_maps_to_dc() {
        let g = TransverseGrid::new(32, 16, 1.0, 1.0).unwrap();
        let f = ComplexField::from_fn(&g, |_, _| Complex64::new(2.0, 0.0));
        let s = f.to_spectrum().unwrap();
        let total = s.sum_sq();
        assert!((s.values()[0].norm_sqr() - total).abs() < 1e-12 * total);
        assert!((s.values()[0].re - 2.0 * (512f64).sqrt()).abs() < 1e-12);

        let mut dc = ComplexField::zeros(&g, Representation::Spectral);
        dc.values_mut()[0] = Complex64::new(3.0, 0.0);
        let r = dc.to_real().unwrap();
        for v in r.values() {
            assert!((v - Complex64::new(3.0 / (512f64).sqrt(), 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn gaussian_spectrum_shape() {
        let w0 = 1.0;
        let g = TransverseGrid::square(512, 16.0 * w0).unwrap();
        let f = ComplexField::from_fn(&g, |x, y| {
            Complex64::new((-(x * x + y * y) / (w0 * w0)).exp(), 0.0)
        });
        let s = f.to_spectrum().unwrap();
        let i = (2.0 / w0 / g.dkx()).round() as usize;
        let k = g.kx()[i];
        let ratio = s.at(i, 0).norm() / s.at(0, 0).norm();
        let expected = (-k * k * w0 * w0 / 4.0).exp();
        assert!(
            (ratio / expected - 1.0).abs() < 0.01,
            "{ratio} vs {expected}"
        );
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = TransverseGrid::new(64, 128, 1.0, 2.0).unwrap();
        let f = random_field(&g, 7);
        let s = f.to_spectrum().unwrap();
        assert!((s.sum_sq() - f.sum_sq()).abs() < 1e-12 * f.sum_sq());
        let back = s.to_real().unwrap();
        assert!(rel_diff(&back, &f) < 1e-12);
    }

    #[test]
    fn linearity() {
        let g = TransverseGrid::new(32, 32, 1.0, 1.0).unwrap();
        let f = random_field(&g, 1).to_spectrum().unwrap();
        let h = random_field(&g, 2).to_spectrum().unwrap();
        let (a, b) = (Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.5));
        let lhs = f.scaled(a).add(&h.scaled(b)).unwrap().to_real().unwrap();
        let rhs = f
            .to_real()
            .unwrap()
            .scaled(a)
            .add(&h.to_real().unwrap().scaled(b))
            .unwrap();
        assert!(rel_diff(&lhs, &rhs) < 1e-13);
    }

    #[test]
    fn shift_theorem() {
        let g = TransverseGrid::new(32, 16, 0.7, 1.3).unwrap();
        let f = random_field(&g, 3);
        // shifted[i] = f[i - 1] (periodic): translation by +dx
        let mut shifted = ComplexField::zeros(&g, Representation::Real);
        for j in 0..16 {
            for i in 0..32 {
                shifted.values_mut()[j * 32 + i] = f.at((i + 31) % 32, j);
            }
        }
        let a = f.to_spectrum().unwrap();
        let b = shifted.to_spectrum().unwrap();
        for j in 0..16 {
            for i in 0..32 {
                let ramp = Complex64::from_polar(1.0, -g.kx()[i] * g.dx());
                assert!((b.at(i, j) - a.at(i, j) * ramp).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn real_input_has_hermitian_spectrum() {
        let g = TransverseGrid::new(32, 64, 1.0, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = ComplexField::from_fn(&g, |_, _| Complex64::new(rng_value(&mut rng), 0.0));
        let s = f.to_spectrum().unwrap();
        for j in 0..64 {
            for i in 0..32 {
                let mirror = s.at((32 - i) % 32, (64 - j) % 64);
                assert!((s.at(i, j) - mirror.conj()).norm() < 1e-12);
            }
        }
    }

    fn rng_value(rng: &mut ChaCha8Rng) -> f64 {
        rng.gen_range(-1.0..1.0)
    }

    #[test]
    fn representation_misuse_is_an_error() {
        let g = TransverseGrid::new(16, 16, 1.0, 1.0).unwrap();
        let f = ComplexField::zeros(&g, Representation::Real);
        assert!(matches!(f.to_real(), Err(Error::Usage(_))));
        let s = f.to_spectrum().unwrap();
        assert!(matches!(s.to_spectrum(), Err(Error::Usage(_))));
    }

    #[test]
    fn raw_dump_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let g = TransverseGrid::new(16, 32, 2e-6, 3e-6).unwrap();
        let f = random_field(&g, 5);
        let (bin, json) = f.write_raw(&dir.path().join("slice"), 0.25).unwrap();
        let bytes = std::fs::read(&bin).unwrap();
        assert_eq!(bytes.len(), 16 * 32 * 8);
        let first_re = f32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]);
        assert_eq!(first_re, f.values()[0].re as f32);
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(sidecar["nx"], 16);
        assert_eq!(sidecar["representation"], "real");
        assert_eq!(sidecar["units"], "m");

        let (back, z) = ComplexField::read_raw(&dir.path().join("slice")).unwrap();
        assert_eq!(z, 0.25);
        assert_eq!(back.representation(), Representation::Real);
        for (a, b) in back.values().iter().zip(f.values()) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn transforms_identical_across_thread_counts() {
        let g = TransverseGrid::new(128, 64, 1.0, 1.0).unwrap();
        let f = random_field(&g, 9);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| f.to_spectrum().unwrap())
        };
        let one = run(1);
        assert_eq!(one, run(4));
        assert_eq!(one, run(16));
    }
}
