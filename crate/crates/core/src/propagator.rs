//! Exact propagation of the paraxial envelope in transverse-momentum space.
//!
//! Each spectral component evolves independently,
//! `Ω(k⊥; z) = Ω(k⊥; 0) · exp[i(χ(k⊥²) − k⊥²/(2q)) z]`, so a single
//! multiplication reaches any `z`. Slices are always computed from `z = 0`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::medium::{MediumParams, OpticalParams};
use crate::spectral::{ComplexField, Representation, TransverseGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PropagationMode {
    FreeSpace,
    Eit {
        medium: MediumParams,
    },
    /// k-independent susceptibility (1/m), for testing.
    Uniform {
        chi: Complex64,
    },
}

impl PropagationMode {
    pub fn chi(&self, kperp_sq: f64) -> Complex64 {
        match self {
            PropagationMode::FreeSpace => Complex64::new(0.0, 0.0),
            PropagationMode::Eit { medium } => medium.chi(kperp_sq),
            PropagationMode::Uniform { chi } => *chi,
        }
    }

    /// Susceptibility of the `k⊥ = 0` component.
    pub fn background_chi(&self) -> Complex64 {
        self.chi(0.0)
    }

    pub fn label(&self) -> &'static str {
        match self {
            PropagationMode::FreeSpace => "free_space",
            PropagationMode::Eit { .. } => "eit",
            PropagationMode::Uniform { .. } => "uniform",
        }
    }
}

/// Recorded slice positions, nonnegative and strictly increasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationPlan {
    positions: Vec<f64>,
}

impl PropagationPlan {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::config("run.slices", "plan has no slice positions"));
        }
        if positions.iter().any(|z| !(z.is_finite() && *z >= 0.0)) {
            return Err(Error::config(
                "run.slices",
                "slice positions must be finite and >= 0",
            ));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config(
                "run.slices",
                "slice positions must be strictly increasing",
            ));
        }
        Ok(PropagationPlan { positions })
    }

    /// `z·i/count` for `i = 0..=count`.
    pub fn uniform(z: f64, count: usize) -> Result<Self> {
        if count == 0 || z <= 0.0 {
            return PropagationPlan::new(vec![z.max(0.0)]);
        }
        PropagationPlan::new((0..=count).map(|i| z * i as f64 / count as f64).collect())
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn total_distance(&self) -> f64 {
        *self.positions.last().expect("plan is nonempty")
    }
}

/// Field at `z` expressed relative to the propagated `k⊥ = 0` background:
/// the physical field is `field · exp(background)`, with
/// `background = i χ(0) z`. Keeps strongly absorbed runs representable.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferencedField {
    pub field: ComplexField,
    pub background: Complex64,
    pub z: f64,
}

impl ReferencedField {
    /// `ln` of the factor the background applies to intensities.
    pub fn log_power_scale(&self) -> f64 {
        2.0 * self.background.re
    }

    /// Physical field; may underflow to zero for large absorption.
    pub fn physical(&self) -> ComplexField {
        if self.background == Complex64::new(0.0, 0.0) {
            return self.field.clone();
        }
        self.field.scaled(self.background.exp())
    }
}

/// Propagation engine for one mode, carrier and grid. Caches `k⊥²`.
#[derive(Clone, Debug)]
pub struct Propagator {
    mode: PropagationMode,
    optics: OpticalParams,
    grid: TransverseGrid,
    kperp_sq: Vec<f64>,
}

impl Propagator {
    pub fn new(mode: PropagationMode, optics: OpticalParams, grid: &TransverseGrid) -> Self {
        Propagator {
            mode,
            optics,
            kperp_sq: grid.kperp_sq(),
            grid: grid.clone(),
        }
    }

    pub fn mode(&self) -> &PropagationMode {
        &self.mode
    }

    pub fn grid(&self) -> &TransverseGrid {
        &self.grid
    }

    /// Per-bin exponent `i(χ − χ_ref − k⊥²/(2q))`.
    fn exponents(&self, reference: Complex64) -> Vec<Complex64> {
        let half_inv_q = 0.5 / self.optics.carrier_wavenumber();
        self.kperp_sq
            .par_iter()
            .map(|&k2| {
                let chi = self.mode.chi(k2) - reference;
                Complex64::i() * (chi - k2 * half_inv_q)
            })
            .collect()
    }

    fn multiplier(&self, reference: Complex64, z: f64) -> Result<ComplexField> {
        if !(z.is_finite() && z >= 0.0) {
            return Err(Error::config(
                "run.z",
                format!("distance must be >= 0, got {z}"),
            ));
        }
        let values = self
            .exponents(reference)
            .into_par_iter()
            .map(|e| (e * z).exp())
            .collect();
        ComplexField::from_values(&self.grid, values, Representation::Spectral)
    }

    /// Spectral multiplier `exp[i(χ(k⊥²) − k⊥²/(2q)) z]`.
    pub fn transfer_function(&self, z: f64) -> Result<ComplexField> {
        self.multiplier(Complex64::new(0.0, 0.0), z)
    }

    /// Multiplier with the `k⊥ = 0` background divided out.
    pub fn relative_transfer_function(&self, z: f64) -> Result<ComplexField> {
        self.multiplier(self.mode.background_chi(), z)
    }

    fn check_input(&self, field: &ComplexField) -> Result<()> {
        if field.representation() != Representation::Real {
            return Err(Error::Usage("propagate expects a real-space field".into()));
        }
        if !field.grid().same_shape(&self.grid) {
            return Err(Error::Usage(
                "field grid does not match the propagator grid".into(),
            ));
        }
        Ok(())
    }

    fn apply(spectrum: &ComplexField, transfer: &ComplexField) -> Result<ComplexField> {
        let mut out = spectrum.clone();
        out.values_mut()
            .par_iter_mut()
            .zip(transfer.values().par_iter())
            .for_each(|(v, t)| *v *= t);
        out.into_real()
    }

    /// Field at distance `z`. `z = 0` returns the input unchanged.
    pub fn propagate(&self, field: &ComplexField, z: f64) -> Result<ComplexField> {
        self.check_input(field)?;
        let transfer = self.transfer_function(z)?;
        if z == 0.0 {
            return Ok(field.clone());
        }
        Self::apply(&field.to_spectrum()?, &transfer)
    }

    /// One output per plan position, each a single step from `z = 0`.
    pub fn propagate_slices(
        &self,
        field: &ComplexField,
        plan: &PropagationPlan,
    ) -> Result<Vec<ComplexField>> {
        self.check_input(field)?;
        let spectrum = field.to_spectrum()?;
        plan.positions()
            .iter()
            .map(|&z| {
                let transfer = self.transfer_function(z)?;
                if z == 0.0 {
                    Ok(field.clone())
                } else {
                    Self::apply(&spectrum, &transfer)
                }
            })
            .collect()
    }

    /// Like [`Propagator::propagate`], with the background factored out.
    pub fn propagate_referenced(&self, field: &ComplexField, z: f64) -> Result<ReferencedField> {
        self.check_input(field)?;
        let spectrum = field.to_spectrum()?;
        self.referenced_step(field, &spectrum, z)
    }

    pub fn propagate_slices_referenced(
        &self,
        field: &ComplexField,
        plan: &PropagationPlan,
    ) -> Result<Vec<ReferencedField>> {
        self.check_input(field)?;
        let spectrum = field.to_spectrum()?;
        plan.positions()
            .iter()
            .map(|&z| self.referenced_step(field, &spectrum, z))
            .collect()
    }

    fn referenced_step(
        &self,
        field: &ComplexField,
        spectrum: &ComplexField,
        z: f64,
    ) -> Result<ReferencedField> {
        let transfer = self.relative_transfer_function(z)?;
        let background = Complex64::i() * self.mode.background_chi() * z;
        let field = if z == 0.0 {
            field.clone()
        } else {
            Self::apply(spectrum, &transfer)?
        };
        Ok(ReferencedField {
            field,
            background,
            z,
        })
    }
}
