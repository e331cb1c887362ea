//! Momentum-space simulation of paraxial slow light in an EIT vapor.
//!
//! The probe envelope is advanced in transverse-momentum space with the exact
//! solution of the paraxial propagation equation,
//! `Ω(k⊥; z) = Ω(k⊥; 0) · exp[i(χ(Δ, k⊥) − k⊥²/(2q)) z]`,
//! where the susceptibility carries the Dicke-narrowed, motion-induced
//! `k⊥` dependence `χ = iα(1 − Γp/(Γ + Dk⊥² − iΔ))`. With a negative Raman
//! detuning the quadratic part of `Re χ` cancels free-space diffraction for
//! any paraxial image.
//!
//! Modules, bottom-up:
//!
//! * [`medium`]: susceptibility, its quadratic expansion, derived medium
//!   quantities and the cancellation-condition designer.
//! * [`spectral`]: transverse grids, complex fields and the unitary 2D transform.
//! * [`sources`]: Gaussian beams, raster masks and band-limit checks.
//! * [`propagator`]: exact diagonal-in-k propagation.
//! * [`diagnostics`]: powers, widths, profiles and fidelity.
//! * [`config`] and [`runner`]: the TOML-driven batch front end used by the
//!   `slowlight` binary.
//!
//! All quantities are SI internally.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod medium;
pub mod pgm;
pub mod propagator;
pub mod runner;
pub mod sources;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
pub use medium::{DesignTargets, ExpansionCoefficients, MediumParams, OpticalParams};
pub use propagator::{PropagationMode, PropagationPlan, Propagator};
pub use spectral::{ComplexField, Representation, TransverseGrid};

pub use num_complex::Complex64;
