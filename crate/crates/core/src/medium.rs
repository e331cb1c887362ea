//! EIT susceptibility in transverse-momentum space and derived medium quantities.
//!
//! For a Λ system in a buffer-gas vapor, diffusive atomic motion makes the
//! two-photon linewidth depend on the transverse wave vector:
//!
//! ```text
//! χ(Δ, k⊥) = iα (1 − Γp / (Γ + D k⊥² − iΔ))
//! ```
//!
//! `Im χ` is the field absorption coefficient and `Re χ` the phase
//! (dispersion) per unit length, both in 1/m. The one-photon detuning is
//! taken as zero and is not a parameter.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Atomic and optical-pumping parameters of the susceptibility.
///
/// * `alpha`: half the pump-off intensity absorption coefficient (1/m)
/// * `gamma_p`: power broadening Γp (1/s)
/// * `gamma`: total homogeneous EIT width Γ = Γp + decoherence (1/s)
/// * `diffusion`: diffusion coefficient D (m²/s)
/// * `delta`: signed Raman detuning Δ (1/s)
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMedium")]
pub struct MediumParams {
    alpha: f64,
    gamma_p: f64,
    gamma: f64,
    diffusion: f64,
    delta: f64,
}

#[derive(Deserialize)]
struct RawMedium {
    alpha: f64,
    gamma_p: f64,
    gamma: f64,
    diffusion: f64,
    delta: f64,
}

impl TryFrom<RawMedium> for MediumParams {
    type Error = Error;

    fn try_from(r: RawMedium) -> Result<Self> {
        MediumParams::new(r.alpha, r.gamma_p, r.gamma, r.diffusion, r.delta)
    }
}

impl MediumParams {
    pub fn new(alpha: f64, gamma_p: f64, gamma: f64, diffusion: f64, delta: f64) -> Result<Self> {
        let finite = |key: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, "must be finite"))
            }
        };
        finite("alpha", alpha)?;
        finite("gamma_p", gamma_p)?;
        finite("gamma", gamma)?;
        finite("diffusion", diffusion)?;
        finite("delta", delta)?;
        if alpha < 0.0 {
            return Err(Error::config("alpha", format!("must be >= 0, got {alpha}")));
        }
        if gamma_p < 0.0 {
            return Err(Error::config(
                "gamma_p",
                format!("must be >= 0, got {gamma_p}"),
            ));
        }
        if gamma <= 0.0 {
            return Err(Error::config("gamma", format!("must be > 0, got {gamma}")));
        }
        if gamma < gamma_p {
            return Err(Error::config(
                "gamma",
                format!("total width {gamma} is below the power broadening gamma_p = {gamma_p}"),
            ));
        }
        if diffusion <= 0.0 {
            return Err(Error::config(
                "diffusion",
                format!("must be > 0, got {diffusion}"),
            ));
        }
        Ok(MediumParams {
            alpha,
            gamma_p,
            gamma,
            diffusion,
            delta,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma_p(&self) -> f64 {
        self.gamma_p
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Same medium at another Raman detuning.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        MediumParams::new(self.alpha, self.gamma_p, self.gamma, self.diffusion, delta)
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        MediumParams::new(alpha, self.gamma_p, self.gamma, self.diffusion, self.delta)
    }

    /// Susceptibility at squared transverse wavenumber `kperp_sq` (1/m²).
    pub fn chi(&self, kperp_sq: f64) -> Complex64 {
        debug_assert!(kperp_sq >= 0.0);
        let denom = Complex64::new(self.gamma + self.diffusion * kperp_sq, -self.delta);
        Complex64::i() * self.alpha * (1.0 - self.gamma_p / denom)
    }

    /// Susceptibility of atoms at rest, `χ₀(Δ) = χ(Δ, 0)`.
    pub fn chi0(&self) -> Complex64 {
        self.chi(0.0)
    }

    /// Coefficients of the expansion `χ ≈ χ₀ + (c_re + i c_im) k⊥²/k₀²`.
    pub fn quadratic_expansion(&self) -> ExpansionCoefficients {
        let chi0 = self.chi0();
        let (g, d) = (self.gamma, self.delta);
        let lorentz = (g * g + d * d).powi(2);
        let scale = self.alpha * self.gamma_p * g;
        ExpansionCoefficients {
            re0: chi0.re,
            im0: chi0.im,
            c_im: scale * (g * g - d * d) / lorentz,
            c_re: -scale * (2.0 * g * d) / lorentz,
        }
    }

    /// Dicke width of the Lorentzian filter in k⊥ space, `k₀ = √(Γ/D)`.
    pub fn dicke_width_k0(&self) -> f64 {
        (self.gamma / self.diffusion).sqrt()
    }

    /// Slow-light group velocity `Γ²/(αΓp)` (m/s).
    pub fn group_velocity(&self) -> Result<f64> {
        if self.alpha <= 0.0 || self.gamma_p <= 0.0 {
            return Err(Error::Domain(format!(
                "group velocity undefined for alpha = {}, gamma_p = {} (both must be > 0)",
                self.alpha, self.gamma_p
            )));
        }
        Ok(self.gamma * self.gamma / (self.alpha * self.gamma_p))
    }

    /// Intensity absorption per unit length of the `k⊥ = 0` component,
    /// `2 Im χ₀`. At Δ = −Γ this is `2α(1 − Γp/(2Γ))`.
    pub fn absorption_kappa(&self) -> f64 {
        2.0 * self.chi0().im
    }

    /// Residual of the diffraction-cancellation condition,
    /// `q α Γp D / Γ² − 1`. Zero exactly when the `k⊥²` part of `Re χ`
    /// cancels the paraxial diffraction term `k⊥²/(2q)`.
    pub fn check_cancellation(&self, optics: &OpticalParams) -> f64 {
        optics.carrier_wavenumber() * self.alpha * self.gamma_p * self.diffusion
            / (self.gamma * self.gamma)
            - 1.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoefficients {
    pub re0: f64,
    pub im0: f64,
    /// Coefficient of `k⊥²/k₀²` in `Im χ` (1/m).
    pub c_im: f64,
    /// Coefficient of `k⊥²/k₀²` in `Re χ` (1/m).
    pub c_re: f64,
}

impl ExpansionCoefficients {
    /// Quadratic approximation of χ at `s = k⊥²/k₀²`.
    pub fn eval(&self, s: f64) -> Complex64 {
        Complex64::new(self.re0 + self.c_re * s, self.im0 + self.c_im * s)
    }
}

/// Carrier properties. Only `q = 2π/λ` enters the propagation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOptics")]
pub struct OpticalParams {
    wavelength: f64,
    carrier_wavenumber: f64,
}

#[derive(Deserialize)]
struct RawOptics {
    wavelength: f64,
}

impl TryFrom<RawOptics> for OpticalParams {
    type Error = Error;

    fn try_from(r: RawOptics) -> Result<Self> {
        OpticalParams::new(r.wavelength)
    }
}

impl OpticalParams {
    pub fn new(wavelength: f64) -> Result<Self> {
        if !(wavelength.is_finite() && wavelength > 0.0) {
            return Err(Error::config(
                "wavelength",
                format!("must be > 0, got {wavelength}"),
            ));
        }
        Ok(OpticalParams {
            wavelength,
            carrier_wavenumber: 2.0 * PI / wavelength,
        })
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// `q = 2π/λ`.
    pub fn carrier_wavenumber(&self) -> f64 {
        self.carrier_wavenumber
    }

    /// Rayleigh length `z_R = q w₀²/2` for a field-1/e waist `w₀`.
    pub fn rayleigh_length(&self, waist: f64) -> f64 {
        0.5 * self.carrier_wavenumber * waist * waist
    }
}

/// Inputs to [`design_medium`]. At least one of `diffusion`, `gamma` anchors
/// the otherwise underdetermined solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignTargets {
    pub wavelength: f64,
    pub k0: f64,
    pub gamma_over_gammap: f64,
    pub diffusion: Option<f64>,
    pub gamma: Option<f64>,
}

const ANCHOR_RTOL: f64 = 1e-12;

/// Solves for a medium at Δ = −Γ with Dicke width `k0` that satisfies the
/// cancellation condition `q α Γp D = Γ²`.
pub fn design_medium(targets: &DesignTargets) -> Result<MediumParams> {
    let optics = OpticalParams::new(targets.wavelength)?;
    let k0 = targets.k0;
    if !(k0.is_finite() && k0 > 0.0) {
        return Err(Error::config("design.k0", format!("must be > 0, got {k0}")));
    }
    let ratio = targets.gamma_over_gammap;
    if !(ratio.is_finite() && ratio >= 1.0) {
        return Err(Error::config(
            "design.gamma_over_gammap",
            format!("must be >= 1, got {ratio}"),
        ));
    }
    let k0_sq = k0 * k0;
    let (gamma, diffusion) = match (targets.gamma, targets.diffusion) {
        (None, None) => {
            return Err(Error::config(
                "design",
                "one of `diffusion` or `gamma` must be supplied as anchor",
            ))
        }
        (None, Some(d)) => {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::config("design.diffusion", "must be > 0"));
            }
            (d * k0_sq, d)
        }
        (Some(g), None) => {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::config("design.gamma", "must be > 0"));
            }
            (g, g / k0_sq)
        }
        (Some(g), Some(d)) => {
            let implied = d * k0_sq;
            if !((implied - g).abs() <= ANCHOR_RTOL * g.abs()) {
                return Err(Error::config(
                    "design.gamma/design.diffusion",
                    format!("inconsistent anchors: gamma = {g} but diffusion * k0^2 = {implied}"),
                ));
            }
            (g, d)
        }
    };
    let gamma_p = gamma / ratio;
    let alpha = gamma * gamma / (optics.carrier_wavenumber() * gamma_p * diffusion);
    MediumParams::new(alpha, gamma_p, gamma, diffusion, -gamma)
}

impl DesignTargets {
    /// Targets reproducing an existing medium, anchored on both Γ and D.
    pub fn from_medium(medium: &MediumParams, optics: &OpticalParams) -> DesignTargets {
        DesignTargets {
            wavelength: optics.wavelength(),
            k0: medium.dicke_width_k0(),
            gamma_over_gammap: medium.gamma() / medium.gamma_p(),
            diffusion: Some(medium.diffusion()),
            gamma: Some(medium.gamma()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent oracle in real arithmetic: with a = Γ + Dk²,
    /// Re χ = αΓpΔ/(a²+Δ²), Im χ = α − αΓp a/(a²+Δ²).
    fn oracle(alpha: f64, gp: f64, g: f64, d: f64, delta: f64, k_sq: f64) -> (f64, f64) {
        let a = g + d * k_sq;
        let den = a * a + delta * delta;
        (alpha * gp * delta / den, alpha - alpha * gp * a / den)
    }

    fn m(alpha: f64, gp: f64, g: f64, d: f64, delta: f64) -> MediumParams {
        MediumParams::new(alpha, gp, g, d, delta).unwrap()
    }

    #[test]
    fn chi_spot_values() {
        let on = m(1.0, 1.0, 2.0, 1.0, 0.0).chi(0.0);
        assert_eq!((on.re, on.im), oracle(1.0, 1.0, 2.0, 1.0, 0.0, 0.0));
        assert_eq!((on.re, on.im), (0.0, 0.5));

        let neg = m(1.0, 1.0, 2.0, 1.0, -2.0).chi(0.0);
        let (re, im) = oracle(1.0, 1.0, 2.0, 1.0, -2.0, 0.0);
        assert!((neg.re - re).abs() < 1e-15 && (neg.im - im).abs() < 1e-15);
        assert!((neg.re + 0.25).abs() < 1e-15 && (neg.im - 0.75).abs() < 1e-15);

        let pos = m(1.0, 1.0, 2.0, 1.0, 2.0).chi0();
        assert!((pos.re - 0.25).abs() < 1e-15 && (pos.im - 0.75).abs() < 1e-15);
    }

    #[test]
    fn pump_off_and_far_wings_give_bare_absorption() {
        let off = m(3.0, 0.0, 2.0, 1.0, 0.7);
        for k_sq in [0.0, 1.0, 1e6] {
            assert_eq!(off.chi(k_sq), Complex64::new(0.0, 3.0));
        }
        let wing = m(3.0, 1.0, 2.0, 1.0, -2.0).chi(1e14);
        assert!((wing - Complex64::new(0.0, 3.0)).norm() < 1e-12);
    }

    #[test]
    fn perfect_transparency_on_resonance() {
        assert_eq!(m(5.0, 2.0, 2.0, 1.0, 0.0).chi0(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn expansion_spot_values() {
        let e = m(1.0, 1.0, 1.0, 3.0, 0.5).quadratic_expansion();
        assert!((e.c_im - 0.48).abs() < 1e-15);
        assert!((e.c_re + 0.64).abs() < 1e-15);
        assert_eq!(m(1.0, 1.0, 2.0, 1.0, -2.0).quadratic_expansion().c_im, 0.0);
        assert_eq!(m(1.0, 1.0, 2.0, 1.0, 0.0).quadratic_expansion().c_re, 0.0);
    }

    #[test]
    fn expansion_matches_oracle_difference() {
        // centered difference of the oracle in s = k²/k0², at s = ±1e-6
        let (a, gp, g, d, delta) = (1.0, 1.0, 1.0, 3.0, 0.5);
        let k0_sq = g / d;
        let h = 1e-6;
        let (rp, ip) = oracle(a, gp, g, d, delta, h * k0_sq);
        let (rm, im) = oracle(a, gp, g, d, delta, -h * k0_sq);
        let e = m(a, gp, g, d, delta).quadratic_expansion();
        assert!(((rp - rm) / (2.0 * h) - e.c_re).abs() < 1e-8);
        assert!(((ip - im) / (2.0 * h) - e.c_im).abs() < 1e-8);
    }

    #[test]
    fn dicke_width() {
        assert_eq!(m(1.0, 1.0, 2.0, 0.5, 0.0).dicke_width_k0(), 2.0);
        let a = m(1.0, 1.0, 2.0, 0.5, 0.0).dicke_width_k0();
        let b = m(1.0, 1.0, 8.0, 0.5, 0.0).dicke_width_k0();
        assert!((b - 2.0 * a).abs() < 1e-15);
        // π/k0 = 100 μm with D = 11 cm²/s
        let k0 = PI / 100e-6;
        let gamma = 1.1e-3 * k0 * k0;
        assert!((gamma - 1.0857e6).abs() / 1.0857e6 < 1e-3);
    }

    #[test]
    fn group_velocity_rules() {
        assert_eq!(m(1.0, 1.0, 1.0, 1.0, 0.0).group_velocity().unwrap(), 1.0);
        assert_eq!(m(1.0, 1.0, 2.0, 1.0, 0.0).group_velocity().unwrap(), 4.0);
        assert!(m(0.0, 1.0, 2.0, 1.0, 0.0).group_velocity().is_err());
        assert!(m(1.0, 0.0, 2.0, 1.0, 0.0).group_velocity().is_err());
    }

    #[test]
    fn kappa_values() {
        assert!((m(2.0, 3.0, 3.0, 1.0, -3.0).absorption_kappa() - 2.0).abs() < 1e-15);
        assert!((m(1.0, 1.0, 2.0, 1.0, -2.0).absorption_kappa() - 1.5).abs() < 1e-15);
        assert_eq!(m(1.5, 0.0, 2.0, 1.0, -2.0).absorption_kappa(), 3.0);
    }

    #[test]
    fn cancellation_residual_from_caption_values() {
        let optics = OpticalParams::new(795e-9).unwrap();
        let q = optics.carrier_wavenumber();
        let d = 1.1e-3;
        // v_g = Γ²/(αΓp) = 9000 m/s with Γ = Γp = 1
        let medium = m(1.0 / 9000.0, 1.0, 1.0, d, 0.0);
        let r = medium.check_cancellation(&optics);
        assert!((r - (q * d / 9000.0 - 1.0)).abs() < 1e-14);
        assert!((r + 0.034).abs() < 1e-3, "{r}");
        assert!((q * d - 8.69e3).abs() < 5.0);

        let doubled = medium.with_alpha(2.0 / 9000.0).unwrap();
        let ratio = (doubled.check_cancellation(&optics) + 1.0) / (r + 1.0);
        assert!((ratio - 2.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(MediumParams::new(-1.0, 1.0, 2.0, 1.0, 0.0).is_err());
        assert!(MediumParams::new(1.0, 3.0, 2.0, 1.0, 0.0).is_err());
        assert!(MediumParams::new(1.0, 1.0, 2.0, 0.0, 0.0).is_err());
        assert!(MediumParams::new(1.0, 0.0, 0.0, 1.0, 0.0).is_err());
        assert!(MediumParams::new(f64::NAN, 1.0, 2.0, 1.0, 0.0).is_err());
        assert!(OpticalParams::new(0.0).is_err());
    }

    #[test]
    fn design_with_diffusion_anchor() {
        let targets = DesignTargets {
            wavelength: 795e-9,
            k0: PI * 1e4,
            gamma_over_gammap: 2.0,
            diffusion: Some(1.1e-3),
            gamma: None,
        };
        let medium = design_medium(&targets).unwrap();
        let optics = OpticalParams::new(795e-9).unwrap();
        assert!((medium.gamma() - 1.0857e6).abs() / 1.0857e6 < 1e-3);
        assert!((medium.dicke_width_k0() - targets.k0).abs() / targets.k0 < 1e-12);
        assert!(medium.check_cancellation(&optics).abs() < 1e-12);
        assert_eq!(medium.delta(), -medium.gamma());
        assert_eq!(medium.gamma() / medium.gamma_p(), 2.0);

        let again = design_medium(&DesignTargets::from_medium(&medium, &optics)).unwrap();
        assert_eq!(again, medium);
    }

    #[test]
    fn design_with_gamma_anchor() {
        let targets = DesignTargets {
            wavelength: 795e-9,
            k0: 2.0e4,
            gamma_over_gammap: 1.0,
            diffusion: None,
            gamma: Some(5.0e5),
        };
        let medium = design_medium(&targets).unwrap();
        let optics = OpticalParams::new(795e-9).unwrap();
        assert!((medium.dicke_width_k0() - 2.0e4).abs() / 2.0e4 < 1e-12);
        assert!(medium.check_cancellation(&optics).abs() < 1e-12);
    }

    #[test]
    fn design_unit_ratio_gives_pi_squared_over_two() {
        let k0 = PI * 1e4;
        let medium = design_medium(&DesignTargets {
            wavelength: 795e-9,
            k0,
            gamma_over_gammap: 1.0,
            diffusion: Some(1.1e-3),
            gamma: None,
        })
        .unwrap();
        let optics = OpticalParams::new(795e-9).unwrap();
        let z_r = optics.rayleigh_length(PI / k0);
        let kz = medium.absorption_kappa() * z_r;
        assert!((kz - PI * PI / 2.0).abs() < 1e-9, "{kz}");
    }

    #[test]
    fn design_rejects_conflicting_anchors() {
        let err = design_medium(&DesignTargets {
            wavelength: 795e-9,
            k0: 1e4,
            gamma_over_gammap: 2.0,
            diffusion: Some(1e-3),
            gamma: Some(1e6),
        })
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gamma") && msg.contains("diffusion"), "{msg}");

        let missing = design_medium(&DesignTargets {
            wavelength: 795e-9,
            k0: 1e4,
            gamma_over_gammap: 2.0,
            diffusion: None,
            gamma: None,
        });
        assert!(missing.is_err());
        let low_ratio = design_medium(&DesignTargets {
            wavelength: 795e-9,
            k0: 1e4,
            gamma_over_gammap: 0.5,
            diffusion: Some(1e-3),
            gamma: None,
        });
        assert!(low_ratio.is_err());
    }

    fn arb_medium() -> impl Strategy<Value = MediumParams> {
        (
            0.1f64..100.0,
            0.05f64..1.0,
            1e3f64..1e7,
            1e-5f64..1e-2,
            -3.0f64..3.0,
        )
            .prop_map(|(alpha, frac, gamma, d, dg)| {
                MediumParams::new(alpha, frac * gamma, gamma, d, dg * gamma).unwrap()
            })
    }

    proptest! {
        #[test]
        fn chi_at_zero_is_chi0(medium in arb_medium()) {
            prop_assert_eq!(medium.chi(0.0), medium.chi0());
        }

        #[test]
        fn resonant_chi_is_pure_imaginary(medium in arb_medium(), s in 0.0f64..100.0) {
            let on = medium.with_delta(0.0).unwrap();
            let k0 = on.dicke_width_k0();
            prop_assert_eq!(on.chi(s * k0 * k0).re, 0.0);
        }

        #[test]
        fn resonant_absorption_grows_with_k(medium in arb_medium()) {
            let on = medium.with_delta(0.0).unwrap();
            let k0_sq = on.dicke_width_k0().powi(2);
            let mut last = on.chi(0.0).im;
            for i in 1..200 {
                let im = on.chi(0.05 * i as f64 * k0_sq).im;
                prop_assert!(im >= last);
                last = im;
            }
        }

        #[test]
        fn fourth_order_flatness_at_negative_detuning(medium in arb_medium()) {
            let flat = medium.with_delta(-medium.gamma()).unwrap();
            let k0 = flat.dicke_width_k0();
            let im0 = flat.chi0().im;
            let bound_scale = flat.alpha() * flat.gamma_p() / flat.gamma();
            for i in 0..=300 {
                let ratio = 0.3 * i as f64 / 300.0;
                let k = ratio * k0;
                let dev = (flat.chi(k * k).im - im0).abs();
                prop_assert!(dev <= bound_scale * ratio.powi(4) + 1e-15 * flat.alpha());
            }
        }

        #[test]
        fn condition_iff_group_velocity_equals_qd(medium in arb_medium(), lambda in 300e-9f64..2e-6) {
            let optics = OpticalParams::new(lambda).unwrap();
            let q = optics.carrier_wavenumber();
            // rescale alpha so the condition holds, then compare v_g with qD
            let alpha = medium.gamma().powi(2) / (q * medium.gamma_p() * medium.diffusion());
            let tuned = medium.with_alpha(alpha).unwrap();
            prop_assert!(tuned.check_cancellation(&optics).abs() < 1e-12);
            let vg = tuned.group_velocity().unwrap();
            prop_assert!((vg - q * tuned.diffusion()).abs() <= 1e-12 * vg);
            // and off the condition the two differ by exactly the residual
            let r = medium.check_cancellation(&optics);
            let vg = medium.group_velocity().unwrap();
            prop_assert!(((q * medium.diffusion() / vg - 1.0) - r).abs() < 1e-9 * (1.0 + r.abs()));
        }

        #[test]
        fn design_meets_targets(k0 in 1e3f64..1e5, ratio in 1.0f64..10.0, d in 1e-5f64..1e-2) {
            let t = DesignTargets { wavelength: 795e-9, k0, gamma_over_gammap: ratio, diffusion: Some(d), gamma: None };
            let medium = design_medium(&t).unwrap();
            let optics = OpticalParams::new(795e-9).unwrap();
            prop_assert!((medium.dicke_width_k0() - k0).abs() <= 1e-12 * k0);
            prop_assert!(medium.check_cancellation(&optics).abs() <= 1e-12);
        }
    }
}
