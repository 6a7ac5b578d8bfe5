//! Per-span fiber constants.
//!
//! `attenuation` is the *power* coefficient: span loss is `e^{-αL}` and the
//! field decays as `e^{-αz/2}`.

use crate::error::{domain, Result};
use crate::units::{
    attenuation_db_per_km_to_natural, dispersion_to_beta, per_w_km, per_w_km_thz, ps_per_nm2_km,
    ps_per_nm_km,
};

#[derive(Debug, Clone, PartialEq)]
pub struct FiberSpec {
    attenuation: f64,
    effective_attenuation: f64,
    gamma: f64,
    dispersion: f64,
    dispersion_slope: f64,
    reference_wavelength: f64,
    beta2: f64,
    beta3: f64,
    raman_slope: f64,
    span_length: f64,
}

/// Inputs for [`FiberSpec::new`], all SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberParams {
    pub attenuation: f64,
    pub gamma: f64,
    pub dispersion: f64,
    pub dispersion_slope: f64,
    pub raman_slope: f64,
    pub span_length: f64,
    pub reference_wavelength: f64,
}

impl FiberSpec {
    /// Builds the spec with `ᾱ = α`.
    pub fn new(p: FiberParams) -> Result<Self> {
        if !(p.attenuation > 0.0) || !p.attenuation.is_finite() {
            return domain("attenuation must be positive");
        }
        if !(p.span_length > 0.0) || !p.span_length.is_finite() {
            return domain("span length must be positive");
        }
        if !(p.gamma >= 0.0) {
            return domain("nonlinearity coefficient must be non-negative");
        }
        if !(p.raman_slope >= 0.0) {
            return domain("Raman gain slope must be non-negative");
        }
        if !p.dispersion.is_finite() || !p.dispersion_slope.is_finite() {
            return domain("dispersion parameters must be finite");
        }
        let (beta2, beta3) = dispersion_to_beta(p.dispersion, p.dispersion_slope, p.reference_wavelength)?;
        Ok(Self {
            attenuation: p.attenuation,
            effective_attenuation: p.attenuation,
            gamma: p.gamma,
            dispersion: p.dispersion,
            dispersion_slope: p.dispersion_slope,
            reference_wavelength: p.reference_wavelength,
            beta2,
            beta3,
            raman_slope: p.raman_slope,
            span_length: p.span_length,
        })
    }

    /// Standard single-mode fiber: 0.2 dB/km, 17 ps/nm/km, 0.067 ps/nm²/km,
    /// γ = 1.2 /W/km, Raman slope 0.028 /W/km/THz, 100 km spans.
    pub fn standard_smf() -> Self {
        Self::new(FiberParams {
            attenuation: attenuation_db_per_km_to_natural(0.2).unwrap(),
            gamma: per_w_km(1.2),
            dispersion: ps_per_nm_km(17.0),
            dispersion_slope: ps_per_nm2_km(0.067),
            raman_slope: per_w_km_thz(0.028),
            span_length: 100e3,
            reference_wavelength: 1550e-9,
        })
        .expect("preset is valid")
    }

    /// Non-zero dispersion-shifted fiber: 0.19 dB/km, 4.5 ps/nm/km,
    /// 0.05 ps/nm²/km, γ = 1.3 /W/km, Raman slope 0.031 /W/km/THz.
    pub fn nzdsf() -> Self {
        Self::new(FiberParams {
            attenuation: attenuation_db_per_km_to_natural(0.19).unwrap(),
            gamma: per_w_km(1.3),
            dispersion: ps_per_nm_km(4.5),
            dispersion_slope: ps_per_nm2_km(0.05),
            raman_slope: per_w_km_thz(0.031),
            span_length: 100e3,
            reference_wavelength: 1550e-9,
        })
        .expect("preset is valid")
    }

    pub fn params(&self) -> FiberParams {
        FiberParams {
            attenuation: self.attenuation,
            gamma: self.gamma,
            dispersion: self.dispersion,
            dispersion_slope: self.dispersion_slope,
            raman_slope: self.raman_slope,
            span_length: self.span_length,
            reference_wavelength: self.reference_wavelength,
        }
    }

    pub fn with_effective_attenuation(&self, effective_attenuation: f64) -> Result<Self> {
        if !(effective_attenuation > 0.0) || !effective_attenuation.is_finite() {
            return domain("effective attenuation must be positive");
        }
        Ok(Self { effective_attenuation, ..self.clone() })
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        self.rebuild(|p| p.gamma = gamma)
    }

    pub fn with_raman_slope(&self, raman_slope: f64) -> Result<Self> {
        self.rebuild(|p| p.raman_slope = raman_slope)
    }

    pub fn with_dispersion(&self, dispersion: f64, slope: f64) -> Result<Self> {
        self.rebuild(|p| {
            p.dispersion = dispersion;
            p.dispersion_slope = slope;
        })
    }

    pub fn with_span_length(&self, span_length: f64) -> Result<Self> {
        self.rebuild(|p| p.span_length = span_length)
    }

    fn rebuild(&self, edit: impl FnOnce(&mut FiberParams)) -> Result<Self> {
        let alpha_bar = self.effective_attenuation;
        let keep_alpha_bar = alpha_bar != self.attenuation;
        let mut p = self.params();
        edit(&mut p);
        let fresh = Self::new(p)?;
        if keep_alpha_bar {
            fresh.with_effective_attenuation(alpha_bar)
        } else {
            Ok(fresh)
        }
    }

    pub fn attenuation(&self) -> f64 {
        self.attenuation
    }

    pub fn effective_attenuation(&self) -> f64 {
        self.effective_attenuation
    }

    /// `α + ᾱ`.
    pub fn attenuation_sum(&self) -> f64 {
        self.attenuation + self.effective_attenuation
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }

    pub fn dispersion_slope(&self) -> f64 {
        self.dispersion_slope
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn beta3(&self) -> f64 {
        self.beta3
    }

    pub fn raman_slope(&self) -> f64 {
        self.raman_slope
    }

    pub fn span_length(&self) -> f64 {
        self.span_length
    }

    pub fn reference_wavelength(&self) -> f64 {
        self.reference_wavelength
    }

    /// `(1 - e^{-ᾱz})/ᾱ`.
    pub fn effective_length(&self, z: f64) -> f64 {
        effective_length(self.effective_attenuation, z)
    }
}

pub(crate) fn effective_length(alpha: f64, z: f64) -> f64 {
    -(-alpha * z).exp_m1() / alpha
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets_are_consistent() {
        let smf = FiberSpec::standard_smf();
        assert_relative_eq!(smf.beta2() / 1e-27, -21.6826, max_relative = 1e-5);
        assert_eq!(smf.attenuation(), smf.effective_attenuation());
        assert_relative_eq!(smf.raman_slope() * 14e12 * 1e3, 0.392, max_relative = 1e-12);
        let nz = FiberSpec::nzdsf();
        assert_relative_eq!(nz.beta2() / 1e-27, -5.7395, max_relative = 1e-4);
    }

    #[test]
    fn edits_keep_beta_consistent() {
        let f = FiberSpec::standard_smf().with_dispersion(0.0, 0.0).unwrap();
        assert_eq!((f.beta2(), f.beta3()), (0.0, 0.0));
        let g = FiberSpec::standard_smf().with_effective_attenuation(1e-4).unwrap().with_gamma(0.0).unwrap();
        assert_eq!(g.effective_attenuation(), 1e-4);
        assert_eq!(g.gamma(), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut p = FiberSpec::standard_smf().params();
        p.attenuation = 0.0;
        assert!(FiberSpec::new(p).is_err());
        assert!(FiberSpec::standard_smf().with_raman_slope(-1.0).is_err());
        assert!(FiberSpec::standard_smf().with_span_length(0.0).is_err());
    }

    #[test]
    fn effective_length_limits() {
        let a = 4.6e-5;
        assert_relative_eq!(effective_length(a, 1e-3), 1e-3, max_relative = 1e-7);
        assert_relative_eq!(effective_length(a, 1e7), 1.0 / a, max_relative = 1e-12);
    }
}
