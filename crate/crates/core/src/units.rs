//! Physical constants and conversions from the customary units of optical
//! link engineering into the strict SI units used everywhere else.

use std::f64::consts::PI;

use crate::error::{domain, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Converts dispersion `D` [s/m²] and slope `S` [s/m³] at `wavelength` [m]
/// into the propagation constants β2 [s²/m] and β3 [s³/m].
pub fn dispersion_to_beta(dispersion: f64, slope: f64, wavelength: f64) -> Result<(f64, f64)> {
    if !(wavelength > 0.0) || !wavelength.is_finite() {
        return domain(format!("reference wavelength must be positive, got {wavelength}"));
    }
    let scale = wavelength / (2.0 * PI * SPEED_OF_LIGHT);
    let beta2 = -dispersion * wavelength * scale;
    let beta3 = scale * scale * (wavelength * wavelength * slope + 2.0 * wavelength * dispersion);
    Ok((beta2, beta3))
}

/// Power attenuation in dB/km to the natural coefficient α [1/m] of `e^{-αz}`.
pub fn attenuation_db_per_km_to_natural(db_per_km: f64) -> Result<f64> {
    if !(db_per_km >= 0.0) {
        return domain(format!("attenuation must be non-negative, got {db_per_km} dB/km"));
    }
    Ok(db_per_km * std::f64::consts::LN_10 / 10.0 / 1000.0)
}

pub fn natural_to_db_per_km(alpha: f64) -> f64 {
    alpha * 1000.0 * 10.0 / std::f64::consts::LN_10
}

/// ps/(nm·km) to s/m².
pub fn ps_per_nm_km(value: f64) -> f64 {
    value * 1e-6
}

/// ps/(nm²·km) to s/m³.
pub fn ps_per_nm2_km(value: f64) -> f64 {
    value * 1e3
}

/// 1/(W·km) to 1/(W·m).
pub fn per_w_km(value: f64) -> f64 {
    value * 1e-3
}

/// 1/(W·km·THz) to 1/(W·m·Hz).
pub fn per_w_km_thz(value: f64) -> f64 {
    value * 1e-15
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

pub fn watt_to_dbm(watt: f64) -> f64 {
    10.0 * (watt / 1e-3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(value: f64) -> f64 {
    10.0 * value.log10()
}

pub fn wavelength_to_frequency(wavelength: f64) -> f64 {
    SPEED_OF_LIGHT / wavelength
}

/// `sinh(x)/x`, exact at the origin.
pub(crate) fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// `atan(x)/x`, exact at the origin.
pub(crate) fn atanc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 3.0
    } else {
        x.atan() / x
    }
}

/// `sin(x)/x` (unnormalized sinc).
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn zero_dispersion_gives_zero_beta() {
        assert_eq!(dispersion_to_beta(0.0, 0.0, 1550e-9).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn rejects_nonpositive_wavelength() {
        assert!(dispersion_to_beta(1e-6, 0.0, 0.0).is_err());
        assert!(dispersion_to_beta(1e-6, 0.0, -1.0).is_err());
    }

    // Reference values evaluated independently with 30-digit arithmetic (mpmath).
    #[test]
    fn smf_and_nzdsf_beta2() {
        let (b2, b3) = dispersion_to_beta(ps_per_nm_km(17.0), ps_per_nm2_km(0.067), 1550e-9).unwrap();
        assert_relative_eq!(b2 / 1e-27, -21.682_619_391_414_9, max_relative = 1e-12);
        assert_relative_eq!(b3 / 1e-39, 0.144_677_408_972_69, max_relative = 1e-10);
        let (b2, _) = dispersion_to_beta(ps_per_nm_km(4.5), ps_per_nm2_km(0.05), 1550e-9).unwrap();
        assert_relative_eq!(b2 / 1e-27, -5.739_516_897_727_47, max_relative = 1e-10);
    }

    #[test]
    fn attenuation_conversion() {
        assert_eq!(attenuation_db_per_km_to_natural(0.0).unwrap(), 0.0);
        assert_relative_eq!(
            attenuation_db_per_km_to_natural(0.2).unwrap(),
            4.605_170_185_988_091e-5,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            attenuation_db_per_km_to_natural(0.19).unwrap(),
            4.374_911_676_688_687e-5,
            max_relative = 1e-12
        );
        assert!(attenuation_db_per_km_to_natural(-0.1).is_err());
    }

    #[test]
    fn dbm_round_trip() {
        assert_relative_eq!(dbm_to_watt(0.0), 1e-3);
        assert_relative_eq!(watt_to_dbm(dbm_to_watt(-2.5)), -2.5, epsilon = 1e-12);
    }
}
