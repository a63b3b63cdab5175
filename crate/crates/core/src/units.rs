//! Internal unit system: μeV, ps, mK and angular ps⁻¹.
//!
//! All physical parameters of the model are order 1–100 in these units, so
//! no exponent in the propagation gets close to under- or overflow.

use crate::error::{Error, Result};

/// Reduced Planck constant in μeV·ps (CODATA 2018, 6.582119569×10⁻¹⁶ eV·s).
pub const HBAR: f64 = 658.211_956_9;

/// Boltzmann constant in μeV/mK (CODATA 2018, 8.617333262×10⁻⁵ eV/K).
pub const K_B: f64 = 0.086_173_332_62;

const PS_PER_S: f64 = 1e12;
const UEV_PER_EV: f64 = 1e6;
const MK_PER_K: f64 = 1e3;

/// Inverse thermal energy β = 1/(k_B T) in μeV⁻¹.
pub fn thermal_beta(temperature_mk: f64) -> Result<f64> {
    if !(temperature_mk > 0.0) {
        return Err(Error::domain(format!(
            "temperature must be positive, got {temperature_mk} mK"
        )));
    }
    Ok(1.0 / (K_B * temperature_mk))
}

/// Characteristic time ℏ/E of an energy scale, in ps.
pub fn characteristic_time(energy_uev: f64) -> f64 {
    HBAR / energy_uev
}

pub fn seconds_to_ps(t: f64) -> f64 {
    t * PS_PER_S
}

pub fn ps_to_seconds(t: f64) -> f64 {
    t / PS_PER_S
}

pub fn ps_to_us(t: f64) -> f64 {
    t * 1e-6
}

pub fn us_to_ps(t: f64) -> f64 {
    t * 1e6
}

pub fn ev_to_uev(e: f64) -> f64 {
    e * UEV_PER_EV
}

pub fn uev_to_ev(e: f64) -> f64 {
    e / UEV_PER_EV
}

pub fn kelvin_to_mk(t: f64) -> f64 {
    t * MK_PER_K
}

pub fn mk_to_kelvin(t: f64) -> f64 {
    t / MK_PER_K
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn beta_at_30_mk() {
        let beta = thermal_beta(30.0).unwrap();
        assert!((beta - 0.386_817).abs() < 5e-7, "{beta}");
        let x = 51.8 * beta / 2.0;
        assert!((x - 10.0186).abs() < 5e-5, "{x}");
    }

    #[test]
    fn beta_rejects_non_positive_temperature() {
        assert!(matches!(thermal_beta(0.0), Err(Error::Domain(_))));
        assert!(matches!(thermal_beta(-1.0), Err(Error::Domain(_))));
        assert!(thermal_beta(f64::NAN).is_err());
    }

    #[test]
    fn beta_vanishes_at_high_temperature() {
        assert!(thermal_beta(1e300).unwrap() < 1e-298);
    }

    #[test]
    fn qubit_characteristic_time() {
        let tau = characteristic_time(51.8);
        assert!((tau - 12.707).abs() < 5e-4, "{tau}");
        // about 1.3e-11 s
        assert!((ps_to_seconds(tau) - 1.3e-11).abs() < 0.05e-11);
    }

    #[test]
    fn hbar_matches_si_value() {
        let hbar_ev_s = 6.582_119_569e-16;
        let converted = ev_to_uev(hbar_ev_s) * seconds_to_ps(1.0);
        assert!((converted - HBAR).abs() / HBAR < 1e-14);
    }

    proptest! {
        #[test]
        fn conversions_round_trip(x in 1e-20f64..1e20) {
            for (a, b) in [
                (seconds_to_ps(ps_to_seconds(x)), x),
                (ps_to_seconds(seconds_to_ps(x)), x),
                (uev_to_ev(ev_to_uev(x)), x),
                (kelvin_to_mk(mk_to_kelvin(x)), x),
                (us_to_ps(ps_to_us(x)), x),
            ] {
                prop_assert!((a - b).abs() <= 1e-14 * b.abs());
            }
        }

        #[test]
        fn beta_strictly_decreasing(t in 1e-3f64..1e6, dt in 1e-3f64..1e3) {
            prop_assert!(thermal_beta(t + dt).unwrap() < thermal_beta(t).unwrap());
        }
    }
}
