//! Ohmic bath: spectral density, noise power spectrum and the complex
//! response (correlation) function γ(t).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::quadrature::{self, Tolerance};
use crate::units::{thermal_beta, HBAR};

/// Upper frequency limit of every bath integral, in units of ω_C. The
/// exponential cutoff leaves less than e⁻⁵⁰ of the integrand beyond it.
pub const CUTOFF_MULTIPLE: f64 = 50.0;

pub(crate) const MAX_SEGMENTS: usize = 200_000;

/// Shape of the spectral density. Only the exponentially cut-off Ohmic form
/// is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralKind {
    Ohmic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathModel {
    pub kind: SpectralKind,
    /// Dimensionless dissipation strength α.
    pub alpha: f64,
    /// Cutoff frequency ω_C in ps⁻¹.
    pub omega_c: f64,
    /// Bath temperature in mK.
    pub temperature: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseSample {
    pub t: f64,
    pub re_gamma: f64,
    pub im_gamma: f64,
}

impl BathModel {
    pub fn ohmic(alpha: f64, omega_c: f64, temperature: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::domain(format!(
                "alpha must be non-negative, got {alpha}"
            )));
        }
        if !(omega_c > 0.0) || !omega_c.is_finite() {
            return Err(Error::domain(format!(
                "omega_c must be positive, got {omega_c}"
            )));
        }
        thermal_beta(temperature)?;
        Ok(Self {
            kind: SpectralKind::Ohmic,
            alpha,
            omega_c,
            temperature,
        })
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self> {
        Self::ohmic(alpha, self.omega_c, self.temperature)
    }

    pub fn with_temperature(self, temperature: f64) -> Result<Self> {
        Self::ohmic(self.alpha, self.omega_c, temperature)
    }

    /// β = 1/(k_B T) in μeV⁻¹.
    pub fn beta(&self) -> f64 {
        thermal_beta(self.temperature).expect("validated at construction")
    }

    /// Upper limit W of the frequency integrals.
    pub fn max_frequency(&self) -> f64 {
        CUTOFF_MULTIPLE * self.omega_c
    }

    /// Unchecked J(ω) = 2πℏαω·exp(−ω/ω_C).
    pub(crate) fn j(&self, omega: f64) -> f64 {
        match self.kind {
            SpectralKind::Ohmic => {
                2.0 * PI * HBAR * self.alpha * omega * (-omega / self.omega_c).exp()
            }
        }
    }

    /// J(ω)·coth(βℏω/2), continued to its finite limit 4πα/β at ω = 0.
    pub(crate) fn j_coth(&self, omega: f64) -> f64 {
        let c = 0.5 * self.beta() * HBAR;
        let x = c * omega;
        // ω·coth(cω)
        let w_coth = if x < 1e-8 {
            1.0 / c + omega * x / 3.0
        } else {
            omega / x.tanh()
        };
        match self.kind {
            SpectralKind::Ohmic => {
                2.0 * PI * HBAR * self.alpha * w_coth * (-omega / self.omega_c).exp()
            }
        }
    }

    /// Spectral density J(ω) in μeV.
    pub fn spectral_density(&self, omega: f64) -> Result<f64> {
        if !(omega >= 0.0) {
            return Err(Error::domain(format!(
                "frequency must be non-negative, got {omega}"
            )));
        }
        Ok(self.j(omega))
    }

    /// Noise power spectrum S(ω) = J(ω)·ℏ·coth(ωβℏ/2) in μeV²·ps.
    pub fn power_spectrum(&self, omega: f64) -> Result<f64> {
        if !(omega > 0.0) {
            return Err(Error::domain(format!(
                "power spectrum needs a positive frequency, got {omega}"
            )));
        }
        Ok(self.j(omega) * HBAR / (0.5 * omega * self.beta() * HBAR).tanh())
    }

    /// Analytic ω → 0⁺ limit of [`power_spectrum`](Self::power_spectrum), 4πℏα·k_BT.
    pub fn power_spectrum_zero_limit(&self) -> f64 {
        4.0 * PI * HBAR * self.alpha / self.beta()
    }

    /// Scale of γ(0) at zero temperature, 2ℏαω_C²; used for tolerances.
    pub(crate) fn response_scale(&self) -> f64 {
        2.0 * HBAR * self.alpha * self.omega_c * self.omega_c
    }

    /// γ(t) = (1/π)∫₀^∞ dω J(ω)[coth(βℏω/2)cos ωt − i sin ωt], in μeV·ps⁻¹.
    pub fn response_function(&self, t: f64) -> Result<Complex64> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("time must be non-negative, got {t}")));
        }
        if self.alpha == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let w_max = self.max_frequency();
        let width = if t > 0.0 {
            (PI / t).min(0.5 * self.omega_c)
        } else {
            0.5 * self.omega_c
        };
        let points = quadrature::uniform_breakpoints(0.0, w_max, width);
        let tol = Tolerance::new(1e-11 * self.response_scale(), 0.0);
        let integral = quadrature::integrate(
            |w| {
                let (s, c) = (w * t).sin_cos();
                Complex64::new(self.j_coth(w) * c, -self.j(w) * s) / PI
            },
            &points,
            tol,
            MAX_SEGMENTS,
        )?;
        Ok(integral.value)
    }

    pub fn response_sample(&self, t: f64) -> Result<ResponseSample> {
        let g = self.response_function(t)?;
        Ok(ResponseSample {
            t,
            re_gamma: g.re,
            im_gamma: g.im,
        })
    }

    /// γ(t) on the given time points.
    pub fn response_grid(&self, times: &[f64], strategy: Strategy) -> Result<Vec<ResponseSample>> {
        exec::map_items(strategy, times, |&t| self.response_sample(t))
            .into_iter()
            .collect()
    }

    /// Smallest time on the grid 0, 0.1, …, 100 ps after which both
    /// |Re γ|/Re γ(0) and |Im γ|/max|Im γ| stay below `threshold`.
    pub fn memory_time(&self, threshold: f64, strategy: Strategy) -> Result<f64> {
        const STEP: f64 = 0.1;
        const POINTS: usize = 1000;
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::domain(format!(
                "threshold must lie in (0, 1), got {threshold}"
            )));
        }
        if self.alpha == 0.0 {
            return Err(Error::domain(
                "memory time is undefined for a decoupled bath",
            ));
        }
        let times: Vec<f64> = (0..=POINTS).map(|i| i as f64 * STEP).collect();
        let samples = self.response_grid(&times, strategy)?;
        let re0 = samples[0].re_gamma;
        let im_max = samples.iter().map(|s| s.im_gamma.abs()).fold(0.0, f64::max);
        let exceeds = |s: &ResponseSample| {
            s.re_gamma.abs() / re0 >= threshold
                || (im_max > 0.0 && s.im_gamma.abs() / im_max >= threshold)
        };
        match samples.iter().rposition(exceeds) {
            None => Ok(0.0),
            Some(i) if i == POINTS => Err(Error::Saturation {
                grid_end: times[POINTS],
            }),
            Some(i) => Ok(times[i + 1]),
        }
    }
}
