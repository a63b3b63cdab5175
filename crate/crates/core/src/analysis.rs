//! Decoherence-time extraction: the Markovian Bloch-equation rate, an
//! exponential fit to propagated trajectories, and the comparison of both.

use std::fmt;
use std::str::FromStr;

use crate::bath::BathModel;
use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::influence::{eta_coefficients_with, fmt_num};
use crate::itm::{build_transfer_tensor, propagate_with, Trajectory};
use crate::qubit::{InitialState, QubitParameters};
use crate::units::{ps_to_us, HBAR};

/// Relaxation and dephasing times in μs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochTimes {
    pub tau1: f64,
    pub tau2: f64,
}

/// Golden-rule rates at the degeneracy point:
/// τ₁⁻¹ = 2τ₂⁻¹ = J(ω₀)·coth(βℏω₀/2)/(2ℏ), ω₀ = B_x/ℏ.
pub fn bloch_decoherence_time(params: &QubitParameters, bath: &BathModel) -> Result<BlochTimes> {
    bloch_decoherence_time_with(params, bath, true)
}

/// As [`bloch_decoherence_time`]; with `include_cutoff = false` the
/// spectral density is taken as the bare linear 2πℏαω₀.
pub fn bloch_decoherence_time_with(
    params: &QubitParameters,
    bath: &BathModel,
    include_cutoff: bool,
) -> Result<BlochTimes> {
    if params.b_z() != 0.0 {
        return Err(Error::domain(format!(
            "Bloch rates are defined at the degeneracy point B_z = 0 (n_g = 1/2), got B_z = {} μeV",
            params.b_z()
        )));
    }
    if bath.alpha == 0.0 {
        return Err(Error::InfiniteTime(
            "a decoupled bath (alpha = 0) never relaxes the qubit".into(),
        ));
    }
    let w0 = params.b_x() / HBAR;
    let j = if include_cutoff {
        bath.spectral_density(w0)?
    } else {
        2.0 * std::f64::consts::PI * HBAR * bath.alpha * w0
    };
    let coth = 1.0 / (0.5 * bath.beta() * HBAR * w0).tanh();
    let rate1 = j * coth / (2.0 * HBAR);
    let tau1 = ps_to_us(1.0 / rate1);
    Ok(BlochTimes {
        tau1,
        tau2: 2.0 * tau1,
    })
}

/// Trajectory component a decay is fitted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Observable {
    #[default]
    AbsRho01,
    ReRho01,
    Rho00,
}

impl Observable {
    fn extract(self, traj: &Trajectory) -> Vec<f64> {
        traj.samples
            .iter()
            .map(|s| match self {
                Observable::AbsRho01 => s.rho.rho01().norm(),
                Observable::ReRho01 => s.rho.rho01().re,
                Observable::Rho00 => s.rho.rho00(),
            })
            .collect()
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observable::AbsRho01 => "abs_rho01",
            Observable::ReRho01 => "re_rho01",
            Observable::Rho00 => "rho00",
        })
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "abs_rho01" => Ok(Observable::AbsRho01),
            "re_rho01" => Ok(Observable::ReRho01),
            "rho00" => Ok(Observable::Rho00),
            other => Err(Error::domain(format!("unknown observable '{other}'"))),
        }
    }
}

/// y(t) = c_inf + (c0 − c_inf)·exp(−t/τ), τ in μs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub tau: f64,
    pub c0: f64,
    pub c_inf: f64,
    pub rms_residual: f64,
}

impl DecayFit {
    pub fn eval(&self, t_us: f64) -> f64 {
        self.c_inf + (self.c0 - self.c_inf) * (-t_us / self.tau).exp()
    }
}

pub const MIN_FIT_SAMPLES: usize = 50;

/// Least-squares exponential fit with free asymptote.
///
/// Oscillating data (at least four significant local maxima) is replaced by
/// its upper envelope before fitting.
pub fn fit_decay(trajectory: &Trajectory, observable: Observable) -> Result<DecayFit> {
    if trajectory.len() < MIN_FIT_SAMPLES {
        return Err(Error::domain(format!(
            "fit needs at least {MIN_FIT_SAMPLES} samples, got {}",
            trajectory.len()
        )));
    }
    let t: Vec<f64> = trajectory.samples.iter().map(|s| ps_to_us(s.t)).collect();
    let y = observable.extract(trajectory);
    fit_exponential(&t, &y)
}

/// Indices of strict local maxima (3-point stencil) that stand out from
/// both neighbours by more than `eps`.
fn local_maxima(y: &[f64], eps: f64) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] + eps && y[i] > y[i + 1] + eps)
        .collect()
}

/// Fits `(t, y)` (t in μs) with the exponential model.
pub fn fit_exponential(t: &[f64], y: &[f64]) -> Result<DecayFit> {
    if t.len() != y.len() || t.len() < 3 {
        return Err(Error::domain(
            "fit needs matching t and y with at least three points",
        ));
    }
    if y.iter().chain(t).any(|v| !v.is_finite()) {
        return Err(Error::Numerical {
            what: "non-finite fit input".into(),
            residual: f64::NAN,
        });
    }
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let range = hi - lo;
    let scale = lo.abs().max(hi.abs()).max(1.0);
    if range <= 1e-12 * scale {
        return Err(Error::NoDecay(format!(
            "observable is constant to {range:e}"
        )));
    }

    let peaks = local_maxima(y, 1e-9 * range);
    let (t, y): (Vec<f64>, Vec<f64>) = if peaks.len() >= 4 {
        std::iter::once(0)
            .chain(peaks)
            .map(|i| (t[i], y[i]))
            .unzip()
    } else {
        (t.to_vec(), y.to_vec())
    };

    let span = t[t.len() - 1] - t[0];
    if !(span > 0.0) {
        return Err(Error::domain("fit needs a positive time span"));
    }
    let tau_max = 100.0 * span;
    let (log_lo, log_hi) = ((1e-4 * span).ln(), (1.01 * tau_max).ln());

    let residual = |log_tau: f64| project(&t, &y, log_tau.exp()).1;

    const GRID: usize = 400;
    let grid: Vec<f64> = (0..=GRID)
        .map(|i| log_lo + (log_hi - log_lo) * i as f64 / GRID as f64)
        .collect();
    let values: Vec<f64> = grid.iter().map(|&g| residual(g)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(GRID)];
    let log_tau = golden_section(residual, a, b, 1e-13);
    let tau = log_tau.exp();

    let ((c_inf, amp), rms) = project(&t, &y, tau);
    if !rms.is_finite() || !tau.is_finite() || !c_inf.is_finite() || !amp.is_finite() {
        return Err(Error::Numerical {
            what: "exponential fit diverged".into(),
            residual: rms,
        });
    }
    if tau > tau_max {
        return Err(Error::NoDecay(format!(
            "fitted time constant {tau:e} μs exceeds 100× the span {span:e} μs"
        )));
    }
    if tau > span {
        return Err(Error::domain(format!(
            "data spans {span:e} μs, less than the fitted time constant {tau:e} μs"
        )));
    }
    Ok(DecayFit {
        tau,
        c0: c_inf + amp,
        c_inf,
        rms_residual: rms,
    })
}

/// Linear least squares for (c_inf, amplitude) at fixed τ; returns the
/// coefficients and the RMS residual.
fn project(t: &[f64], y: &[f64], tau: f64) -> ((f64, f64), f64) {
    let n = t.len() as f64;
    let e: Vec<f64> = t.iter().map(|&ti| (-ti / tau).exp()).collect();
    let e_mean = e.iter().sum::<f64>() / n;
    let y_mean = y.iter().sum::<f64>() / n;
    let (mut see, mut sey) = (0.0, 0.0);
    for (ei, yi) in e.iter().zip(y) {
        see += (ei - e_mean) * (ei - e_mean);
        sey += (ei - e_mean) * (yi - y_mean);
    }
    let amp = if see > 0.0 { sey / see } else { 0.0 };
    let c = y_mean - amp * e_mean;
    let ss: f64 = e
        .iter()
        .zip(y)
        .map(|(ei, yi)| (yi - c - amp * ei).powi(2))
        .sum();
    ((c, amp), (ss / n).sqrt())
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Settings of one ITM run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ItmConfig {
    /// Time step Δt in ps.
    pub dt: f64,
    pub dk_max: usize,
    /// Propagation length in ps.
    pub t_max: f64,
    pub sample_every: usize,
    pub initial_state: InitialState,
    pub observable: Observable,
}

impl Default for ItmConfig {
    fn default() -> Self {
        Self {
            dt: 12.707,
            dk_max: 1,
            t_max: 3.0e6,
            sample_every: 64,
            initial_state: InitialState::Plus,
            observable: Observable::AbsRho01,
        }
    }
}

impl ItmConfig {
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt + 1e-9).floor() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0)
            || !(self.t_max >= self.dt)
            || self.dk_max == 0
            || self.sample_every == 0
        {
            return Err(Error::domain(format!(
                "need dt > 0, t_max >= dt, dk_max >= 1 and sample_every >= 1, got dt = {}, t_max = {}, dk_max = {}, sample_every = {}",
                self.dt, self.t_max, self.dk_max, self.sample_every
            )));
        }
        if self.dk_max > self.n_steps() {
            return Err(Error::domain(format!(
                "memory span {} exceeds the {} propagation steps",
                self.dk_max,
                self.n_steps()
            )));
        }
        Ok(())
    }
}

/// Runs the ITM propagation for one configuration.
pub fn run_itm(
    params: &QubitParameters,
    bath: &BathModel,
    config: &ItmConfig,
    strategy: Strategy,
) -> Result<Trajectory> {
    config.validate()?;
    let n_steps = config.n_steps();
    let table = eta_coefficients_with(bath, config.dt, n_steps, config.dk_max, strategy)?;
    let k = params.short_time_propagator(config.dt)?;
    let transfer = build_transfer_tensor(&k, &table);
    let rho0 = config.initial_state.density_matrix()?;
    propagate_with(
        &rho0,
        &transfer,
        &table,
        n_steps,
        config.sample_every,
        strategy,
    )
}

/// Markovian and ITM decoherence times side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub qubit: QubitParameters,
    pub bath: BathModel,
    pub itm: ItmConfig,
    pub tau1_bloch: f64,
    pub tau2_bloch: f64,
    pub tau2_itm: f64,
    pub fit: DecayFit,
    /// tau2_itm / tau2_bloch
    pub ratio: f64,
}

impl ComparisonReport {
    pub const CSV_HEADER: &'static str = "e_j_ueV,e_c_ueV,n_g,alpha,omega_c_per_ps,temperature_mK,dt_ps,dk_max,t_max_ps,sample_every,initial_state,observable,tau1_bloch_us,tau2_bloch_us,tau2_itm_us,c0,c_inf,rms_residual,ratio";

    pub fn to_csv_row(&self) -> String {
        let f = fmt_num;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            f(self.qubit.e_j),
            f(self.qubit.e_c),
            f(self.qubit.n_g),
            f(self.bath.alpha),
            f(self.bath.omega_c),
            f(self.bath.temperature),
            f(self.itm.dt),
            self.itm.dk_max,
            f(self.itm.t_max),
            self.itm.sample_every,
            self.itm.initial_state,
            self.itm.observable,
            f(self.tau1_bloch),
            f(self.tau2_bloch),
            f(self.tau2_itm),
            f(self.fit.c0),
            f(self.fit.c_inf),
            f(self.fit.rms_residual),
            f(self.ratio),
        )
    }

    /// Flat `key = value` block.
    pub fn to_text(&self) -> String {
        let rows: [(&str, String); 19] = [
            ("e_j_ueV", self.qubit.e_j.to_string()),
            ("e_c_ueV", self.qubit.e_c.to_string()),
            ("n_g", self.qubit.n_g.to_string()),
            ("alpha", self.bath.alpha.to_string()),
            ("omega_c_per_ps", self.bath.omega_c.to_string()),
            ("temperature_mK", self.bath.temperature.to_string()),
            ("dt_ps", self.itm.dt.to_string()),
            ("dk_max", self.itm.dk_max.to_string()),
            ("t_max_ps", self.itm.t_max.to_string()),
            ("sample_every", self.itm.sample_every.to_string()),
            ("initial_state", self.itm.initial_state.to_string()),
            ("observable", self.itm.observable.to_string()),
            ("tau1_bloch_us", format!("{:.6}", self.tau1_bloch)),
            ("tau2_bloch_us", format!("{:.6}", self.tau2_bloch)),
            ("tau2_itm_us", format!("{:.6}", self.tau2_itm)),
            ("fit_c0", format!("{:.6}", self.fit.c0)),
            ("fit_c_inf", format!("{:.6}", self.fit.c_inf)),
            ("fit_rms_residual", format!("{:e}", self.fit.rms_residual)),
            ("ratio", format!("{:.6}", self.ratio)),
        ];
        rows.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Runs the Bloch estimate and the ITM propagation plus fit.
pub fn compare(
    params: &QubitParameters,
    bath: &BathModel,
    itm: &ItmConfig,
) -> Result<ComparisonReport> {
    compare_with(params, bath, itm, Strategy::default())
}

pub fn compare_with(
    params: &QubitParameters,
    bath: &BathModel,
    itm: &ItmConfig,
    strategy: Strategy,
) -> Result<ComparisonReport> {
    let bloch = bloch_decoherence_time(params, bath)?;
    let trajectory = run_itm(params, bath, itm, strategy)?;
    let fit = fit_decay(&trajectory, itm.observable)?;
    Ok(ComparisonReport {
        qubit: *params,
        bath: *bath,
        itm: *itm,
        tau1_bloch: bloch.tau1,
        tau2_bloch: bloch.tau2,
        tau2_itm: fit.tau,
        fit,
        ratio: fit.tau / bloch.tau2,
    })
}

/// Runs [`compare`] for every case; cases are independent and run
/// concurrently under `Strategy::Parallel`.
pub fn compare_sweep(
    cases: &[(QubitParameters, BathModel, ItmConfig)],
    strategy: Strategy,
) -> Vec<Result<ComparisonReport>> {
    exec::map_items(strategy, cases, |(q, b, c)| {
        compare_with(q, b, c, Strategy::Sequential)
    })
}
