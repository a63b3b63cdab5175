//! Run configuration and the command implementations behind the `quapi`
//! binary. Commands return their output as strings; the binary decides
//! where it goes.
//!
//! Config files are flat `key = value` text; `#` starts a comment.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{self, bloch_decoherence_time_with, ComparisonReport, ItmConfig, Observable};
use crate::bath::BathModel;
use crate::error::Error;
use crate::exec::Strategy;
use crate::influence::{eta_coefficients_with, fmt_num};
use crate::itm::{self, brute_force_path_sum_with, build_transfer_tensor, propagate_with};
use crate::qubit::{InitialState, QubitParameters};

/// Largest path length accepted by the `oracle` command.
pub const ORACLE_MAX_STEPS: usize = 8;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Numerical(Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(msg) => CliError::Config(msg),
            e @ Error::Capacity { .. } => CliError::Config(e.to_string()),
            other => CliError::Numerical(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Every configuration key, in echo order.
pub const KEYS: [&str; 12] = [
    "e_j_ueV",
    "e_c_ueV",
    "n_g",
    "alpha",
    "omega_c_per_ps",
    "temperature_mK",
    "dt_ps",
    "dk_max",
    "t_max_ps",
    "sample_every",
    "initial_state",
    "output",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub e_j: f64,
    pub e_c: f64,
    pub n_g: f64,
    pub alpha: f64,
    pub omega_c: f64,
    pub temperature: f64,
    pub dt: f64,
    pub dk_max: usize,
    pub t_max: f64,
    pub sample_every: usize,
    pub initial_state: InitialState,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            e_j: 51.8,
            e_c: 122.0,
            n_g: 0.5,
            alpha: 5e-6,
            omega_c: 5.0,
            temperature: 30.0,
            dt: 12.707,
            dk_max: 1,
            t_max: 3.0e6,
            sample_every: 64,
            initial_state: InitialState::Plus,
            output: None,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> CliResult<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| CliError::Config(format!("bad value '{value}' for {key}: {e}")))
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let value = value.trim();
        match key.trim() {
            "e_j_ueV" => self.e_j = parse_num(key, value)?,
            "e_c_ueV" => self.e_c = parse_num(key, value)?,
            "n_g" => self.n_g = parse_num(key, value)?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "omega_c_per_ps" => self.omega_c = parse_num(key, value)?,
            "temperature_mK" => self.temperature = parse_num(key, value)?,
            "dt_ps" => self.dt = parse_num(key, value)?,
            "dk_max" => self.dk_max = parse_num(key, value)?,
            "t_max_ps" => self.t_max = parse_num(key, value)?,
            "sample_every" => self.sample_every = parse_num(key, value)?,
            "initial_state" => {
                self.initial_state = value
                    .parse()
                    .map_err(|e: Error| CliError::Config(e.to_string()))?
            }
            "output" => self.output = (!value.is_empty()).then(|| PathBuf::from(value)),
            other => return Err(CliError::Config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` on top of `self`.
    pub fn merge_str(&mut self, text: &str) -> CliResult<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "line {}: expected 'key = value', got '{raw}'",
                    n + 1
                ))
            })?;
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn from_str_with_defaults(text: &str) -> CliResult<Self> {
        let mut c = Self::default();
        c.merge_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_str_with_defaults(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.qubit()?;
        self.bath()?;
        self.itm(Observable::AbsRho01).validate()?;
        Ok(())
    }

    pub fn qubit(&self) -> CliResult<QubitParameters> {
        Ok(QubitParameters::new(self.e_j, self.e_c, self.n_g)?)
    }

    pub fn bath(&self) -> CliResult<BathModel> {
        Ok(BathModel::ohmic(
            self.alpha,
            self.omega_c,
            self.temperature,
        )?)
    }

    pub fn itm(&self, observable: Observable) -> ItmConfig {
        ItmConfig {
            dt: self.dt,
            dk_max: self.dk_max,
            t_max: self.t_max,
            sample_every: self.sample_every,
            initial_state: self.initial_state,
            observable,
        }
    }

    /// Value of `key` as it is echoed in output headers.
    pub fn value_of(&self, key: &str) -> Option<String> {
        Some(match key {
            "e_j_ueV" => self.e_j.to_string(),
            "e_c_ueV" => self.e_c.to_string(),
            "n_g" => self.n_g.to_string(),
            "alpha" => self.alpha.to_string(),
            "omega_c_per_ps" => self.omega_c.to_string(),
            "temperature_mK" => self.temperature.to_string(),
            "dt_ps" => self.dt.to_string(),
            "dk_max" => self.dk_max.to_string(),
            "t_max_ps" => self.t_max.to_string(),
            "sample_every" => self.sample_every.to_string(),
            "initial_state" => self.initial_state.to_string(),
            "output" => self
                .output
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            _ => return None,
        })
    }

    /// `key = value` lines for every key, each prefixed by `prefix`.
    pub fn echo(&self, prefix: &str) -> String {
        KEYS.iter()
            .map(|k| format!("{prefix}{k} = {}\n", self.value_of(k).unwrap_or_default()))
            .collect()
    }
}

/// γ(t) on `points` uniform intervals of [0, span] (points + 1 rows).
pub fn cmd_response(
    config: &RunConfig,
    span: f64,
    points: usize,
    strategy: Strategy,
) -> CliResult<String> {
    if points < 2 {
        return Err(CliError::Config(format!(
            "need at least 2 points, got {points}"
        )));
    }
    if !(span > 0.0) {
        return Err(CliError::Config(format!(
            "response span must be positive, got {span}"
        )));
    }
    let bath = config.bath()?;
    let times: Vec<f64> = (0..=points)
        .map(|i| span * i as f64 / points as f64)
        .collect();
    let samples = bath.response_grid(&times, strategy)?;
    let mut out = config.echo("# ");
    out.push_str("t_ps,re_gamma,im_gamma\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_num(s.t),
            fmt_num(s.re_gamma),
            fmt_num(s.im_gamma)
        );
    }
    Ok(out)
}

/// Trajectory CSV of one ITM run.
pub fn cmd_evolve(config: &RunConfig, strategy: Strategy) -> CliResult<String> {
    config.validate()?;
    let traj = analysis::run_itm(
        &config.qubit()?,
        &config.bath()?,
        &config.itm(Observable::AbsRho01),
        strategy,
    )?;
    let mut out = config.echo("# ");
    out.push_str(&traj.to_csv());
    Ok(out)
}

/// τ₁ and τ₂ from the Bloch rates, 6 significant digits.
pub fn cmd_bloch(config: &RunConfig, include_cutoff: bool) -> CliResult<String> {
    let times = bloch_decoherence_time_with(&config.qubit()?, &config.bath()?, include_cutoff)?;
    let mut out = config.echo("");
    let _ = writeln!(out, "cutoff_factor = {include_cutoff}");
    let _ = writeln!(out, "tau1_us = {:.5e}", times.tau1);
    let _ = writeln!(out, "tau2_us = {:.5e}", times.tau2);
    Ok(out)
}

/// Text report and CSV (header + row) of the Bloch/ITM comparison.
pub fn cmd_compare(
    config: &RunConfig,
    observable: Observable,
    strategy: Strategy,
) -> CliResult<(String, String)> {
    config.validate()?;
    let report = analysis::compare_with(
        &config.qubit()?,
        &config.bath()?,
        &config.itm(observable),
        strategy,
    )?;
    let mut text = String::new();
    if let Some(p) = &config.output {
        let _ = writeln!(text, "output = {}", p.display());
    }
    text.push_str(&report.to_text());
    let csv = format!(
        "{}\n{}\n",
        ComparisonReport::CSV_HEADER,
        report.to_csv_row()
    );
    Ok((text, csv))
}

/// Max-element deviation between ITM with full memory and the brute-force
/// path sum after `n_steps` steps.
pub fn cmd_oracle(
    config: &RunConfig,
    n_steps: usize,
    strategy: Strategy,
) -> CliResult<(f64, String)> {
    if n_steps > ORACLE_MAX_STEPS {
        return Err(Error::Capacity {
            what: "oracle path length",
            requested: n_steps,
            limit: ORACLE_MAX_STEPS,
        }
        .into());
    }
    if n_steps == 0 {
        return Err(CliError::Config("oracle needs at least one step".into()));
    }
    let qubit = config.qubit()?;
    let table = eta_coefficients_with(&config.bath()?, config.dt, n_steps, n_steps, strategy)?;
    let k = qubit.short_time_propagator(config.dt)?;
    let rho0 = config.initial_state.density_matrix()?;
    let traj = propagate_with(
        &rho0,
        &build_transfer_tensor(&k, &table),
        &table,
        n_steps,
        n_steps,
        strategy,
    )?;
    let itm_rho = traj.last().expect("propagation yields samples").rho;
    let exact = brute_force_path_sum_with(&rho0, &qubit, &table, n_steps, strategy)?;
    let deviation = itm_rho.max_deviation(&exact);
    let mut out = config.echo("");
    let _ = writeln!(out, "oracle_steps = {n_steps}");
    let _ = writeln!(out, "max_deviation = {deviation:e}");
    Ok((deviation, out))
}

/// η table dump for the configured step and memory span.
pub fn cmd_eta(config: &RunConfig, strategy: Strategy) -> CliResult<String> {
    let n = config.dk_max.max(1);
    let table = eta_coefficients_with(&config.bath()?, config.dt, n, config.dk_max, strategy)?;
    let mut out = config.echo("# ");
    out.push_str(&table.to_csv());
    Ok(out)
}

/// One comparison CSV row per config, computed concurrently.
pub fn cmd_sweep(
    configs: &[RunConfig],
    observable: Observable,
    strategy: Strategy,
) -> CliResult<String> {
    let cases = configs
        .iter()
        .map(|c| {
            c.validate()?;
            Ok((c.qubit()?, c.bath()?, c.itm(observable)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = String::from(ComparisonReport::CSV_HEADER);
    out.push('\n');
    for report in analysis::compare_sweep(&cases, strategy) {
        out.push_str(&report?.to_csv_row());
        out.push('\n');
    }
    Ok(out)
}

/// Writes `text` to `path`.
pub fn write_output(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Expected sample count of an evolve run (t = 0, every `sample_every`
/// steps, and the final step).
pub fn expected_rows(config: &RunConfig) -> usize {
    let n = config.itm(Observable::AbsRho01).n_steps();
    1 + n / config.sample_every + usize::from(!n.is_multiple_of(config.sample_every))
}

#[doc(hidden)]
pub use itm::BRUTE_FORCE_MAX_STEPS;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_reference_values() {
        let c = RunConfig::default();
        assert_eq!((c.e_j, c.e_c, c.n_g), (51.8, 122.0, 0.5));
        assert_eq!((c.alpha, c.omega_c, c.temperature), (5e-6, 5.0, 30.0));
        assert_eq!((c.dt, c.dk_max), (12.707, 1));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn parses_key_value_text() {
        let c = RunConfig::from_str_with_defaults(
            "# comment\nalpha = 1e-5\n\n dk_max=3 # trailing\ninitial_state = zero\noutput = out.csv\n",
        )
        .unwrap();
        assert_eq!(c.alpha, 1e-5);
        assert_eq!(c.dk_max, 3);
        assert_eq!(c.initial_state, InitialState::Zero);
        assert_eq!(c.output, Some(PathBuf::from("out.csv")));
    }

    #[test]
    fn rejects_bad_config() {
        for bad in [
            "alpha 1",
            "beta = 2",
            "alpha = x",
            "dt_ps = -1",
            "dk_max = 0",
            "initial_state = up",
        ] {
            let err = RunConfig::from_str_with_defaults(bad).unwrap_err();
            assert_eq!(err.exit_code(), 2, "{bad}: {err}");
        }
    }

    #[test]
    fn echo_round_trips() {
        let mut c = RunConfig::default();
        c.set("alpha", "3.3e-6").unwrap();
        c.set("initial_state", "custom:0.75,0.25,0.1,0.25").unwrap();
        c.set("output", "x.csv").unwrap();
        let echoed = c.echo("");
        let back = RunConfig::from_str_with_defaults(&echoed).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn response_grid_rows() {
        let c = RunConfig::default();
        let csv = cmd_response(&c, 5.0, 10, Strategy::Sequential).unwrap();
        let data: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "t_ps,re_gamma,im_gamma");
        assert_eq!(data.len(), 12);
        assert!(data[1].ends_with(",0.00000000000e0"));
        assert!(cmd_response(&c, 5.0, 1, Strategy::Sequential).is_err());
    }

    #[test]
    fn bloch_rejects_biased_qubit() {
        let c = RunConfig {
            n_g: 0.25,
            ..RunConfig::default()
        };
        let err = cmd_bloch(&c, true).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("B_z"));
    }

    #[test]
    fn oracle_capacity() {
        let c = RunConfig::default();
        let err = cmd_oracle(&c, 9, Strategy::Sequential).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let (dev, _) = cmd_oracle(&c, 3, Strategy::Sequential).unwrap();
        assert!(dev < 1e-10);
    }

    #[test]
    fn expected_row_count() {
        let c = RunConfig::default();
        assert_eq!(expected_rows(&c), 1 + 3688 + 1);
    }
}
