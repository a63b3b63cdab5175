//! Discretized Feynman–Vernon influence functional.
//!
//! The path is sampled at points k = 0..N. Point k stands for the cell
//! [(k−½)Δt, (k+½)Δt]; the first and last points own half cells [0, Δt/2]
//! and [NΔt − Δt/2, NΔt]. The coefficient η_{kk′} is the double time
//! integral of γ(t′ − t″) over the two cells (t′ in the later one), and the
//! self coefficient η_kk integrates the ordered triangle t″ < t′ of a
//! single cell. Both are evaluated in the frequency domain, where the cell
//! geometry becomes a window factor that is regular at ω = 0.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::bath::{BathModel, MAX_SEGMENTS};
use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::quadrature::{self, Tolerance};
use crate::units::HBAR;

/// Forward/backward values of σ_z at one path point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinPair {
    pub s_plus: i8,
    pub s_minus: i8,
}

impl SpinPair {
    /// All four pairs in index order (see [`index`](Self::index)).
    pub const ALL: [SpinPair; 4] = [
        SpinPair {
            s_plus: 1,
            s_minus: 1,
        },
        SpinPair {
            s_plus: 1,
            s_minus: -1,
        },
        SpinPair {
            s_plus: -1,
            s_minus: 1,
        },
        SpinPair {
            s_plus: -1,
            s_minus: -1,
        },
    ];

    pub fn new(s_plus: i8, s_minus: i8) -> Result<Self> {
        if s_plus.abs() != 1 || s_minus.abs() != 1 {
            return Err(Error::domain(format!(
                "spin values must be ±1, got ({s_plus}, {s_minus})"
            )));
        }
        Ok(Self { s_plus, s_minus })
    }

    /// Basis index of a σ_z value: +1 ↦ 0, −1 ↦ 1.
    pub fn basis_index(s: i8) -> usize {
        usize::from(s < 0)
    }

    /// Flattened index 2·a + b where a, b are the forward and backward basis
    /// indices; it addresses ρ_ab in row-major order.
    pub fn index(self) -> usize {
        2 * Self::basis_index(self.s_plus) + Self::basis_index(self.s_minus)
    }

    pub fn from_index(i: usize) -> Self {
        Self::ALL[i]
    }

    pub fn is_diagonal(self) -> bool {
        self.s_plus == self.s_minus
    }
}

/// Which discretization cells a pair coefficient couples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PairClass {
    InteriorInterior,
    EndpointInterior,
    EndpointEndpoint,
}

impl PairClass {
    pub const ALL: [PairClass; 3] = [
        PairClass::InteriorInterior,
        PairClass::EndpointInterior,
        PairClass::EndpointEndpoint,
    ];

    /// Class of the pair (early, late) on a path whose last point is `last`.
    pub fn of(early: usize, late: usize, last: usize) -> Self {
        match (early == 0, late == last) {
            (true, true) => PairClass::EndpointEndpoint,
            (false, false) => PairClass::InteriorInterior,
            _ => PairClass::EndpointInterior,
        }
    }

    fn slot(self) -> usize {
        match self {
            PairClass::InteriorInterior => 0,
            PairClass::EndpointInterior => 1,
            PairClass::EndpointEndpoint => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PairClass::InteriorInterior => "interior-interior",
            PairClass::EndpointInterior => "endpoint-interior",
            PairClass::EndpointEndpoint => "endpoint-endpoint",
        }
    }
}

impl fmt::Display for PairClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Influence-functional coefficients for one time step and memory span.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaTable {
    pub dt: f64,
    pub n_steps: usize,
    pub dk_max: usize,
    pub eta_self_interior: Complex64,
    pub eta_self_end: Complex64,
    /// `eta_pair[dk - 1][class]`.
    eta_pair: Vec<[Complex64; 3]>,
}

impl EtaTable {
    /// η_{k,k−dk} for 1 ≤ dk ≤ dk_max.
    pub fn pair(&self, dk: usize, class: PairClass) -> Complex64 {
        assert!(
            dk >= 1 && dk <= self.dk_max,
            "dk = {dk} outside 1..={}",
            self.dk_max
        );
        self.eta_pair[dk - 1][class.slot()]
    }

    pub fn self_term(&self, endpoint: bool) -> Complex64 {
        if endpoint {
            self.eta_self_end
        } else {
            self.eta_self_interior
        }
    }

    /// The same coefficients with the memory span cut down to `dk_max`.
    pub fn truncated(&self, dk_max: usize) -> Result<Self> {
        if dk_max == 0 || dk_max > self.dk_max {
            return Err(Error::domain(format!(
                "cannot truncate memory span {} to {dk_max}",
                self.dk_max
            )));
        }
        let mut t = self.clone();
        t.dk_max = dk_max;
        t.eta_pair.truncate(dk_max);
        Ok(t)
    }

    /// CSV with columns dk, class, re_eta, im_eta. Self coefficients are
    /// listed with dk = 0 and class `interior` or `endpoint`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dk,class,re_eta,im_eta\n");
        for (label, eta) in [
            ("interior", self.eta_self_interior),
            ("endpoint", self.eta_self_end),
        ] {
            out.push_str(&format!(
                "0,{label},{},{}\n",
                fmt_num(eta.re),
                fmt_num(eta.im)
            ));
        }
        for dk in 1..=self.dk_max {
            for class in PairClass::ALL {
                let eta = self.pair(dk, class);
                out.push_str(&format!(
                    "{dk},{class},{},{}\n",
                    fmt_num(eta.re),
                    fmt_num(eta.im)
                ));
            }
        }
        out
    }
}

/// Fixed CSV number format: scientific, 12 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// sin(ωa)·sin(ωb)/ω², continued to a·b at ω = 0.
fn sin_window(omega: f64, a: f64, b: f64) -> f64 {
    if omega * a.max(b) < 1e-4 {
        a * b * (1.0 - omega * omega * (a * a + b * b) / 6.0)
    } else {
        (omega * a).sin() * (omega * b).sin() / (omega * omega)
    }
}

/// (ωh − sin ωh)/ω², continued through its small-ω series.
fn ordered_sine_window(omega: f64, h: f64) -> f64 {
    let x = omega * h;
    if x < 1e-3 {
        omega * h.powi(3) / 6.0 * (1.0 - x * x / 20.0)
    } else {
        (x - x.sin()) / (omega * omega)
    }
}

fn tolerance(bath: &BathModel) -> Tolerance {
    Tolerance::new(1e-13 * 2.0 * HBAR * bath.alpha, 1e-11)
}

/// ∫_{late}dt′∫_{early}dt″ γ(t′ − t″) for two disjoint cells whose centers
/// are `separation` apart and whose widths are `w_early`, `w_late`.
pub fn cell_pair_integral(
    bath: &BathModel,
    separation: f64,
    w_early: f64,
    w_late: f64,
) -> Result<Complex64> {
    if bath.alpha == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (ha, hb) = (0.5 * w_early, 0.5 * w_late);
    let reach = separation + ha + hb;
    let width = (PI / reach).min(0.5 * bath.omega_c);
    let points = quadrature::uniform_breakpoints(0.0, bath.max_frequency(), width);
    let integral = quadrature::integrate(
        |w| {
            let g = 4.0 / PI * sin_window(w, ha, hb);
            let (s, c) = (w * separation).sin_cos();
            Complex64::new(g * bath.j_coth(w) * c, -g * bath.j(w) * s)
        },
        &points,
        tolerance(bath),
        MAX_SEGMENTS,
    )?;
    Ok(integral.value)
}

/// ∫_0^h dt′∫_0^{t′} dt″ γ(t′ − t″).
pub fn cell_self_integral(bath: &BathModel, h: f64) -> Result<Complex64> {
    if bath.alpha == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let width = (PI / h).min(0.5 * bath.omega_c);
    let points = quadrature::uniform_breakpoints(0.0, bath.max_frequency(), width);
    let integral = quadrature::integrate(
        |w| {
            let half = 0.5 * w * h;
            let re = if half < 1e-4 {
                0.5 * h * h * (1.0 - half * half / 3.0)
            } else {
                2.0 * half.sin().powi(2) / (w * w)
            };
            Complex64::new(bath.j_coth(w) * re, -bath.j(w) * ordered_sine_window(w, h)) / PI
        },
        &points,
        tolerance(bath),
        MAX_SEGMENTS,
    )?;
    Ok(integral.value)
}

/// Builds the η table for time step `dt` and memory span `dk_max`.
pub fn eta_coefficients(
    bath: &BathModel,
    dt: f64,
    n_steps: usize,
    dk_max: usize,
) -> Result<EtaTable> {
    eta_coefficients_with(bath, dt, n_steps, dk_max, Strategy::default())
}

pub fn eta_coefficients_with(
    bath: &BathModel,
    dt: f64,
    n_steps: usize,
    dk_max: usize,
    strategy: Strategy,
) -> Result<EtaTable> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!(
            "time step must be positive, got {dt}"
        )));
    }
    if dk_max == 0 || dk_max > n_steps {
        return Err(Error::domain(format!(
            "memory span must satisfy 1 <= dk_max <= n_steps, got dk_max = {dk_max}, n_steps = {n_steps}"
        )));
    }

    #[derive(Clone, Copy)]
    enum Job {
        SelfCell(f64),
        Pair {
            separation: f64,
            w_early: f64,
            w_late: f64,
        },
    }
    let mut jobs = vec![Job::SelfCell(dt), Job::SelfCell(0.5 * dt)];
    for dk in 1..=dk_max {
        let dk = dk as f64;
        jobs.push(Job::Pair {
            separation: dk * dt,
            w_early: dt,
            w_late: dt,
        });
        jobs.push(Job::Pair {
            separation: (dk - 0.25) * dt,
            w_early: 0.5 * dt,
            w_late: dt,
        });
        jobs.push(Job::Pair {
            separation: (dk - 0.5) * dt,
            w_early: 0.5 * dt,
            w_late: 0.5 * dt,
        });
    }
    let values = exec::map_items(strategy, &jobs, |job| match *job {
        Job::SelfCell(h) => cell_self_integral(bath, h),
        Job::Pair {
            separation,
            w_early,
            w_late,
        } => cell_pair_integral(bath, separation, w_early, w_late),
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let eta_pair = values[2..]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok(EtaTable {
        dt,
        n_steps,
        dk_max,
        eta_self_interior: values[0],
        eta_self_end: values[1],
        eta_pair,
    })
}

/// I₀ = exp{−(1/ℏ)(s⁺ − s⁻)(η s⁺ − η* s⁻)}.
pub fn influence_factor_i0(pair: SpinPair, eta_self: Complex64) -> Complex64 {
    influence_factor_idk(pair, pair, eta_self)
}

/// I_Δk = exp{−(1/ℏ)(s_late⁺ − s_late⁻)(η s_early⁺ − η* s_early⁻)}.
pub fn influence_factor_idk(early: SpinPair, late: SpinPair, eta: Complex64) -> Complex64 {
    let ds = f64::from(late.s_plus - late.s_minus);
    if ds == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let mix = eta * f64::from(early.s_plus) - eta.conj() * f64::from(early.s_minus);
    (-(mix * ds) / HBAR).exp()
}

/// The 4×4 table of I_Δk over (early, late) pair indices.
pub(crate) fn factor_table(eta: Complex64) -> [[Complex64; 4]; 4] {
    let mut t = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (e, row) in t.iter_mut().enumerate() {
        for (l, v) in row.iter_mut().enumerate() {
            *v = influence_factor_idk(SpinPair::from_index(e), SpinPair::from_index(l), eta);
        }
    }
    t
}

pub(crate) fn self_factors(eta: Complex64) -> [Complex64; 4] {
    std::array::from_fn(|p| influence_factor_i0(SpinPair::from_index(p), eta))
}

/// Product of all I₀ and I_Δk (Δk ≤ dk_max) factors along one
/// forward/backward path of N+1 points.
pub fn assemble_influence(
    path_plus: &[i8],
    path_minus: &[i8],
    table: &EtaTable,
) -> Result<Complex64> {
    if path_plus.len() != path_minus.len() {
        return Err(Error::domain(format!(
            "forward and backward paths differ in length ({} vs {})",
            path_plus.len(),
            path_minus.len()
        )));
    }
    if path_plus.len() < 2 {
        return Err(Error::domain("a path needs at least two points"));
    }
    let pairs = path_plus
        .iter()
        .zip(path_minus)
        .map(|(&p, &m)| SpinPair::new(p, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_pairs(&pairs, table))
}

pub(crate) fn assemble_pairs(pairs: &[SpinPair], table: &EtaTable) -> Complex64 {
    let last = pairs.len() - 1;
    let mut product = Complex64::new(1.0, 0.0);
    for (k, &p) in pairs.iter().enumerate() {
        product *= influence_factor_i0(p, table.self_term(k == 0 || k == last));
    }
    for dk in 1..=table.dk_max.min(last) {
        for early in 0..=last - dk {
            let late = early + dk;
            let eta = table.pair(dk, PairClass::of(early, late, last));
            product *= influence_factor_idk(pairs[early], pairs[late], eta);
        }
    }
    product
}
