//! Independent reference implementations used only by the integration tests.
//! None of them share code paths with the library's frequency-domain
//! quadrature or factorized influence product.

#![allow(dead_code)]

use std::f64::consts::PI;

use quapi::units::HBAR;
use quapi::{BathModel, Complex64, EtaTable, PairClass, QubitParameters};

pub fn reference_bath() -> BathModel {
    BathModel::ohmic(5e-6, 5.0, 30.0).unwrap()
}

pub fn reference_qubit() -> QubitParameters {
    QubitParameters::new(51.8, 122.0, 0.5).unwrap()
}

pub const REFERENCE_DT: f64 = 12.707;

/// ψ′(w) for Re w > 0: upward recurrence to |w| ≥ 20, then the asymptotic
/// series.
pub fn trigamma(mut w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    while w.norm() < 20.0 {
        acc += 1.0 / (w * w);
        w += 1.0;
    }
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    // Bernoulli terms B_2k / w^(2k+1)
    let series = inv
        + 0.5 * inv2
        + inv2
            * inv
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))));
    acc + series
}

/// Closed-form Ohmic response function. Expanding coth as a geometric
/// series turns each term into a Laplace transform of ω·e^{−aω}, and the
/// resulting Hurwitz sum is a trigamma value.
pub fn gamma_closed_form(bath: &BathModel, t: f64) -> Complex64 {
    let a = 1.0 / bath.omega_c;
    let b = bath.beta() * HBAR;
    let z = Complex64::new(a, -t);
    let lead = 1.0 / (z * z);
    let re = lead.re + 2.0 / (b * b) * trigamma(1.0 + z / b).re;
    let im = -lead.im;
    2.0 * HBAR * bath.alpha * Complex64::new(re, im)
}

/// Plain trapezoid rule on [0, 50 ω_C] with `n` intervals.
pub fn gamma_trapezoid(bath: &BathModel, t: f64, n: usize) -> Complex64 {
    let w_max = 50.0 * bath.omega_c;
    let h = w_max / n as f64;
    let half_b = 0.5 * bath.beta() * HBAR;
    let f = |w: f64| -> Complex64 {
        if w == 0.0 {
            return Complex64::new(4.0 * PI * bath.alpha / bath.beta(), 0.0) / PI;
        }
        let j = 2.0 * PI * HBAR * bath.alpha * w * (-w / bath.omega_c).exp();
        let coth = 1.0 / (half_b * w).tanh();
        Complex64::new(j * coth * (w * t).cos(), -j * (w * t).sin()) / PI
    };
    let mut sum = 0.5 * (f(0.0) + f(w_max));
    for i in 1..n {
        sum += f(i as f64 * h);
    }
    sum * h
}

const GL_NODES: [f64; 10] = [
    0.076_526_521_133_497_33,
    0.227_785_851_141_645_08,
    0.373_706_088_715_419_56,
    0.510_867_001_950_827_1,
    0.636_053_680_726_515,
    0.746_331_906_460_150_8,
    0.839_116_971_822_218_8,
    0.912_234_428_251_326,
    0.963_971_927_277_913_8,
    0.993_128_599_185_094_9,
];
const GL_WEIGHTS: [f64; 10] = [
    0.152_753_387_130_725_85,
    0.149_172_986_472_603_75,
    0.142_096_109_318_382_05,
    0.131_688_638_449_176_63,
    0.118_194_531_961_518_42,
    0.101_930_119_817_240_44,
    0.083_276_741_576_704_75,
    0.062_672_048_334_109_06,
    0.040_601_429_800_386_94,
    0.017_614_007_139_152_12,
];

/// 20-point Gauss–Legendre on [a, b].
fn gl20<T, F>(a: f64, b: f64, f: &F) -> T
where
    T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    F: Fn(f64) -> T,
{
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = T::default();
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        acc = acc + (f(mid - half * x) + f(mid + half * x)) * (w * half);
    }
    acc
}

/// Panel edges on [lo, hi], refined near zero lag where γ is sharp.
fn lag_panels(lo: f64, hi: f64) -> Vec<f64> {
    let mut edges = vec![lo, hi];
    let mut x = 0.01;
    while x < 200.0 {
        if x > lo && x < hi {
            edges.push(x);
        }
        x *= if x < 5.0 { 1.05 } else { 1.02 };
    }
    edges.sort_by(f64::total_cmp);
    edges
}

/// ∫_{late} dt′ ∫_{early} dt″ γ(t′ − t″) (restricted to t″ < t′ when the cells
/// coincide), by iterated Gauss–Legendre over lag u = t′ − t″ and offset
/// v = t″. `early` and `late` are closed intervals on the time axis.
pub fn cell_integral_time_domain(
    bath: &BathModel,
    early: (f64, f64),
    late: (f64, f64),
) -> Complex64 {
    let same = early == late;
    let (a, b) = early;
    let (c, d) = late;
    let u_lo = if same { 0.0 } else { c - b };
    let u_hi = d - a;
    // For fixed u, the admissible offsets v satisfy v ∈ [a, b], v + u ∈ [c, d].
    let inner = |u: f64| -> Complex64 {
        let v_lo = a.max(c - u);
        let v_hi = b.min(d - u);
        if v_hi <= v_lo {
            return Complex64::default();
        }
        let g = gamma_closed_form(bath, u);
        gl20(v_lo, v_hi, &|_v: f64| g)
    };
    let mut edges = lag_panels(u_lo, u_hi);
    // kinks of the offset-length function
    for k in [c - a, d - b] {
        if k > u_lo && k < u_hi {
            edges.push(k);
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    edges.windows(2).map(|p| gl20(p[0], p[1], &inner)).sum()
}

/// Time cell of grid point `k` on a grid of `n` steps of width `dt`.
pub fn cell(k: usize, n: usize, dt: f64) -> (f64, f64) {
    let t = k as f64 * dt;
    if k == 0 {
        (0.0, 0.5 * dt)
    } else if k == n {
        (t - 0.5 * dt, t)
    } else {
        (t - 0.5 * dt, t + 0.5 * dt)
    }
}

/// η between grid points `late` ≥ `early` on an `n`-step grid.
pub fn eta_time_domain(
    bath: &BathModel,
    dt: f64,
    n: usize,
    early: usize,
    late: usize,
) -> Complex64 {
    cell_integral_time_domain(bath, cell(early, n, dt), cell(late, n, dt))
}

/// η lookup from a library table, with the endpoint classification done
/// here rather than by the library.
pub fn table_eta(table: &EtaTable, n: usize, early: usize, late: usize) -> Complex64 {
    let end = |k: usize| k == 0 || k == n;
    if early == late {
        return table.self_term(end(early));
    }
    let class = match (end(early), end(late)) {
        (false, false) => PairClass::InteriorInterior,
        (true, true) => PairClass::EndpointEndpoint,
        _ => PairClass::EndpointInterior,
    };
    table.pair(late - early, class)
}

/// Influence functional as one exponential of the full double sum
/// −(1/ℏ) Σ_k Σ_{k′≤k} (s_k⁺ − s_k⁻)(η_{kk′} s_{k′}⁺ − η*_{kk′} s_{k′}⁻).
pub fn influence_monolithic(
    plus: &[i8],
    minus: &[i8],
    eta: impl Fn(usize, usize) -> Complex64,
) -> Complex64 {
    let mut phase = Complex64::default();
    for k in 0..plus.len() {
        let ds = f64::from(plus[k] - minus[k]);
        if ds == 0.0 {
            continue;
        }
        for kp in 0..=k {
            let e = eta(kp, k);
            phase += ds * (e * f64::from(plus[kp]) - e.conj() * f64::from(minus[kp]));
        }
    }
    (-phase / HBAR).exp()
}

/// Every ±1 path of length `len`, as the bits of 0..2^len.
pub fn all_paths(len: usize) -> Vec<Vec<i8>> {
    (0..1usize << len)
        .map(|bits| {
            (0..len)
                .map(|i| if bits >> i & 1 == 0 { 1 } else { -1 })
                .collect()
        })
        .collect()
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}
