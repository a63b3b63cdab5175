//! Iterative tensor multiplication.
//!
//! The augmented tensor holds the partially summed path amplitude over the
//! newest `dk_max` path points, flattened row-major from oldest to newest
//! spin pair. One step appends point n+1, multiplies by the propagator and
//! every influence factor that involves the new point, and then sums out
//! the oldest point once the window is full. Because each point's I₀ is
//! applied when the point enters the window, every self factor is applied
//! exactly once.
//!
//! A sample at point n is read off the tensor at n−1 with a terminal
//! kernel: the new point is the path end, so its self and pair
//! coefficients use the half-cell endpoint classes.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{self, Strategy};
use crate::influence::{self, assemble_pairs, EtaTable, PairClass, SpinPair};
use crate::qubit::{PropagatorK, QubitParameters, ReducedDensityMatrix};

/// Entries above this modulus mean the propagation has blown up.
pub const EXPLOSION_LIMIT: f64 = 4.0;

/// Largest path length accepted by [`brute_force_path_sum`].
pub const BRUTE_FORCE_MAX_STEPS: usize = 10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Windows with at least this many entries are advanced in parallel.
const PARALLEL_MIN_ENTRIES: usize = 4096;

/// Propagation state A over the newest `window` path points.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedTensor {
    pub dk_max: usize,
    /// Index of the oldest point held in the window.
    pub first_point: usize,
    /// Number of points currently held (grows to `dk_max`).
    pub window: usize,
    pub values: Vec<Complex64>,
}

impl AugmentedTensor {
    /// A over the single point 0: ⟨s₀⁺|ρ(0)|s₀⁻⟩ times the first point's
    /// self factor.
    pub fn initial(rho0: &ReducedDensityMatrix, table: &EtaTable) -> Self {
        let i0 = influence::self_factors(table.self_term(true));
        let rho = rho0.to_pairs();
        Self {
            dk_max: table.dk_max,
            first_point: 0,
            window: 1,
            values: (0..4).map(|p| rho[p] * i0[p]).collect(),
        }
    }

    pub fn newest_point(&self) -> usize {
        self.first_point + self.window - 1
    }

    fn check(&self, step: usize) -> Result<()> {
        for v in &self.values {
            if !v.re.is_finite() || !v.im.is_finite() {
                return Err(Error::Instability {
                    step,
                    reason: "non-finite tensor entry".into(),
                });
            }
            if v.norm() > EXPLOSION_LIMIT {
                return Err(Error::Instability {
                    step,
                    reason: format!(
                        "tensor entry modulus {} exceeds {EXPLOSION_LIMIT}",
                        v.norm()
                    ),
                });
            }
        }
        Ok(())
    }
}

/// Single-step kernel: `values[w][b]` multiplies window configuration `w`
/// by the new spin pair `b`. Entries coupling to an old window other than
/// through `w` are structurally zero and not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferTensor {
    pub dk_max: usize,
    pub window: usize,
    pub propagator: PropagatorK,
    pub values: Vec<[Complex64; 4]>,
}

impl TransferTensor {
    /// Dense (4^window × 4^window') matrix from old to new window, row-major.
    /// The new window drops the oldest point when the window is full.
    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        let rows = self.values.len();
        let full = self.window == self.dk_max;
        let cols = if full { rows } else { rows * 4 };
        let mut dense = vec![vec![ZERO; cols]; rows];
        for (w, row) in self.values.iter().enumerate() {
            let keep = if full { w % (rows / 4) } else { w };
            for (b, v) in row.iter().enumerate() {
                dense[w][keep * 4 + b] = *v;
            }
        }
        dense
    }
}

fn kernel(
    k: &PropagatorK,
    table: &EtaTable,
    first_point: usize,
    window: usize,
    terminal: bool,
) -> TransferTensor {
    let new_point = first_point + window;
    let last = if terminal { new_point } else { usize::MAX };
    let self_f = influence::self_factors(table.self_term(terminal));
    let pair_f: Vec<[[Complex64; 4]; 4]> = (1..=window)
        .map(|dk| {
            influence::factor_table(table.pair(dk, PairClass::of(new_point - dk, new_point, last)))
        })
        .collect();

    let rows = 4usize.pow(window as u32);
    let values = (0..rows)
        .map(|w| {
            std::array::from_fn(|b| {
                let newest = w % 4;
                let mut v = k.k[newest][b] * self_f[b];
                let mut rest = w;
                for f in &pair_f {
                    v *= f[rest % 4][b];
                    rest /= 4;
                }
                v
            })
        })
        .collect();
    TransferTensor {
        dk_max: table.dk_max,
        window,
        propagator: *k,
        values,
    }
}

/// Steady-state transfer tensor: full window, no endpoint cell inside it.
pub fn build_transfer_tensor(k: &PropagatorK, table: &EtaTable) -> TransferTensor {
    kernel(k, table, 1, table.dk_max, false)
}

fn advance(a: &AugmentedTensor, t: &TransferTensor, strategy: Strategy) -> AugmentedTensor {
    debug_assert_eq!(a.window, t.window);
    if a.window < a.dk_max {
        let mut values = vec![ZERO; a.values.len() * 4];
        exec::fill_indexed(strategy, &mut values, PARALLEL_MIN_ENTRIES, |o| {
            a.values[o / 4] * t.values[o / 4][o % 4]
        });
        return AugmentedTensor {
            dk_max: a.dk_max,
            first_point: a.first_point,
            window: a.window + 1,
            values,
        };
    }
    let stride = a.values.len() / 4;
    let mut values = vec![ZERO; a.values.len()];
    exec::fill_indexed(strategy, &mut values, PARALLEL_MIN_ENTRIES, |o| {
        let (rest, b) = (o / 4, o % 4);
        (0..4)
            .map(|old| {
                let w = old * stride + rest;
                a.values[w] * t.values[w][b]
            })
            .sum()
    });
    AugmentedTensor {
        dk_max: a.dk_max,
        first_point: a.first_point + 1,
        window: a.window,
        values,
    }
}

fn terminal_contraction(
    a: &AugmentedTensor,
    t: &TransferTensor,
    strategy: Strategy,
) -> ReducedDensityMatrix {
    let partial = exec::map_chunks(strategy, a.values.len(), PARALLEL_MIN_ENTRIES, |range| {
        let mut acc = [ZERO; 4];
        for w in range {
            for (b, slot) in acc.iter_mut().enumerate() {
                *slot += a.values[w] * t.values[w][b];
            }
        }
        acc
    });
    let mut rho = [ZERO; 4];
    for p in partial {
        for b in 0..4 {
            rho[b] += p[b];
        }
    }
    ReducedDensityMatrix::from_pairs(rho)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub rho: ReducedDensityMatrix,
}

/// Time-ordered reduced density matrices, starting at t = 0.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    pub fn max_trace_error(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.rho.trace() - 1.0).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.rho.hermiticity_error())
            .fold(0.0, f64::max)
    }

    pub const CSV_HEADER: &'static str = "t_ps,rho00,rho11,re_rho01,im_rho01,abs_rho01";

    /// CSV with columns t_ps, rho00, rho11, re_rho01, im_rho01, abs_rho01.
    pub fn to_csv(&self) -> String {
        use influence::fmt_num as f;
        let mut out = String::with_capacity(80 * (self.samples.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            let r = &s.rho;
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                f(s.t),
                f(r.rho00()),
                f(r.rho11()),
                f(r.rho01().re),
                f(r.rho01().im),
                f(r.rho01().norm())
            ));
        }
        out
    }
}

/// Propagates `rho0` for `n_steps` steps, sampling every `sample_every`
/// steps and at the final step.
pub fn propagate(
    rho0: &ReducedDensityMatrix,
    transfer: &TransferTensor,
    table: &EtaTable,
    n_steps: usize,
    sample_every: usize,
) -> Result<Trajectory> {
    propagate_with(
        rho0,
        transfer,
        table,
        n_steps,
        sample_every,
        Strategy::default(),
    )
}

pub fn propagate_with(
    rho0: &ReducedDensityMatrix,
    transfer: &TransferTensor,
    table: &EtaTable,
    n_steps: usize,
    sample_every: usize,
    strategy: Strategy,
) -> Result<Trajectory> {
    if n_steps == 0 || sample_every == 0 {
        return Err(Error::domain(
            "n_steps and sample_every must both be at least 1",
        ));
    }
    if transfer.dk_max != table.dk_max || transfer.window != table.dk_max {
        return Err(Error::domain(format!(
            "transfer tensor memory span {} does not match table span {}",
            transfer.dk_max, table.dk_max
        )));
    }
    let k = &transfer.propagator;
    let m = table.dk_max;
    let steady_terminal = kernel(k, table, 1, m, true);

    let mut samples = Vec::with_capacity(n_steps / sample_every + 2);
    samples.push(TrajectorySample { t: 0.0, rho: *rho0 });
    let mut a = AugmentedTensor::initial(rho0, table);

    for n in 1..=n_steps {
        let warm = a.first_point == 0;
        if n % sample_every == 0 || n == n_steps {
            let rho = if warm {
                terminal_contraction(&a, &kernel(k, table, 0, a.window, true), strategy)
            } else {
                terminal_contraction(&a, &steady_terminal, strategy)
            };
            samples.push(TrajectorySample {
                t: n as f64 * table.dt,
                rho,
            });
        }
        if n == n_steps {
            break;
        }
        let next = if warm {
            advance(&a, &kernel(k, table, 0, a.window, false), strategy)
        } else {
            advance(&a, transfer, strategy)
        };
        next.check(n)?;
        a = next;
    }
    Ok(Trajectory { samples })
}

/// Exact enumeration of every forward/backward path of `n_steps` steps,
/// weighted by the propagator chain and the influence functional with
/// memory span min(table.dk_max, n_steps).
pub fn brute_force_path_sum(
    rho0: &ReducedDensityMatrix,
    params: &QubitParameters,
    table: &EtaTable,
    n_steps: usize,
) -> Result<ReducedDensityMatrix> {
    brute_force_path_sum_with(rho0, params, table, n_steps, Strategy::default())
}

pub fn brute_force_path_sum_with(
    rho0: &ReducedDensityMatrix,
    params: &QubitParameters,
    table: &EtaTable,
    n_steps: usize,
    strategy: Strategy,
) -> Result<ReducedDensityMatrix> {
    if n_steps > BRUTE_FORCE_MAX_STEPS {
        return Err(Error::Capacity {
            what: "brute-force path length",
            requested: n_steps,
            limit: BRUTE_FORCE_MAX_STEPS,
        });
    }
    if n_steps == 0 {
        return Err(Error::domain(
            "brute-force path sum needs at least one step",
        ));
    }
    let k = params.short_time_propagator(table.dt)?.k;
    let rho = rho0.to_pairs();
    let points = n_steps + 1;
    let n_paths = 4usize.pow(points as u32);

    let partial = exec::map_chunks(strategy, n_paths, 1 << 12, |range| {
        let mut acc = [ZERO; 4];
        let mut pairs = vec![SpinPair::ALL[0]; points];
        for code in range {
            let mut c = code;
            for p in pairs.iter_mut().rev() {
                *p = SpinPair::from_index(c % 4);
                c /= 4;
            }
            let mut w = rho[pairs[0].index()];
            if w == ZERO {
                continue;
            }
            for step in pairs.windows(2) {
                w *= k[step[0].index()][step[1].index()];
            }
            w *= assemble_pairs(&pairs, table);
            acc[pairs[n_steps].index()] += w;
        }
        acc
    });
    let mut out = [ZERO; 4];
    for p in partial {
        for b in 0..4 {
            out[b] += p[b];
        }
    }
    Ok(ReducedDensityMatrix::from_pairs(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bath::BathModel;
    use crate::influence::eta_coefficients;
    use crate::qubit::InitialState;

    fn reference_qubit() -> QubitParameters {
        QubitParameters::new(51.8, 122.0, 0.5).unwrap()
    }

    fn table(alpha: f64, n: usize, m: usize) -> EtaTable {
        let bath = BathModel::ohmic(alpha, 5.0, 30.0).unwrap();
        eta_coefficients(&bath, 12.707, n, m).unwrap()
    }

    fn run(alpha: f64, m: usize, state: InitialState, n: usize, every: usize) -> Trajectory {
        let t = table(alpha, n.max(m), m);
        let k = reference_qubit().short_time_propagator(12.707).unwrap();
        let tt = build_transfer_tensor(&k, &t);
        propagate(&state.density_matrix().unwrap(), &tt, &t, n, every).unwrap()
    }

    #[test]
    fn decoupled_transfer_tensor_is_bare_propagator() {
        let t = table(0.0, 1, 1);
        let k = reference_qubit().short_time_propagator(12.707).unwrap();
        let tt = build_transfer_tensor(&k, &t);
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(tt.values[a][b], k.k[a][b]);
            }
        }
        let dense = tt.to_dense();
        assert_eq!(dense.len(), 4);
        assert_eq!(dense[2][3], k.k[2][3]);
    }

    #[test]
    fn decoupled_plus_state_is_stationary() {
        for m in [1, 3] {
            let traj = run(0.0, m, InitialState::Plus, 200, 7);
            let rho0 = InitialState::Plus.density_matrix().unwrap();
            for s in &traj.samples {
                assert!(s.rho.max_deviation(&rho0) < 1e-12);
            }
        }
    }

    #[test]
    fn decoupled_zero_state_rabi() {
        let traj = run(0.0, 1, InitialState::Zero, 500, 1);
        let w0 = reference_qubit().natural_frequency();
        assert_eq!(traj.len(), 501);
        for s in &traj.samples {
            assert!((s.rho.rho00() - 0.5 * (1.0 + (w0 * s.t).cos())).abs() < 1e-8);
        }
    }

    #[test]
    fn sampling_cadence_and_final_step() {
        let traj = run(5e-6, 1, InitialState::Plus, 10, 4);
        let steps: Vec<f64> = traj
            .samples
            .iter()
            .map(|s| (s.t / 12.707).round())
            .collect();
        assert_eq!(steps, vec![0.0, 4.0, 8.0, 10.0]);
        assert!(traj.samples.windows(2).all(|w| w[1].t > w[0].t));
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let t1 = table(5e-6, 2, 1);
        let t2 = table(5e-6, 2, 2);
        let k = reference_qubit().short_time_propagator(12.707).unwrap();
        let tt = build_transfer_tensor(&k, &t1);
        let rho = InitialState::Plus.density_matrix().unwrap();
        assert!(propagate(&rho, &tt, &t2, 5, 1).is_err());
        assert!(propagate(&rho, &tt, &t1, 0, 1).is_err());
        assert!(propagate(&rho, &tt, &t1, 5, 0).is_err());
    }

    #[test]
    fn explosion_guard_trips() {
        // An artificially anti-damping self coefficient amplifies coherences.
        let mut t = table(5e-6, 1, 1);
        t.eta_self_interior = Complex64::new(-2000.0, 0.0);
        let k = reference_qubit().short_time_propagator(12.707).unwrap();
        let tt = build_transfer_tensor(&k, &t);
        let rho = InitialState::Plus.density_matrix().unwrap();
        let err = propagate(&rho, &tt, &t, 50, 1).unwrap_err();
        assert!(matches!(err, Error::Instability { .. }), "{err:?}");
    }

    #[test]
    fn brute_force_single_step_without_bath() {
        let t = table(0.0, 1, 1);
        let q = reference_qubit();
        let rho = InitialState::Zero.density_matrix().unwrap();
        let bf = brute_force_path_sum(&rho, &q, &t, 1).unwrap();
        let exact = rho.evolve_unitary(&q.unitary(12.707));
        assert!(bf.max_deviation(&exact) < 1e-15);
    }

    #[test]
    fn brute_force_capacity() {
        let t = table(5e-6, 11, 1);
        let rho = InitialState::Plus.density_matrix().unwrap();
        assert!(matches!(
            brute_force_path_sum(&rho, &reference_qubit(), &t, 11),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn itm_matches_brute_force_with_truncated_memory() {
        // Memory span 2 on a 5-step path: both routes drop the same terms.
        let t = table(5e-6, 5, 2);
        let q = reference_qubit();
        let rho = InitialState::Zero.density_matrix().unwrap();
        let k = q.short_time_propagator(12.707).unwrap();
        let traj = propagate(&rho, &build_transfer_tensor(&k, &t), &t, 5, 5).unwrap();
        let bf = brute_force_path_sum(&rho, &q, &t, 5).unwrap();
        assert!(traj.last().unwrap().rho.max_deviation(&bf) < 1e-12);
    }

    #[test]
    fn strategies_agree_bitwise() {
        let t = table(5e-6, 7, 7);
        let q = reference_qubit();
        let rho = InitialState::Plus.density_matrix().unwrap();
        let k = q.short_time_propagator(12.707).unwrap();
        let tt = build_transfer_tensor(&k, &t);
        let a = propagate_with(&rho, &tt, &t, 7, 1, Strategy::Sequential).unwrap();
        let b = propagate_with(&rho, &tt, &t, 7, 1, Strategy::Parallel).unwrap();
        assert_eq!(a, b);
        let c = brute_force_path_sum_with(&rho, &q, &t, 6, Strategy::Sequential).unwrap();
        let d = brute_force_path_sum_with(&rho, &q, &t, 6, Strategy::Parallel).unwrap();
        assert_eq!(c, d);
    }

    #[test]
    fn csv_layout() {
        let traj = run(5e-6, 1, InitialState::Plus, 3, 1);
        let csv = traj.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), Trajectory::CSV_HEADER);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 6);
        assert_eq!(first[5], "5.00000000000e-1");
        assert_eq!(csv.lines().count(), 5);
    }
}
