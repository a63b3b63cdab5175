//! The bare charge qubit: effective fields, Hamiltonian, exact short-time
//! propagator and density matrices.
//!
//! Basis order is (|↓⟩, |↑⟩) = ((1,0)ᵀ, (0,1)ᵀ) with the standard Pauli
//! matrices, so basis state 0 carries σ_z = +1.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::influence::SpinPair;
use crate::units::HBAR;

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn mat_mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[i][0] * b[0][j] + a[i][1] * b[1][j]))
}

pub fn adjoint(a: &Matrix2) -> Matrix2 {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i].conj()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitParameters {
    /// Josephson energy E_J in μeV.
    pub e_j: f64,
    /// Charging energy E_C in μeV.
    pub e_c: f64,
    /// Dimensionless gate charge n_g.
    pub n_g: f64,
}

impl QubitParameters {
    pub fn new(e_j: f64, e_c: f64, n_g: f64) -> Result<Self> {
        if !(e_j > 0.0) || !(e_c > 0.0) || !n_g.is_finite() {
            return Err(Error::domain(format!(
                "need E_J > 0, E_C > 0 and finite n_g, got ({e_j}, {e_c}, {n_g})"
            )));
        }
        Ok(Self { e_j, e_c, n_g })
    }

    pub fn b_x(&self) -> f64 {
        self.e_j
    }

    pub fn b_z(&self) -> f64 {
        4.0 * self.e_c * (1.0 - 2.0 * self.n_g)
    }

    /// Natural frequency ω₀ = |B|/ℏ in ps⁻¹.
    pub fn natural_frequency(&self) -> f64 {
        self.b_x().hypot(self.b_z()) / HBAR
    }

    /// H_s = −½B_z σ_z − ½B_x σ_x.
    pub fn hamiltonian(&self) -> Matrix2 {
        let (bx, bz) = (self.b_x(), self.b_z());
        [
            [
                Complex64::new(-0.5 * bz, 0.0),
                Complex64::new(-0.5 * bx, 0.0),
            ],
            [
                Complex64::new(-0.5 * bx, 0.0),
                Complex64::new(0.5 * bz, 0.0),
            ],
        ]
    }

    /// U = exp(−iH_sΔt/ℏ) = cos θ·I + i sin θ·(n̂·σ), θ = |B|Δt/(2ℏ).
    pub fn unitary(&self, dt: f64) -> Matrix2 {
        let (bx, bz) = (self.b_x(), self.b_z());
        let b = bx.hypot(bz);
        let theta = 0.5 * b * dt / HBAR;
        let (s, c) = theta.sin_cos();
        let (nx, nz) = if b > 0.0 {
            (bx / b, bz / b)
        } else {
            (0.0, 0.0)
        };
        [
            [Complex64::new(c, s * nz), Complex64::new(0.0, s * nx)],
            [Complex64::new(0.0, s * nx), Complex64::new(c, -s * nz)],
        ]
    }

    pub fn short_time_propagator(&self, dt: f64) -> Result<PropagatorK> {
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::domain(format!(
                "time step must be non-negative, got {dt}"
            )));
        }
        Ok(PropagatorK::from_unitary(self.unitary(dt)))
    }
}

/// K(s_k^±, s_{k+1}^±) = ⟨s⁺_{k+1}|U|s⁺_k⟩·⟨s⁻_k|U†|s⁻_{k+1}⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorK {
    pub unitary: Matrix2,
    /// `k[from][to]` over flattened spin-pair indices.
    pub k: [[Complex64; 4]; 4],
}

impl PropagatorK {
    pub fn from_unitary(u: Matrix2) -> Self {
        let k = std::array::from_fn(|from| {
            let a = SpinPair::from_index(from);
            std::array::from_fn(|to| {
                let b = SpinPair::from_index(to);
                let (ap, am) = (
                    SpinPair::basis_index(a.s_plus),
                    SpinPair::basis_index(a.s_minus),
                );
                let (bp, bm) = (
                    SpinPair::basis_index(b.s_plus),
                    SpinPair::basis_index(b.s_minus),
                );
                u[bp][ap] * u[bm][am].conj()
            })
        });
        Self { unitary: u, k }
    }

    /// K for α = 0 and Δt = 0.
    pub fn identity() -> Self {
        Self::from_unitary([[ONE, ZERO], [ZERO, ONE]])
    }
}

/// 2×2 density matrix in the σ_z basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedDensityMatrix(pub Matrix2);

impl ReducedDensityMatrix {
    pub const HERMITICITY_TOL: f64 = 1e-12;
    pub const TRACE_TOL: f64 = 1e-10;
    pub const NEGATIVITY_TOL: f64 = 1e-8;

    /// Validating constructor: hermitian, unit trace, no eigenvalue below
    /// −10⁻⁸.
    pub fn new(m: Matrix2) -> Result<Self> {
        let rho = Self(m);
        if rho.hermiticity_error() > Self::HERMITICITY_TOL
            || m[0][0].im.abs() > Self::HERMITICITY_TOL
            || m[1][1].im.abs() > Self::HERMITICITY_TOL
        {
            return Err(Error::domain("density matrix is not hermitian"));
        }
        if (rho.trace() - 1.0).norm() > Self::TRACE_TOL {
            return Err(Error::domain(format!(
                "density matrix trace is {}",
                rho.trace()
            )));
        }
        if rho.min_eigenvalue() < -Self::NEGATIVITY_TOL {
            return Err(Error::domain(format!(
                "density matrix has eigenvalue {}",
                rho.min_eigenvalue()
            )));
        }
        Ok(rho)
    }

    /// Wraps propagated entries without validation.
    pub fn from_entries(m: Matrix2) -> Self {
        Self(m)
    }

    pub(crate) fn from_pairs(v: [Complex64; 4]) -> Self {
        Self([[v[0], v[1]], [v[2], v[3]]])
    }

    pub(crate) fn to_pairs(self) -> [Complex64; 4] {
        let m = self.0;
        [m[0][0], m[0][1], m[1][0], m[1][1]]
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.0[a][b]
    }

    pub fn rho00(&self) -> f64 {
        self.0[0][0].re
    }

    pub fn rho11(&self) -> f64 {
        self.0[1][1].re
    }

    pub fn rho01(&self) -> Complex64 {
        self.0[0][1]
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn hermiticity_error(&self) -> f64 {
        (self.0[1][0] - self.0[0][1].conj()).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = 0.5 * (self.0[0][1] + self.0[1][0].conj());
        0.5 * (a + d) - (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt()
    }

    /// Largest elementwise modulus of `self − other`.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                m = m.max((self.0[i][j] - other.0[i][j]).norm());
            }
        }
        m
    }

    /// U ρ U†.
    pub fn evolve_unitary(&self, u: &Matrix2) -> Self {
        Self(mat_mul(&mat_mul(u, &self.0), &adjoint(u)))
    }
}

/// Named initial qubit states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// ½(|0⟩ + |1⟩)(⟨0| + ⟨1|)
    Plus,
    Zero,
    One,
    Custom(Matrix2),
}

impl InitialState {
    pub fn density_matrix(&self) -> Result<ReducedDensityMatrix> {
        let h = Complex64::new(0.5, 0.0);
        match *self {
            InitialState::Plus => ReducedDensityMatrix::new([[h, h], [h, h]]),
            InitialState::Zero => ReducedDensityMatrix::new([[ONE, ZERO], [ZERO, ZERO]]),
            InitialState::One => ReducedDensityMatrix::new([[ZERO, ZERO], [ZERO, ONE]]),
            InitialState::Custom(m) => ReducedDensityMatrix::new(m),
        }
    }
}

pub fn initial_state(kind: InitialState) -> Result<ReducedDensityMatrix> {
    kind.density_matrix()
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Plus => f.write_str("plus"),
            InitialState::Zero => f.write_str("zero"),
            InitialState::One => f.write_str("one"),
            InitialState::Custom(m) => write!(
                f,
                "custom:{},{},{},{}",
                m[0][0].re, m[0][1].re, m[0][1].im, m[1][1].re
            ),
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    /// `plus`, `zero`, `one` or `custom:rho00,re_rho01,im_rho01,rho11`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "plus" => Ok(InitialState::Plus),
            "zero" => Ok(InitialState::Zero),
            "one" => Ok(InitialState::One),
            other => {
                let body = other
                    .strip_prefix("custom:")
                    .ok_or_else(|| Error::domain(format!("unknown initial state '{other}'")))?;
                let v = body
                    .split(',')
                    .map(|x| x.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| Error::domain(format!("bad custom state '{body}': {e}")))?;
                let [p00, re01, im01, p11] = v[..] else {
                    return Err(Error::domain(
                        "custom state needs rho00,re_rho01,im_rho01,rho11",
                    ));
                };
                let m = [
                    [Complex64::new(p00, 0.0), Complex64::new(re01, im01)],
                    [Complex64::new(re01, -im01), Complex64::new(p11, 0.0)],
                ];
                ReducedDensityMatrix::new(m)?;
                Ok(InitialState::Custom(m))
            }
        }
    }
}
