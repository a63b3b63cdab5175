//! Dissipative dynamics of a Josephson charge qubit coupled to an Ohmic bath.
//!
//! The crate evaluates the bath response function, discretizes the
//! Feynman–Vernon influence functional on a quasi-adiabatic time grid and
//! propagates the reduced density matrix with iterative tensor
//! multiplication (ITM). The resulting decoherence time is compared with the
//! Markovian Bloch-equation rate.
//!
//! Internal units are μeV (energy), ps (time), mK (temperature) and ps⁻¹
//! (angular frequency); see [`units`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bath;
pub mod cli;
pub mod error;
pub mod exec;
pub mod influence;
pub mod itm;
pub mod quadrature;
pub mod qubit;
pub mod units;

pub use analysis::{
    bloch_decoherence_time, compare, fit_decay, BlochTimes, ComparisonReport, DecayFit, ItmConfig,
    Observable,
};
pub use bath::{BathModel, ResponseSample};
pub use error::{Error, Result};
pub use exec::Strategy;
pub use influence::{eta_coefficients, EtaTable, PairClass, SpinPair};
pub use itm::{brute_force_path_sum, build_transfer_tensor, propagate, Trajectory, TransferTensor};
pub use qubit::{InitialState, PropagatorK, QubitParameters, ReducedDensityMatrix};

pub use num_complex::Complex64;
