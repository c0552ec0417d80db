//! Pilot-wave trajectories, von Neumann pointer couplings and two-state
//! weak values.
//!
//! Units are hbar = m = 1 throughout. The numerical core is generic over the
//! scalar type (see [`scalar`]); the aliases below fix the common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod guidance;
pub mod idealized;
pub mod propagate;
pub mod protective;
pub mod qfield;
pub mod scalar;
pub mod scenarios;
pub mod tsvf;

pub use error::{Error, Result};
pub use scalar::{f256, Real, SpectralReal};

pub type Grid1D = qfield::Grid1D<f64>;
pub type WaveFunction1D = qfield::WaveFunction1D<f64>;
pub type WaveFunction2D = qfield::WaveFunction2D<f64>;
pub type SpinorWaveFunction1D = qfield::SpinorWaveFunction1D<f64>;
pub type PacketSpec = qfield::PacketSpec<f64>;
pub type EnergyEigenstate = qfield::EnergyEigenstate<f64>;
