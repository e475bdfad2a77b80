//! Weak-value amplification controlled through qubit correlations.
//!
//! A target qubit is weakly coupled to a Gaussian meter while a control
//! qubit, correlated with it, is post-selected or ignored. The crate gives
//! closed-form weak values, a quadrature oracle that checks them, and
//! sweeps that regenerate the figure datasets.
//!
//! The physics is generic over [`Real`] (`f32` or `f64`); the aliases below
//! fix the common instantiations. Sweeps and the command line run in `f64`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod correlations;
pub mod error;
pub mod linalg;
pub mod meter;
pub mod multiqubit;
pub mod oracle;
pub mod roots;
pub mod scalar;
pub mod states;
pub mod sweep;
pub mod weakvalue;

pub use error::{Result, WvaError};
pub use scalar::Real;

pub type BellDiagonal64 = states::BellDiagonalState<f64>;
pub type BellDiagonal32 = states::BellDiagonalState<f32>;
pub type PostSelection64 = states::PostSelection<f64>;
pub type PostSelection32 = states::PostSelection<f32>;
pub type TwoQubitDensity64 = states::TwoQubitDensity<f64>;
pub type ThreeQubitPure64 = states::ThreeQubitPure<f64>;
pub type MeterProfile64 = meter::MeterProfile<f64>;
pub type MeterProfile32 = meter::MeterProfile<f32>;
pub type Coupling64 = weakvalue::CouplingSchedule<f64>;
pub type Coupling32 = weakvalue::CouplingSchedule<f32>;
pub type WeakValueReport64 = weakvalue::WeakValueReport<f64>;
pub type WeakValueReport32 = weakvalue::WeakValueReport<f32>;
pub type CorrelationReport64 = correlations::CorrelationReport<f64>;
pub type ControlConfig64 = weakvalue::ControlConfig<f64>;
pub type ThreeQubitScenario64 = multiqubit::ThreeQubitScenario<f64>;
