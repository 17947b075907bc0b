//! Certified numerical bounds on squashed entanglement.
//!
//! The crate computes upper bounds on `E_sq(ρ) = inf ½ I(A;B|E)` by optimising
//! over channels applied to a purification, upper bounds on the entanglement
//! of formation by optimising over pure-state ensembles, and the hashing
//! lower bound `½(I(A;B) − S(AB))`. Every reported upper bound comes with a
//! certificate (a channel or an ensemble) that can be re-evaluated
//! independently of the optimizer.
//!
//! Alongside the bounds, [`propcheck`] executes the entropic identities and
//! inequalities that make squashed entanglement an additive entanglement
//! monotone, and [`classical`] provides the intrinsic-information analogue
//! for classical triples.
//!
//! All numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix `f64`.

pub mod catalog;
pub mod channel;
pub mod classical;
pub mod entropy;
pub mod error;
pub mod extensions;
pub mod io;
pub mod layout;
pub mod linalg;
pub mod optimizer;
pub mod propcheck;
pub mod rng;
pub mod scalar;
pub mod state;
pub mod stiefel;

pub use channel::{Instrument, QuantumChannel};
pub use error::{Error, Result};
pub use extensions::{Ensemble, Extension};
pub use layout::{Subsystem, SystemLayout};
pub use optimizer::{BoundReport, OptimizerConfig};

pub use scalar::Real;
pub use state::{DensityOperator, InstrumentOutcome, PureState};

/// Double-precision density operator.
pub type Density = DensityOperator<f64>;
/// Double-precision pure state.
pub type Pure = PureState<f64>;
/// Double-precision channel.
pub type Channel = QuantumChannel<f64>;
/// Double-precision extension.
pub type Ext = Extension<f64>;
/// Single-precision density operator.
pub type Density32 = DensityOperator<f32>;
/// Complex double.
pub type Complex64 = nalgebra::Complex<f64>;
