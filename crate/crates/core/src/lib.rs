//! Numerical laboratory for gamma-process counting functions and 1D
//! fixed-energy propagators.
//!
//! The crate has three layers:
//!
//! * arbitrary-precision scaffolding ([`bigreal`], [`policy`], [`error`]);
//! * number-theoretic evaluation: special functions ([`special`]), exact
//!   sieve oracles ([`sieve`]), the counting functions ([`counting`]) and
//!   the straddle expectation machinery ([`goldbach`]);
//! * a small quantum-scattering component ([`propagator`]) with an exact
//!   transfer-matrix reference implementation.

pub mod bigreal;
pub mod counting;
pub mod error;
pub mod goldbach;
pub mod policy;
pub mod propagator;
pub mod sieve;
pub mod special;

pub use bigreal::BigReal;
pub use error::{Error, Result};
pub use policy::{PrecisionPolicy, SeriesResult, MAX_WORKING_DIGITS, MIN_DIGITS};
