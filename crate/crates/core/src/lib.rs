//! Forced motion of a trapped spin-½ ion under a spin-dependent walking wave,
//! inside and outside the Lamb-Dicke regime.
//!
//! * [`fock`], [`operators`], [`phase_space`]: truncated Fock-space states,
//!   walking-wave operators, quadrature moments, squeezing, Wigner functions.
//! * [`classical`]: classical trajectories, return times, excursion laws.
//! * [`quantum`]: Schrödinger propagation of both spin branches.
//! * [`interferometry`]: fringe model, fits and parameter inference.

pub mod classical;
pub mod error;
pub mod fock;
pub mod interferometry;
pub mod lsq;
pub mod ode;
pub mod operators;
pub mod phase_space;
pub mod quantum;
pub mod special;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
