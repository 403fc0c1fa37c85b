//! Simulation and training of continuous-variable variational circuits that
//! approximate the solution of one-dimensional initial value problems.
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is a pure
//! function of its inputs; IO, configuration files and the command line live
//! in the companion `cvqode` crate.
//!
//! Layout:
//!
//! * [`fock`] truncated Fock-space states, ladder/quadrature operators and the
//!   five CV gates (displacement, rotation, squeeze, beamsplitter, Kerr).
//! * [`cvqnn`] the layered circuit: displacement input encoding, the
//!   D → U₁ → S → U₂ → K layer and the summed position readout.
//! * [`gradients`] exact derivatives w.r.t. input and parameters, including the
//!   mixed ∂²y/∂θ∂x, plus finite-difference and parameter-shift checks.
//! * [`ode`] collocation cost, its gradient, Adam and the training loop.
//! * [`problems`] the three benchmark problems and an RK4 reference solver.
//! * [`cost`] the wall-clock estimate for running training on hardware.
//! * [`selftest`] gate algebra and gradient consistency checks.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cost;
pub mod cvqnn;
pub mod error;
pub mod fock;
pub mod gradients;
pub mod ode;
pub mod problems;
pub mod rng;
pub mod selftest;

pub use error::{Error, Result};

/// Complex scalar used for every amplitude and matrix entry.
pub type C64 = num_complex::Complex64;
