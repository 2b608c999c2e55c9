//! Numerical experiments with the (alpha, beta) Ricci-Yamabe flow
//! `dg/dt = -2 alpha Ric - beta R g` on two symmetry-reduced model geometries: conformal
//! metrics on the flat 2-torus and warped products over a circle with round-sphere fibers.
//!
//! The crate provides curvature evaluation, a method-of-lines integrator, closed-form
//! reference solutions, principal-symbol analysis, run monitors and the `ryflow` CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod oracles;
pub mod params;
pub mod symbol;
pub mod verify;

pub use error::{Error, Result};
pub use params::FlowParams;
