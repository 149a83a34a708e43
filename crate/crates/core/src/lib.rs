//! Finite-temperature Casimir interaction between dispersive bodies.
//!
//! The parallel-plate free energy per unit area is a Matsubara sum of
//! reflection-coefficient integrals (the Lifshitz formula); the
//! sphere-plate force follows from it through the proximity force
//! approximation, `F = 2πR·f(a)`. Around that engine sit permittivity
//! models for real metals, thermodynamic post-processing (force
//! differences, entropy, Nernst checks) and the free energy of a pair of
//! strongly anisotropic polarizable particles.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aniso_pair;
pub mod cli_io;
pub mod constants;
pub mod dispersion;
pub mod error;
pub mod lifshitz;
pub mod quadrature;
pub mod reflection;
pub mod summation;
pub mod thermo;

pub use error::{CasimirError, Result};
