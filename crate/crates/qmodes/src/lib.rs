//! Closed-form transition probabilities for time-dependent quadratic
//! bosonic Hamiltonians (frequency converter, parametric amplifier, Raman
//! scattering, and a three-mode converter chain), computed by Lie-group
//! disentangling of the interaction-picture evolution operator and
//! validated against an exact truncated-Fock-space oracle.

pub mod algebra;
pub mod cli;
pub mod disentangle;
pub mod error;
pub mod fock;
pub mod models;
pub mod prng;
pub mod smallmat;
pub mod transition;
pub mod validation;

pub use error::{Error, Result};
