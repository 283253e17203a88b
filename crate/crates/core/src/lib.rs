//! Numerical laboratory for frames of the form `{T^n phi}`.
//!
//! The crate decides whether a finite vector family can be written as the
//! orbit of a bounded operator, reconstructs the unique candidate operator
//! from a dual family, ships a diagonal model with certified truncation
//! depths, and measures excess/chain structure and perturbation stability.

pub mod error;
pub mod family;
pub mod frames;
pub mod generate;
pub mod io;
pub mod linalg;
pub mod perturb;
pub mod represent;
pub mod spectral;
pub mod structure;

pub use error::{Error, Result};
pub use family::VectorFamily;
pub use linalg::{CMatrix, CVector, Tolerance, C64};
