//! Semiclassical wavefunctions that stay regular at turning points and potential
//! maxima, computed from the contour representation
//!
//! ψ(q) = exp(-iS(q)/ħ) ∫ ds exp(2iS(q - s²)/ħ)
//!
//! where S is the classical action at fixed energy.

pub mod action;
pub mod cli;
pub mod config;
pub mod contour;
pub mod error;
pub mod format;
pub mod numerics;
pub mod potential;
pub mod reference;
pub mod wavefunction;

pub use error::{Error, Result};
