//! Spontaneous parametric down-conversion in quasi-phase-matched crystals
//! pumped by pulsed, spatially structured beams.

pub mod biphoton;
pub mod cli;
pub mod config;
pub mod dispersion;
pub mod error;
pub mod field;
pub mod model;
pub mod numerics;
pub mod output;
pub mod phasematch;
pub mod scenario;

pub use error::{Error, Result};
