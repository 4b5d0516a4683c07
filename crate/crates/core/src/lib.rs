//! Numerical exploration of limit cones, growth indicators and pressure for
//! Anosov representations of free groups.

pub mod cli;
pub mod counting;
pub mod error;
pub mod growth;
pub mod pressure;
pub mod repgen;
pub mod sample;
pub mod spectra;
pub mod stats;
pub mod words;

pub use error::{Error, ErrorClass, Result};
pub use repgen::Representation;
pub use spectra::{CartanVector, Functional};
pub use words::{ConjugacyClass, Letter, Word};
