//! Discrete-time-crystal characterization of quantum processors.
//!
//! A seeded DTC cycle unitary is built for a linear chain ([`dtc`]), mapped
//! onto a covering set of device layouts ([`coverage`]), executed under a
//! noise model ([`sim`], [`harness`]) and scored by visible cycles
//! ([`analysis`]).

pub mod analysis;
pub mod counts;
pub mod coverage;
pub mod dtc;
pub mod error;
pub mod harness;
pub mod noise;
pub mod par;
pub mod qasm;
pub mod rng;
pub mod sim;
pub mod trace;

pub use error::{Error, Result};
