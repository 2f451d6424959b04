//! Qubit dynamics on the Bloch sphere.
//!
//! States live on the sphere of rays `CP(1)`, drawn with radius 1/2 so that
//! Fubini-Study distances equal arc lengths. A time-dependent Hamiltonian is
//! integrated either on the full state vector or directly on the sphere; the
//! [`diagnostics`] module relates the resulting motion to the energy
//! uncertainty and to the instantaneous eigenstate, and [`experiment`] wraps
//! both into configurable runs.

pub mod diagnostics;
pub mod drive;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod geometry;
pub mod hamiltonian;
pub mod schedule;

pub use error::{Error, Result};
