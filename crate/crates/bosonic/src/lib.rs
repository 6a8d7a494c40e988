//! Exact simulation and verification toolkit for multi-photon interference
//! in linear-optical networks.
//!
//! The crate computes exact multi-photon scattering distributions from
//! transfer matrices via matrix permanents, reconstructs transfer matrices
//! from simulated coherent-state probes, models realistic downconversion
//! sources and detectors, and compares prediction sets through interference
//! visibilities and aggregate L1 distances.
//!
//! Start with the runnable programs under `examples/` — there is one per
//! major capability — or with the `bosonic` command-line binary.

pub mod core;
pub mod error;
pub mod measured;
pub mod permanent;
pub mod scattering;

pub use crate::core::{ModeConfiguration, TransferMatrix};
pub use crate::error::{Error, Result};
