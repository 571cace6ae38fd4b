//! Simulation of single-photon polarization qubits under polarization-dependent
//! loss, and of three ways to compensate it: passive attenuation, heralded
//! noiseless attenuation and heralded noiseless amplification.
//!
//! Everything is computed from first principles on a truncated Fock space
//! ([`fock`]) using beam splitters, loss channels and detectors ([`optics`],
//! [`detector`]). The [`oracle`] module evaluates the corresponding closed-form
//! output states independently, so the two routes can be compared.

// range checks are written as `!(x >= lo)` so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detector;
pub mod error;
pub mod fock;
pub mod metrics;
pub mod optics;
pub mod oracle;
pub mod schemes;
pub mod search;
pub mod sweep;

pub use error::{Error, Result};
