//! Ensemble training of variational quantum algorithms over a fleet of
//! simulated noisy devices.

pub mod device;
pub mod ensemble;
pub mod error;
pub mod fidelity;
pub mod noise;
pub mod sampling;
pub mod sim;
pub mod transpiler;
pub mod vqa;

pub use error::{Error, Result};
