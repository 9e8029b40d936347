//! DRX power saving with packet coalescing for LTE user equipment.
//!
//! The crate has two halves. [`analytic`] evaluates the closed-form mean
//! queueing delay of coalesced DRX and the stability of the threshold
//! controller. [`sim`] is a discrete-event simulator of a single UE that
//! measures the same quantities under standard DRX, a fixed coalescing
//! threshold, or the adaptive controller in [`controller`].
//!
//! [`experiment`] wraps the simulator in a small text format for parameter
//! sweeps with CSV output.

pub mod analytic;
pub mod controller;
pub mod drx;
pub mod error;
pub mod experiment;
pub mod sim;
pub mod traffic;

pub use error::{Error, Result};
