//! Channel estimation for analog-beamforming mmWave MIMO links in the
//! transformed spatial domain, plus baselines, bounds and a Monte Carlo
//! harness.

// `!(x > 0.0)` guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bench;
pub mod channel;
pub mod error;
pub mod numkit;
pub mod observation;
pub mod tsdce;

pub use error::{Error, Result};
