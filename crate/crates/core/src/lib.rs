//! Weighted and shifted BDF (WSBDF) multistep schemes of orders 1 to 7:
//! exact construction, stability certification, multiplier verification and
//! time stepping for linear parabolic problems `u' + Au = f`.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod integrator;
pub mod multipliers;
pub mod polyalg;
pub mod schemes;
pub mod stability;

pub use error::{Error, Result};
