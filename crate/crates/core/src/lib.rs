//! Large-deviation analysis of infinite swapping and parallel tempering for
//! Glauber dynamics on finite grids.

pub mod cli;
pub mod control;
pub mod eigen;
pub mod error;
pub mod lagrange;
pub mod ldp;
pub mod measure;
pub mod model;
pub mod perm;
pub mod rates;
pub mod simulate;
pub mod swapchain;

pub use error::{Error, Result};
