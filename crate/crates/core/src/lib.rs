//! Autoregressive generalized Pareto processes (ARGP, MARGP, TARGP):
//! simulation, interarrival analytics and parameter estimation.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod estimate;
pub mod gpd;
pub mod interarrival;
pub mod io;
pub mod optimize;
pub mod quadrature;
pub mod simulate;
pub mod summary;

pub use error::{Error, Result};
pub use gpd::GpdParams;
