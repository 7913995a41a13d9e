//! Numerical geometry of asymptotically flat metrics: quadrature, curvature of
//! conformally flat and graph metrics, and the mass functionals built on them.

pub mod curvature;
pub mod error;
pub mod mass;
pub mod metrics;
pub mod numerics;

pub use error::{Error, Result};
