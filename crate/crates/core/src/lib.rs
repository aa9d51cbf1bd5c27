//! Coupled continued-fraction slopes, the slit-torus surface they define,
//! and numerical probes of its Teichmüller geodesic ray.

pub mod contfrac;
pub mod error;
pub mod geodesic;
pub mod limitset;
pub mod numeric;
pub mod surface;

pub use error::{Error, Result};
