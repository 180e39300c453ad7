//! Weighted fractional Sobolev seminorms and Poincaré quotients on
//! irregular planar domains.

pub mod error;
pub mod experiments;
pub mod fields;
pub mod functionals;
pub mod geometry;
pub mod mc;
pub mod thresholds;

pub use error::{Error, Result};
