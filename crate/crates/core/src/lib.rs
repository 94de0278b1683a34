//! Pointwise verification of harmonicity for almost contact metric structures.

pub mod acs;
pub mod catalog;
pub mod error;
pub mod geom;
pub mod harmonic;
pub mod hyper;
pub mod jet;
pub mod liealg;
pub mod parallel;

pub use error::{Error, Result};
