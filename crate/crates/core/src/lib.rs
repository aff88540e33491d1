//! The Dirac equation in a closed Friedmann–Robertson–Walker universe.

// `!(x > 0.0)` guards also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fermionic_projector;
pub mod linalg;
pub mod quadrature;
pub mod s3_dirac;
pub mod spectral_projectors;
pub mod time_dynamics;
pub mod special_functions;

pub use error::{Error, Result};
