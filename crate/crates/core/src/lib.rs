//! Conservative finite-difference schemes for the one-dimensional modified
//! shallow water equations in Lagrangian coordinates.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod app;
pub mod diagnostics;
pub mod error;
pub mod init;
pub mod kernels;
pub mod mesh;
pub mod par;
pub mod params;
pub mod solver;
pub mod state;
pub mod topography;
pub mod verify;

pub use error::{Error, Result};
