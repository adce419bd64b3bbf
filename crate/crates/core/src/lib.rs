//! Numerical laboratory for the α-Grushin half-plane, its quotient cylinder
//! and the compact doubled space built from it.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: parameters, metric and measure, dilations, grid geodesic
//!   distances and the axis (snowflake) constant.
//! - [`volumes`]: ball and box volumes, the ratio functions `f` and `G`, and the
//!   Hausdorff measure of the singular axis.
//! - [`spectrum`]: finite-volume Sturm–Liouville solvers for every Fourier mode
//!   and assembly of the full spectrum and its counting function.
//! - [`heat`]: heat traces, on-diagonal heat kernels, the scale invariant
//!   function `h`, box trace integrals, covering sums and Karamata limits.
//! - [`weyl`]: Weyl-law fits, the smooth oracle and localized counts.

pub mod error;
pub mod fit;
pub mod geometry;
pub mod heat;
pub mod quad;
pub mod spectrum;
pub mod volumes;
pub mod weyl;

pub use error::{Error, Result};
pub use geometry::{GrushinParams, Point};
