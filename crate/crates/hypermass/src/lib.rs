//! Expanding collars, prescribed scalar curvature extensions, and
//! Lorentz-vector quasi-local mass in hyperbolic background, at desk scale.
//!
//! The pipeline starts from an axisymmetric star-shaped hypersurface in
//! hyperbolic space H^n of curvature -k^2, expands it by an inverse
//! curvature flow into a collar, solves the interior lapse equation so the
//! collar metric has constant scalar curvature, extends past the final
//! convex slice by a distance foliation carrying the exterior extension
//! equation, transports a Lorentz-vector weight backward from infinity, and
//! assembles per-direction mass series whose monotonicity and causal
//! character are checked numerically.
//!
//! Entry points:
//! - [`minkowski`]: Lorentz algebra on R^{n,1} and the hyperboloid model.
//! - [`geometry`]: radial surfaces and their curvature.
//! - [`icf`]: the expanding flow and the collar foliation.
//! - [`lapse`]: the interior lapse equation with barrier certificates.
//! - [`exterior`]: the distance foliation and the exterior extension.
//! - [`transport`]: the Lorentz-vector weight equations.
//! - [`mass`]: mass series, monotonicity verdicts, and the final report.
//! - [`scenario`] / [`pipeline`]: configuration and end-to-end runs.

// Comparisons written as !(x > 0.0) deliberately reject NaN alongside the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exterior;
pub mod geometry;
pub mod grid;
pub mod icf;
pub mod io;
pub mod lapse;
pub mod mass;
pub mod minkowski;
pub mod pipeline;
pub mod scenario;
pub mod solver;
pub mod transport;

pub use error::{Error, Result};
