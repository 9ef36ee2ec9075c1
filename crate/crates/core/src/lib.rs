//! Numerical laboratory for mean convex regions with two boundary components.
//!
//! The crate covers the ambient space forms (flat space and the Poincaré ball),
//! conformal changes `g̃ = u⁻² g` of their metrics, oriented hypersurfaces and
//! the analytic region fixtures, free-boundary geodesics of the conformal
//! metric, the traced second variation along them, and the curvature
//! inequalities that those ingredients combine into.
//!
//! Every analytic formula in the crate has an independent numerical route in
//! [`fd`] (finite differences on the coordinate metric) or in the test suites.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conformal;
pub mod error;
pub mod estimates;
pub mod fd;
pub mod geodesic;
pub mod hypersurface;
pub mod quadrature;
pub mod report;
pub mod spaceform;
pub mod variation;

pub use error::{Error, Result};

/// Ambient points and tangent vectors are stored in model coordinates.
pub type Point = nalgebra::DVector<f64>;
pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;
