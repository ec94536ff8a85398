//! Tensor-product B-spline surfaces with rounded corners.
//!
//! A rounded corner is a domain corner where the two first partial
//! derivatives are antiparallel. This crate evaluates surfaces and their
//! corner jets, classifies such corners, checks the equivalent
//! control-point conditions, probes normal continuity and curvature
//! numerically, fits surfaces by constrained L²-projection and repairs
//! watertight multipatch models.

pub mod corner;
pub mod diagnostics;
pub mod fit;
pub mod repair;
pub mod spline;

/// Points and vectors in R³.
pub type Vec3 = nalgebra::Vector3<f64>;
