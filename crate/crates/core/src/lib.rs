//! Exact computations in one-dimensional Wasserstein spaces.
//!
//! Measures with bounded support are stored through piecewise-linear
//! quantile functions, so distances, geodesics, flips, translations and the
//! exotic isometry flow of `W_2(R)` are evaluated in closed form.

pub mod error;
pub mod isometries;
pub mod json;
pub mod measure;
pub mod metric;
pub mod midpoint;
pub mod pl;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod scalar;
pub mod suites;
pub mod unit_interval;

pub use error::{Error, Result};
pub use measure::{param_from_two_point, two_point_from_param, DiscreteMeasure, Domain, Measure, TwoPointParam};
pub use pl::{MonotonePl, Piece, Refinement};
pub use scalar::Scalar;

pub type Measure64 = Measure<f64>;
pub type Measure32 = Measure<f32>;
pub type DiscreteMeasure64 = DiscreteMeasure<f64>;
