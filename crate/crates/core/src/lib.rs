//! Geometry, perceptual models, stereo stimulus rendering and the
//! psychophysics engine for the moon-illusion disparity study.
//!
//! The geometric core and the illusion models are generic over [`Scalar`]
//! (`f32` or `f64`); the aliases below fix the common `f64` instantiations.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod engine;
pub mod geometry;
pub mod models;
pub mod numfmt;
pub mod render;
pub mod scalar;

pub use scalar::Scalar;

pub type Angle = geometry::AngularQuantity<f64>;
pub type Angle32 = geometry::AngularQuantity<f32>;
pub type Ratio = geometry::DisplacementRatio<f64>;
pub type Ratio32 = geometry::DisplacementRatio<f32>;
pub type Observer = geometry::ObserverGeometry<f64>;
pub type Moon = geometry::MoonConstants<f64>;
pub type CurvePoint = geometry::CurvePoint<f64>;
pub type Dome = models::SkyDome<f64>;
pub type Context = models::SceneContext<f64>;
pub type Mapping = models::HyperbolicCueMapping<f64>;
pub type Prediction = models::ModelPrediction<f64>;
