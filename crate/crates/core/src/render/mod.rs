//! Stereo stimulus generation: a sky plane, distance-cue silhouettes at
//! veridical depth, and a moon disc with controllable disparity.

mod draw;
mod raster;
mod rig;
mod scene;

use thiserror::Error;

pub use draw::{moon_footprint, render_eye, render_stereo, DiscFootprint, EyeRender, Layer};
pub use raster::{
    compose_anaglyph, compose_side_by_side, decode_ppm, encode_image, encode_png, encode_ppm, ImageFormat,
    Presentation, RasterImage, StereoPair,
};
pub use rig::{project_point, CameraRig, Eye, RigMode, MIN_DIMENSION_PX};
pub use scene::{CueObject, MoonDisc, MoonDisparity, Rgb, SkyPlane, StereoScene, StimulusFile, WorldRect};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },
    #[error("point at depth {z} is not in front of the cameras")]
    BehindCamera { z: f64 },
    #[error("stereo views differ in size: {left:?} vs {right:?}")]
    DimensionMismatch { left: (u32, u32), right: (u32, u32) },
    #[error("image encoding failed: {0}")]
    Encode(String),
    #[error("image decoding failed: {0}")]
    Decode(String),
}

impl RenderError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        RenderError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
