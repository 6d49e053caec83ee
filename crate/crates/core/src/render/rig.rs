use serde::{Deserialize, Serialize};

use super::RenderError;

/// Which eye a view belongs to. The left eye sits at `x = -b/2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Eye {
    Left,
    Right,
}

impl Eye {
    pub const BOTH: [Eye; 2] = [Eye::Left, Eye::Right];

    /// Offset added to world `x` before projecting: `+b/2` for the left eye,
    /// `-b/2` for the right.
    pub(crate) fn x_shift(self, baseline: f64) -> f64 {
        match self {
            Eye::Left => baseline / 2.0,
            Eye::Right => -baseline / 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum RigMode {
    #[default]
    ParallelAxes,
}

/// Two pinhole cameras with parallel optical axes along `+z`.
///
/// World axes follow image conventions: `x` to the right, `y` downward, `z`
/// forward, all in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraRig {
    #[serde(default = "default_baseline")]
    pub baseline_m: f64,
    pub focal_px: f64,
    pub width_px: u32,
    pub height_px: u32,
    #[serde(default)]
    pub mode: RigMode,
}

fn default_baseline() -> f64 {
    crate::geometry::DEFAULT_BASELINE_M
}

pub const MIN_DIMENSION_PX: u32 = 64;

impl Default for CameraRig {
    fn default() -> Self {
        Self {
            baseline_m: default_baseline(),
            focal_px: 400.0,
            width_px: 320,
            height_px: 240,
            mode: RigMode::ParallelAxes,
        }
    }
}

impl CameraRig {
    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.baseline_m > 0.0) || !self.baseline_m.is_finite() {
            return Err(RenderError::invalid("rig.baseline_m", "must be positive"));
        }
        if !(self.focal_px > 0.0) || !self.focal_px.is_finite() {
            return Err(RenderError::invalid("rig.focal_px", "must be positive"));
        }
        if self.width_px < MIN_DIMENSION_PX {
            return Err(RenderError::invalid("rig.width_px", "must be at least 64"));
        }
        if self.height_px < MIN_DIMENSION_PX {
            return Err(RenderError::invalid("rig.height_px", "must be at least 64"));
        }
        Ok(())
    }

    pub(crate) fn cx(&self) -> f64 {
        self.width_px as f64 / 2.0
    }

    pub(crate) fn cy(&self) -> f64 {
        self.height_px as f64 / 2.0
    }

    /// Horizontal pixel disparity `u_left - u_right` of a point at depth `z`.
    pub fn pixel_disparity(&self, z: f64) -> f64 {
        self.focal_px * self.baseline_m / z
    }

    /// Pinhole projection of `point = (x, y, z)` into `eye`'s image.
    pub fn project_point(&self, eye: Eye, point: [f64; 3]) -> Result<(f64, f64), RenderError> {
        let [x, y, z] = point;
        if !(z > 0.0) {
            return Err(RenderError::BehindCamera { z });
        }
        let u = self.focal_px * (x + eye.x_shift(self.baseline_m)) / z + self.cx();
        let v = self.focal_px * y / z + self.cy();
        Ok((u, v))
    }
}

/// Free-function form of [`CameraRig::project_point`].
pub fn project_point(rig: &CameraRig, eye: Eye, point: [f64; 3]) -> Result<(f64, f64), RenderError> {
    rig.project_point(eye, point)
}
