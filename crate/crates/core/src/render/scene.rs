use serde::{Deserialize, Serialize};

use super::rig::CameraRig;
use super::RenderError;
use crate::geometry::MoonConstants;

pub type Rgb = [u8; 3];

/// Scene for one stereo stimulus. Lengths in meters, angles in degrees.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StereoScene {
    pub sky: SkyPlane,
    pub moon: MoonDisc,
    #[serde(default)]
    pub cues: Vec<CueObject>,
}

/// Fronto-parallel sky surface filling the whole view.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkyPlane {
    pub distance_m: f64,
    pub color: Rgb,
    /// Seeds a world-anchored luminance texture, which gives the sky its own
    /// disparity. Untextured skies carry no depth signal.
    #[serde(default)]
    pub texture_seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoonDisc {
    pub angular_diameter_deg: f64,
    /// Rightward from the optical axis.
    #[serde(default)]
    pub azimuth_deg: f64,
    /// Upward from the optical axis.
    #[serde(default)]
    pub elevation_deg: f64,
    #[serde(default)]
    pub disparity: MoonDisparity,
    /// Gray level in `[0, 1]`.
    pub luminance: f64,
    /// True distance, used only by [`MoonDisparity::Veridical`].
    #[serde(default = "default_moon_distance")]
    pub distance_m: f64,
}

fn default_moon_distance() -> f64 {
    MoonConstants::DISTANCE_KM * 1000.0
}

/// How far apart the moon is drawn in the two eyes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MoonDisparity {
    /// Fixed angular disparity in degrees; positive is crossed (nearer).
    OverrideDeg(f64),
    /// Disparity of a point at the moon's true distance.
    Veridical,
}

impl Default for MoonDisparity {
    fn default() -> Self {
        MoonDisparity::OverrideDeg(0.0)
    }
}

/// Axis-aligned rectangle in a plane of constant depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldRect {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

/// Distance-cue object: a flat silhouette at veridical depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CueObject {
    pub rect: WorldRect,
    pub distance_m: f64,
    pub color: Rgb,
}

impl MoonDisc {
    pub fn color(&self) -> Rgb {
        let g = (self.luminance.clamp(0.0, 1.0) * 255.0).round() as u8;
        [g, g, g]
    }
}

impl StereoScene {
    pub fn validate(&self) -> Result<(), RenderError> {
        let sky = self.sky.distance_m;
        if !(sky > 0.0) || !sky.is_finite() {
            return Err(RenderError::invalid("sky.distance_m", "must be positive and finite"));
        }

        let moon = &self.moon;
        if !(moon.angular_diameter_deg > 0.0 && moon.angular_diameter_deg < 90.0) {
            return Err(RenderError::invalid(
                "moon.angular_diameter_deg",
                "must lie in (0, 90) degrees",
            ));
        }
        for (field, value) in [
            ("moon.azimuth_deg", moon.azimuth_deg),
            ("moon.elevation_deg", moon.elevation_deg),
        ] {
            if !(value.abs() < 90.0) {
                return Err(RenderError::invalid(field, "must lie in (-90, 90) degrees"));
            }
        }
        if !(0.0..=1.0).contains(&moon.luminance) {
            return Err(RenderError::invalid("moon.luminance", "must lie in [0, 1]"));
        }
        if !(moon.distance_m > 0.0) {
            return Err(RenderError::invalid("moon.distance_m", "must be positive"));
        }
        if let MoonDisparity::OverrideDeg(d) = moon.disparity {
            if !(d.abs() < 90.0) {
                return Err(RenderError::invalid(
                    "moon.disparity.override_deg",
                    "must lie in (-90, 90) degrees",
                ));
            }
        }

        for (i, cue) in self.cues.iter().enumerate() {
            if !(cue.distance_m > 0.0 && cue.distance_m <= sky) {
                return Err(RenderError::invalid(
                    format!("cues[{i}].distance_m"),
                    "must lie in (0, sky.distance_m]",
                ));
            }
            let r = cue.rect;
            if !(r.x_min < r.x_max) || !r.x_min.is_finite() || !r.x_max.is_finite() {
                return Err(RenderError::invalid(
                    format!("cues[{i}].rect"),
                    "x_min must be below x_max",
                ));
            }
            if !(r.y_min < r.y_max) || !r.y_min.is_finite() || !r.y_max.is_finite() {
                return Err(RenderError::invalid(
                    format!("cues[{i}].rect"),
                    "y_min must be below y_max",
                ));
            }
        }
        Ok(())
    }

    /// Textured sky at 60 m, a zero-disparity 4° moon above a skyline of
    /// three buildings at 12, 20 and 35 m.
    pub fn reference() -> Self {
        let building = |x_min: f64, x_max: f64, top: f64, distance_m: f64, color: Rgb| CueObject {
            rect: WorldRect {
                x_min,
                x_max,
                y_min: top,
                y_max: distance_m * 0.5,
            },
            distance_m,
            color,
        };
        Self {
            sky: SkyPlane {
                distance_m: 60.0,
                color: [38, 52, 92],
                texture_seed: Some(7),
            },
            moon: MoonDisc {
                angular_diameter_deg: 4.0,
                azimuth_deg: 0.0,
                elevation_deg: 8.0,
                disparity: MoonDisparity::OverrideDeg(0.0),
                luminance: 0.92,
                distance_m: default_moon_distance(),
            },
            cues: vec![
                building(-12.0, -4.0, 2.0, 35.0, [70, 64, 60]),
                building(-1.5, 2.5, 1.2, 20.0, [52, 46, 44]),
                building(2.5, 5.0, 0.4, 12.0, [30, 28, 26]),
            ],
        }
    }

    /// Copy with the moon's angular diameter scaled by `magnification`.
    pub fn with_moon_scaled(&self, magnification: f64) -> Self {
        let mut scene = self.clone();
        scene.moon.angular_diameter_deg *= magnification;
        scene
    }
}

/// On-disk stimulus description: optional rig plus the scene.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StimulusFile {
    #[serde(default)]
    pub rig: CameraRig,
    pub sky: SkyPlane,
    pub moon: MoonDisc,
    #[serde(default)]
    pub cues: Vec<CueObject>,
}

impl StimulusFile {
    pub fn into_parts(self) -> (CameraRig, StereoScene) {
        (
            self.rig,
            StereoScene {
                sky: self.sky,
                moon: self.moon,
                cues: self.cues,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scene_is_valid() {
        StereoScene::reference().validate().unwrap();
    }

    #[test]
    fn validation_names_the_field() {
        let mut s = StereoScene::reference();
        s.cues[1].distance_m = 100.0;
        let err = s.validate().unwrap_err();
        assert!(err.to_string().contains("cues[1].distance_m"), "{err}");

        let mut s = StereoScene::reference();
        s.moon.angular_diameter_deg = 90.0;
        assert!(s
            .validate()
            .unwrap_err()
            .to_string()
            .contains("moon.angular_diameter_deg"));

        let mut s = StereoScene::reference();
        s.sky.distance_m = 0.0;
        assert!(s.validate().unwrap_err().to_string().contains("sky.distance_m"));

        let mut s = StereoScene::reference();
        s.cues[0].rect.x_max = s.cues[0].rect.x_min;
        assert!(s.validate().is_err());
    }

    #[test]
    fn scene_json_schema() {
        let json = r#"{
            "rig": {"focal_px": 200, "width_px": 160, "height_px": 120},
            "sky": {"distance_m": 50, "color": [10, 20, 30]},
            "moon": {"angular_diameter_deg": 2, "luminance": 1, "disparity": "veridical"},
            "cues": [{"rect": {"x_min": 0, "x_max": 1, "y_min": 0, "y_max": 1}, "distance_m": 10, "color": [1, 2, 3]}]
        }"#;
        let (rig, scene) = serde_json::from_str::<StimulusFile>(json).unwrap().into_parts();
        assert_eq!(rig.baseline_m, 0.065);
        assert_eq!(scene.moon.disparity, MoonDisparity::Veridical);
        assert_eq!(scene.moon.distance_m, 3.844e8);

        let zero: MoonDisc =
            serde_json::from_str(r#"{"angular_diameter_deg": 2, "luminance": 1, "disparity": {"override_deg": 0.5}}"#)
                .unwrap();
        assert_eq!(zero.disparity, MoonDisparity::OverrideDeg(0.5));

        let err = serde_json::from_str::<StimulusFile>(r#"{"sky": {"distance_m": 5, "color": [0,0,0]}}"#).unwrap_err();
        assert!(err.to_string().contains("moon"), "{err}");
    }
}
