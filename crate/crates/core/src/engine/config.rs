use serde::{Deserialize, Serialize};

use crate::render::{CameraRig, Presentation, StereoScene};

use super::EngineError;

/// Stimulus magnifications never drop below this; the staircase clamps here.
pub const MIN_STIMULUS_M: f64 = 0.1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Procedure {
    /// 1-up-1-down on larger/smaller judgments, step halved at each reversal.
    #[default]
    Staircase1Up1Down,
    /// The subject sets the magnification directly and submits a final value.
    MethodOfAdjustment,
}

/// One field-level validation failure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    #[serde(default)]
    pub procedure: Procedure,
    #[serde(default = "StereoScene::reference")]
    pub reference_scene: StereoScene,
    #[serde(default)]
    pub rig: CameraRig,
    #[serde(default = "default_start_m")]
    pub start_m: f64,
    #[serde(default = "default_step")]
    pub step_initial: f64,
    /// Halving stops here. Defaults to `step_initial / 8`.
    #[serde(default)]
    pub min_step: Option<f64>,
    /// Reversal count that ends a staircase.
    #[serde(default = "default_reversals")]
    pub reversals: u32,
    #[serde(default)]
    pub presentation: Presentation,
    #[serde(default)]
    pub rng_seed: u64,
}

fn default_start_m() -> f64 {
    1.5
}

fn default_step() -> f64 {
    0.2
}

fn default_reversals() -> u32 {
    8
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            procedure: Procedure::default(),
            reference_scene: StereoScene::reference(),
            rig: CameraRig::default(),
            start_m: default_start_m(),
            step_initial: default_step(),
            min_step: None,
            reversals: default_reversals(),
            presentation: Presentation::default(),
            rng_seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn staircase(start_m: f64) -> Self {
        Self {
            start_m,
            ..Self::default()
        }
    }

    pub fn adjustment(start_m: f64) -> Self {
        Self {
            procedure: Procedure::MethodOfAdjustment,
            start_m,
            ..Self::default()
        }
    }

    pub fn min_step(&self) -> f64 {
        self.min_step.unwrap_or(self.step_initial / 8.0)
    }

    /// All field-level problems, empty when valid.
    pub fn field_errors(&self) -> Vec<FieldError> {
        let mut errors = Vec::new();
        let mut push = |field: &str, message: &str| {
            errors.push(FieldError {
                field: field.to_string(),
                message: message.to_string(),
            })
        };
        if !(self.start_m > 0.0) || !self.start_m.is_finite() {
            push("start_m", "must be positive");
        }
        if !(self.step_initial > 0.0) || !self.step_initial.is_finite() {
            push("step_initial", "must be positive");
        }
        if let Some(min) = self.min_step {
            if !(min > 0.0 && min <= self.step_initial) {
                push("min_step", "must lie in (0, step_initial]");
            }
        }
        if self.reversals < 4 {
            push("reversals", "must be at least 4");
        }
        if let Err(e) = self.rig.validate() {
            push("rig", &e.to_string());
        }
        if let Err(e) = self.reference_scene.validate() {
            push("reference_scene", &e.to_string());
        } else if self.start_m > 0.0 {
            let scaled = self.reference_scene.with_moon_scaled(self.start_m);
            if let Err(e) = scaled.validate() {
                push("start_m", &format!("scaled reference scene is invalid: {e}"));
            }
        }
        errors
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        let errors = self.field_errors();
        if errors.is_empty() {
            Ok(())
        } else {
            Err(EngineError::InvalidConfig(errors))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SessionConfig::default();
        c.validate().unwrap();
        assert_eq!(c.step_initial, 0.2);
        assert_eq!(c.reversals, 8);
        assert_eq!(c.min_step(), 0.025);
    }

    #[test]
    fn field_errors_name_fields() {
        let c = SessionConfig {
            start_m: -1.0,
            step_initial: 0.0,
            reversals: 3,
            ..SessionConfig::default()
        };
        let fields: Vec<_> = c.field_errors().into_iter().map(|e| e.field).collect();
        assert_eq!(fields, ["start_m", "step_initial", "reversals"]);
    }

    #[test]
    fn json_defaults() {
        let c: SessionConfig = serde_json::from_str(r#"{"start_m": 1.3}"#).unwrap();
        assert_eq!(c.procedure, Procedure::Staircase1Up1Down);
        assert_eq!(c.reference_scene, StereoScene::reference());
        let c: SessionConfig =
            serde_json::from_str(r#"{"procedure": "MethodOfAdjustment", "presentation": "Anaglyph"}"#).unwrap();
        assert_eq!(c.procedure, Procedure::MethodOfAdjustment);
        assert!(serde_json::from_str::<SessionConfig>(r#"{"start": 1}"#).is_err());
    }
}
