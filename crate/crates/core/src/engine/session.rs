use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{Procedure, SessionConfig, MIN_STIMULUS_M};
use super::EngineError;
use crate::render::CameraRig;
use crate::render::StereoScene;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Judgment {
    /// The test moon looked larger than the reference.
    Larger,
    Smaller,
}

/// What the subject did on a trial.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Judgment(Judgment),
    /// Moves the adjustment slider; the session continues.
    AdjustM(f64),
    /// Ends an adjustment session at this setting.
    FinalM(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub trial_index: u64,
    #[serde(flatten)]
    pub action: Action,
    #[serde(default)]
    pub latency_ms: u64,
}

impl Response {
    pub fn judgment(trial_index: u64, judgment: Judgment) -> Self {
        Self {
            trial_index,
            action: Action::Judgment(judgment),
            latency_ms: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub index: u64,
    pub stimulus_m: f64,
    /// SHA-256 of the JSON description of the rig and scaled scene.
    pub scene_digest: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SessionStatus {
    Active,
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Direction {
    Up,
    Down,
}

/// Content hash of the stimulus shown at magnification `m`.
pub fn scene_digest(rig: &CameraRig, scene: &StereoScene) -> String {
    #[derive(Serialize)]
    struct Described<'a> {
        rig: &'a CameraRig,
        scene: &'a StereoScene,
    }
    let bytes = serde_json::to_vec(&Described { rig, scene }).expect("scene serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Mean of the last `reversals - 2` reversal levels.
pub fn pse_from_reversals(levels: &[f64], reversals: usize) -> Option<f64> {
    let kept = reversals.checked_sub(2).filter(|&k| k > 0 && levels.len() >= k)?;
    let tail = &levels[levels.len() - kept..];
    Some(tail.iter().sum::<f64>() / kept as f64)
}

/// One adaptive session. Transitions are strictly sequential: issue a trial,
/// record its response, repeat. Rejected calls leave the state untouched.
#[derive(Clone, Debug, PartialEq)]
pub struct SessionState {
    config: SessionConfig,
    trials: Vec<Trial>,
    responses: Vec<Response>,
    current_m: f64,
    step: f64,
    direction: Option<Direction>,
    reversals: Vec<f64>,
    clamp_events: u32,
    final_m: Option<f64>,
    status: SessionStatus,
}

impl SessionState {
    pub fn new(config: SessionConfig) -> Result<Self, EngineError> {
        config.validate()?;
        Ok(Self {
            current_m: config.start_m,
            step: config.step_initial,
            config,
            trials: Vec::new(),
            responses: Vec::new(),
            direction: None,
            reversals: Vec::new(),
            clamp_events: 0,
            final_m: None,
            status: SessionStatus::Active,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    pub fn status(&self) -> SessionStatus {
        self.status
    }

    pub fn is_complete(&self) -> bool {
        self.status == SessionStatus::Complete
    }

    pub fn trials(&self) -> &[Trial] {
        &self.trials
    }

    pub fn responses(&self) -> &[Response] {
        &self.responses
    }

    /// Magnification the next trial will show.
    pub fn current_m(&self) -> f64 {
        self.current_m
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Stimulus levels at which the staircase changed direction.
    pub fn reversals(&self) -> &[f64] {
        &self.reversals
    }

    /// How many times the staircase hit the lower magnification bound.
    pub fn clamp_events(&self) -> u32 {
        self.clamp_events
    }

    pub fn final_m(&self) -> Option<f64> {
        self.final_m
    }

    /// The issued trial still waiting for a response.
    pub fn pending_trial(&self) -> Option<&Trial> {
        (self.trials.len() > self.responses.len())
            .then(|| self.trials.last())
            .flatten()
    }

    /// Scene for magnification `m`: the reference with the moon scaled.
    pub fn scene_at(&self, m: f64) -> StereoScene {
        self.config.reference_scene.with_moon_scaled(m)
    }

    /// Issue the next trial at the current magnification.
    pub fn next_stimulus(&mut self) -> Result<Trial, EngineError> {
        if self.is_complete() {
            return Err(EngineError::SessionOver);
        }
        if let Some(p) = self.pending_trial() {
            return Err(EngineError::PendingTrial { index: p.index });
        }
        let m = self.current_m;
        let trial = Trial {
            index: self.trials.len() as u64,
            stimulus_m: m,
            scene_digest: scene_digest(&self.config.rig, &self.scene_at(m)),
        };
        self.trials.push(trial.clone());
        Ok(trial)
    }

    /// Apply the response to the pending trial.
    pub fn record_response(&mut self, response: Response) -> Result<(), EngineError> {
        let Some(pending) = self.pending_trial() else {
            return Err(EngineError::Sequencing {
                expected: None,
                got: response.trial_index,
            });
        };
        if pending.index != response.trial_index {
            return Err(EngineError::Sequencing {
                expected: Some(pending.index),
                got: response.trial_index,
            });
        }
        let stimulus_m = pending.stimulus_m;

        match (self.config.procedure, response.action) {
            (Procedure::Staircase1Up1Down, Action::Judgment(j)) => self.step_staircase(stimulus_m, j),
            (Procedure::MethodOfAdjustment, Action::AdjustM(m) | Action::FinalM(m)) => {
                if !(m > 0.0) || !m.is_finite() {
                    return Err(EngineError::InvalidResponse(format!(
                        "adjusted magnification must be positive, got {m}"
                    )));
                }
                self.current_m = m;
                if matches!(response.action, Action::FinalM(_)) {
                    self.final_m = Some(m);
                    self.status = SessionStatus::Complete;
                }
            }
            (procedure, action) => {
                return Err(EngineError::InvalidResponse(format!(
                    "{action:?} is not a valid response for {procedure:?}"
                )))
            }
        }
        self.responses.push(response);
        Ok(())
    }

    fn step_staircase(&mut self, stimulus_m: f64, judgment: Judgment) {
        // 1-down after "larger", 1-up after "smaller"
        let direction = match judgment {
            Judgment::Larger => Direction::Down,
            Judgment::Smaller => Direction::Up,
        };
        if self.direction.is_some_and(|d| d != direction) {
            self.reversals.push(stimulus_m);
            self.step = (self.step / 2.0).max(self.config.min_step());
        }
        self.direction = Some(direction);
        if self.reversals.len() >= self.config.reversals as usize {
            self.status = SessionStatus::Complete;
            return;
        }
        let next = match direction {
            Direction::Up => self.current_m + self.step,
            Direction::Down => self.current_m - self.step,
        };
        if next < MIN_STIMULUS_M {
            tracing::warn!(requested = next, "stimulus magnification clamped to {MIN_STIMULUS_M}");
            self.clamp_events += 1;
            self.current_m = MIN_STIMULUS_M;
        } else {
            self.current_m = next;
        }
    }

    /// Point of subjective equality: mean of the last `R - 2` reversal levels
    /// for a staircase, the submitted setting for adjustment.
    pub fn estimate_pse(&self) -> Result<f64, EngineError> {
        if !self.is_complete() {
            return Err(EngineError::NotReady);
        }
        match self.config.procedure {
            Procedure::Staircase1Up1Down => {
                pse_from_reversals(&self.reversals, self.config.reversals as usize).ok_or(EngineError::NotReady)
            }
            Procedure::MethodOfAdjustment => self.final_m.ok_or(EngineError::NotReady),
        }
    }
}
