//! Psychophysics session engine: configuration, the staircase and
//! adjustment state machine, a simulated observer, survey statistics, and the
//! JSONL event log.

mod config;
mod log;
mod observer;
mod session;
mod survey;

use thiserror::Error;

pub use config::{FieldError, Procedure, SessionConfig, MIN_STIMULUS_M};
pub use log::{
    replay, Completion, EventLog, EventRecord, LogError, LoggedSession, Replayed, SessionEvent, SessionHeader,
};
pub use observer::{normal_cdf, run_closed_loop, SimulatedObserver, MAX_SIMULATED_TRIALS};
pub use session::{pse_from_reversals, scene_digest, Action, Judgment, Response, SessionState, SessionStatus, Trial};
pub use survey::{parse_survey_csv, survey_proportions, wilson_interval, SurveyCounts, SurveySummary, Z_95};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("invalid configuration: {}", join(.0))]
    InvalidConfig(Vec<FieldError>),
    #[error("session is complete")]
    SessionOver,
    #[error("trial {index} is still awaiting a response")]
    PendingTrial { index: u64 },
    #[error("response for trial {got} does not match the pending trial ({})", expected.map_or("none".to_string(), |e| e.to_string()))]
    Sequencing { expected: Option<u64>, got: u64 },
    #[error("invalid response: {0}")]
    InvalidResponse(String),
    #[error("session is not complete")]
    NotReady,
    #[error("closed loop did not finish within {0} trials")]
    TrialLimit(usize),
    #[error("invalid observer: {0}")]
    InvalidObserver(String),
    #[error("survey has no respondents")]
    EmptySurvey,
    #[error("survey input: {0}")]
    SurveyInput(String),
}

fn join(errors: &[FieldError]) -> String {
    errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
