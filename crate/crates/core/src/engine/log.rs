//! Append-only JSONL session log and deterministic replay.
//!
//! Each line is one record:
//!
//! ```text
//! {"index":0,"type":"session","payload":{"session_id":…,"created_at":…,"config":{…}}}
//! {"index":1,"type":"trial","payload":{"index":0,"stimulus_m":1.5,"scene_digest":"…"}}
//! {"index":2,"type":"response","payload":{"trial_index":0,"judgment":"Larger","latency_ms":0}}
//! …
//! {"index":N,"type":"complete","payload":{"pse":1.24,"trial_count":17,"reversals":[…]}}
//! ```
//!
//! Replaying the `trial` and `response` records through a fresh
//! [`SessionState`] reproduces the original state exactly; every logged trial
//! is checked against the one the replayed engine issues.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::config::SessionConfig;
use super::session::{Response, SessionState, Trial};
use super::EngineError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionHeader {
    pub session_id: String,
    /// Informational only; never consulted by the engine.
    pub created_at: String,
    pub config: SessionConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub pse: f64,
    pub trial_count: u64,
    pub reversals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload", rename_all = "lowercase")]
pub enum SessionEvent {
    Session(SessionHeader),
    Trial(Trial),
    Response(Response),
    Complete(Completion),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub index: u64,
    #[serde(flatten)]
    pub event: SessionEvent,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("log i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: expected event index {expected}, found {found}")]
    OutOfOrder { line: usize, expected: u64, found: u64 },
    #[error("log does not start with a session record")]
    MissingHeader,
    #[error("line {line}: replay diverged: {message}")]
    Diverged { line: usize, message: String },
    #[error("line {line}: {source}")]
    Engine {
        line: usize,
        #[source]
        source: EngineError,
    },
}

/// Writes numbered records, one JSON object per line, flushing after each.
#[derive(Debug)]
pub struct EventLog<W: Write> {
    out: W,
    next_index: u64,
}

impl<W: Write> EventLog<W> {
    pub fn new(out: W) -> Self {
        Self::resume(out, 0)
    }

    /// Continue numbering at `next_index`, e.g. after a replay.
    pub fn resume(out: W, next_index: u64) -> Self {
        Self { out, next_index }
    }

    pub fn next_index(&self) -> u64 {
        self.next_index
    }

    pub fn append(&mut self, event: SessionEvent) -> std::io::Result<()> {
        let record = EventRecord {
            index: self.next_index,
            event,
        };
        let mut line = serde_json::to_vec(&record).map_err(std::io::Error::other)?;
        line.push(b'\n');
        self.out.write_all(&line)?;
        self.out.flush()?;
        self.next_index += 1;
        Ok(())
    }

    pub fn get_ref(&self) -> &W {
        &self.out
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

/// Result of reading a log back.
#[derive(Clone, Debug, PartialEq)]
pub struct Replayed {
    pub header: SessionHeader,
    pub state: SessionState,
    /// Index the next appended record must carry.
    pub next_index: u64,
    /// Byte length of the intact prefix. A torn final line (crash mid-write)
    /// lies beyond it and should be truncated before appending.
    pub valid_len: u64,
    /// Whether a `complete` record was read.
    pub completion_logged: bool,
}

/// Rebuild a session from its log.
pub fn replay<R: BufRead>(mut input: R) -> Result<Replayed, LogError> {
    let mut header: Option<SessionHeader> = None;
    let mut state: Option<SessionState> = None;
    let mut next_index = 0u64;
    let mut valid_len = 0u64;
    let mut completion_logged = false;
    let mut line_no = 0usize;
    let mut buf = Vec::new();

    loop {
        buf.clear();
        let n = input.read_until(b'\n', &mut buf)?;
        if n == 0 {
            break;
        }
        line_no += 1;
        let terminated = buf.last() == Some(&b'\n');
        let record: EventRecord = match serde_json::from_slice(&buf) {
            Ok(r) if terminated => r,
            Ok(_) | Err(_) if !terminated => {
                tracing::warn!(line = line_no, "ignoring torn final log line");
                break;
            }
            Err(e) => {
                return Err(LogError::Malformed {
                    line: line_no,
                    message: e.to_string(),
                })
            }
            Ok(_) => unreachable!(),
        };
        if record.index != next_index {
            return Err(LogError::OutOfOrder {
                line: line_no,
                expected: next_index,
                found: record.index,
            });
        }
        let engine = |source| LogError::Engine { line: line_no, source };

        match (record.event, state.as_mut()) {
            (SessionEvent::Session(h), None) => {
                state = Some(SessionState::new(h.config.clone()).map_err(engine)?);
                header = Some(h);
            }
            (_, None) => return Err(LogError::MissingHeader),
            (SessionEvent::Session(_), Some(_)) => {
                return Err(LogError::Diverged {
                    line: line_no,
                    message: "second session record".into(),
                })
            }
            (SessionEvent::Trial(logged), Some(s)) => {
                let issued = s.next_stimulus().map_err(engine)?;
                if issued != logged {
                    return Err(LogError::Diverged {
                        line: line_no,
                        message: format!("logged {logged:?}, engine issued {issued:?}"),
                    });
                }
            }
            (SessionEvent::Response(r), Some(s)) => s.record_response(r).map_err(engine)?,
            (SessionEvent::Complete(c), Some(s)) => {
                let pse = s.estimate_pse().map_err(engine)?;
                if pse != c.pse || c.trial_count != s.trials().len() as u64 {
                    return Err(LogError::Diverged {
                        line: line_no,
                        message: format!("logged completion {c:?}, replayed pse {pse}"),
                    });
                }
                completion_logged = true;
            }
        }
        next_index += 1;
        valid_len += n as u64;
    }

    match (header, state) {
        (Some(header), Some(state)) => Ok(Replayed {
            header,
            state,
            next_index,
            valid_len,
            completion_logged,
        }),
        _ => Err(LogError::MissingHeader),
    }
}

/// A session whose transitions are mirrored into an [`EventLog`].
#[derive(Debug)]
pub struct LoggedSession<W: Write> {
    header: SessionHeader,
    state: SessionState,
    log: EventLog<W>,
}

impl<W: Write> LoggedSession<W> {
    /// Start a new session and write its header record.
    pub fn create(header: SessionHeader, out: W) -> Result<Self, LogError> {
        let state = SessionState::new(header.config.clone()).map_err(|source| LogError::Engine { line: 0, source })?;
        let mut log = EventLog::new(out);
        log.append(SessionEvent::Session(header.clone()))?;
        Ok(Self { header, state, log })
    }

    /// Continue a replayed session, appending to `out`. Writes the
    /// completion record if the crash happened just before it.
    pub fn resume(replayed: Replayed, out: W) -> Result<Self, LogError> {
        let mut session = Self {
            header: replayed.header,
            state: replayed.state,
            log: EventLog::resume(out, replayed.next_index),
        };
        if session.state.is_complete() && !replayed.completion_logged {
            session.log_completion()?;
        }
        Ok(session)
    }

    pub fn header(&self) -> &SessionHeader {
        &self.header
    }

    pub fn state(&self) -> &SessionState {
        &self.state
    }

    pub fn log(&self) -> &EventLog<W> {
        &self.log
    }

    pub fn into_parts(self) -> (SessionHeader, SessionState, W) {
        (self.header, self.state, self.log.into_inner())
    }

    pub fn next_stimulus(&mut self) -> Result<Trial, LogError> {
        // Validate on a scratch copy so a failed write leaves memory and disk in step.
        let mut next = self.state.clone();
        let trial = next
            .next_stimulus()
            .map_err(|source| LogError::Engine { line: 0, source })?;
        self.log.append(SessionEvent::Trial(trial.clone()))?;
        self.state = next;
        Ok(trial)
    }

    pub fn record_response(&mut self, response: Response) -> Result<(), LogError> {
        let mut next = self.state.clone();
        next.record_response(response)
            .map_err(|source| LogError::Engine { line: 0, source })?;
        self.log.append(SessionEvent::Response(response))?;
        self.state = next;
        if self.state.is_complete() {
            self.log_completion()?;
        }
        Ok(())
    }

    fn log_completion(&mut self) -> Result<(), LogError> {
        let pse = self
            .state
            .estimate_pse()
            .map_err(|source| LogError::Engine { line: 0, source })?;
        self.log.append(SessionEvent::Complete(Completion {
            pse,
            trial_count: self.state.trials().len() as u64,
            reversals: self.state.reversals().to_vec(),
        }))?;
        Ok(())
    }
}

impl LogError {
    /// The engine error behind this failure, if any.
    pub fn engine_error(&self) -> Option<&EngineError> {
        match self {
            LogError::Engine { source, .. } => Some(source),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Judgment, SimulatedObserver};

    fn header() -> SessionHeader {
        SessionHeader {
            session_id: "test".into(),
            created_at: "1970-01-01T00:00:00Z".into(),
            config: SessionConfig::staircase(1.5),
        }
    }

    fn full_log() -> (Vec<u8>, SessionState) {
        let mut s = LoggedSession::create(header(), Vec::new()).unwrap();
        let mut o = SimulatedObserver::new(1.25, 0.05, 11).unwrap();
        while !s.state().is_complete() {
            let t = s.next_stimulus().unwrap();
            s.record_response(Response::judgment(t.index, o.judge(t.stimulus_m)))
                .unwrap();
        }
        let (_, state, bytes) = s.into_parts();
        (bytes, state)
    }

    #[test]
    fn record_layout() {
        let mut log = EventLog::new(Vec::new());
        log.append(SessionEvent::Response(Response::judgment(0, Judgment::Larger)))
            .unwrap();
        assert_eq!(
            String::from_utf8(log.into_inner()).unwrap(),
            "{\"index\":0,\"type\":\"response\",\"payload\":{\"trial_index\":0,\"judgment\":\"Larger\",\"latency_ms\":0}}\n"
        );
    }

    #[test]
    fn replay_reproduces_state() {
        let (bytes, state) = full_log();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.lines().last().unwrap().contains("\"type\":\"complete\""));
        let r = replay(bytes.as_slice()).unwrap();
        assert_eq!(r.state, state);
        assert!(r.completion_logged);
        assert_eq!(r.valid_len, bytes.len() as u64);
        assert_eq!(r.next_index as usize, text.lines().count());
    }

    #[test]
    fn torn_tail_is_ignored() {
        let (bytes, _) = full_log();
        let cut = bytes.len() - 7;
        let r = replay(&bytes[..cut]).unwrap();
        assert!(!r.completion_logged);
        assert!(r.valid_len < cut as u64);
        assert_eq!(bytes[r.valid_len as usize - 1], b'\n');
    }

    #[test]
    fn resume_writes_missing_completion() {
        let (bytes, state) = full_log();
        let text = std::str::from_utf8(&bytes).unwrap();
        let without_last: String = text
            .lines()
            .take(text.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        let r = replay(without_last.as_bytes()).unwrap();
        assert!(r.state.is_complete());
        let resumed = LoggedSession::resume(r, without_last.clone().into_bytes()).unwrap();
        let (_, resumed_state, out) = resumed.into_parts();
        assert_eq!(resumed_state, state);
        assert_eq!(out, bytes);
    }

    #[test]
    fn corrupted_logs_are_rejected() {
        let (bytes, _) = full_log();
        let text = String::from_utf8(bytes).unwrap();
        let lines: Vec<&str> = text.lines().collect();

        let skipped: String = lines
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 2)
            .map(|(_, l)| format!("{l}\n"))
            .collect();
        assert!(matches!(replay(skipped.as_bytes()), Err(LogError::OutOfOrder { .. })));

        let no_header: String = lines[1..].iter().map(|l| format!("{l}\n")).collect();
        assert!(matches!(replay(no_header.as_bytes()), Err(LogError::OutOfOrder { .. })));

        let tampered = text.replacen("\"stimulus_m\":1.5", "\"stimulus_m\":1.6", 1);
        assert!(matches!(replay(tampered.as_bytes()), Err(LogError::Diverged { .. })));

        let garbage = format!("{}\nnot json\n{}\n", lines[0], lines[1]);
        assert!(matches!(
            replay(garbage.as_bytes()),
            Err(LogError::Malformed { line: 2, .. })
        ));

        assert!(matches!(replay("".as_bytes()), Err(LogError::MissingHeader)));
    }

    #[test]
    fn rejected_transitions_are_not_logged() {
        let mut s = LoggedSession::create(header(), Vec::new()).unwrap();
        let t = s.next_stimulus().unwrap();
        let before = s.log().get_ref().len();
        assert!(s.next_stimulus().is_err());
        assert!(s
            .record_response(Response::judgment(t.index + 1, Judgment::Larger))
            .is_err());
        assert_eq!(s.log().get_ref().len(), before);
    }
}
