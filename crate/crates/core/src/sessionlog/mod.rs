//! Event-sourced interaction logs: JSONL storage, deterministic replay
//! through the game rules and clearance-time measurement.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::game::{GameError, GameRules, GameSession, Pose, SubmitOutcome, TeleportOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum EventKind {
    Teleport { point_id: String },
    Touch { item_id: String },
    Grab { item_id: String },
    Rotate { item_id: String, rotation: [f64; 4] },
    Release { item_id: String, pose: Pose },
    PanelOpen { exhibit_id: String },
    SubmitClick,
    EnterGame,
    ReturnToRoaming,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Teleport { .. } => "Teleport",
            EventKind::Touch { .. } => "Touch",
            EventKind::Grab { .. } => "Grab",
            EventKind::Rotate { .. } => "Rotate",
            EventKind::Release { .. } => "Release",
            EventKind::PanelOpen { .. } => "PanelOpen",
            EventKind::SubmitClick => "SubmitClick",
            EventKind::EnterGame => "EnterGame",
            EventKind::ReturnToRoaming => "ReturnToRoaming",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionEvent {
    /// Milliseconds since session start.
    pub t: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl InteractionEvent {
    pub fn new(t: u64, kind: EventKind) -> Self {
        Self { t, kind }
    }
}

/// First line of a `.session.jsonl` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogHeader {
    pub session_id: String,
    pub scene_version: String,
    /// Unix milliseconds; written by the service, absent in captured logs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub scene_version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub created_at: Option<u64>,
    pub events: Vec<InteractionEvent>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("event at t={t} precedes the previous event at t={last}")]
    Ordering { t: u64, last: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("scene version mismatch: log was recorded against {log}, scene is {scene}")]
    VersionMismatch { log: String, scene: String },
    #[error("session never passed level 3")]
    Incomplete,
}

impl SessionLog {
    pub fn new(session_id: impl Into<String>, scene_version: impl Into<String>) -> Self {
        Self {
            session_id: session_id.into(),
            scene_version: scene_version.into(),
            created_at: None,
            events: Vec::new(),
        }
    }

    pub fn header(&self) -> LogHeader {
        LogHeader {
            session_id: self.session_id.clone(),
            scene_version: self.scene_version.clone(),
            created_at: self.created_at,
        }
    }

    pub fn last_t(&self) -> Option<u64> {
        self.events.last().map(|e| e.t)
    }

    /// Appends an event; timestamps must not go backwards. Ids are not
    /// checked here, replay flags unknown ones.
    pub fn record(&mut self, event: InteractionEvent) -> Result<(), LogError> {
        if let Some(last) = self.last_t() {
            if event.t < last {
                return Err(LogError::Ordering { t: event.t, last });
            }
        }
        self.events.push(event);
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = serde_json::to_string(&self.header()).expect("header serializes");
        out.push('\n');
        for e in &self.events {
            out.push_str(&event_line(e));
        }
        out
    }

    /// Parses a log file. A final line without its newline is a torn write
    /// and is dropped.
    pub fn from_jsonl(text: &str) -> Result<Self, LogError> {
        let complete = match text.rfind('\n') {
            Some(i) => &text[..=i],
            None => "",
        };
        let mut lines = complete.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, first) = lines.next().ok_or(LogError::Parse {
            line: 1,
            message: "missing header line".into(),
        })?;
        let header: LogHeader = serde_json::from_str(first).map_err(|e| LogError::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let mut log = SessionLog::new(header.session_id, header.scene_version);
        log.created_at = header.created_at;
        for (i, line) in lines {
            let event: InteractionEvent =
                serde_json::from_str(line).map_err(|e| LogError::Parse {
                    line: i + 1,
                    message: e.to_string(),
                })?;
            log.record(event)?;
        }
        Ok(log)
    }

    /// Same log with `offset` added to every timestamp.
    pub fn shifted(&self, offset: u64) -> Self {
        let mut out = self.clone();
        for e in &mut out.events {
            e.t += offset;
        }
        out
    }
}

/// One JSONL line, newline included.
pub fn event_line(event: &InteractionEvent) -> String {
    let mut s = serde_json::to_string(event).expect("event serializes");
    s.push('\n');
    s
}

/// What a successfully applied event produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum EventOutcome {
    Done,
    Teleported(TeleportOutcome),
    Released { pose: Pose },
    Submitted(SubmitOutcome),
}

/// Applies one event through the game rules. On error the session is left
/// unchanged.
pub fn apply_event(
    rules: &GameRules,
    session: &mut GameSession,
    kind: &EventKind,
) -> Result<EventOutcome, GameError> {
    match kind {
        EventKind::Teleport { point_id } => {
            rules.teleport(session, point_id).map(EventOutcome::Teleported)
        }
        EventKind::Touch { item_id } => rules.touch(session, item_id).map(|_| EventOutcome::Done),
        EventKind::Grab { item_id } => rules.grab(session, item_id).map(|_| EventOutcome::Done),
        EventKind::Rotate { item_id, .. } => {
            rules.rotate(session, item_id).map(|_| EventOutcome::Done)
        }
        EventKind::Release { item_id, pose } => rules
            .release(session, item_id, *pose)
            .map(|pose| EventOutcome::Released { pose }),
        EventKind::PanelOpen { exhibit_id } => {
            rules.open_panel(session, exhibit_id).map(|_| EventOutcome::Done)
        }
        EventKind::SubmitClick => rules.submit_answer(session).map(EventOutcome::Submitted),
        EventKind::EnterGame => rules.enter_game(session).map(|_| EventOutcome::Done),
        EventKind::ReturnToRoaming => rules.return_to_roaming(session).map(|_| EventOutcome::Done),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayFinding {
    pub index: usize,
    pub t: u64,
    pub event: String,
    pub code: String,
    pub message: String,
}

impl fmt::Display for ReplayFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at t={} ({}: {})", self.code, self.t, self.event, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayResult {
    pub session: GameSession,
    pub findings: Vec<ReplayFinding>,
    /// Timestamp of the submission that passed level 3.
    pub finished_at: Option<u64>,
}

/// Incremental replay; illegal events become findings.
#[derive(Debug, Clone)]
pub struct Replayer<'r> {
    rules: &'r GameRules,
    result: ReplayResult,
    index: usize,
}

impl<'r> Replayer<'r> {
    pub fn new(rules: &'r GameRules, session_id: &str) -> Self {
        Self {
            rules,
            result: ReplayResult {
                session: rules.new_session(session_id),
                findings: Vec::new(),
                finished_at: None,
            },
            index: 0,
        }
    }

    /// Continues from an existing state, e.g. one rebuilt from a prefix.
    pub fn resume(rules: &'r GameRules, session: GameSession) -> Self {
        Self {
            rules,
            result: ReplayResult {
                session,
                findings: Vec::new(),
                finished_at: None,
            },
            index: 0,
        }
    }

    pub fn session(&self) -> &GameSession {
        &self.result.session
    }

    pub fn step(&mut self, event: &InteractionEvent) -> Result<EventOutcome, GameError> {
        let index = self.index;
        self.index += 1;
        let out = apply_event(self.rules, &mut self.result.session, &event.kind);
        match &out {
            Ok(EventOutcome::Submitted(s)) if s.finished && self.result.finished_at.is_none() => {
                self.result.finished_at = Some(event.t);
            }
            Err(e) => self.result.findings.push(ReplayFinding {
                index,
                t: event.t,
                event: event.kind.name().to_string(),
                code: e.code().to_string(),
                message: e.to_string(),
            }),
            _ => {}
        }
        out
    }

    pub fn finish(self) -> ReplayResult {
        self.result
    }
}

fn check_version(log: &SessionLog, rules: &GameRules) -> Result<(), LogError> {
    let scene = &rules.scene().version;
    if &log.scene_version != scene {
        return Err(LogError::VersionMismatch {
            log: log.scene_version.clone(),
            scene: scene.clone(),
        });
    }
    Ok(())
}

pub fn replay(log: &SessionLog, rules: &GameRules) -> Result<ReplayResult, LogError> {
    check_version(log, rules)?;
    let mut r = Replayer::new(rules, &log.session_id);
    for e in &log.events {
        let _ = r.step(e);
    }
    Ok(r.finish())
}

/// Replays many logs; output order follows input order.
pub fn replay_many(
    logs: &[SessionLog],
    rules: &GameRules,
    exec: Exec,
) -> Vec<Result<ReplayResult, LogError>> {
    exec.map(logs, |log| replay(log, rules))
}

/// Milliseconds from the first event to the submission that passed level 3.
pub fn clearance_time(log: &SessionLog, rules: &GameRules) -> Result<u64, LogError> {
    let result = replay(log, rules)?;
    let end = result.finished_at.ok_or(LogError::Incomplete)?;
    let start = log.events.first().map_or(end, |e| e.t);
    Ok(end - start)
}
