//! Live sessions, each backed by an append-only `.session.jsonl` file.
//!
//! An event is written and synced to its log before the in-memory state
//! changes, so the log always holds every acknowledged action. Restarting
//! replays the logs to rebuild the sessions.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, RwLock};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use curation_core::game::{GameError, GameRules, GameSession};
use curation_core::sessionlog::{
    apply_event, event_line, EventKind, EventOutcome, InteractionEvent, Replayer, SessionLog,
};
use serde::Serialize;
use tokio::sync::Mutex;

pub const LOG_SUFFIX: &str = ".session.jsonl";

/// A cached reply for an idempotency key.
#[derive(Debug, Clone)]
pub struct StoredReply {
    pub fingerprint: String,
    pub status: u16,
    pub body: serde_json::Value,
}

pub struct ApiSession {
    pub state: GameSession,
    pub log: SessionLog,
    file: File,
    clock: Instant,
    /// Log time at which `clock` was started.
    clock_base: u64,
    replies: HashMap<String, StoredReply>,
}

#[derive(Debug)]
pub enum ActionError {
    Rule(GameError),
    Io(io::Error),
}

#[derive(Debug, Clone)]
pub struct Applied {
    pub t: u64,
    pub outcome: EventOutcome,
}

#[derive(Debug, Serialize)]
pub struct SessionView<'a> {
    pub session_id: &'a str,
    pub created_at: Option<u64>,
    pub scene_version: &'a str,
    pub event_count: usize,
    pub state: &'a GameSession,
}

impl ApiSession {
    pub fn view(&self) -> SessionView<'_> {
        SessionView {
            session_id: &self.log.session_id,
            created_at: self.log.created_at,
            scene_version: &self.log.scene_version,
            event_count: self.log.events.len(),
            state: &self.state,
        }
    }

    /// Server-side timestamp, never behind the last logged event.
    fn now(&self) -> u64 {
        let t = self.clock_base + self.clock.elapsed().as_millis() as u64;
        t.max(self.log.last_t().unwrap_or(0))
    }

    /// Validates `kind` against a copy of the state, logs it, then commits.
    /// Rejected events change nothing and are not logged.
    pub fn apply(&mut self, rules: &GameRules, kind: EventKind) -> Result<Applied, ActionError> {
        let mut next = self.state.clone();
        let outcome = apply_event(rules, &mut next, &kind).map_err(ActionError::Rule)?;
        let event = InteractionEvent::new(self.now(), kind);
        self.file
            .write_all(event_line(&event).as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(ActionError::Io)?;
        let t = event.t;
        self.log.record(event).expect("timestamps are monotone");
        self.state = next;
        Ok(Applied { t, outcome })
    }

    pub fn reply(&self, key: &str) -> Option<&StoredReply> {
        self.replies.get(key)
    }

    pub fn remember(&mut self, key: String, reply: StoredReply) {
        self.replies.insert(key, reply);
    }
}

#[derive(Debug, Default, Clone, Serialize)]
pub struct RestoreReport {
    pub restored: Vec<String>,
    /// Files left alone, with the reason.
    pub skipped: Vec<(String, String)>,
    /// Files whose torn final line was cut off.
    pub truncated: Vec<String>,
}

pub struct SessionStore {
    rules: Arc<GameRules>,
    dir: PathBuf,
    sessions: RwLock<HashMap<String, Arc<Mutex<ApiSession>>>>,
    created_by_key: Mutex<HashMap<String, String>>,
}

fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

fn log_path(dir: &Path, id: &str) -> PathBuf {
    dir.join(format!("{id}{LOG_SUFFIX}"))
}

impl SessionStore {
    /// Opens `dir`, creating it if needed, and restores every session log in it.
    pub fn open(rules: Arc<GameRules>, dir: impl Into<PathBuf>) -> io::Result<(Self, RestoreReport)> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        let mut report = RestoreReport::default();
        let mut sessions = HashMap::new();
        let mut paths: Vec<PathBuf> = fs::read_dir(&dir)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.to_string_lossy().ends_with(LOG_SUFFIX))
            .collect();
        paths.sort();
        for path in paths {
            let name = path.file_name().unwrap().to_string_lossy().into_owned();
            match restore_one(&rules, &path)? {
                Restored::Session(s, torn) => {
                    if torn {
                        report.truncated.push(name);
                    }
                    report.restored.push(s.log.session_id.clone());
                    sessions.insert(s.log.session_id.clone(), Arc::new(Mutex::new(*s)));
                }
                Restored::Skipped(why) => {
                    tracing::warn!(file = %name, "not restored: {why}");
                    report.skipped.push((name, why));
                }
            }
        }
        let store = Self {
            rules,
            dir,
            sessions: RwLock::new(sessions),
            created_by_key: Mutex::new(HashMap::new()),
        };
        Ok((store, report))
    }

    pub fn rules(&self) -> &Arc<GameRules> {
        &self.rules
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn get(&self, id: &str) -> Option<Arc<Mutex<ApiSession>>> {
        self.sessions.read().unwrap().get(id).cloned()
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().unwrap().keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Creates a session and its log. With an idempotency key, repeating
    /// the call returns the session created the first time.
    pub async fn create(&self, key: Option<&str>) -> io::Result<(String, bool)> {
        let mut by_key = self.created_by_key.lock().await;
        if let Some(id) = key.and_then(|k| by_key.get(k)) {
            return Ok((id.clone(), false));
        }
        let id = uuid::Uuid::new_v4().simple().to_string();
        let mut log = SessionLog::new(id.clone(), self.rules.scene().version.clone());
        log.created_at = Some(unix_ms());
        let mut file = OpenOptions::new()
            .create_new(true)
            .append(true)
            .open(log_path(&self.dir, &id))?;
        file.write_all(log.to_jsonl().as_bytes())?;
        file.sync_data()?;
        let session = ApiSession {
            state: self.rules.new_session(&id),
            log,
            file,
            clock: Instant::now(),
            clock_base: 0,
            replies: HashMap::new(),
        };
        self.sessions
            .write()
            .unwrap()
            .insert(id.clone(), Arc::new(Mutex::new(session)));
        if let Some(k) = key {
            by_key.insert(k.to_string(), id.clone());
        }
        Ok((id, true))
    }
}

enum Restored {
    Session(Box<ApiSession>, bool),
    Skipped(String),
}

fn restore_one(rules: &GameRules, path: &Path) -> io::Result<Restored> {
    let text = fs::read_to_string(path)?;
    let keep = text.rfind('\n').map_or(0, |i| i + 1);
    let torn = keep < text.len();
    let log = match SessionLog::from_jsonl(&text) {
        Ok(log) => log,
        Err(e) => return Ok(Restored::Skipped(e.to_string())),
    };
    if log.scene_version != rules.scene().version {
        return Ok(Restored::Skipped(format!(
            "recorded against scene {}, serving {}",
            log.scene_version,
            rules.scene().version
        )));
    }
    let mut r = Replayer::new(rules, &log.session_id);
    for e in &log.events {
        let _ = r.step(e);
    }
    let result = r.finish();
    if !result.findings.is_empty() {
        tracing::warn!(session = %log.session_id, "{} illegal events in log", result.findings.len());
    }
    let file = OpenOptions::new().append(true).open(path)?;
    if torn {
        file.set_len(keep as u64)?;
        file.sync_data()?;
    }
    let clock_base = log.last_t().unwrap_or(0);
    Ok(Restored::Session(
        Box::new(ApiSession {
            state: result.session,
            log,
            file,
            clock: Instant::now(),
            clock_base,
            replies: HashMap::new(),
        }),
        torn,
    ))
}
