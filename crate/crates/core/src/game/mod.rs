//! The three-level curation game: roaming and game phases, placement
//! tracking, accuracy scoring and teleport gating.

mod config;
mod scoring;
mod session;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use config::{
    check_level_config, Accepts, Container, ContainerKind, GameItem, LevelConfig, LevelRule,
    Theme, DEFAULT_RADIUS_A, LEVEL_RULES,
};
pub use scoring::{answer_key, assign_container, score_placements, AccuracyResult, ItemResult};
pub use session::{GameRules, GameSession, Phase, SubmitOutcome, TeleportOutcome};

/// Position in meters plus an `[x, y, z, w]` rotation quaternion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: [f64; 3],
    #[serde(default = "identity_rotation")]
    pub rotation: [f64; 4],
}

fn identity_rotation() -> [f64; 4] {
    [0.0, 0.0, 0.0, 1.0]
}

impl Pose {
    pub fn at(position: [f64; 3]) -> Self {
        Self {
            position,
            rotation: identity_rotation(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("invalid level configuration: {0}")]
    Config(String),
    #[error("{action} is not allowed in phase {phase}")]
    IllegalTransition { action: &'static str, phase: String },
    #[error("teleport point {0} is closed")]
    GateClosed(String),
    #[error("unknown {kind} {id}")]
    NotFound { kind: &'static str, id: String },
    #[error("{id} is not in the current room")]
    WrongRoom { id: String },
    #[error("already holding {0}")]
    AlreadyHolding(String),
    #[error("not holding {0}")]
    NotHolding(String),
    #[error("{0} is on display and cannot be moved")]
    Immovable(String),
}

impl GameError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            GameError::Config(_) => "invalid-config",
            GameError::IllegalTransition { .. } => "illegal-transition",
            GameError::GateClosed(_) => "gate-closed",
            GameError::NotFound { .. } => "not-found",
            GameError::WrongRoom { .. } => "wrong-room",
            GameError::AlreadyHolding(_) => "already-holding",
            GameError::NotHolding(_) => "not-holding",
            GameError::Immovable(_) => "immovable-item",
        }
    }
}
