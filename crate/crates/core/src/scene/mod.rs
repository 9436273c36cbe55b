//! Declarative museum scene: rooms, stands, exhibits with knowledge text,
//! teleport graph and lighting metadata.

mod demo;
mod layout;
mod load;
mod validate;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::LevelConfig;

pub use demo::{demo_scene, DEMO_SCENE_VERSION};
pub use layout::{layout_circle, RoomRect};
pub use load::{load_scene, missing_assets, to_json};
pub use validate::{validate_scene, Finding, Rule, ValidationReport};

/// Stand heights allowed by the "moderate height" rule, meters.
pub const STAND_HEIGHT_BAND: (f64, f64) = (0.6, 1.4);
/// Maximum gap between panel text height and the exhibit display height.
pub const PANEL_HEIGHT_TOLERANCE: f64 = 0.3;
/// Maximum floor distance between a stand and its panel button.
pub const PANEL_MAX_DISTANCE: f64 = 1.5;
pub const EXHIBITS_PER_ROAMING_ROOM: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Bottle,
    Tripod,
    Ge,
    Gui,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Purpose {
    Eating,
    War,
    WineVessel,
    MusicalInstrument,
    Sacrifice,
    Other,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Dynasty {
    ShangZhou,
    Han,
    WeiJin,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exhibit {
    pub id: String,
    /// Asset path relative to the asset directory.
    pub mesh_asset: String,
    pub display_name: String,
    /// Age, decoration, casting technology and historical value.
    pub knowledge_text: String,
    pub category: Category,
    pub purpose: Purpose,
    pub dynasty: Dynasty,
    pub level: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Panel {
    pub button_position: [f64; 3],
    pub text_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stand {
    pub id: String,
    pub room_id: String,
    /// Floor position of the stand base.
    pub position: [f64; 3],
    /// Display height of the bronze on top of the stand.
    pub height: f64,
    pub exhibit_id: String,
    pub panel: Panel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RoomKind {
    Roaming,
    Game,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: String,
    pub kind: RoomKind,
    pub level: u8,
    pub rect: RoomRect,
    /// Exhibits on display; empty for game rooms.
    #[serde(default)]
    pub exhibit_ids: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointKind {
    Plain,
    /// Enters the game room of the current level.
    GameEntry,
    NextLevel,
    ReturnToRoaming,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportPoint {
    pub id: String,
    pub room_id: String,
    pub position: [f64; 3],
    pub kind: PointKind,
    pub initially_open: bool,
}

/// Convex walkable floor polygon, `(x, z)` vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub id: String,
    pub room_id: String,
    pub polygon: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TeleportGraph {
    pub areas: Vec<Area>,
    pub points: Vec<TeleportPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalLight {
    pub direction: [f64; 3],
    pub intensity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spotlight {
    pub target_exhibit_id: String,
    pub position: [f64; 3],
    pub cone_angle_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightProbe {
    pub exhibit_id: String,
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightingMeta {
    /// Skybox intensity.
    pub ambient: f64,
    pub directional: DirectionalLight,
    pub spotlights: Vec<Spotlight>,
    pub reflection_probe: [f64; 3],
    pub light_probes: Vec<LightProbe>,
    /// Non-interactive objects with baked lighting.
    pub static_ids: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuseumScene {
    pub version: String,
    pub rooms: Vec<Room>,
    pub stands: Vec<Stand>,
    pub exhibits: Vec<Exhibit>,
    pub teleport: TeleportGraph,
    pub lighting: LightingMeta,
    /// Game configuration per level, containers included.
    pub levels: Vec<LevelConfig>,
}

impl MuseumScene {
    pub fn exhibit(&self, id: &str) -> Option<&Exhibit> {
        self.exhibits.iter().find(|e| e.id == id)
    }

    pub fn room(&self, kind: RoomKind, level: u8) -> Option<&Room> {
        self.rooms.iter().find(|r| r.kind == kind && r.level == level)
    }

    pub fn room_by_id(&self, id: &str) -> Option<&Room> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn point(&self, id: &str) -> Option<&TeleportPoint> {
        self.teleport.points.iter().find(|p| p.id == id)
    }

    /// First plain teleport point of a room; where players arrive.
    pub fn spawn_point(&self, room_id: &str) -> Option<&TeleportPoint> {
        self.teleport
            .points
            .iter()
            .find(|p| p.room_id == room_id && p.kind == PointKind::Plain)
    }

    pub fn stand_for(&self, exhibit_id: &str) -> Option<&Stand> {
        self.stands.iter().find(|s| s.exhibit_id == exhibit_id)
    }

    pub fn level(&self, level: u8) -> Option<&LevelConfig> {
        self.levels.iter().find(|l| l.level == level)
    }
}

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("scene schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("dangling {kind} reference {id} (from {from})")]
    Link {
        kind: &'static str,
        id: String,
        from: String,
    },
    #[error("scene invariant violated: {0}")]
    Invariant(String),
    #[error("layout infeasible: {0}")]
    Layout(String),
}
