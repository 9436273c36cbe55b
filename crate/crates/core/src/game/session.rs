use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::config::{check_level_config, LevelConfig};
use super::scoring::{score_placements, AccuracyResult};
use super::{GameError, Pose};
use crate::scene::{MuseumScene, PointKind, Room, RoomKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Roaming,
    Game,
    Finished,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Live state of one visitor's playthrough.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameSession {
    pub session_id: String,
    pub current_level: u8,
    pub phase: Phase,
    pub player_position: [f64; 3],
    pub placements: BTreeMap<String, Pose>,
    pub grabbed: Option<String>,
    /// Submissions per level.
    pub attempts: BTreeMap<u8, u32>,
    pub gates_open: BTreeSet<String>,
    pub passed_levels: BTreeSet<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmitOutcome {
    pub result: AccuracyResult,
    /// NextLevel gate opened by this submission, if any.
    pub gate_opened: Option<String>,
    pub finished: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeleportOutcome {
    pub point_id: String,
    pub position: [f64; 3],
    pub phase: Phase,
    pub level: u8,
}

/// Scene plus validated level configurations; drives every session.
#[derive(Debug, Clone)]
pub struct GameRules {
    scene: Arc<MuseumScene>,
    levels: Vec<LevelConfig>,
}

impl GameRules {
    /// Validates `configs` (one per level) against the level rules and the
    /// scene.
    pub fn new(scene: Arc<MuseumScene>, configs: &[LevelConfig]) -> Result<Self, GameError> {
        let mut levels = Vec::with_capacity(3);
        for level in 1..=3u8 {
            let matching: Vec<&LevelConfig> = configs.iter().filter(|c| c.level == level).collect();
            let [cfg] = matching.as_slice() else {
                return Err(GameError::Config(format!(
                    "expected exactly one configuration for level {level}, found {}",
                    matching.len()
                )));
            };
            check_level_config(cfg)?;
            let room = scene.room(RoomKind::Game, level).ok_or_else(|| {
                GameError::Config(format!("scene has no game room for level {level}"))
            })?;
            if room.id != cfg.room_id {
                return Err(GameError::Config(format!(
                    "level {level} game room is {}, configuration names {}",
                    room.id, cfg.room_id
                )));
            }
            let roaming = scene.room(RoomKind::Roaming, level).ok_or_else(|| {
                GameError::Config(format!("scene has no roaming room for level {level}"))
            })?;
            for item in &cfg.items {
                if !roaming.exhibit_ids.contains(&item.exhibit_id) {
                    return Err(GameError::Config(format!(
                        "level {level} item {} is not exhibited in {}",
                        item.exhibit_id, roaming.id
                    )));
                }
            }
            levels.push((*cfg).clone());
        }
        Ok(Self { scene, levels })
    }

    /// Uses the level configurations embedded in the scene.
    pub fn from_scene(scene: Arc<MuseumScene>) -> Result<Self, GameError> {
        let levels = scene.levels.clone();
        Self::new(scene, &levels)
    }

    pub fn scene(&self) -> &MuseumScene {
        &self.scene
    }

    pub fn level(&self, level: u8) -> &LevelConfig {
        &self.levels[level as usize - 1]
    }

    pub fn levels(&self) -> &[LevelConfig] {
        &self.levels
    }

    fn room(&self, kind: RoomKind, level: u8) -> &Room {
        self.scene
            .room(kind, level)
            .expect("rooms checked at construction")
    }

    fn spawn(&self, room: &Room) -> [f64; 3] {
        self.scene
            .spawn_point(&room.id)
            .map(|p| p.position)
            .unwrap_or([room.rect.center[0], 0.0, room.rect.center[1]])
    }

    /// Room the player currently stands in.
    pub fn current_room(&self, s: &GameSession) -> &Room {
        match s.phase {
            Phase::Roaming => self.room(RoomKind::Roaming, s.current_level),
            Phase::Game | Phase::Finished => self.room(RoomKind::Game, s.current_level),
        }
    }

    /// Fresh session in the level-1 roaming room with only the initially
    /// open gates available.
    pub fn new_session(&self, session_id: impl Into<String>) -> GameSession {
        let gates_open = self
            .scene
            .teleport
            .points
            .iter()
            .filter(|p| p.initially_open && p.kind != PointKind::NextLevel)
            .map(|p| p.id.clone())
            .collect();
        GameSession {
            session_id: session_id.into(),
            current_level: 1,
            phase: Phase::Roaming,
            player_position: self.spawn(self.room(RoomKind::Roaming, 1)),
            placements: BTreeMap::new(),
            grabbed: None,
            attempts: BTreeMap::new(),
            gates_open,
            passed_levels: BTreeSet::new(),
        }
    }

    fn illegal(action: &'static str, s: &GameSession) -> GameError {
        GameError::IllegalTransition {
            action,
            phase: format!("{}({})", s.phase, s.current_level),
        }
    }

    /// Roaming(L) -> Game(L) with every item back at its starting pose.
    pub fn enter_game(&self, s: &mut GameSession) -> Result<(), GameError> {
        if s.phase != Phase::Roaming {
            return Err(Self::illegal("enter_game", s));
        }
        let cfg = self.level(s.current_level);
        s.phase = Phase::Game;
        s.grabbed = None;
        s.placements = cfg
            .placeable()
            .map(|i| (i.exhibit_id.clone(), i.initial_pose))
            .collect();
        s.player_position = self.spawn(self.room(RoomKind::Game, s.current_level));
        Ok(())
    }

    /// Game(L) -> Roaming(L); every placement is discarded.
    pub fn return_to_roaming(&self, s: &mut GameSession) -> Result<(), GameError> {
        if s.phase != Phase::Game {
            return Err(Self::illegal("return_to_roaming", s));
        }
        s.phase = Phase::Roaming;
        s.grabbed = None;
        s.placements.clear();
        s.player_position = self.spawn(self.room(RoomKind::Roaming, s.current_level));
        Ok(())
    }

    fn check_item_here(&self, s: &GameSession, item: &str) -> Result<(), GameError> {
        if self.scene.exhibit(item).is_none() {
            return Err(GameError::NotFound {
                kind: "item",
                id: item.to_string(),
            });
        }
        let here = match s.phase {
            Phase::Roaming => self
                .room(RoomKind::Roaming, s.current_level)
                .exhibit_ids
                .iter()
                .any(|e| e == item),
            Phase::Game | Phase::Finished => self.level(s.current_level).item(item).is_some(),
        };
        if here {
            Ok(())
        } else {
            Err(GameError::WrongRoom {
                id: item.to_string(),
            })
        }
    }

    pub fn touch(&self, s: &GameSession, item: &str) -> Result<(), GameError> {
        self.check_item_here(s, item)
    }

    pub fn grab(&self, s: &mut GameSession, item: &str) -> Result<(), GameError> {
        if s.phase == Phase::Finished {
            return Err(Self::illegal("grab", s));
        }
        if let Some(held) = &s.grabbed {
            return Err(GameError::AlreadyHolding(held.clone()));
        }
        self.check_item_here(s, item)?;
        if s.phase == Phase::Game
            && self
                .level(s.current_level)
                .item(item)
                .is_some_and(|i| i.display_only)
        {
            return Err(GameError::Immovable(item.to_string()));
        }
        s.grabbed = Some(item.to_string());
        Ok(())
    }

    pub fn rotate(&self, s: &GameSession, item: &str) -> Result<(), GameError> {
        match &s.grabbed {
            Some(held) if held == item => Ok(()),
            _ => Err(GameError::NotHolding(item.to_string())),
        }
    }

    /// Puts the held item down. In a game room the pose is recorded; in a
    /// roaming room the bronze returns to its stand and that pose is
    /// returned.
    pub fn release(&self, s: &mut GameSession, item: &str, pose: Pose) -> Result<Pose, GameError> {
        match &s.grabbed {
            Some(held) if held == item => {}
            _ => return Err(GameError::NotHolding(item.to_string())),
        }
        s.grabbed = None;
        match s.phase {
            Phase::Game => {
                s.placements.insert(item.to_string(), pose);
                Ok(pose)
            }
            _ => Ok(self
                .scene
                .stand_for(item)
                .map(|st| Pose::at([st.position[0], st.height, st.position[2]]))
                .unwrap_or(pose)),
        }
    }

    pub fn open_panel(&self, s: &GameSession, exhibit: &str) -> Result<(), GameError> {
        if s.phase != Phase::Roaming {
            return Err(Self::illegal("open_panel", s));
        }
        self.check_item_here(s, exhibit)
    }

    /// Scores the current placements; no state change beyond the attempt
    /// counter unless the level is passed.
    pub fn score(&self, s: &GameSession) -> Result<AccuracyResult, GameError> {
        if s.phase != Phase::Game {
            return Err(Self::illegal("submit", s));
        }
        Ok(score_placements(
            &self.scene,
            self.level(s.current_level),
            &s.placements,
        ))
    }

    pub fn submit_answer(&self, s: &mut GameSession) -> Result<SubmitOutcome, GameError> {
        let result = self.score(s)?;
        let level = s.current_level;
        *s.attempts.entry(level).or_insert(0) += 1;
        let mut gate_opened = None;
        let mut finished = false;
        if result.passed {
            s.passed_levels.insert(level);
            let room = self.room(RoomKind::Game, level);
            for p in self.scene.teleport.points.iter().filter(|p| {
                p.room_id == room.id && p.kind == PointKind::NextLevel
            }) {
                if s.gates_open.insert(p.id.clone()) {
                    gate_opened.get_or_insert_with(|| p.id.clone());
                }
            }
            if level == 3 {
                s.phase = Phase::Finished;
                s.grabbed = None;
                finished = true;
            }
        }
        Ok(SubmitOutcome {
            result,
            gate_opened,
            finished,
        })
    }

    pub fn teleport(&self, s: &mut GameSession, point_id: &str) -> Result<TeleportOutcome, GameError> {
        let point = self
            .scene
            .point(point_id)
            .ok_or_else(|| GameError::NotFound {
                kind: "teleport point",
                id: point_id.to_string(),
            })?;
        if point.room_id != self.current_room(s).id {
            return Err(GameError::WrongRoom {
                id: point_id.to_string(),
            });
        }
        if !s.gates_open.contains(point_id) {
            return Err(GameError::GateClosed(point_id.to_string()));
        }
        match point.kind {
            PointKind::Plain => s.player_position = point.position,
            PointKind::GameEntry => self.enter_game(s)?,
            PointKind::ReturnToRoaming => self.return_to_roaming(s)?,
            PointKind::NextLevel => {
                let level = s.current_level;
                if s.phase != Phase::Game || level >= 3 || !s.passed_levels.contains(&level) {
                    return Err(Self::illegal("next_level", s));
                }
                s.current_level = level + 1;
                s.phase = Phase::Roaming;
                s.grabbed = None;
                s.placements.clear();
                s.player_position = self.spawn(self.room(RoomKind::Roaming, level + 1));
            }
        }
        Ok(TeleportOutcome {
            point_id: point_id.to_string(),
            position: s.player_position,
            phase: s.phase,
            level: s.current_level,
        })
    }
}
