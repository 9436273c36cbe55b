use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{GameError, Pose};
use crate::scene::{Category, Dynasty, Exhibit, Purpose};

/// Default interaction radius `A`, meters.
pub const DEFAULT_RADIUS_A: f64 = 0.5;

fn default_radius() -> f64 {
    DEFAULT_RADIUS_A
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Theme {
    Category,
    Purpose,
    Dynasty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContainerKind {
    Shelf,
    RoundTable,
    Box,
    Booth,
}

/// Attribute value a container accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Accepts {
    Category(Category),
    Purpose(Purpose),
    Dynasty(Dynasty),
}

impl Accepts {
    pub fn theme(self) -> Theme {
        match self {
            Accepts::Category(_) => Theme::Category,
            Accepts::Purpose(_) => Theme::Purpose,
            Accepts::Dynasty(_) => Theme::Dynasty,
        }
    }

    pub fn matches(self, exhibit: &Exhibit) -> bool {
        match self {
            Accepts::Category(c) => exhibit.category == c,
            Accepts::Purpose(p) => exhibit.purpose == p,
            Accepts::Dynasty(d) => exhibit.dynasty == d,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub id: String,
    pub label: String,
    pub kind: ContainerKind,
    pub position: [f64; 3],
    pub capacity: usize,
    pub accepts: Accepts,
    #[serde(default = "default_radius")]
    pub interaction_radius: f64,
}

/// A bronze taking part in a level's game scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameItem {
    pub exhibit_id: String,
    pub initial_pose: Pose,
    /// Shown in the room but cannot be grabbed or scored.
    #[serde(default)]
    pub display_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelConfig {
    pub level: u8,
    pub theme: Theme,
    /// Game room hosting this level.
    pub room_id: String,
    pub items: Vec<GameItem>,
    pub required_placements: usize,
    pub containers: Vec<Container>,
    pub pass_threshold: f64,
    pub threshold_strict: bool,
}

impl LevelConfig {
    pub fn placeable(&self) -> impl Iterator<Item = &GameItem> {
        self.items.iter().filter(|i| !i.display_only)
    }

    pub fn item(&self, id: &str) -> Option<&GameItem> {
        self.items.iter().find(|i| i.exhibit_id == id)
    }

    /// `accuracy > threshold` for strict levels, `>=` otherwise.
    pub fn passes(&self, accuracy: f64) -> bool {
        if self.threshold_strict {
            accuracy > self.pass_threshold
        } else {
            accuracy >= self.pass_threshold
        }
    }
}

/// Fixed per-level rules every configuration must reproduce.
pub struct LevelRule {
    pub level: u8,
    pub theme: Theme,
    pub placeable: usize,
    pub display_only: usize,
    pub containers: usize,
    pub capacity: Option<usize>,
    pub required: usize,
    pub threshold: f64,
    pub strict: bool,
    pub accepts: &'static [Accepts],
}

pub const LEVEL_RULES: [LevelRule; 3] = [
    LevelRule {
        level: 1,
        theme: Theme::Category,
        placeable: 12,
        display_only: 0,
        containers: 4,
        capacity: Some(3),
        required: 12,
        threshold: 0.8,
        strict: true,
        accepts: &[
            Accepts::Category(Category::Bottle),
            Accepts::Category(Category::Tripod),
            Accepts::Category(Category::Ge),
            Accepts::Category(Category::Gui),
        ],
    },
    LevelRule {
        level: 2,
        theme: Theme::Purpose,
        placeable: 12,
        display_only: 1,
        containers: 5,
        capacity: Some(2),
        required: 10,
        threshold: 0.9,
        strict: true,
        accepts: &[
            Accepts::Purpose(Purpose::Eating),
            Accepts::Purpose(Purpose::War),
            Accepts::Purpose(Purpose::WineVessel),
            Accepts::Purpose(Purpose::MusicalInstrument),
            Accepts::Purpose(Purpose::Sacrifice),
        ],
    },
    LevelRule {
        level: 3,
        theme: Theme::Dynasty,
        placeable: 9,
        display_only: 0,
        containers: 3,
        capacity: None,
        required: 9,
        threshold: 1.0,
        strict: false,
        accepts: &[
            Accepts::Dynasty(Dynasty::ShangZhou),
            Accepts::Dynasty(Dynasty::Han),
            Accepts::Dynasty(Dynasty::WeiJin),
        ],
    },
];

/// Checks one configuration against its level's fixed rules.
pub fn check_level_config(cfg: &LevelConfig) -> Result<(), GameError> {
    let bad = |msg: String| Err(GameError::Config(format!("level {}: {msg}", cfg.level)));
    let Some(rule) = LEVEL_RULES.iter().find(|r| r.level == cfg.level) else {
        return bad("level must be 1, 2 or 3".into());
    };
    if cfg.theme != rule.theme {
        return bad(format!("theme must be {:?}", rule.theme));
    }
    let placeable = cfg.placeable().count();
    let display = cfg.items.len() - placeable;
    if placeable != rule.placeable || display != rule.display_only {
        return bad(format!(
            "expected {} placeable and {} display-only items, found {placeable} and {display}",
            rule.placeable, rule.display_only
        ));
    }
    let ids: BTreeSet<&str> = cfg.items.iter().map(|i| i.exhibit_id.as_str()).collect();
    if ids.len() != cfg.items.len() {
        return bad("duplicate item id".into());
    }
    if cfg.required_placements != rule.required {
        return bad(format!(
            "required placements must be {}, found {}",
            rule.required, cfg.required_placements
        ));
    }
    if cfg.pass_threshold != rule.threshold || cfg.threshold_strict != rule.strict {
        return bad(format!(
            "pass threshold must be {} ({}), found {} ({})",
            rule.threshold,
            if rule.strict { "strict" } else { "inclusive" },
            cfg.pass_threshold,
            if cfg.threshold_strict { "strict" } else { "inclusive" },
        ));
    }
    if cfg.containers.len() != rule.containers {
        return bad(format!(
            "expected {} containers, found {}",
            rule.containers,
            cfg.containers.len()
        ));
    }
    let mut seen = BTreeSet::new();
    for c in &cfg.containers {
        if c.capacity < 1 {
            return bad(format!("container {} has zero capacity", c.id));
        }
        if rule.capacity.is_some_and(|cap| c.capacity != cap) {
            return bad(format!("container {} must hold {}", c.id, rule.capacity.unwrap()));
        }
        if !(c.interaction_radius > 0.0) {
            return bad(format!("container {} needs a positive radius A", c.id));
        }
        if c.accepts.theme() != cfg.theme {
            return bad(format!("container {} does not match the level theme", c.id));
        }
        if !seen.insert(c.id.as_str()) {
            return bad(format!("duplicate container id {}", c.id));
        }
    }
    for accepts in rule.accepts {
        if !cfg.containers.iter().any(|c| c.accepts == *accepts) {
            return bad(format!("no container accepts {accepts:?}"));
        }
    }
    let capacity: usize = cfg.containers.iter().map(|c| c.capacity).sum();
    if capacity != cfg.required_placements {
        return bad(format!(
            "container capacity {capacity} differs from required placements {}",
            cfg.required_placements
        ));
    }
    Ok(())
}
