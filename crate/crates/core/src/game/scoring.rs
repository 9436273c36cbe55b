use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{Container, LevelConfig};
use super::Pose;
use crate::scene::MuseumScene;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub assigned_container: Option<String>,
    pub correct: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyResult {
    pub level: u8,
    pub per_item: BTreeMap<String, ItemResult>,
    pub correct_count: usize,
    pub required_placements: usize,
    pub accuracy: f64,
    pub passed: bool,
}

fn distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Nearest container whose center lies closer than its radius `A`
/// (or `radius_override`). Equal distances go to the smaller id.
pub fn assign_container<'c>(
    position: [f64; 3],
    containers: &'c [Container],
    radius_override: Option<f64>,
) -> Option<&'c Container> {
    containers
        .iter()
        .map(|c| (distance(position, c.position), c))
        .filter(|(d, c)| *d < radius_override.unwrap_or(c.interaction_radius))
        .min_by(|(da, a), (db, b)| da.total_cmp(db).then_with(|| a.id.cmp(&b.id)))
        .map(|(_, c)| c)
}

/// Scores a set of placements against a level. Unplaced items and items
/// beyond a container's capacity (farthest first) count as incorrect.
pub fn score_placements(
    scene: &MuseumScene,
    config: &LevelConfig,
    placements: &BTreeMap<String, Pose>,
) -> AccuracyResult {
    let mut per_item = BTreeMap::new();
    let mut by_container: BTreeMap<&str, Vec<(f64, &str)>> = BTreeMap::new();
    for item in config.placeable() {
        let id = item.exhibit_id.as_str();
        let assigned = placements
            .get(id)
            .and_then(|pose| assign_container(pose.position, &config.containers, None));
        if let (Some(c), Some(pose)) = (assigned, placements.get(id)) {
            by_container
                .entry(c.id.as_str())
                .or_default()
                .push((distance(pose.position, c.position), id));
        }
        per_item.insert(
            id.to_string(),
            ItemResult {
                assigned_container: assigned.map(|c| c.id.clone()),
                correct: false,
            },
        );
    }
    for (cid, mut items) in by_container {
        let container = config
            .containers
            .iter()
            .find(|c| c.id == cid)
            .expect("assigned container exists");
        items.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
        for &(_, id) in items.iter().take(container.capacity) {
            let ok = scene
                .exhibit(id)
                .is_some_and(|e| container.accepts.matches(e));
            per_item.get_mut(id).expect("item scored").correct = ok;
        }
    }
    let correct_count = per_item.values().filter(|r| r.correct).count();
    let accuracy = correct_count as f64 / config.required_placements as f64;
    AccuracyResult {
        level: config.level,
        per_item,
        correct_count,
        required_placements: config.required_placements,
        accuracy,
        passed: config.passes(accuracy),
    }
}

/// Correct placement for every scored slot: each container's first
/// `capacity` matching items, placed at the container center.
pub fn answer_key(scene: &MuseumScene, config: &LevelConfig) -> BTreeMap<String, Pose> {
    let mut key = BTreeMap::new();
    for c in &config.containers {
        let matching = config.placeable().filter(|i| {
            !key.contains_key(&i.exhibit_id)
                && scene.exhibit(&i.exhibit_id).is_some_and(|e| c.accepts.matches(e))
        });
        let picked: Vec<String> = matching.take(c.capacity).map(|i| i.exhibit_id.clone()).collect();
        for id in picked {
            key.insert(id, Pose::at(c.position));
        }
    }
    key
}
