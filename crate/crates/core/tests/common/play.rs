//! Scripted play on the demo museum. The answer key is rebuilt here from
//! the raw scene data rather than taken from the library.

use std::collections::BTreeMap;
use std::sync::Arc;

use curation_core::game::{Accepts, GameRules, GameSession, LevelConfig, Pose};
use curation_core::scene::{demo_scene, Exhibit, MuseumScene};
use curation_core::sessionlog::{EventKind, InteractionEvent, SessionLog};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn demo_rules() -> GameRules {
    GameRules::from_scene(Arc::new(demo_scene())).expect("demo configs are valid")
}

fn accepts(a: &Accepts, e: &Exhibit) -> bool {
    match a {
        Accepts::Category(c) => e.category == *c,
        Accepts::Purpose(p) => e.purpose == *p,
        Accepts::Dynasty(d) => e.dynasty == *d,
    }
}

/// `(item, container position)` for every scored slot, container order.
pub fn key(scene: &MuseumScene, cfg: &LevelConfig) -> Vec<(String, [f64; 3])> {
    let mut out: Vec<(String, [f64; 3])> = Vec::new();
    for c in &cfg.containers {
        let mut free = c.capacity;
        for item in cfg.items.iter().filter(|i| !i.display_only) {
            if free == 0 {
                break;
            }
            let e = scene.exhibits.iter().find(|e| e.id == item.exhibit_id).unwrap();
            if accepts(&c.accepts, e) && !out.iter().any(|(id, _)| id == &e.id) {
                out.push((e.id.clone(), c.position));
                free -= 1;
            }
        }
    }
    out
}

/// Moves `k` answer-key items onto their containers through grab/release.
pub fn place_correct(rules: &GameRules, s: &mut GameSession, k: usize) {
    let level = s.current_level;
    for (id, pos) in key(rules.scene(), rules.level(level)).into_iter().take(k) {
        rules.grab(s, &id).unwrap();
        rules.release(s, &id, Pose::at(pos)).unwrap();
    }
}

/// Events that clear one level, answer key only.
pub fn level_events(rules: &GameRules, level: u8) -> Vec<EventKind> {
    let scene = rules.scene();
    let room = format!("roaming_{level}");
    let mut ev = Vec::new();
    ev.push(EventKind::Teleport { point_id: format!("{room}_north") });
    for e in scene.rooms.iter().find(|r| r.id == room).unwrap().exhibit_ids.iter().take(3) {
        ev.push(EventKind::Touch { item_id: e.clone() });
        ev.push(EventKind::PanelOpen { exhibit_id: e.clone() });
    }
    ev.push(EventKind::Teleport { point_id: format!("enter_game_{level}") });
    for (id, pos) in key(scene, rules.level(level)) {
        ev.push(EventKind::Grab { item_id: id.clone() });
        ev.push(EventKind::Rotate { item_id: id.clone(), rotation: [0.0, 0.7071067811865476, 0.0, 0.7071067811865476] });
        ev.push(EventKind::Release { item_id: id, pose: Pose::at(pos) });
    }
    ev.push(EventKind::SubmitClick);
    if level < 3 {
        ev.push(EventKind::Teleport { point_id: format!("next_level_{level}") });
    }
    ev
}

/// Full three-level playthrough whose first event is at `start` and whose
/// level-3 passing submission is at `start + duration`.
pub fn playthrough_log(rules: &GameRules, start: u64, duration: u64) -> SessionLog {
    let kinds: Vec<EventKind> = (1..=3).flat_map(|l| level_events(rules, l)).collect();
    let mut log = SessionLog::new("fixture", rules.scene().version.clone());
    let last = kinds.len() - 1;
    for (i, kind) in kinds.into_iter().enumerate() {
        let t = start + duration * i as u64 / last as u64;
        log.record(InteractionEvent::new(t, kind)).unwrap();
    }
    log
}

/// Random events over real and bogus ids, legal or not.
pub fn random_log(rules: &GameRules, seed: u64, len: usize) -> SessionLog {
    let scene = rules.scene();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut items: Vec<String> = scene.exhibits.iter().map(|e| e.id.clone()).collect();
    items.push("ding_99".into());
    let mut points: Vec<String> = scene.teleport.points.iter().map(|p| p.id.clone()).collect();
    points.push("nowhere".into());
    let mut log = SessionLog::new(format!("rand-{seed}"), scene.version.clone());
    let mut t = 0;
    for _ in 0..len {
        t += rng.random_range(0..5000);
        let item = items[rng.random_range(0..items.len())].clone();
        let kind = match rng.random_range(0..9) {
            0 => EventKind::Teleport { point_id: points[rng.random_range(0..points.len())].clone() },
            1 => EventKind::Touch { item_id: item },
            2 => EventKind::Grab { item_id: item },
            3 => EventKind::Rotate { item_id: item, rotation: [0.0, 0.0, 0.0, 1.0] },
            4 => {
                let c = &rules.level(rng.random_range(1..=3)).containers;
                let p = c[rng.random_range(0..c.len())].position;
                EventKind::Release { item_id: item, pose: Pose::at(p) }
            }
            5 => EventKind::PanelOpen { exhibit_id: item },
            6 => EventKind::SubmitClick,
            7 => EventKind::EnterGame,
            _ => EventKind::ReturnToRoaming,
        };
        log.record(InteractionEvent::new(t, kind)).unwrap();
    }
    log
}

pub fn initial_poses(cfg: &LevelConfig) -> BTreeMap<String, Pose> {
    cfg.items
        .iter()
        .filter(|i| !i.display_only)
        .map(|i| (i.exhibit_id.clone(), i.initial_pose))
        .collect()
}
