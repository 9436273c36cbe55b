use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{
    MuseumScene, PointKind, RoomKind, EXHIBITS_PER_ROAMING_ROOM, PANEL_HEIGHT_TOLERANCE,
    PANEL_MAX_DISTANCE, STAND_HEIGHT_BAND,
};
use crate::game::{check_level_config, GameRules};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    DuplicateId,
    RoomCount,
    RoamingExhibitCount,
    ExhibitLevel,
    EmptyKnowledge,
    MissingStand,
    StandPlacement,
    StandHeight,
    PanelHeight,
    PanelAdjacency,
    MissingSpotlight,
    DuplicateSpotlight,
    MissingLightProbe,
    StaticExhibit,
    UnreachableTeleportPoint,
    DisconnectedTeleportGraph,
    LevelConfig,
    UnsolvableLevel,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::DuplicateId => "duplicate-id",
            Rule::RoomCount => "room-count",
            Rule::RoamingExhibitCount => "roaming-exhibit-count",
            Rule::ExhibitLevel => "exhibit-level",
            Rule::EmptyKnowledge => "empty-knowledge",
            Rule::MissingStand => "missing-stand",
            Rule::StandPlacement => "stand-placement",
            Rule::StandHeight => "stand-height",
            Rule::PanelHeight => "panel-height",
            Rule::PanelAdjacency => "panel-adjacency",
            Rule::MissingSpotlight => "missing-spotlight",
            Rule::DuplicateSpotlight => "duplicate-spotlight",
            Rule::MissingLightProbe => "missing-light-probe",
            Rule::StaticExhibit => "static-exhibit",
            Rule::UnreachableTeleportPoint => "unreachable-teleport-point",
            Rule::DisconnectedTeleportGraph => "disconnected-teleport-graph",
            Rule::LevelConfig => "level-config",
            Rule::UnsolvableLevel => "unsolvable-level",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub rule: Rule,
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.rule, self.subject, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn rules(&self) -> BTreeSet<Rule> {
        self.findings.iter().map(|f| f.rule).collect()
    }

    fn push(&mut self, rule: Rule, subject: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            rule,
            subject: subject.into(),
            message: message.into(),
        });
    }
}

fn floor_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn cross2(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Inside or on the boundary of a convex polygon of either winding.
fn in_convex(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    if poly.len() < 3 {
        return false;
    }
    let (mut pos, mut neg) = (false, false);
    for i in 0..poly.len() {
        let c = cross2(poly[i], poly[(i + 1) % poly.len()], p);
        pos |= c > 1e-9;
        neg |= c < -1e-9;
    }
    !(pos && neg)
}

fn segments_cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = cross2(c, d, a);
    let d2 = cross2(c, d, b);
    let d3 = cross2(a, b, c);
    let d4 = cross2(a, b, d);
    d1 * d2 <= 0.0 && d3 * d4 <= 0.0
}

fn polygons_touch(a: &[[f64; 2]], b: &[[f64; 2]]) -> bool {
    if a.iter().any(|&p| in_convex(b, p)) || b.iter().any(|&p| in_convex(a, p)) {
        return true;
    }
    (0..a.len()).any(|i| {
        (0..b.len()).any(|j| {
            segments_cross(a[i], a[(i + 1) % a.len()], b[j], b[(j + 1) % b.len()])
        })
    })
}

/// Lists every violated scene rule; an empty report means the scene is
/// ready to serve.
pub fn validate_scene(scene: &MuseumScene) -> ValidationReport {
    let mut report = ValidationReport::default();
    ids(scene, &mut report);
    rooms(scene, &mut report);
    stands(scene, &mut report);
    lighting(scene, &mut report);
    teleport(scene, &mut report);
    levels(scene, &mut report);
    report
}

fn ids(scene: &MuseumScene, r: &mut ValidationReport) {
    let groups: [(&str, Vec<&str>); 6] = [
        ("exhibit", scene.exhibits.iter().map(|e| e.id.as_str()).collect()),
        ("room", scene.rooms.iter().map(|e| e.id.as_str()).collect()),
        ("stand", scene.stands.iter().map(|e| e.id.as_str()).collect()),
        ("area", scene.teleport.areas.iter().map(|e| e.id.as_str()).collect()),
        ("teleport point", scene.teleport.points.iter().map(|e| e.id.as_str()).collect()),
        (
            "container",
            scene
                .levels
                .iter()
                .flat_map(|l| l.containers.iter().map(|c| c.id.as_str()))
                .collect(),
        ),
    ];
    for (kind, ids) in groups {
        let mut seen = BTreeSet::new();
        for id in ids {
            if !seen.insert(id) {
                r.push(Rule::DuplicateId, id, format!("{kind} id used more than once"));
            }
        }
    }
}

fn rooms(scene: &MuseumScene, r: &mut ValidationReport) {
    for kind in [RoomKind::Roaming, RoomKind::Game] {
        for level in 1..=3 {
            let n = scene
                .rooms
                .iter()
                .filter(|room| room.kind == kind && room.level == level)
                .count();
            if n != 1 {
                r.push(
                    Rule::RoomCount,
                    format!("{kind:?} {level}"),
                    format!("expected one room, found {n}"),
                );
            }
        }
    }
    if let Some(room) = scene.rooms.iter().find(|room| !(1..=3).contains(&room.level)) {
        r.push(Rule::RoomCount, &room.id, "room level outside 1..3");
    }
    let mut listed: BTreeMap<&str, u8> = BTreeMap::new();
    for room in &scene.rooms {
        if room.kind == RoomKind::Roaming && room.exhibit_ids.len() != EXHIBITS_PER_ROAMING_ROOM {
            r.push(
                Rule::RoamingExhibitCount,
                &room.id,
                format!(
                    "{} exhibits on display, expected {EXHIBITS_PER_ROAMING_ROOM}",
                    room.exhibit_ids.len()
                ),
            );
        }
        if room.kind == RoomKind::Game && !room.exhibit_ids.is_empty() {
            r.push(Rule::ExhibitLevel, &room.id, "game rooms do not display exhibits");
        }
        if room.kind == RoomKind::Roaming {
            for id in &room.exhibit_ids {
                if listed.insert(id, room.level).is_some() {
                    r.push(Rule::ExhibitLevel, id, "exhibit shown in more than one room");
                }
            }
        }
    }
    for e in &scene.exhibits {
        if e.knowledge_text.trim().is_empty() {
            r.push(Rule::EmptyKnowledge, &e.id, "knowledge text is empty");
        }
        match listed.get(e.id.as_str()) {
            None => r.push(Rule::ExhibitLevel, &e.id, "exhibit is not shown in any roaming room"),
            Some(&level) if level != e.level => r.push(
                Rule::ExhibitLevel,
                &e.id,
                format!("exhibit level {} but shown in level {level}", e.level),
            ),
            _ => {}
        }
    }
}

fn stands(scene: &MuseumScene, r: &mut ValidationReport) {
    let (lo, hi) = STAND_HEIGHT_BAND;
    for e in &scene.exhibits {
        let n = scene.stands.iter().filter(|s| s.exhibit_id == e.id).count();
        if n != 1 {
            r.push(Rule::MissingStand, &e.id, format!("exhibit has {n} stands, expected 1"));
        }
    }
    for s in &scene.stands {
        let room = scene.room_by_id(&s.room_id);
        let ok = room.is_some_and(|room| {
            room.exhibit_ids.contains(&s.exhibit_id)
                && room.rect.contains([s.position[0], s.position[2]])
        });
        if !ok {
            r.push(
                Rule::StandPlacement,
                &s.id,
                format!("stand must stand inside the room showing {}", s.exhibit_id),
            );
        }
        if !(lo..=hi).contains(&s.height) {
            r.push(
                Rule::StandHeight,
                &s.id,
                format!("height {} outside [{lo}, {hi}] m", s.height),
            );
        }
        if (s.panel.text_height - s.height).abs() > PANEL_HEIGHT_TOLERANCE {
            r.push(
                Rule::PanelHeight,
                &s.id,
                format!(
                    "panel text at {} m, exhibit displayed at {} m",
                    s.panel.text_height, s.height
                ),
            );
        }
        let d = floor_distance(s.position, s.panel.button_position);
        if d > PANEL_MAX_DISTANCE {
            r.push(
                Rule::PanelAdjacency,
                &s.id,
                format!("panel button {d:.2} m from its stand"),
            );
        }
    }
}

fn lighting(scene: &MuseumScene, r: &mut ValidationReport) {
    let l = &scene.lighting;
    for e in &scene.exhibits {
        match l
            .spotlights
            .iter()
            .filter(|s| s.target_exhibit_id == e.id)
            .count()
        {
            0 => r.push(Rule::MissingSpotlight, &e.id, "missing spotlight"),
            1 => {}
            n => r.push(Rule::DuplicateSpotlight, &e.id, format!("{n} spotlights target this exhibit")),
        }
        if !l.light_probes.iter().any(|p| p.exhibit_id == e.id) {
            r.push(Rule::MissingLightProbe, &e.id, "no light probe near this exhibit");
        }
        if l.static_ids.contains(&e.id) {
            r.push(Rule::StaticExhibit, &e.id, "exhibits are interactive and must stay dynamic");
        }
    }
}

fn transition_target(scene: &MuseumScene, room_id: &str, kind: PointKind) -> Option<String> {
    let room = scene.room_by_id(room_id)?;
    let (kind, level) = match (room.kind, kind) {
        (RoomKind::Roaming, PointKind::GameEntry) => (RoomKind::Game, room.level),
        (RoomKind::Game, PointKind::ReturnToRoaming) => (RoomKind::Roaming, room.level),
        (RoomKind::Game, PointKind::NextLevel) => (RoomKind::Roaming, room.level + 1),
        _ => return None,
    };
    scene.room(kind, level).map(|r| r.id.clone())
}

fn teleport(scene: &MuseumScene, r: &mut ValidationReport) {
    let g = &scene.teleport;
    let inside: Vec<Vec<usize>> = g
        .points
        .iter()
        .map(|p| {
            g.areas
                .iter()
                .enumerate()
                .filter(|(_, a)| a.room_id == p.room_id && in_convex(&a.polygon, [p.position[0], p.position[2]]))
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    for (p, areas) in g.points.iter().zip(&inside) {
        if areas.is_empty() {
            r.push(Rule::UnreachableTeleportPoint, &p.id, "unreachable teleport point: outside every walkable area");
        }
    }

    // Reachability from the level-1 roaming room: entering a room makes all
    // of its points selectable, points open their areas, overlapping areas
    // are walkable, and transition points lead to other rooms.
    let Some(start) = scene.room(RoomKind::Roaming, 1) else {
        return;
    };
    let mut rooms_seen: BTreeSet<String> = BTreeSet::new();
    let mut area_seen = vec![false; g.areas.len()];
    let mut queue = VecDeque::from([start.id.clone()]);
    while let Some(room) = queue.pop_front() {
        if !rooms_seen.insert(room.clone()) {
            continue;
        }
        let mut stack: Vec<usize> = Vec::new();
        for (pi, p) in g.points.iter().enumerate().filter(|(_, p)| p.room_id == room) {
            stack.extend(&inside[pi]);
            if let Some(next) = transition_target(scene, &room, p.kind) {
                queue.push_back(next);
            }
        }
        while let Some(a) = stack.pop() {
            if std::mem::replace(&mut area_seen[a], true) {
                continue;
            }
            for (b, other) in g.areas.iter().enumerate() {
                if !area_seen[b]
                    && other.room_id == g.areas[a].room_id
                    && polygons_touch(&g.areas[a].polygon, &other.polygon)
                {
                    stack.push(b);
                }
            }
        }
    }
    for room in &scene.rooms {
        if !rooms_seen.contains(&room.id) {
            r.push(Rule::DisconnectedTeleportGraph, &room.id, "room cannot be reached by teleport");
        }
    }
    for (a, seen) in g.areas.iter().zip(&area_seen) {
        if !seen && rooms_seen.contains(&a.room_id) {
            r.push(Rule::DisconnectedTeleportGraph, &a.id, "area cannot be reached by teleport");
        }
    }
}

fn levels(scene: &MuseumScene, r: &mut ValidationReport) {
    let mut all_ok = true;
    for cfg in &scene.levels {
        if let Err(e) = check_level_config(cfg) {
            all_ok = false;
            r.push(Rule::LevelConfig, format!("level {}", cfg.level), e.to_string());
            continue;
        }
        for c in &cfg.containers {
            let candidates = cfg
                .placeable()
                .filter(|i| scene.exhibit(&i.exhibit_id).is_some_and(|e| c.accepts.matches(e)))
                .count();
            if candidates < c.capacity {
                r.push(
                    Rule::UnsolvableLevel,
                    &c.id,
                    format!("{candidates} matching items for capacity {}", c.capacity),
                );
            }
        }
    }
    if all_ok {
        if let Err(e) = GameRules::new(Arc::new(scene.clone()), &scene.levels) {
            r.push(Rule::LevelConfig, "levels", e.to_string());
        }
    }
}
