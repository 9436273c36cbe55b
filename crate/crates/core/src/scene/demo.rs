//! The bundled demo museum: three roaming rooms of 22 bronzes each, three
//! game rooms and the level configurations that go with them.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use super::layout::{layout_circle, RoomRect};
use super::{
    Area, Category, DirectionalLight, Dynasty, Exhibit, LightProbe, LightingMeta, MuseumScene,
    Panel, PointKind, Purpose, Room, RoomKind, Spotlight, Stand, TeleportGraph, TeleportPoint,
    EXHIBITS_PER_ROAMING_ROOM,
};
use crate::game::{
    Accepts, Container, ContainerKind, GameItem, LevelConfig, Pose, Theme, DEFAULT_RADIUS_A,
    LEVEL_RULES,
};

pub const DEMO_SCENE_VERSION: &str = "demo-1";

const ROAMING_SIZE: f64 = 20.0;
const GAME_SIZE: f64 = 12.0;
const ROOM_SPACING: f64 = 30.0;
const WALL_MARGIN: f64 = 1.5;
const STAND_HEIGHT: f64 = 1.0;
const CONTAINER_RING: f64 = 4.5;

struct Kind {
    prefix: &'static str,
    name: &'static str,
    category: Category,
    purpose: Purpose,
    decoration: &'static str,
}

const KINDS: [Kind; 8] = [
    Kind {
        prefix: "ding",
        name: "Ding cauldron",
        category: Category::Tripod,
        purpose: Purpose::Sacrifice,
        decoration: "taotie mask bands over a thunder-pattern ground",
    },
    Kind {
        prefix: "gui",
        name: "Gui food vessel",
        category: Category::Gui,
        purpose: Purpose::Eating,
        decoration: "paired dragon handles and a band of whorl circles",
    },
    Kind {
        prefix: "hu",
        name: "Hu wine flask",
        category: Category::Bottle,
        purpose: Purpose::WineVessel,
        decoration: "interlaced serpents in horizontal registers",
    },
    Kind {
        prefix: "ge",
        name: "Ge dagger-axe",
        category: Category::Ge,
        purpose: Purpose::War,
        decoration: "a plain blade with a cicada motif on the tang",
    },
    Kind {
        prefix: "zhong",
        name: "Zhong bell",
        category: Category::Other,
        purpose: Purpose::MusicalInstrument,
        decoration: "rows of bosses framed by cloud scrolls",
    },
    Kind {
        prefix: "jue",
        name: "Jue wine cup",
        category: Category::Other,
        purpose: Purpose::WineVessel,
        decoration: "a spout, two capped posts and a bird-pattern frieze",
    },
    Kind {
        prefix: "li",
        name: "Li cooking vessel",
        category: Category::Other,
        purpose: Purpose::Eating,
        decoration: "hollow lobed legs with string lines",
    },
    Kind {
        prefix: "zun",
        name: "Zun ritual vessel",
        category: Category::Other,
        purpose: Purpose::Sacrifice,
        decoration: "flanges and animal heads on the shoulder",
    },
];

const DYNASTIES: [Dynasty; 3] = [Dynasty::ShangZhou, Dynasty::Han, Dynasty::WeiJin];

fn dynasty_text(d: Dynasty) -> (&'static str, &'static str) {
    match d {
        Dynasty::ShangZhou => (
            "Shang to Western Zhou, about 1300 to 771 BCE",
            "piece-mould casting with separately cast handles",
        ),
        Dynasty::Han => (
            "Han dynasty, 206 BCE to 220 CE",
            "thin-walled piece-mould casting finished by polishing",
        ),
        Dynasty::WeiJin => (
            "Wei and Jin period, 220 to 420 CE",
            "lost-wax casting of the fittings",
        ),
        Dynasty::Other => ("unknown period", "undetermined technique"),
    }
}

fn roaming_center(level: u8) -> [f64; 2] {
    [(level - 1) as f64 * ROOM_SPACING, 0.0]
}

fn game_center(level: u8) -> [f64; 2] {
    [(level - 1) as f64 * ROOM_SPACING, ROOM_SPACING]
}

fn exhibits() -> Vec<Exhibit> {
    let mut counters = [0usize; KINDS.len()];
    let mut out = Vec::new();
    for level in 1..=3u8 {
        for i in 0..EXHIBITS_PER_ROAMING_ROOM {
            let k = i % KINDS.len();
            counters[k] += 1;
            let kind = &KINDS[k];
            let id = format!("{}_{:02}", kind.prefix, counters[k]);
            let dynasty = DYNASTIES[(i + level as usize) % 3];
            let (age, casting) = dynasty_text(dynasty);
            out.push(Exhibit {
                mesh_asset: format!("{id}.glb"),
                display_name: format!("{} No. {}", kind.name, counters[k]),
                knowledge_text: format!(
                    "Age: {age}. Decoration: {}. Casting technology: {casting}. \
                     Historical value: shows how {} were made and used in ritual life.",
                    kind.decoration,
                    kind.name.to_lowercase()
                ),
                id,
                category: kind.category,
                purpose: kind.purpose,
                dynasty,
                level,
            });
        }
    }
    out
}

fn ring(center: [f64; 2], radius: f64, k: usize, n: usize, y: f64) -> [f64; 3] {
    let a = TAU * k as f64 / n as f64;
    [center[0] + radius * a.cos(), y, center[1] + radius * a.sin()]
}

fn table_pose(center: [f64; 2], k: usize) -> Pose {
    let col = (k % 6) as f64;
    let row = (k / 6) as f64;
    Pose::at([center[0] - 1.5 + 0.6 * col, 0.9, center[1] - 0.6 + 0.6 * row])
}

fn level_config(level: u8, exhibits: &[Exhibit]) -> LevelConfig {
    let rule = &LEVEL_RULES[level as usize - 1];
    let pool: Vec<&Exhibit> = exhibits.iter().filter(|e| e.level == level).collect();
    let center = game_center(level);
    let capacity = rule.capacity.unwrap_or(rule.required / rule.containers);
    let kind = match rule.theme {
        Theme::Category => ContainerKind::Shelf,
        Theme::Purpose => ContainerKind::RoundTable,
        Theme::Dynasty => ContainerKind::Booth,
    };
    let mut chosen: Vec<&Exhibit> = Vec::new();
    let mut containers = Vec::new();
    for (k, accepts) in rule.accepts.iter().enumerate() {
        let picked: Vec<&Exhibit> = pool
            .iter()
            .filter(|e| accepts.matches(e) && !chosen.iter().any(|c| c.id == e.id))
            .take(capacity)
            .copied()
            .collect();
        chosen.extend(picked);
        let (slug, label) = match accepts {
            Accepts::Category(c) => (format!("{c:?}"), format!("{c:?}")),
            Accepts::Purpose(p) => (format!("{p:?}"), format!("{p:?}")),
            Accepts::Dynasty(d) => (format!("{d:?}"), format!("{d:?}")),
        };
        containers.push(Container {
            id: format!("l{level}_{}", slug.to_lowercase()),
            label,
            kind,
            position: ring(center, CONTAINER_RING, k, rule.accepts.len(), 1.0),
            capacity,
            accepts: *accepts,
            interaction_radius: DEFAULT_RADIUS_A,
        });
    }
    let rest: Vec<&Exhibit> = pool
        .iter()
        .filter(|e| !chosen.iter().any(|c| c.id == e.id))
        .copied()
        .collect();
    let extra = rule.placeable - chosen.len();
    chosen.extend(&rest[..extra]);
    let mut items: Vec<GameItem> = chosen
        .iter()
        .enumerate()
        .map(|(k, e)| GameItem {
            exhibit_id: e.id.clone(),
            initial_pose: table_pose(center, k),
            display_only: false,
        })
        .collect();
    for e in &rest[extra..extra + rule.display_only] {
        items.push(GameItem {
            exhibit_id: e.id.clone(),
            initial_pose: Pose::at([center[0], 0.45, center[1] + 2.5]),
            display_only: true,
        });
    }
    LevelConfig {
        level,
        theme: rule.theme,
        room_id: format!("game_{level}"),
        items,
        required_placements: rule.required,
        containers,
        pass_threshold: rule.threshold,
        threshold_strict: rule.strict,
    }
}

fn point(id: String, room_id: &str, position: [f64; 3], kind: PointKind, open: bool) -> TeleportPoint {
    TeleportPoint {
        id,
        room_id: room_id.to_string(),
        position,
        kind,
        initially_open: open,
    }
}

/// Builds the demo scene. Deterministic; the bundled fixture is its JSON.
pub fn demo_scene() -> MuseumScene {
    let exhibits = exhibits();
    let mut rooms = Vec::new();
    let mut stands = Vec::new();
    let mut areas = Vec::new();
    let mut points = Vec::new();
    let mut spotlights = Vec::new();
    let mut light_probes = Vec::new();
    let mut static_ids = BTreeSet::new();

    for level in 1..=3u8 {
        let rid = format!("roaming_{level}");
        let rect = RoomRect::new(roaming_center(level), [ROAMING_SIZE, ROAMING_SIZE]);
        let shown: Vec<&Exhibit> = exhibits.iter().filter(|e| e.level == level).collect();
        let spots = layout_circle(shown.len(), &rect, WALL_MARGIN).expect("demo room fits");
        for (k, (e, p)) in shown.iter().zip(&spots).enumerate() {
            let sid = format!("stand_{}", e.id);
            // Button sits beside the stand, a little further along the ring.
            let b = ring(rect.center, ROAMING_SIZE / 2.0 - WALL_MARGIN, 2 * k + 1, 2 * shown.len(), 0.0);
            stands.push(Stand {
                id: sid.clone(),
                room_id: rid.clone(),
                position: [p[0], 0.0, p[1]],
                height: STAND_HEIGHT,
                exhibit_id: e.id.clone(),
                panel: Panel {
                    button_position: [b[0], 1.1, b[2]],
                    text_height: 1.2,
                },
            });
            spotlights.push(Spotlight {
                target_exhibit_id: e.id.clone(),
                position: [p[0], 3.5, p[1]],
                cone_angle_deg: 30.0,
            });
            light_probes.push(LightProbe {
                exhibit_id: e.id.clone(),
                position: [p[0], STAND_HEIGHT + 0.3, p[1]],
            });
            static_ids.insert(sid);
        }
        static_ids.insert(format!("{rid}_walls"));
        areas.push(Area {
            id: format!("{rid}_floor"),
            room_id: rid.clone(),
            polygon: rect.corners(0.5),
        });
        let [cx, cz] = rect.center;
        points.push(point(format!("{rid}_center"), &rid, [cx, 0.0, cz], PointKind::Plain, true));
        points.push(point(format!("{rid}_north"), &rid, [cx, 0.0, cz + 5.0], PointKind::Plain, true));
        points.push(point(format!("{rid}_south"), &rid, [cx, 0.0, cz - 5.0], PointKind::Plain, true));
        points.push(point(format!("enter_game_{level}"), &rid, [cx + 6.0, 0.0, cz], PointKind::GameEntry, true));
        rooms.push(Room {
            id: rid,
            kind: RoomKind::Roaming,
            level,
            rect,
            exhibit_ids: shown.iter().map(|e| e.id.clone()).collect(),
        });

        let gid = format!("game_{level}");
        let grect = RoomRect::new(game_center(level), [GAME_SIZE, GAME_SIZE]);
        let [gx, gz] = grect.center;
        areas.push(Area {
            id: format!("{gid}_floor"),
            room_id: gid.clone(),
            polygon: grect.corners(0.5),
        });
        points.push(point(format!("{gid}_center"), &gid, [gx, 0.0, gz - 2.5], PointKind::Plain, true));
        points.push(point(format!("return_{level}"), &gid, [gx - 5.0, 0.0, gz - 5.0], PointKind::ReturnToRoaming, true));
        if level < 3 {
            points.push(point(format!("next_level_{level}"), &gid, [gx + 5.0, 0.0, gz + 5.0], PointKind::NextLevel, false));
        }
        static_ids.insert(format!("{gid}_walls"));
        rooms.push(Room {
            id: gid,
            kind: RoomKind::Game,
            level,
            rect: grect,
            exhibit_ids: Vec::new(),
        });
    }

    let levels: Vec<LevelConfig> = (1..=3).map(|l| level_config(l, &exhibits)).collect();
    for c in levels.iter().flat_map(|l| &l.containers) {
        static_ids.insert(c.id.clone());
    }

    MuseumScene {
        version: DEMO_SCENE_VERSION.to_string(),
        rooms,
        stands,
        exhibits,
        teleport: TeleportGraph { areas, points },
        lighting: LightingMeta {
            ambient: 0.6,
            directional: DirectionalLight {
                direction: [-0.3, -1.0, -0.2],
                intensity: 0.8,
            },
            spotlights,
            reflection_probe: [ROOM_SPACING, 2.5, ROOM_SPACING / 2.0],
            light_probes,
            static_ids,
        },
        levels,
    }
}
