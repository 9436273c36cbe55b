use std::collections::BTreeSet;
use std::path::Path;

use super::{MuseumScene, RoomKind, SceneError, EXHIBITS_PER_ROAMING_ROOM};

/// Parses, links and checks the structural invariants of a scene document.
pub fn load_scene(document: &str) -> Result<MuseumScene, SceneError> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let scene: MuseumScene = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SceneError::Schema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    link(&scene)?;
    structure(&scene)?;
    Ok(scene)
}

pub fn to_json(scene: &MuseumScene) -> String {
    serde_json::to_string_pretty(scene).expect("scene serializes")
}

fn link(scene: &MuseumScene) -> Result<(), SceneError> {
    let exhibits: BTreeSet<&str> = scene.exhibits.iter().map(|e| e.id.as_str()).collect();
    let rooms: BTreeSet<&str> = scene.rooms.iter().map(|r| r.id.as_str()).collect();
    let dangling = |kind, id: &str, from: &str| SceneError::Link {
        kind,
        id: id.to_string(),
        from: from.to_string(),
    };
    for e in &scene.exhibits {
        if e.mesh_asset.trim().is_empty() {
            return Err(dangling("asset", "", &e.id));
        }
    }
    for r in &scene.rooms {
        for id in &r.exhibit_ids {
            if !exhibits.contains(id.as_str()) {
                return Err(dangling("exhibit", id, &r.id));
            }
        }
    }
    for s in &scene.stands {
        if !exhibits.contains(s.exhibit_id.as_str()) {
            return Err(dangling("exhibit", &s.exhibit_id, &s.id));
        }
        if !rooms.contains(s.room_id.as_str()) {
            return Err(dangling("room", &s.room_id, &s.id));
        }
    }
    for a in &scene.teleport.areas {
        if !rooms.contains(a.room_id.as_str()) {
            return Err(dangling("room", &a.room_id, &a.id));
        }
    }
    for p in &scene.teleport.points {
        if !rooms.contains(p.room_id.as_str()) {
            return Err(dangling("room", &p.room_id, &p.id));
        }
    }
    for s in &scene.lighting.spotlights {
        if !exhibits.contains(s.target_exhibit_id.as_str()) {
            return Err(dangling("exhibit", &s.target_exhibit_id, "spotlight"));
        }
    }
    for p in &scene.lighting.light_probes {
        if !exhibits.contains(p.exhibit_id.as_str()) {
            return Err(dangling("exhibit", &p.exhibit_id, "light probe"));
        }
    }
    for l in &scene.levels {
        let from = format!("level {}", l.level);
        if !rooms.contains(l.room_id.as_str()) {
            return Err(dangling("room", &l.room_id, &from));
        }
        for item in &l.items {
            if !exhibits.contains(item.exhibit_id.as_str()) {
                return Err(dangling("exhibit", &item.exhibit_id, &from));
            }
        }
        if l.containers.is_empty() {
            return Err(dangling("container", "", &from));
        }
    }
    Ok(())
}

fn structure(scene: &MuseumScene) -> Result<(), SceneError> {
    for kind in [RoomKind::Roaming, RoomKind::Game] {
        let levels: Vec<u8> = scene
            .rooms
            .iter()
            .filter(|r| r.kind == kind)
            .map(|r| r.level)
            .collect();
        let unique: BTreeSet<u8> = levels.iter().copied().collect();
        if levels.len() != 3 || unique != BTreeSet::from([1, 2, 3]) {
            return Err(SceneError::Invariant(format!(
                "expected one {kind:?} room per level 1..3, found levels {levels:?}"
            )));
        }
    }
    for r in scene.rooms.iter().filter(|r| r.kind == RoomKind::Roaming) {
        if r.exhibit_ids.len() != EXHIBITS_PER_ROAMING_ROOM {
            return Err(SceneError::Invariant(format!(
                "roaming room {} lists {} exhibits, expected {EXHIBITS_PER_ROAMING_ROOM}",
                r.id,
                r.exhibit_ids.len()
            )));
        }
    }
    Ok(())
}

/// Exhibit assets that do not exist under `asset_dir`.
pub fn missing_assets(scene: &MuseumScene, asset_dir: &Path) -> Vec<String> {
    scene
        .exhibits
        .iter()
        .filter(|e| !asset_dir.join(&e.mesh_asset).is_file())
        .map(|e| e.mesh_asset.clone())
        .collect()
}
