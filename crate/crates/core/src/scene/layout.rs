use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::SceneError;

/// Rectangular room footprint on the floor plane. Coordinates are `(x, z)`;
/// `size` is measured along the room's own axes, rotated by `yaw` radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomRect {
    pub center: [f64; 2],
    pub size: [f64; 2],
    #[serde(default)]
    pub yaw: f64,
}

impl RoomRect {
    pub fn new(center: [f64; 2], size: [f64; 2]) -> Self {
        Self {
            center,
            size,
            yaw: 0.0,
        }
    }

    pub fn to_world(&self, local: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.yaw.sin_cos();
        [
            self.center[0] + c * local[0] - s * local[1],
            self.center[1] + s * local[0] + c * local[1],
        ]
    }

    pub fn to_local(&self, p: [f64; 2]) -> [f64; 2] {
        let (s, c) = self.yaw.sin_cos();
        let d = [p[0] - self.center[0], p[1] - self.center[1]];
        [c * d[0] + s * d[1], -s * d[0] + c * d[1]]
    }

    /// Distance from an interior point to the nearest wall; negative
    /// outside.
    pub fn wall_clearance(&self, p: [f64; 2]) -> f64 {
        let l = self.to_local(p);
        (self.size[0] / 2.0 - l[0].abs()).min(self.size[1] / 2.0 - l[1].abs())
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.wall_clearance(p) >= -1e-9
    }

    /// Corners counter-clockwise, shrunk by `inset`.
    pub fn corners(&self, inset: f64) -> Vec<[f64; 2]> {
        let hx = self.size[0] / 2.0 - inset;
        let hz = self.size[1] / 2.0 - inset;
        [[-hx, -hz], [hx, -hz], [hx, hz], [-hx, hz]]
            .into_iter()
            .map(|c| self.to_world(c))
            .collect()
    }
}

/// Positions for `stand_count` stands on the circle inscribed in `room`
/// minus `wall_margin`, equally spaced starting on the room's local +x axis.
pub fn layout_circle(
    stand_count: usize,
    room: &RoomRect,
    wall_margin: f64,
) -> Result<Vec<[f64; 2]>, SceneError> {
    if stand_count == 0 {
        return Err(SceneError::Layout("at least one stand is required".into()));
    }
    if !(wall_margin >= 0.0) {
        return Err(SceneError::Layout(format!(
            "wall margin must be nonnegative, got {wall_margin}"
        )));
    }
    let radius = room.size[0].min(room.size[1]) / 2.0 - wall_margin;
    if !(radius > 0.0) {
        return Err(SceneError::Layout(format!(
            "room {}x{} leaves no space inside a {wall_margin} m margin",
            room.size[0], room.size[1]
        )));
    }
    Ok((0..stand_count)
        .map(|k| {
            let theta = TAU * k as f64 / stand_count as f64;
            room.to_world([radius * theta.cos(), radius * theta.sin()])
        })
        .collect())
}
