use serde::{Deserialize, Serialize};

use super::simplify::boundary_edges;
use super::Mesh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    pub face_count: usize,
    pub vertex_count: usize,
    pub bbox_min: [f64; 3],
    pub bbox_max: [f64; 3],
    pub boundary_loop_count: usize,
    /// Largest bounding-box side, meters.
    pub max_extent: f64,
}

pub fn mesh_stats(mesh: &Mesh) -> MeshStats {
    let (bbox_min, bbox_max) = mesh.bounding_box().unwrap_or(([0.0; 3], [0.0; 3]));
    let max_extent = (0..3)
        .map(|k| bbox_max[k] - bbox_min[k])
        .fold(0.0, f64::max);
    MeshStats {
        face_count: mesh.face_count(),
        vertex_count: mesh.vertex_count(),
        bbox_min,
        bbox_max,
        boundary_loop_count: boundary_loops(mesh),
        max_extent,
    }
}

/// Connected components of the boundary-edge graph.
fn boundary_loops(mesh: &Mesh) -> usize {
    let edges = boundary_edges(mesh);
    let mut parent: Vec<usize> = (0..mesh.vertex_count()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut on_boundary = vec![false; mesh.vertex_count()];
    for &(_, a, b) in &edges {
        let (a, b) = (a as usize, b as usize);
        on_boundary[a] = true;
        on_boundary[b] = true;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
        }
    }
    (0..mesh.vertex_count())
        .filter(|&v| on_boundary[v] && find(&mut parent, v) == v)
        .count()
}
