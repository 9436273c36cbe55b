//! Scanned-asset pipeline: mesh loading, quadric-error decimation, upright
//! normalization, statistics and export.

mod gltf;
mod io;
mod mesh;
mod orient;
pub mod primitives;
mod quadric;
mod simplify;
mod stats;

use thiserror::Error;

pub use gltf::{vertex_normals, write_glb};
pub use io::{load_mesh, write_ply, MeshFormat};
pub use mesh::Mesh;
pub use orient::{is_orthonormal, normalize_orientation, OrientationFix, BOTTOM_BAND};
pub use quadric::{
    compute_quadrics, compute_quadrics_with, face_quadrics, ColorQuadric, Quadric,
    VertexQuadrics, SINGULAR_DET,
};
pub use simplify::{simplify, SimplifyOptions, Simplified, DEFAULT_TARGET_FACES};
pub use stats::{mesh_stats, MeshStats};

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("mesh has no vertices")]
    EmptyMesh,
    #[error("triangle {triangle} references vertex {index}, mesh has {vertex_count}")]
    IndexOutOfRange {
        triangle: usize,
        index: usize,
        vertex_count: usize,
    },
    #[error("vertex {vertex} has a non-finite coordinate")]
    NonFinite { vertex: usize },
    #[error("{attribute} array has {found} entries, expected {expected}")]
    AttributeLength {
        attribute: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("cannot orient mesh: {0}")]
    Orientation(String),
}
