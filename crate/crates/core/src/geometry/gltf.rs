//! Binary glTF 2.0 (`.glb`) export for viewer delivery.

use serde_json::{json, Value};

use super::mesh::{cross, sub};
use super::Mesh;

const ARRAY_BUFFER: u32 = 34962;
const ELEMENT_ARRAY_BUFFER: u32 = 34963;
const FLOAT: u32 = 5126;
const UNSIGNED_INT: u32 = 5125;

/// Area-weighted vertex normals.
pub fn vertex_normals(mesh: &Mesh) -> Vec<[f64; 3]> {
    let mut out = vec![[0.0; 3]; mesh.vertex_count()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = mesh.triangle_positions(t);
        let n = cross(sub(b, a), sub(c, a));
        for &v in tri {
            for k in 0..3 {
                out[v as usize][k] += n[k];
            }
        }
    }
    for n in &mut out {
        let l = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        *n = if l > 0.0 {
            [n[0] / l, n[1] / l, n[2] / l]
        } else {
            [0.0, 1.0, 0.0]
        };
    }
    out
}

struct Builder {
    bin: Vec<u8>,
    views: Vec<Value>,
    accessors: Vec<Value>,
}

impl Builder {
    fn add(&mut self, bytes: &[u8], target: u32, accessor: Value) -> usize {
        while self.bin.len() % 4 != 0 {
            self.bin.push(0);
        }
        let offset = self.bin.len();
        self.bin.extend_from_slice(bytes);
        self.views.push(json!({
            "buffer": 0,
            "byteOffset": offset,
            "byteLength": bytes.len(),
            "target": target,
        }));
        let mut accessor = accessor;
        accessor["bufferView"] = json!(self.views.len() - 1);
        self.accessors.push(accessor);
        self.accessors.len() - 1
    }

    fn floats<const N: usize>(&mut self, data: &[[f64; N]], kind: &str, bounds: bool) -> usize {
        let mut bytes = Vec::with_capacity(data.len() * N * 4);
        let mut lo = [f32::INFINITY; N];
        let mut hi = [f32::NEG_INFINITY; N];
        for v in data {
            for k in 0..N {
                let x = v[k] as f32;
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
                bytes.extend_from_slice(&x.to_le_bytes());
            }
        }
        let mut acc = json!({
            "componentType": FLOAT,
            "count": data.len(),
            "type": kind,
        });
        if bounds {
            acc["min"] = json!(lo.to_vec());
            acc["max"] = json!(hi.to_vec());
        }
        self.add(&bytes, ARRAY_BUFFER, acc)
    }
}

/// Encodes `mesh` as a single-node GLB with positions, normals, and colors
/// and texture coordinates when present.
pub fn write_glb(mesh: &Mesh) -> Vec<u8> {
    let mut b = Builder {
        bin: Vec::new(),
        views: Vec::new(),
        accessors: Vec::new(),
    };
    let position = b.floats(&mesh.positions, "VEC3", true);
    let normal = b.floats(&vertex_normals(mesh), "VEC3", false);
    let mut attributes = json!({ "POSITION": position, "NORMAL": normal });
    if let Some(colors) = &mesh.colors {
        attributes["COLOR_0"] = json!(b.floats(colors, "VEC3", false));
    }
    if let Some(uvs) = &mesh.uvs {
        attributes["TEXCOORD_0"] = json!(b.floats(uvs, "VEC2", false));
    }
    let index_bytes: Vec<u8> = mesh
        .triangles
        .iter()
        .flatten()
        .flat_map(|i| i.to_le_bytes())
        .collect();
    let indices = b.add(
        &index_bytes,
        ELEMENT_ARRAY_BUFFER,
        json!({
            "componentType": UNSIGNED_INT,
            "count": mesh.triangles.len() * 3,
            "type": "SCALAR",
        }),
    );
    while b.bin.len() % 4 != 0 {
        b.bin.push(0);
    }

    let doc = json!({
        "asset": { "version": "2.0", "generator": "curation-core" },
        "scene": 0,
        "scenes": [{ "nodes": [0] }],
        "nodes": [{ "mesh": 0, "name": mesh.name }],
        "meshes": [{
            "name": mesh.name,
            "primitives": [{ "attributes": attributes, "indices": indices, "mode": 4 }],
        }],
        "buffers": [{ "byteLength": b.bin.len() }],
        "bufferViews": b.views,
        "accessors": b.accessors,
    });
    let mut json_bytes = serde_json::to_vec(&doc).expect("glTF document serializes");
    while json_bytes.len() % 4 != 0 {
        json_bytes.push(b' ');
    }

    let total = 12 + 8 + json_bytes.len() + 8 + b.bin.len();
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(b"glTF");
    out.extend_from_slice(&2u32.to_le_bytes());
    out.extend_from_slice(&(total as u32).to_le_bytes());
    out.extend_from_slice(&(json_bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(b"JSON");
    out.extend_from_slice(&json_bytes);
    out.extend_from_slice(&(b.bin.len() as u32).to_le_bytes());
    out.extend_from_slice(b"BIN\0");
    out.extend_from_slice(&b.bin);
    out
}
