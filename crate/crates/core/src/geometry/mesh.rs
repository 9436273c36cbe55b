use super::GeometryError;

/// Indexed triangle surface. Positions are in meters, +y up.
///
/// Attributes are stored per vertex in parallel arrays; a mesh either has a
/// color (or uv) for every vertex or for none.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub name: String,
    pub positions: Vec<[f64; 3]>,
    pub colors: Option<Vec<[f64; 3]>>,
    pub uvs: Option<Vec<[f64; 2]>>,
    pub triangles: Vec<[u32; 3]>,
}

impl Mesh {
    /// Builds a validated mesh. Triangles that repeat an index are dropped.
    pub fn new(
        name: impl Into<String>,
        positions: Vec<[f64; 3]>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self, GeometryError> {
        Self::with_attributes(name, positions, None, None, triangles)
    }

    pub fn with_attributes(
        name: impl Into<String>,
        positions: Vec<[f64; 3]>,
        colors: Option<Vec<[f64; 3]>>,
        uvs: Option<Vec<[f64; 2]>>,
        triangles: Vec<[u32; 3]>,
    ) -> Result<Self, GeometryError> {
        if positions.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        let n = positions.len();
        if let Some(i) = positions
            .iter()
            .position(|p| p.iter().any(|c| !c.is_finite()))
        {
            return Err(GeometryError::NonFinite { vertex: i });
        }
        if let Some(c) = &colors {
            if c.len() != n {
                return Err(GeometryError::AttributeLength {
                    attribute: "color",
                    expected: n,
                    found: c.len(),
                });
            }
        }
        if let Some(t) = &uvs {
            if t.len() != n {
                return Err(GeometryError::AttributeLength {
                    attribute: "uv",
                    expected: n,
                    found: t.len(),
                });
            }
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&bad) = tri.iter().find(|&&i| i as usize >= n) {
                return Err(GeometryError::IndexOutOfRange {
                    triangle: t,
                    index: bad as usize,
                    vertex_count: n,
                });
            }
        }
        let triangles = triangles
            .into_iter()
            .filter(|[a, b, c]| a != b && b != c && a != c)
            .collect();
        Ok(Self {
            name: name.into(),
            positions,
            colors,
            uvs,
            triangles,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn has_colors(&self) -> bool {
        self.colors.is_some()
    }

    pub fn triangle_positions(&self, t: usize) -> [[f64; 3]; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.positions[a as usize],
            self.positions[b as usize],
            self.positions[c as usize],
        ]
    }

    /// Componentwise bounding box, `None` for a mesh without vertices.
    pub fn bounding_box(&self) -> Option<([f64; 3], [f64; 3])> {
        let first = *self.positions.first()?;
        Some(self.positions.iter().fold((first, first), |(lo, hi), p| {
            (
                [lo[0].min(p[0]), lo[1].min(p[1]), lo[2].min(p[2])],
                [hi[0].max(p[0]), hi[1].max(p[1]), hi[2].max(p[2])],
            )
        }))
    }

    /// Total surface area.
    pub fn area(&self) -> f64 {
        (0..self.face_count())
            .map(|t| {
                let [a, b, c] = self.triangle_positions(t);
                triangle_area(a, b, c)
            })
            .sum()
    }

    /// Returns a copy with every position mapped through `f`.
    pub fn map_positions(&self, f: impl Fn([f64; 3]) -> [f64; 3]) -> Mesh {
        Mesh {
            positions: self.positions.iter().map(|&p| f(p)).collect(),
            ..self.clone()
        }
    }

    /// Drops vertices that no triangle references, remapping indices.
    pub fn compact(&self) -> Mesh {
        let mut remap = vec![u32::MAX; self.vertex_count()];
        let mut order = Vec::new();
        for tri in &self.triangles {
            for &i in tri {
                if remap[i as usize] == u32::MAX {
                    remap[i as usize] = order.len() as u32;
                    order.push(i as usize);
                }
            }
        }
        Mesh {
            name: self.name.clone(),
            positions: order.iter().map(|&i| self.positions[i]).collect(),
            colors: self
                .colors
                .as_ref()
                .map(|c| order.iter().map(|&i| c[i]).collect()),
            uvs: self
                .uvs
                .as_ref()
                .map(|u| order.iter().map(|&i| u[i]).collect()),
            triangles: self
                .triangles
                .iter()
                .map(|t| t.map(|i| remap[i as usize]))
                .collect(),
        }
    }
}

pub(crate) fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn triangle_area(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    0.5 * norm(cross(sub(b, a), sub(c, a)))
}

/// Unit normal and twice the area; `None` for a zero-area triangle.
pub(crate) fn triangle_normal(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> Option<([f64; 3], f64)> {
    let n = cross(sub(b, a), sub(c, a));
    let len = norm(n);
    if len <= f64::EPSILON * (norm(sub(b, a)) * norm(sub(c, a))).max(f64::MIN_POSITIVE) {
        return None;
    }
    Some(([n[0] / len, n[1] / len, n[2] / len], len))
}
