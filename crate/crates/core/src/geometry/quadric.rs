//! Quadric error metrics: plane quadrics over positions and the
//! position+color extension used when a mesh carries vertex colors.

use std::ops::{Add, AddAssign, Mul};

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use super::mesh::{dot, triangle_normal};
use super::Mesh;
use crate::exec::Exec;

/// Determinant below which the placement system counts as singular.
pub const SINGULAR_DET: f64 = 1e-12;

/// Symmetric 4x4 form stored as its 10 upper-triangle coefficients,
/// ordered `aa ab ac ad bb bc bd cc cd dd` for a plane `ax + by + cz + d`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Quadric {
    pub coeffs: [f64; 10],
}

impl Quadric {
    /// `weight * [n, d][n, d]^T` for the plane `n . x + d = 0`.
    pub fn from_plane(n: [f64; 3], d: f64, weight: f64) -> Self {
        let [a, b, c] = n;
        let w = weight;
        Self {
            coeffs: [
                w * a * a,
                w * a * b,
                w * a * c,
                w * a * d,
                w * b * b,
                w * b * c,
                w * b * d,
                w * c * c,
                w * c * d,
                w * d * d,
            ],
        }
    }

    /// `[v, 1]^T Q [v, 1]`.
    pub fn error(&self, v: [f64; 3]) -> f64 {
        let q = &self.coeffs;
        let [x, y, z] = v;
        q[0] * x * x
            + 2.0 * q[1] * x * y
            + 2.0 * q[2] * x * z
            + 2.0 * q[3] * x
            + q[4] * y * y
            + 2.0 * q[5] * y * z
            + 2.0 * q[6] * y
            + q[7] * z * z
            + 2.0 * q[8] * z
            + q[9]
    }

    pub fn matrix(&self) -> [[f64; 4]; 4] {
        let q = &self.coeffs;
        [
            [q[0], q[1], q[2], q[3]],
            [q[1], q[4], q[5], q[6]],
            [q[2], q[5], q[7], q[8]],
            [q[3], q[6], q[8], q[9]],
        ]
    }

    /// Position minimizing the error, or `None` when the 3x3 system is
    /// singular (`|det| < SINGULAR_DET`).
    pub fn minimizer(&self) -> Option<[f64; 3]> {
        let q = &self.coeffs;
        let a = Matrix3::new(q[0], q[1], q[2], q[1], q[4], q[5], q[2], q[5], q[7]);
        if a.determinant().abs() < SINGULAR_DET {
            return None;
        }
        let x = a.lu().solve(&Vector3::new(-q[3], -q[6], -q[8]))?;
        Some([x[0], x[1], x[2]])
    }
}

impl Add for Quadric {
    type Output = Quadric;
    fn add(mut self, rhs: Quadric) -> Quadric {
        self += rhs;
        self
    }
}

impl AddAssign for Quadric {
    fn add_assign(&mut self, rhs: Quadric) {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
    }
}

impl Mul<f64> for Quadric {
    type Output = Quadric;
    fn mul(mut self, s: f64) -> Quadric {
        self.coeffs.iter_mut().for_each(|c| *c *= s);
        self
    }
}

/// Quadric over position+RGB: `x^T A x + 2 b^T x + c` measuring squared
/// distance to a triangle's affine plane in 6-space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColorQuadric {
    pub a: Matrix6<f64>,
    pub b: Vector6<f64>,
    pub c: f64,
}

impl Default for ColorQuadric {
    fn default() -> Self {
        Self {
            a: Matrix6::zeros(),
            b: Vector6::zeros(),
            c: 0.0,
        }
    }
}

impl ColorQuadric {
    /// Area-weighted quadric of the triangle through three 6-d points.
    pub fn from_triangle(p: [Vector6<f64>; 3], weight: f64) -> Option<Self> {
        let e1 = p[1] - p[0];
        let e1 = e1.try_normalize(1e-15)?;
        let d2 = p[2] - p[0];
        let e2 = (d2 - e1 * e1.dot(&d2)).try_normalize(1e-15)?;
        let a = Matrix6::identity() - e1 * e1.transpose() - e2 * e2.transpose();
        let pe1 = p[0].dot(&e1);
        let pe2 = p[0].dot(&e2);
        let b = e1 * pe1 + e2 * pe2 - p[0];
        let c = p[0].dot(&p[0]) - pe1 * pe1 - pe2 * pe2;
        Some(Self {
            a: a * weight,
            b: b * weight,
            c: c * weight,
        })
    }

    pub fn error(&self, x: &Vector6<f64>) -> f64 {
        (x.transpose() * self.a * x)[0] + 2.0 * self.b.dot(x) + self.c
    }

    pub fn minimizer(&self) -> Option<Vector6<f64>> {
        if self.a.determinant().abs() < SINGULAR_DET {
            return None;
        }
        self.a.lu().solve(&(-self.b))
    }

    /// Best color for a fixed position: minimizes over the RGB block only.
    pub fn color_for(&self, pos: [f64; 3]) -> Option<[f64; 3]> {
        let acc = self.a.fixed_view::<3, 3>(3, 3).into_owned();
        if acc.determinant().abs() < SINGULAR_DET {
            return None;
        }
        let apc = self.a.fixed_view::<3, 3>(3, 0).into_owned();
        let rhs = -(apc * Vector3::from(pos) + self.b.fixed_rows::<3>(3).into_owned());
        let c = acc.lu().solve(&rhs)?;
        Some([c[0], c[1], c[2]])
    }
}

impl Add for ColorQuadric {
    type Output = ColorQuadric;
    fn add(self, rhs: ColorQuadric) -> ColorQuadric {
        Self {
            a: self.a + rhs.a,
            b: self.b + rhs.b,
            c: self.c + rhs.c,
        }
    }
}

impl AddAssign for ColorQuadric {
    fn add_assign(&mut self, rhs: ColorQuadric) {
        self.a += rhs.a;
        self.b += rhs.b;
        self.c += rhs.c;
    }
}

impl Mul<f64> for ColorQuadric {
    type Output = ColorQuadric;
    fn mul(self, s: f64) -> ColorQuadric {
        Self {
            a: self.a * s,
            b: self.b * s,
            c: self.c * s,
        }
    }
}

pub(crate) fn joined(p: [f64; 3], c: [f64; 3]) -> Vector6<f64> {
    Vector6::new(p[0], p[1], p[2], c[0], c[1], c[2])
}

/// Per-vertex quadrics of a mesh.
#[derive(Debug, Clone)]
pub struct VertexQuadrics {
    pub position: Vec<Quadric>,
    /// Present when the mesh has vertex colors.
    pub color: Option<Vec<ColorQuadric>>,
    /// Zero-area faces that contributed nothing.
    pub skipped_degenerate: usize,
}

/// Area-weighted plane quadric of every face; `None` for zero-area faces.
pub fn face_quadrics(mesh: &Mesh, exec: Exec) -> Vec<Option<Quadric>> {
    exec.map_range(mesh.face_count(), |t| {
        let [a, b, c] = mesh.triangle_positions(t);
        triangle_normal(a, b, c).map(|(n, twice_area)| {
            Quadric::from_plane(n, -dot(n, a), 0.5 * twice_area)
        })
    })
}

fn face_color_quadrics(mesh: &Mesh, colors: &[[f64; 3]], exec: Exec) -> Vec<Option<ColorQuadric>> {
    exec.map_range(mesh.face_count(), |t| {
        let tri = mesh.triangles[t];
        let [a, b, c] = mesh.triangle_positions(t);
        let (_, twice_area) = triangle_normal(a, b, c)?;
        let pts = [0, 1, 2].map(|k| {
            let v = tri[k] as usize;
            joined(mesh.positions[v], colors[v])
        });
        ColorQuadric::from_triangle(pts, 0.5 * twice_area)
    })
}

pub(crate) fn vertex_faces(mesh: &Mesh) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new(); mesh.vertex_count()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for &v in tri {
            out[v as usize].push(t as u32);
        }
    }
    out
}

/// Sums the area-weighted face quadrics around every vertex.
pub fn compute_quadrics(mesh: &Mesh) -> VertexQuadrics {
    compute_quadrics_with(mesh, Exec::default())
}

pub fn compute_quadrics_with(mesh: &Mesh, exec: Exec) -> VertexQuadrics {
    let faces = face_quadrics(mesh, exec);
    let skipped_degenerate = faces.iter().filter(|q| q.is_none()).count();
    let incident = vertex_faces(mesh);
    let position = exec.map(&incident, |fs| {
        fs.iter()
            .filter_map(|&f| faces[f as usize])
            .fold(Quadric::default(), |acc, q| acc + q)
    });
    let color = mesh.colors.as_deref().map(|colors| {
        let cfaces = face_color_quadrics(mesh, colors, exec);
        exec.map(&incident, |fs| {
            fs.iter()
                .filter_map(|&f| cfaces[f as usize])
                .fold(ColorQuadric::default(), |acc, q| acc + q)
        })
    });
    VertexQuadrics {
        position,
        color,
        skipped_degenerate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Mesh {
        let p = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
        ];
        let t = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [3, 6, 2],
            [3, 7, 6],
            [0, 4, 7],
            [0, 7, 3],
            [1, 2, 6],
            [1, 6, 5],
        ];
        Mesh::new("cube", p, t).unwrap()
    }

    #[test]
    fn planar_interior_vertex_has_zero_error() {
        let p = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0],
            [0.0, 0.0, -1.0],
        ];
        let t = vec![[0, 2, 1], [0, 3, 2], [0, 4, 3], [0, 1, 4]];
        let m = Mesh::new("fan", p, t).unwrap();
        let q = compute_quadrics(&m);
        assert!(q.position[0].error([0.0, 0.0, 0.0]).abs() < 1e-9);
        assert!(q.position[0].error([0.3, 0.0, -0.2]).abs() < 1e-9);
        assert!(q.position[0].error([0.0, 0.5, 0.0]) > 0.0);
    }

    #[test]
    fn cube_corner() {
        let m = cube();
        let q = compute_quadrics(&m);
        assert!(q.position[0].error([0.0; 3]).abs() < 1e-9);
        assert!(q.position[0].error([0.1, 0.1, 0.1]) > 0.0);
        let x = q.position[0].minimizer().unwrap();
        assert!(x.iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn degenerate_faces_are_counted() {
        let m = Mesh::new(
            "deg",
            vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2], [0, 1, 3]],
        )
        .unwrap();
        assert_eq!(compute_quadrics(&m).skipped_degenerate, 1);
    }

    #[test]
    fn color_quadric_zero_on_its_triangle() {
        let pts = [
            joined([0.0, 0.0, 0.0], [1.0, 0.0, 0.0]),
            joined([1.0, 0.0, 0.0], [0.0, 1.0, 0.0]),
            joined([0.0, 1.0, 0.0], [0.0, 0.0, 1.0]),
        ];
        let q = ColorQuadric::from_triangle(pts, 1.0).unwrap();
        let mid = (pts[0] + pts[1] + pts[2]) / 3.0;
        assert!(q.error(&mid).abs() < 1e-12);
        let c = q.color_for([1.0 / 3.0, 1.0 / 3.0, 0.0]).unwrap();
        for k in 0..3 {
            assert!((c[k] - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let m = cube();
        let a = compute_quadrics_with(&m, Exec::Sequential);
        let b = compute_quadrics_with(&m, Exec::Parallel);
        assert_eq!(a.position, b.position);
    }
}
