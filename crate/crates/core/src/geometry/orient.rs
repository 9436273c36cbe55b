//! Upright normalization: the fitted bottom plane ends up at `y = 0` with
//! its normal along `+y`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use super::mesh::{dot, triangle_area};
use super::{GeometryError, Mesh};

/// Fraction of the height extent treated as the bottom band.
pub const BOTTOM_BAND: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientationFix {
    /// Row-major orthonormal rotation.
    pub rotation: [[f64; 3]; 3],
    pub translation: [f64; 3],
    /// Unit normal of the bottom plane, pointing into the body, in the
    /// input frame.
    pub bottom_normal_before: [f64; 3],
}

impl OrientationFix {
    pub fn identity() -> Self {
        Self {
            rotation: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
            translation: [0.0; 3],
            bottom_normal_before: [0.0, 1.0, 0.0],
        }
    }

    pub fn rotate(&self, p: [f64; 3]) -> [f64; 3] {
        let r = &self.rotation;
        [dot(r[0], p), dot(r[1], p), dot(r[2], p)]
    }

    /// `R p + t`.
    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let q = self.rotate(p);
        [
            q[0] + self.translation[0],
            q[1] + self.translation[1],
            q[2] + self.translation[2],
        ]
    }

    /// Largest absolute deviation of the rotation from the identity and of
    /// the translation from zero.
    pub fn distance_from_identity(&self) -> f64 {
        let mut d: f64 = 0.0;
        for r in 0..3 {
            for c in 0..3 {
                let id = if r == c { 1.0 } else { 0.0 };
                d = d.max((self.rotation[r][c] - id).abs());
            }
            d = d.max(self.translation[r].abs());
        }
        d
    }
}

fn to_matrix(r: &[[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_row_slice(&[
        r[0][0], r[0][1], r[0][2], r[1][0], r[1][1], r[1][2], r[2][0], r[2][1], r[2][2],
    ])
}

/// Smallest rotation taking unit vector `from` onto `+y`.
pub(crate) fn rotation_to_up(from: [f64; 3]) -> [[f64; 3]; 3] {
    let a = Vector3::from(from).normalize();
    let y = Vector3::y();
    let v = a.cross(&y);
    let s = v.norm();
    let c = a.dot(&y);
    let m = if s < 1e-12 {
        if c > 0.0 {
            Matrix3::identity()
        } else {
            Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, -1.0))
        }
    } else {
        let k = Matrix3::new(0.0, -v[2], v[1], v[2], 0.0, -v[0], -v[1], v[0], 0.0);
        Matrix3::identity() + k + k * k * ((1.0 - c) / (s * s))
    };
    [
        [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
        [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
        [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
    ]
}

/// Indices of vertices whose height along `up` lies in the lowest band.
fn bottom_band(mesh: &Mesh, up: Vector3<f64>) -> Vec<usize> {
    let h: Vec<f64> = mesh
        .positions
        .iter()
        .map(|p| up.dot(&Vector3::from(*p)))
        .collect();
    let lo = h.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = h.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let cut = lo + BOTTOM_BAND * (hi - lo);
    (0..h.len()).filter(|&i| h[i] <= cut).collect()
}

/// Least-squares plane normal through the band, oriented along `up`.
fn fit_plane(mesh: &Mesh, band: &[usize], up: Vector3<f64>) -> Result<Vector3<f64>, GeometryError> {
    if band.len() < 3 {
        return Err(GeometryError::Orientation(format!(
            "bottom band holds {} vertices, need at least 3",
            band.len()
        )));
    }
    let pts: Vec<Vector3<f64>> = band.iter().map(|&i| Vector3::from(mesh.positions[i])).collect();
    let centroid = pts.iter().sum::<Vector3<f64>>() / pts.len() as f64;
    let cov = pts.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p - centroid;
        acc + d * d.transpose()
    });
    let eig = SymmetricEigen::new(cov);
    let mut order = [0, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let spread = eig.eigenvalues[order[1]];
    if spread <= 1e-18 * (1.0 + eig.eigenvalues[order[2]]) {
        return Err(GeometryError::Orientation(
            "bottom band is collinear; no plane to fit".into(),
        ));
    }
    let n = eig.eigenvectors.column(order[0]).into_owned().normalize();
    Ok(if n.dot(&up) < 0.0 { -n } else { n })
}

/// Initial up direction: the bounding-box axis whose perpendicular face is
/// smallest, signed so the bottom is the end nearer the surface centroid.
fn initial_up(mesh: &Mesh) -> Vector3<f64> {
    let (lo, hi) = mesh.bounding_box().expect("non-empty mesh");
    let e = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    let face = |k: usize| e[(k + 1) % 3] * e[(k + 2) % 3];
    let axis = [1usize, 0, 2]
        .into_iter()
        .min_by(|&a, &b| face(a).total_cmp(&face(b)))
        .unwrap();

    let mut weight = 0.0;
    let mut c = 0.0;
    for t in 0..mesh.face_count() {
        let [a, b, d] = mesh.triangle_positions(t);
        let w = triangle_area(a, b, d);
        weight += w;
        c += w * (a[axis] + b[axis] + d[axis]) / 3.0;
    }
    let centroid = if weight > 0.0 {
        c / weight
    } else {
        mesh.positions.iter().map(|p| p[axis]).sum::<f64>() / mesh.vertex_count() as f64
    };
    let mut up = Vector3::zeros();
    let to_min = centroid - lo[axis];
    let to_max = hi[axis] - centroid;
    up[axis] = if to_max < to_min - 1e-9 * e[axis] { -1.0 } else { 1.0 };
    up
}

/// Rotates and lifts `mesh` so its bottom plane is `y = 0` facing `+y`.
pub fn normalize_orientation(mesh: &Mesh) -> Result<(Mesh, OrientationFix), GeometryError> {
    if mesh.vertex_count() == 0 {
        return Err(GeometryError::EmptyMesh);
    }
    let up0 = initial_up(mesh);
    let n0 = fit_plane(mesh, &bottom_band(mesh, up0), up0)?;
    let band = bottom_band(mesh, n0);
    let up = fit_plane(mesh, &band, n0)?;

    let rotation = rotation_to_up([up[0], up[1], up[2]]);
    let mut fix = OrientationFix {
        rotation,
        translation: [0.0; 3],
        bottom_normal_before: [up[0], up[1], up[2]],
    };
    let base = band
        .iter()
        .map(|&i| fix.rotate(mesh.positions[i])[1])
        .sum::<f64>()
        / band.len() as f64;
    fix.translation = [0.0, -base, 0.0];
    Ok((mesh.map_positions(|p| fix.apply(p)), fix))
}

/// Checks `R^T R = I` within `tol`.
pub fn is_orthonormal(rotation: &[[f64; 3]; 3], tol: f64) -> bool {
    let r = to_matrix(rotation);
    (r.transpose() * r - Matrix3::identity()).abs().max() <= tol
}
