//! Edge-collapse decimation ordered by quadric error.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use nalgebra::Vector6;
use serde::{Deserialize, Serialize};

use super::mesh::{cross, dot, norm, sub, triangle_normal};
use super::quadric::{compute_quadrics, joined, ColorQuadric, Quadric};
use super::{GeometryError, Mesh};

/// Face budget used by the asset pipeline when none is given.
pub const DEFAULT_TARGET_FACES: usize = 20_000;

/// Weight of the constraint planes erected along open boundary edges,
/// relative to an average face.
const BOUNDARY_PENALTY: f64 = 100.0;

/// Smallest cosine allowed between a face normal before and after a collapse.
const MIN_NORMAL_COSINE: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimplifyOptions {
    /// Never move or remove vertices on open boundaries.
    pub preserve_boundary: bool,
    /// Stop once the cheapest remaining collapse costs more than this.
    pub max_error: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Simplified {
    pub mesh: Mesh,
    pub collapses: usize,
    /// Collapses refused because the edge was non-manifold, failed the link
    /// condition or would fold a face over.
    pub skipped_edges: usize,
    /// Face count after every collapse, in order.
    pub face_history: Vec<usize>,
}

#[derive(Clone, Copy)]
enum Metric {
    Plain(Quadric),
    Color(ColorQuadric),
}

impl Metric {
    fn merged(&self, other: &Metric) -> Metric {
        match (self, other) {
            (Metric::Plain(a), Metric::Plain(b)) => Metric::Plain(*a + *b),
            (Metric::Color(a), Metric::Color(b)) => Metric::Color(*a + *b),
            _ => unreachable!("metrics of one mesh share a kind"),
        }
    }
}

#[derive(Clone, Copy)]
struct Placement {
    cost: f64,
    position: [f64; 3],
    color: Option<[f64; 3]>,
}

#[derive(PartialEq)]
struct Candidate {
    cost: f64,
    u: u32,
    v: u32,
    stamp: (u32, u32),
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.u.cmp(&other.u))
            .then(self.v.cmp(&other.v))
    }
}

struct Decimator<'a> {
    source: &'a Mesh,
    positions: Vec<[f64; 3]>,
    colors: Option<Vec<[f64; 3]>>,
    uvs: Option<Vec<[f64; 2]>>,
    triangles: Vec<[u32; 3]>,
    face_alive: Vec<bool>,
    vertex_alive: Vec<bool>,
    vertex_faces: Vec<Vec<u32>>,
    metrics: Vec<Metric>,
    locked: Vec<bool>,
    stamp: Vec<u32>,
    alive_faces: usize,
}

/// Decimates `mesh` toward `target_face_count` faces.
pub fn simplify(
    mesh: &Mesh,
    target_face_count: usize,
    options: SimplifyOptions,
) -> Result<Simplified, GeometryError> {
    if target_face_count < 2 {
        return Err(GeometryError::InvalidArgument(format!(
            "target face count must be at least 2, got {target_face_count}"
        )));
    }
    if target_face_count >= mesh.face_count() {
        return Ok(Simplified {
            mesh: mesh.clone(),
            collapses: 0,
            skipped_edges: 0,
            face_history: Vec::new(),
        });
    }
    let mut d = Decimator::new(mesh, options.preserve_boundary);
    let mut heap = BinaryHeap::new();
    for (u, v) in d.edges() {
        d.push(&mut heap, u as usize, v as usize);
    }
    let mut collapses = 0;
    let mut skipped = 0;
    let mut history = Vec::new();
    while d.alive_faces > target_face_count {
        let Some(Reverse(c)) = heap.pop() else { break };
        let (u, v) = (c.u as usize, c.v as usize);
        if !d.vertex_alive[u] || !d.vertex_alive[v] || c.stamp != (d.stamp[u], d.stamp[v]) {
            continue;
        }
        if options.max_error.is_some_and(|m| c.cost > m) {
            break;
        }
        let Some(place) = d.placement(u, v) else {
            continue;
        };
        let shared = d.shared_faces(u, v);
        if shared.is_empty() {
            continue;
        }
        // keep a locked endpoint as the survivor
        let (keep, gone) = if d.locked[v] { (v, u) } else { (u, v) };
        if shared.len() > 2 || !d.link_condition(keep, gone, &shared) || d.folds(keep, gone, place.position) {
            skipped += 1;
            continue;
        }
        d.collapse(keep, gone, &shared, place);
        collapses += 1;
        history.push(d.alive_faces);
        let neighbors = d.neighbors(keep);
        for w in neighbors {
            d.push(&mut heap, keep, w);
        }
    }
    Ok(Simplified {
        mesh: d.finish(),
        collapses,
        skipped_edges: skipped,
        face_history: history,
    })
}

impl<'a> Decimator<'a> {
    fn new(mesh: &'a Mesh, preserve_boundary: bool) -> Self {
        let n = mesh.vertex_count();
        let quadrics = compute_quadrics(mesh);
        let mean_area = (mesh.area() / mesh.face_count().max(1) as f64).max(f64::MIN_POSITIVE);
        let scale = 1.0 / mean_area;
        let mut metrics: Vec<Metric> = match &quadrics.color {
            Some(cq) => cq.iter().map(|q| Metric::Color(*q * scale)).collect(),
            None => quadrics.position.iter().map(|q| Metric::Plain(*q * scale)).collect(),
        };

        let mut vertex_faces = vec![Vec::new(); n];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for &v in tri {
                vertex_faces[v as usize].push(t as u32);
            }
        }

        let mut locked = vec![false; n];
        for (t, a, b) in boundary_edges(mesh) {
            if preserve_boundary {
                locked[a as usize] = true;
                locked[b as usize] = true;
                continue;
            }
            let [p0, p1, p2] = mesh.triangle_positions(t);
            let Some((fn_, _)) = triangle_normal(p0, p1, p2) else {
                continue;
            };
            let pa = mesh.positions[a as usize];
            let edge = sub(mesh.positions[b as usize], pa);
            let len = norm(edge);
            if len == 0.0 {
                continue;
            }
            let side = cross(edge, fn_);
            let side_len = norm(side);
            let n = [side[0] / side_len, side[1] / side_len, side[2] / side_len];
            let q = Quadric::from_plane(n, -dot(n, pa), BOUNDARY_PENALTY * len * len * scale);
            for v in [a, b] {
                let m = &mut metrics[v as usize];
                *m = match *m {
                    Metric::Plain(p) => Metric::Plain(p + q),
                    Metric::Color(c) => Metric::Color(c + embed(&q)),
                };
            }
        }

        Self {
            source: mesh,
            positions: mesh.positions.clone(),
            colors: mesh.colors.clone(),
            uvs: mesh.uvs.clone(),
            triangles: mesh.triangles.clone(),
            face_alive: vec![true; mesh.face_count()],
            vertex_alive: vec![true; n],
            vertex_faces,
            metrics,
            locked,
            stamp: vec![0; n],
            alive_faces: mesh.face_count(),
        }
    }

    fn edges(&self) -> Vec<(u32, u32)> {
        let mut edges: Vec<(u32, u32)> = self
            .triangles
            .iter()
            .flat_map(|&[a, b, c]| [(a, b), (b, c), (c, a)])
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        edges.sort_unstable();
        edges.dedup();
        edges
    }

    fn push(&self, heap: &mut BinaryHeap<Reverse<Candidate>>, u: usize, v: usize) {
        let (u, v) = (u.min(v), u.max(v));
        if let Some(p) = self.placement(u, v) {
            heap.push(Reverse(Candidate {
                cost: p.cost,
                u: u as u32,
                v: v as u32,
                stamp: (self.stamp[u], self.stamp[v]),
            }));
        }
    }

    fn placement(&self, u: usize, v: usize) -> Option<Placement> {
        if self.locked[u] && self.locked[v] {
            return None;
        }
        let merged = self.metrics[u].merged(&self.metrics[v]);
        let fixed = if self.locked[u] {
            Some(u)
        } else if self.locked[v] {
            Some(v)
        } else {
            None
        };
        match merged {
            Metric::Plain(q) => {
                let (pu, pv) = (self.positions[u], self.positions[v]);
                let position = match fixed {
                    Some(k) => self.positions[k],
                    None => q.minimizer().unwrap_or_else(|| {
                        let mid = [
                            0.5 * (pu[0] + pv[0]),
                            0.5 * (pu[1] + pv[1]),
                            0.5 * (pu[2] + pv[2]),
                        ];
                        least(&[mid, pu, pv], |p| q.error(*p))
                    }),
                };
                Some(Placement {
                    cost: q.error(position).max(0.0),
                    position,
                    color: None,
                })
            }
            Metric::Color(q) => {
                let colors = self.colors.as_ref()?;
                let xu = joined(self.positions[u], colors[u]);
                let xv = joined(self.positions[v], colors[v]);
                let x = match fixed {
                    Some(k) => joined(self.positions[k], colors[k]),
                    None => q
                        .minimizer()
                        .unwrap_or_else(|| least(&[(xu + xv) * 0.5, xu, xv], |x| q.error(x))),
                };
                Some(Placement {
                    cost: q.error(&x).max(0.0),
                    position: [x[0], x[1], x[2]],
                    color: Some([
                        x[3].clamp(0.0, 1.0),
                        x[4].clamp(0.0, 1.0),
                        x[5].clamp(0.0, 1.0),
                    ]),
                })
            }
        }
    }

    fn alive_faces_of(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.vertex_faces[v]
            .iter()
            .map(|&f| f as usize)
            .filter(|&f| self.face_alive[f])
    }

    fn shared_faces(&self, u: usize, v: usize) -> Vec<usize> {
        self.alive_faces_of(u)
            .filter(|&f| self.triangles[f].contains(&(v as u32)))
            .collect()
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .alive_faces_of(v)
            .flat_map(|f| self.triangles[f])
            .map(|w| w as usize)
            .filter(|&w| w != v)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The common neighbours of `u` and `v` must be exactly the apexes of
    /// the faces they share.
    fn link_condition(&self, u: usize, v: usize, shared: &[usize]) -> bool {
        let nu = self.neighbors(u);
        let nv = self.neighbors(v);
        let common = nu.iter().filter(|w| nv.binary_search(w).is_ok()).count();
        if common != shared.len() {
            return false;
        }
        // collapsing the last edges of a closed tetrahedron-like cell
        !(nu.len() <= 3 && nv.len() <= 3)
    }

    fn folds(&self, keep: usize, gone: usize, target: [f64; 3]) -> bool {
        for end in [keep, gone] {
            for f in self.alive_faces_of(end) {
                let tri = self.triangles[f];
                if tri.contains(&(keep as u32)) && tri.contains(&(gone as u32)) {
                    continue;
                }
                let before = tri.map(|i| self.positions[i as usize]);
                let after = tri.map(|i| {
                    if i as usize == end {
                        target
                    } else {
                        self.positions[i as usize]
                    }
                });
                let Some((n0, _)) = triangle_normal(before[0], before[1], before[2]) else {
                    continue;
                };
                match triangle_normal(after[0], after[1], after[2]) {
                    Some((n1, _)) if dot(n0, n1) >= MIN_NORMAL_COSINE => {}
                    _ => return true,
                }
            }
        }
        false
    }

    fn collapse(&mut self, keep: usize, gone: usize, shared: &[usize], place: Placement) {
        for &f in shared {
            self.face_alive[f] = false;
            self.alive_faces -= 1;
        }
        let moved: Vec<u32> = self.alive_faces_of(gone).map(|f| f as u32).collect();
        for &f in &moved {
            for i in self.triangles[f as usize].iter_mut() {
                if *i as usize == gone {
                    *i = keep as u32;
                }
            }
        }
        self.vertex_faces[keep].retain(|&f| self.face_alive[f as usize]);
        self.vertex_faces[keep].extend(moved);
        self.vertex_faces[gone].clear();

        if let Some(uvs) = &mut self.uvs {
            let dk = norm(sub(self.positions[keep], place.position));
            let dg = norm(sub(self.positions[gone], place.position));
            if dg < dk {
                uvs[keep] = uvs[gone];
            }
        }
        self.positions[keep] = place.position;
        if let (Some(colors), Some(c)) = (&mut self.colors, place.color) {
            colors[keep] = c;
        }
        self.metrics[keep] = self.metrics[keep].merged(&self.metrics[gone]);
        self.vertex_alive[gone] = false;
        self.stamp[keep] += 1;
        self.stamp[gone] += 1;
    }

    fn finish(self) -> Mesh {
        let triangles = self
            .triangles
            .iter()
            .zip(&self.face_alive)
            .filter(|(_, &alive)| alive)
            .map(|(t, _)| *t)
            .collect();
        Mesh {
            name: self.source.name.clone(),
            positions: self.positions,
            colors: self.colors,
            uvs: self.uvs,
            triangles,
        }
        .compact()
    }
}

fn least<T: Copy>(candidates: &[T], err: impl Fn(&T) -> f64) -> T {
    let mut best = candidates[0];
    let mut best_err = err(&best);
    for c in &candidates[1..] {
        let e = err(c);
        if e < best_err {
            best = *c;
            best_err = e;
        }
    }
    best
}

fn embed(q: &Quadric) -> ColorQuadric {
    let m = q.matrix();
    let mut out = ColorQuadric::default();
    for r in 0..3 {
        for c in 0..3 {
            out.a[(r, c)] = m[r][c];
        }
    }
    out.b = Vector6::new(m[0][3], m[1][3], m[2][3], 0.0, 0.0, 0.0);
    out.c = m[3][3];
    out
}

/// Edges used by exactly one face: `(face, a, b)` with `a -> b` in the
/// face's winding.
pub(crate) fn boundary_edges(mesh: &Mesh) -> Vec<(usize, u32, u32)> {
    let mut edges: Vec<((u32, u32), usize, u32, u32)> = mesh
        .triangles
        .iter()
        .enumerate()
        .flat_map(|(t, &[a, b, c])| [(t, a, b), (t, b, c), (t, c, a)])
        .map(|(t, a, b)| ((a.min(b), a.max(b)), t, a, b))
        .collect();
    edges.sort_unstable_by_key(|e| e.0);
    let mut out = Vec::new();
    let mut i = 0;
    while i < edges.len() {
        let mut j = i + 1;
        while j < edges.len() && edges[j].0 == edges[i].0 {
            j += 1;
        }
        if j - i == 1 {
            let (_, t, a, b) = edges[i];
            out.push((t, a, b));
        }
        i = j;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives::grid;

    #[test]
    fn rejects_tiny_target() {
        assert!(matches!(
            simplify(&grid(2), 1, SimplifyOptions::default()),
            Err(GeometryError::InvalidArgument(_))
        ));
    }

    #[test]
    fn noop_when_target_not_below_count() {
        let g = grid(3);
        let s = simplify(&g, 18, SimplifyOptions::default()).unwrap();
        assert_eq!(s.mesh, g);
        assert_eq!(s.collapses, 0);
    }

    #[test]
    fn planar_grid_to_eight() {
        let g = grid(10);
        assert_eq!(g.face_count(), 200);
        let s = simplify(&g, 8, SimplifyOptions::default()).unwrap();
        assert!(s.mesh.face_count() <= 8, "{} faces", s.mesh.face_count());
        for p in &s.mesh.positions {
            assert!(p[1].abs() < 1e-6);
        }
        let (lo, hi) = s.mesh.bounding_box().unwrap();
        assert!((lo[0]).abs() < 1e-9 && (hi[0] - 1.0).abs() < 1e-9);
        assert!(s.face_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn preserve_boundary_keeps_rim() {
        let g = grid(6);
        let s = simplify(
            &g,
            2,
            SimplifyOptions {
                preserve_boundary: true,
                max_error: None,
            },
        )
        .unwrap();
        let rim = |p: &[f64; 3]| {
            p[0].abs() < 1e-12 || (p[0] - 1.0).abs() < 1e-12 || p[2].abs() < 1e-12 || (p[2] - 1.0).abs() < 1e-12
        };
        let kept = s.mesh.positions.iter().filter(|p| rim(p)).count();
        assert_eq!(kept, 24);
        assert_eq!(s.mesh.positions.len(), 24);
    }

    #[test]
    fn colors_follow_the_surface() {
        let mut g = grid(8);
        g.colors = Some(g.positions.iter().map(|p| [p[0], p[2], 0.5]).collect());
        let s = simplify(&g, 20, SimplifyOptions::default()).unwrap();
        let colors = s.mesh.colors.as_ref().unwrap();
        for (p, c) in s.mesh.positions.iter().zip(colors) {
            assert!((c[0] - p[0]).abs() < 1e-6 && (c[1] - p[2]).abs() < 1e-6, "{p:?} {c:?}");
        }
    }

    #[test]
    fn non_manifold_edges_are_skipped() {
        // three triangles fanning off one edge
        let m = Mesh::new(
            "fin",
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.5, 1.0, 0.0],
                [0.5, -1.0, 0.0],
                [0.5, 0.0, 1.0],
            ],
            vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]],
        )
        .unwrap();
        let s = simplify(&m, 2, SimplifyOptions::default()).unwrap();
        assert!(s.skipped_edges > 0 || s.mesh.face_count() <= 2);
    }
}
