//! Procedural meshes for fixtures, placeholder assets and benchmarks.

use std::collections::HashMap;

use super::Mesh;

pub fn unit_cube() -> Mesh {
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
    Mesh::new("cube", p, t).expect("static cube is valid")
}

/// Flat `n x n` grid of unit size in the `y = 0` plane, `2 n^2` triangles.
pub fn grid(n: usize) -> Mesh {
    let mut p = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            p.push([i as f64 / n as f64, 0.0, j as f64 / n as f64]);
        }
    }
    let idx = |i: usize, j: usize| (j * (n + 1) + i) as u32;
    let mut t = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            t.push([idx(i, j), idx(i, j + 1), idx(i + 1, j)]);
            t.push([idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)]);
        }
    }
    Mesh::new("grid", p, t).expect("grid is valid")
}

/// Sphere of `radius` from a subdivided icosahedron: `20 * 4^subdivisions`
/// triangles.
pub fn icosphere(radius: f64, subdivisions: u32) -> Mesh {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let mut p: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut t: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    let unit = |v: [f64; 3]| {
        let l = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        [v[0] / l, v[1] / l, v[2] / l]
    };
    for v in &mut p {
        *v = unit(*v);
    }
    for _ in 0..subdivisions {
        let mut mids: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(t.len() * 4);
        let mut mid = |a: u32, b: u32, p: &mut Vec<[f64; 3]>| {
            *mids.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (x, y) = (p[a as usize], p[b as usize]);
                p.push(unit([x[0] + y[0], x[1] + y[1], x[2] + y[2]]));
                (p.len() - 1) as u32
            })
        };
        for &[a, b, c] in &t {
            let ab = mid(a, b, &mut p);
            let bc = mid(b, c, &mut p);
            let ca = mid(c, a, &mut p);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        t = next;
    }
    for v in &mut p {
        *v = [v[0] * radius, v[1] * radius, v[2] * radius];
    }
    Mesh::new("icosphere", p, t).expect("icosphere is valid")
}

/// Closed vessel-like solid of revolution around `+y` with a flat base at
/// `y = 0`: `profile` lists `(radius, height)` rings from bottom to top.
pub fn vessel(profile: &[(f64, f64)], segments: usize) -> Mesh {
    let mut p = Vec::new();
    for &(r, h) in profile {
        for s in 0..segments {
            let a = std::f64::consts::TAU * s as f64 / segments as f64;
            p.push([r * a.cos(), h, r * a.sin()]);
        }
    }
    let bottom = p.len() as u32;
    p.push([0.0, profile[0].1, 0.0]);
    let top = p.len() as u32;
    p.push([0.0, profile[profile.len() - 1].1, 0.0]);
    let ring = |k: usize, s: usize| (k * segments + s % segments) as u32;
    let mut t = Vec::new();
    for k in 0..profile.len() - 1 {
        for s in 0..segments {
            t.push([ring(k, s), ring(k + 1, s), ring(k, s + 1)]);
            t.push([ring(k, s + 1), ring(k + 1, s), ring(k + 1, s + 1)]);
        }
    }
    let last = profile.len() - 1;
    for s in 0..segments {
        t.push([bottom, ring(0, s), ring(0, s + 1)]);
        t.push([top, ring(last, s + 1), ring(last, s)]);
    }
    Mesh::new("vessel", p, t).expect("vessel is valid")
}
