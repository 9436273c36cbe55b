//! Independent oracles shared by the integration suites. Nothing here calls
//! into the code paths it is used to check.
#![allow(dead_code)]

use curation_core::geometry::Mesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type V3 = [f64; 3];

fn sub(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}
fn add(a: V3, b: V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}
fn scale(a: V3, s: f64) -> V3 {
    [a[0] * s, a[1] * s, a[2] * s]
}
fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
fn cross(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub fn closest_on_triangle(p: V3, a: V3, b: V3, c: V3) -> V3 {
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(p, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = sub(p, b);
    let d3 = dot(ab, bp);
    let d4 = dot(ac, bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return add(a, scale(ab, d1 / (d1 - d3)));
    }
    let cp = sub(p, c);
    let d5 = dot(ab, cp);
    let d6 = dot(ac, cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return add(a, scale(ac, d2 / (d2 - d6)));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return add(b, scale(sub(c, b), (d4 - d3) / ((d4 - d3) + (d5 - d6))));
    }
    let denom = 1.0 / (va + vb + vc);
    add(a, add(scale(ab, vb * denom), scale(ac, vc * denom)))
}

fn tri(mesh: &Mesh, t: usize) -> [V3; 3] {
    mesh.triangles[t].map(|i| mesh.positions[i as usize])
}

pub fn point_mesh_distance(p: V3, mesh: &Mesh) -> f64 {
    (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = tri(mesh, t);
            let q = closest_on_triangle(p, a, b, c);
            dot(sub(p, q), sub(p, q))
        })
        .fold(f64::INFINITY, f64::min)
        .sqrt()
}

/// Vertices plus `count` area-proportional uniform surface samples.
pub fn surface_samples(mesh: &Mesh, count: usize, seed: u64) -> Vec<V3> {
    let areas: Vec<f64> = (0..mesh.triangles.len())
        .map(|t| {
            let [a, b, c] = tri(mesh, t);
            let n = cross(sub(b, a), sub(c, a));
            0.5 * dot(n, n).sqrt()
        })
        .collect();
    let total: f64 = areas.iter().sum();
    let mut cdf = Vec::with_capacity(areas.len());
    let mut acc = 0.0;
    for a in &areas {
        acc += a / total;
        cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = mesh.positions.clone();
    for _ in 0..count {
        let r: f64 = rng.random();
        let t = cdf.partition_point(|&c| c < r).min(areas.len() - 1);
        let [a, b, c] = tri(mesh, t);
        let (mut u, mut v): (f64, f64) = (rng.random(), rng.random());
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        out.push(add(a, add(scale(sub(b, a), u), scale(sub(c, a), v))));
    }
    out
}

/// Two-sided Hausdorff distance estimated from dense surface samples.
pub fn sampled_hausdorff(a: &Mesh, b: &Mesh, samples: usize) -> f64 {
    let sa = surface_samples(a, samples, 1);
    let sb = surface_samples(b, samples, 2);
    let ab = sa
        .par_iter()
        .map(|&p| point_mesh_distance(p, b))
        .reduce(|| 0.0, f64::max);
    let ba = sb
        .par_iter()
        .map(|&p| point_mesh_distance(p, a))
        .reduce(|| 0.0, f64::max);
    ab.max(ba)
}

/// Per-vertex sum of `area * [n, d][n, d]^T` over incident faces, as full
/// 4x4 matrices.
pub fn plane_sum_quadrics(mesh: &Mesh) -> Vec<[[f64; 4]; 4]> {
    let mut out = vec![[[0.0; 4]; 4]; mesh.positions.len()];
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = tri(mesh, t);
        let n = cross(sub(b, a), sub(c, a));
        let len = dot(n, n).sqrt();
        if len == 0.0 {
            continue;
        }
        let area = 0.5 * len;
        let p = [n[0] / len, n[1] / len, n[2] / len, -dot(n, a) / len];
        for &v in &mesh.triangles[t] {
            for r in 0..4 {
                for col in 0..4 {
                    out[v as usize][r][col] += area * p[r] * p[col];
                }
            }
        }
    }
    out
}

/// Random closed-or-open mesh: a jittered grid patch folded over a random
/// height field.
pub fn random_mesh(seed: u64) -> Mesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(2..7usize);
    let mut p = Vec::new();
    for j in 0..=n {
        for i in 0..=n {
            p.push([
                i as f64 + rng.random_range(-0.3..0.3),
                rng.random_range(-1.0..1.0),
                j as f64 + rng.random_range(-0.3..0.3),
            ]);
        }
    }
    let idx = |i: usize, j: usize| (j * (n + 1) + i) as u32;
    let mut t = Vec::new();
    for j in 0..n {
        for i in 0..n {
            t.push([idx(i, j), idx(i, j + 1), idx(i + 1, j)]);
            t.push([idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1)]);
        }
    }
    Mesh::new(format!("random-{seed}"), p, t).unwrap()
}

/// Rotation matrix about a unit axis (row-major).
pub fn axis_angle(axis: V3, angle: f64) -> [[f64; 3]; 3] {
    let l = dot(axis, axis).sqrt();
    let [x, y, z] = [axis[0] / l, axis[1] / l, axis[2] / l];
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [t * x * x + c, t * x * y - s * z, t * x * z + s * y],
        [t * x * y + s * z, t * y * y + c, t * y * z - s * x],
        [t * x * z - s * y, t * y * z + s * x, t * z * z + c],
    ]
}

pub fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            out[r][c] = (0..3).map(|k| a[r][k] * b[k][c]).sum();
        }
    }
    out
}

pub fn mat_apply(m: &[[f64; 3]; 3], p: V3) -> V3 {
    [dot(m[0], p), dot(m[1], p), dot(m[2], p)]
}

// ---------------------------------------------------------------------------
// Rank statistics oracles

/// Midranks by direct pairwise counting: rank(x) = #{y < x} + (#{y == x} + 1) / 2.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .map(|&x| {
            let below = values.iter().filter(|&&y| y < x).count() as f64;
            let equal = values.iter().filter(|&&y| y == x).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Tie-corrected standard deviation of U from the pooled sample.
pub fn sigma_tie_corrected(g1: &[f64], g2: &[f64]) -> f64 {
    let n1 = g1.len() as f64;
    let n2 = g2.len() as f64;
    let n = n1 + n2;
    let pooled: Vec<f64> = g1.iter().chain(g2).copied().collect();
    let mut seen: Vec<f64> = Vec::new();
    let mut ties = 0.0;
    for &x in &pooled {
        if seen.contains(&x) {
            continue;
        }
        seen.push(x);
        let t = pooled.iter().filter(|&&y| y == x).count() as f64;
        ties += t * t * t - t;
    }
    ((n1 * n2 / 12.0) * ((n + 1.0) - ties / (n * (n - 1.0)))).sqrt()
}

/// Exact two-sided permutation p of U by listing every labeling of the
/// pooled sample: P(|U - mean| >= |U_obs - mean|).
pub fn enumerate_exact_p(g1: &[f64], g2: &[f64]) -> f64 {
    let pooled: Vec<f64> = g1.iter().chain(g2).copied().collect();
    let ranks = midranks(&pooled);
    let n = pooled.len();
    let n1 = g1.len();
    let u_of = |sum: f64| sum - (n1 * (n1 + 1)) as f64 / 2.0;
    let mean = (n1 * (n - n1)) as f64 / 2.0;
    let observed = (u_of(ranks[..n1].iter().sum()) - mean).abs();
    let mut hits = 0u64;
    let mut total = 0u64;
    let mut combo: Vec<usize> = (0..n1).collect();
    loop {
        let s: f64 = combo.iter().map(|&i| ranks[i]).sum();
        total += 1;
        if (u_of(s) - mean).abs() >= observed - 1e-9 {
            hits += 1;
        }
        // next combination in lexicographic order
        let mut k = n1;
        loop {
            if k == 0 {
                return hits as f64 / total as f64;
            }
            k -= 1;
            if combo[k] < n - n1 + k {
                combo[k] += 1;
                for j in k + 1..n1 {
                    combo[j] = combo[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub mod play;
