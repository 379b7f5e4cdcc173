//! Shared test fixtures: a deterministic random Delaunay mesh built by
//! jittering a structured grid and Lawson-flipping to the Delaunay
//! triangulation of the jittered points. Mesh generation stays out of the
//! library; tests are the only consumer.

// each test binary uses its own subset of these helpers
#![allow(dead_code)]

use dec_darcy::meshio::{RawMesh, SplitMix64};

/// Strictly positive when `d` lies inside the circumcircle of the
/// counterclockwise triangle `(a, b, c)`.
fn incircle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let m = [
        [
            a[0] - d[0],
            a[1] - d[1],
            (a[0] * a[0] - d[0] * d[0]) + (a[1] * a[1] - d[1] * d[1]),
        ],
        [
            b[0] - d[0],
            b[1] - d[1],
            (b[0] * b[0] - d[0] * d[0]) + (b[1] * b[1] - d[1] * d[1]),
        ],
        [
            c[0] - d[0],
            c[1] - d[1],
            (c[0] * c[0] - d[0] * d[0]) + (c[1] * c[1] - d[1] * d[1]),
        ],
    ];
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Jittered unit-square grid, Lawson-flipped until every interior edge is
/// locally Delaunay. Deterministic in the seed; the result is the Delaunay
/// triangulation of the jittered points and generically contains plenty of
/// obtuse triangles.
pub fn random_delaunay_square(divisions: usize, jitter_frac: f64, seed: u64) -> RawMesh {
    let n = divisions;
    let h = 1.0 / n as f64;
    let mut rng = SplitMix64::new(seed);
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1) * 2);
    for j in 0..=n {
        for i in 0..=n {
            let mut x = i as f64 * h;
            let mut y = j as f64 * h;
            let dx = jitter_frac * h * rng.next_symmetric();
            let dy = jitter_frac * h * rng.next_symmetric();
            if i > 0 && i < n && j > 0 && j < n {
                x += dx;
                y += dy;
            }
            vertices.push(x);
            vertices.push(y);
        }
    }
    let v = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([v(i, j), v(i + 1, j), v(i + 1, j + 1)]);
            triangles.push([v(i, j), v(i + 1, j + 1), v(i, j + 1)]);
        }
    }

    let point = |idx: usize| [vertices[2 * idx], vertices[2 * idx + 1]];
    let mut rounds = 0usize;
    loop {
        rounds += 1;
        assert!(
            rounds < 100 * triangles.len(),
            "flip loop did not terminate"
        );

        // interior edge -> the two (triangle, opposite vertex) incidences
        let mut edges: std::collections::BTreeMap<(usize, usize), Vec<(usize, usize)>> =
            std::collections::BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (p, q, opp) = (tri[k], tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let key = (p.min(q), p.max(q));
                edges.entry(key).or_default().push((t, opp));
            }
        }

        let mut flipped = false;
        'scan: for ((u, vtx), incident) in &edges {
            if incident.len() != 2 {
                continue;
            }
            let (t1, a) = incident[0];
            let (t2, b) = incident[1];
            let (pa, pb) = (point(a), point(b));
            // orient (u, v, a) counterclockwise for the in-circle test
            let (mut uu, mut vv) = (*u, *vtx);
            if orient(point(uu), point(vv), pa) < 0.0 {
                std::mem::swap(&mut uu, &mut vv);
            }
            if incircle(point(uu), point(vv), pa, pb) > 0.0 {
                triangles[t1] = [a, b, uu];
                triangles[t2] = [a, b, vv];
                flipped = true;
                break 'scan;
            }
        }
        if !flipped {
            break;
        }
    }

    RawMesh {
        embed_dim: 2,
        vertices,
        top_simplices: triangles.iter().map(|t| t.to_vec()).collect(),
        region_attrs: None,
    }
}

/// Largest interior angle of any triangle, in degrees.
pub fn max_angle_degrees(mesh: &RawMesh) -> f64 {
    let point = |idx: usize| [mesh.vertices[2 * idx], mesh.vertices[2 * idx + 1]];
    let mut worst: f64 = 0.0;
    for tri in &mesh.top_simplices {
        for k in 0..3 {
            let a = point(tri[k]);
            let b = point(tri[(k + 1) % 3]);
            let c = point(tri[(k + 2) % 3]);
            let u = [b[0] - a[0], b[1] - a[1]];
            let w = [c[0] - a[0], c[1] - a[1]];
            let dot = u[0] * w[0] + u[1] * w[1];
            let nu = (u[0] * u[0] + u[1] * u[1]).sqrt();
            let nw = (w[0] * w[0] + w[1] * w[1]).sqrt();
            let angle = (dot / (nu * nw)).clamp(-1.0, 1.0).acos().to_degrees();
            worst = worst.max(angle);
        }
    }
    worst
}

/// Unique scratch directory for a test.
pub fn scratch_dir(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("dec_darcy_{}_{}", name, std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
