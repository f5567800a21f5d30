#![allow(dead_code)]

use std::path::PathBuf;

use idec::mesh::{load_obj, Point3, SimplicialSurface};
use rand::Rng;

pub fn asset(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("assets").join(rel)
}

pub fn mesh(name: &str) -> SimplicialSurface {
    load_obj(asset(&format!("meshes/{name}.obj"))).expect("bundled mesh loads")
}

pub const BUNDLED: [&str; 8] = [
    "icosphere_1",
    "icosphere_2",
    "icosphere_3",
    "cavity_8",
    "cavity_16",
    "cavity_32",
    "strip",
    "square_diagonal",
];

/// Two acute triangles sharing the edge (1,0)–(0.6,0.9).
pub fn two_triangles() -> SimplicialSurface {
    SimplicialSurface::from_triangles(
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.6, 0.9, 0.0),
            Point3::new(1.4, 1.1, 0.0),
        ],
        vec![[0, 1, 2], [1, 3, 2]],
    )
    .unwrap()
}

/// `nx × ny` grid of unit cells over a jittered lattice with a random height
/// field, each cell split along a random diagonal. Jitter stays below a
/// quarter cell so no triangle degenerates.
pub fn jittered_grid<R: Rng>(rng: &mut R, nx: usize, ny: usize, jitter: f64, relief: f64) -> SimplicialSurface {
    let mut verts = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            verts.push(Point3::new(
                i as f64 + rng.gen_range(-jitter..=jitter),
                j as f64 + rng.gen_range(-jitter..=jitter),
                rng.gen_range(-relief..=relief),
            ));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut faces = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if rng.gen_bool(0.5) {
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            } else {
                faces.push([a, b, d]);
                faces.push([b, c, d]);
            }
        }
    }
    SimplicialSurface::from_triangles(verts, faces).unwrap()
}

pub fn random_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}
