//! Regenerates the bundled meshes under `assets/meshes`.
//!
//! cargo run --example generate_assets

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use idec::mesh::{compute_dual_metrics, write_obj, Point3, SimplicialSurface};

fn icosphere(levels: u32) -> SimplicialSurface {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Point3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|p| Point3::new(p[0], p[1], p[2]).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..levels {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Point3>| {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                verts.push(((verts[a] + verts[b]) / 2.0).normalize());
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    SimplicialSurface::from_triangles(verts, faces).expect("icosphere is a valid surface")
}

/// Unit square with `n` rows; odd rows are shifted by half a column, so the
/// interior is tiled by acute isosceles triangles and halving `1/n` keeps
/// every vertex.
fn zipper_square(n: usize) -> SimplicialSurface {
    let h = 1.0 / n as f64;
    let row_xs = |j: usize| -> Vec<f64> {
        if j % 2 == 0 {
            (0..=n).map(|i| i as f64 * h).collect()
        } else {
            let mut xs = vec![0.0];
            xs.extend((0..n).map(|i| (i as f64 + 0.5) * h));
            xs.push(1.0);
            xs
        }
    };
    let mut verts = Vec::new();
    let mut rows = Vec::new();
    for j in 0..=n {
        let start = verts.len();
        let xs = row_xs(j);
        verts.extend(xs.iter().map(|&x| Point3::new(x, j as f64 * h, 0.0)));
        rows.push((start, xs));
    }
    let mut faces = Vec::new();
    for j in 0..n {
        let (lo, lx) = &rows[j];
        let (hi, hx) = &rows[j + 1];
        let (mut i, mut k) = (0, 0);
        // advance along whichever row's next segment lies further left
        while i + 1 < lx.len() || k + 1 < hx.len() {
            let take_lower =
                k + 1 == hx.len() || (i + 1 < lx.len() && lx[i] + lx[i + 1] < hx[k] + hx[k + 1]);
            if take_lower {
                faces.push([lo + i, lo + i + 1, hi + k]);
                i += 1;
            } else {
                faces.push([lo + i, hi + k + 1, hi + k]);
                k += 1;
            }
        }
    }
    SimplicialSurface::from_triangles(verts, faces).expect("zipper square is a valid surface")
}

/// Strip of equilateral triangles, two rows tall; the middle row is shifted
/// half a unit.
fn equilateral_strip(columns: usize) -> SimplicialSurface {
    let r = 3f64.sqrt() / 2.0;
    let mut verts = Vec::new();
    for j in 0..3 {
        let shift = if j == 1 { 0.5 } else { 0.0 };
        verts.extend((0..=columns).map(|i| Point3::new(i as f64 + shift, j as f64 * r, 0.0)));
    }
    let w = columns + 1;
    let mut faces = Vec::new();
    for i in 0..columns {
        faces.push([i, i + 1, w + i]);
        faces.push([w + i, 2 * w + i + 1, 2 * w + i]);
        if i + 1 < columns {
            faces.push([i + 1, w + i + 1, w + i]);
            faces.push([w + i, w + i + 1, 2 * w + i + 1]);
        }
    }
    SimplicialSurface::from_triangles(verts, faces).expect("strip is a valid surface")
}

fn diagonal_square() -> SimplicialSurface {
    let verts = vec![
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(1.0, 1.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
    ];
    SimplicialSurface::from_triangles(verts, vec![[0, 1, 2], [0, 2, 3]]).expect("square is valid")
}

fn save(dir: &Path, name: &str, s: &SimplicialSurface, expect_clean: bool) {
    match compute_dual_metrics(s, false) {
        Ok(m) => {
            assert!(expect_clean, "{name} unexpectedly passed the metric checks");
            println!(
                "{name}: V={} E={} F={} min|*e|={:.4e} max|e|={:.4e}",
                s.n_vertices(),
                s.n_edges(),
                s.n_faces(),
                m.min_dual_edge_len(),
                m.max_edge_len()
            );
        }
        Err(err) => {
            assert!(!expect_clean, "{name}: {err}");
            println!("{name}: {err} (expected)");
        }
    }
    fs::write(dir.join(name), write_obj(s)).expect("write mesh");
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/meshes");
    fs::create_dir_all(&dir).expect("create asset dir");
    for level in 1..=3 {
        save(&dir, &format!("icosphere_{level}.obj"), &icosphere(level), true);
    }
    for n in [8, 16, 32] {
        save(&dir, &format!("cavity_{n}.obj"), &zipper_square(n), true);
    }
    save(&dir, "strip.obj", &equilateral_strip(6), true);
    save(&dir, "square_diagonal.obj", &diagonal_square(), false);

    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/configs");
    fs::create_dir_all(&configs).expect("create config dir");
    fs::write(configs.join("sphere_pulse.conf"), pulse_config(&icosphere(3))).expect("write config");
}

/// Gaussian magnetic-current pulse driven on the faces around the north pole.
fn pulse_config(sphere: &SimplicialSurface) -> String {
    let metrics = compute_dual_metrics(sphere, false).expect("icosphere metrics");
    let pole = Point3::new(0.0, 0.0, 1.0);
    let near = |radius: f64| -> Vec<usize> {
        (0..sphere.n_faces())
            .filter(|&f| (metrics.face_circumcenters[f] - pole).norm() < radius)
            .collect()
    };
    let support = near(0.2);
    let equator = (0..sphere.n_faces())
        .min_by(|&a, &b| {
            let za = metrics.face_circumcenters[a].z.abs();
            let zb = metrics.face_circumcenters[b].z.abs();
            za.total_cmp(&zb)
        })
        .expect("faces");
    let list = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(", ");
    format!(
        "# Gaussian pulse on the unit icosphere (level 3), TE polarization.
# Normalized units: eps = mu = 1, so c = 1.
mesh = ../meshes/icosphere_3.obj
mode = te
dt = 0.02
steps = 400

materials.eps = 1
materials.mu = 1
materials.sigma = 0
materials.sigma_m = 0

source.kind = gaussian
source.current = magnetic
source.amplitude = 1
source.t0 = 0.3
source.width = 0.1
source.support = {}

probes.h = {}, {equator}
probes.e = 0, 1

output.dir = ../../output/sphere_pulse
output.cadence = 20
output.formats = vtk, csv

solver.kind = iterative
solver.tolerance = 1e-10

stability.dt_factors = 0.001, 1, 1000
stability.k_samples = 64
stability.empirical_steps = 200
",
        list(&support),
        support[0],
    )
}
