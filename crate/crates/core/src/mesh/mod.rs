//! Oriented triangle surfaces, their incidence matrices, and the
//! circumcentric dual measures the DEC operators are built from.

mod metrics;
mod obj;

pub use metrics::{compute_dual_metrics, survey_dual_metrics, DualMetrics};
pub use obj::{load_obj, parse_obj, write_obj};

use std::collections::HashMap;
use std::path::PathBuf;

use nalgebra::Vector3;
use thiserror::Error;

use crate::sparse::Incidence;

pub type Point3 = Vector3<f64>;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("non-triangular face {face} ({corners} corners)")]
    NonTriangularFace { face: usize, corners: usize },
    #[error("face {face} references vertex {vertex} but the mesh has {count} vertices")]
    VertexOutOfRange { face: usize, vertex: usize, count: usize },
    #[error("face {face} repeats a vertex")]
    RepeatedVertex { face: usize },
    #[error("non-manifold edge {edge} ({v0}-{v1}) has {faces} incident faces")]
    NonManifoldEdge { edge: usize, v0: usize, v1: usize, faces: usize },
    #[error("inconsistent winding across interior edge {edge} ({v0}-{v1})")]
    InconsistentWinding { edge: usize, v0: usize, v1: usize },
    #[error("mesh has no faces")]
    Empty,
    #[error("degenerate face {face} (area {area:.3e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("zero dual edge on interior edge {edge} (cocircular adjacent triangles)")]
    ZeroDualEdge { edge: usize },
    #[error("non-well-centered faces: {faces:?}")]
    NotWellCentered { faces: Vec<usize> },
}

/// One face incident to an edge, with the d1 sign linking them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeCoface {
    pub face: usize,
    pub sign: i8,
}

/// Oriented triangle mesh with derived edges and incidence matrices.
///
/// Edges run from the lower to the higher vertex index and are numbered in
/// lexicographic order of that pair. Face orientation is taken from the input
/// winding and must agree across every interior edge.
#[derive(Clone, Debug)]
pub struct SimplicialSurface {
    vertices: Vec<Point3>,
    edges: Vec<[usize; 2]>,
    faces: Vec<[usize; 3]>,
    cofaces: Vec<Vec<EdgeCoface>>,
    boundary_edges: Vec<usize>,
    d0: Incidence,
    d1: Incidence,
}

impl SimplicialSurface {
    pub fn from_triangles(vertices: Vec<Point3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let nv = vertices.len();
        for (f, tri) in faces.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(MeshError::VertexOutOfRange {
                        face: f,
                        vertex: v,
                        count: nv,
                    });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::RepeatedVertex { face: f });
            }
        }

        let mut edges: Vec<[usize; 2]> = faces
            .iter()
            .flat_map(|t| {
                [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])]
                    .map(|(a, b)| [a.min(b), a.max(b)])
            })
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let edge_index: HashMap<[usize; 2], usize> =
            edges.iter().enumerate().map(|(i, e)| (*e, i)).collect();

        let mut cofaces: Vec<Vec<EdgeCoface>> = vec![Vec::new(); edges.len()];
        let mut d1_rows = Vec::with_capacity(faces.len());
        for (f, t) in faces.iter().enumerate() {
            let mut row = Vec::with_capacity(3);
            for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
                let e = edge_index[&[a.min(b), a.max(b)]];
                let sign: i8 = if a < b { 1 } else { -1 };
                cofaces[e].push(EdgeCoface { face: f, sign });
                row.push((e, sign));
            }
            d1_rows.push(row);
        }

        let mut boundary_edges = Vec::new();
        for (e, cf) in cofaces.iter().enumerate() {
            let [v0, v1] = edges[e];
            match cf.len() {
                1 => boundary_edges.push(e),
                2 => {
                    if cf[0].sign == cf[1].sign {
                        return Err(MeshError::InconsistentWinding { edge: e, v0, v1 });
                    }
                }
                n => {
                    return Err(MeshError::NonManifoldEdge {
                        edge: e,
                        v0,
                        v1,
                        faces: n,
                    })
                }
            }
        }

        let d0 = Incidence::from_rows(nv, edges.iter().map(|&[tail, head]| [(tail, -1i8), (head, 1i8)]));
        let d1 = Incidence::from_rows(edges.len(), d1_rows);

        Ok(Self {
            vertices,
            edges,
            faces,
            cofaces,
            boundary_edges,
            d0,
            d1,
        })
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// Faces incident to edge `e` (one on the boundary, two inside).
    pub fn cofaces(&self, e: usize) -> &[EdgeCoface] {
        &self.cofaces[e]
    }

    pub fn boundary_edges(&self) -> &[usize] {
        &self.boundary_edges
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.cofaces[e].len() == 1
    }

    pub fn is_closed(&self) -> bool {
        self.boundary_edges.is_empty()
    }

    /// Vertices touched by at least one boundary edge.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.vertices.len()];
        for &e in &self.boundary_edges {
            on[self.edges[e][0]] = true;
            on[self.edges[e][1]] = true;
        }
        on
    }

    /// Edges × vertices, +1 at the head and −1 at the tail.
    pub fn d0(&self) -> &Incidence {
        &self.d0
    }

    /// Faces × edges, +1 where the edge agrees with the face's boundary orientation.
    pub fn d1(&self) -> &Incidence {
        &self.d1
    }

    /// Local edges of face `f` in winding order `(v0→v1, v1→v2, v2→v0)`.
    pub fn face_edges(&self, f: usize) -> [(usize, i8); 3] {
        let t = self.faces[f];
        [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])].map(|(a, b)| {
            let e = self.edge_between(a, b).expect("face edge present by construction");
            (e, if a < b { 1 } else { -1 })
        })
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.edges.binary_search(&[a.min(b), a.max(b)]).ok()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// True when `d1 · d0` is the zero matrix in exact integer arithmetic.
    pub fn boundary_of_boundary_vanishes(&self) -> bool {
        self.d1
            .mul_dense(&self.d0)
            .iter()
            .all(|row| row.iter().all(|&v| v == 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point3 {
        Point3::new(x, y, 0.0)
    }

    #[test]
    fn single_triangle_counts() {
        let s = SimplicialSurface::from_triangles(vec![p(0., 0.), p(1., 0.), p(0., 1.)], vec![[0, 1, 2]]).unwrap();
        assert_eq!(s.n_vertices(), 3);
        assert_eq!(s.n_edges(), 3);
        assert_eq!(s.n_faces(), 1);
        assert_eq!(s.boundary_edges().len(), 3);
    }

    #[test]
    fn d1_row_follows_boundary_traversal() {
        let s = SimplicialSurface::from_triangles(vec![p(0., 0.), p(1., 0.), p(0., 1.)], vec![[0, 1, 2]]).unwrap();
        assert_eq!(s.edges(), &[[0, 1], [0, 2], [1, 2]]);
        assert_eq!(s.d1().to_dense(), vec![vec![1, -1, 1]]);
        assert!(s.boundary_of_boundary_vanishes());
    }

    #[test]
    fn d0_rows_have_one_head_one_tail() {
        let s = SimplicialSurface::from_triangles(vec![p(0., 0.), p(1., 0.), p(0., 1.)], vec![[0, 1, 2]]).unwrap();
        for e in 0..s.n_edges() {
            let row: Vec<_> = s.d0().row(e).collect();
            assert_eq!(row.len(), 2);
            assert_eq!(row.iter().map(|&(_, v)| i32::from(v)).sum::<i32>(), 0);
        }
    }

    #[test]
    fn shared_edge_gets_opposite_signs() {
        let s = SimplicialSurface::from_triangles(
            vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let e = s.edge_between(0, 2).unwrap();
        let signs: Vec<i8> = s.cofaces(e).iter().map(|c| c.sign).collect();
        assert_eq!(signs.len(), 2);
        assert_eq!(signs[0], -signs[1]);
        assert_eq!(s.d1().get(0, e), -s.d1().get(1, e));
    }

    #[test]
    fn rejects_flipped_neighbour() {
        let err = SimplicialSurface::from_triangles(
            vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)],
            vec![[0, 1, 2], [0, 3, 2]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::InconsistentWinding { v0: 0, v1: 2, .. }));
    }

    #[test]
    fn rejects_non_manifold_edge() {
        let err = SimplicialSurface::from_triangles(
            vec![p(0., 0.), p(1., 0.), p(0., 1.), p(0., -1.), Point3::new(0.5, 0.0, 1.0)],
            vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]],
        )
        .unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldEdge { faces: 3, .. }));
    }

    #[test]
    fn face_edges_match_d1() {
        let s = SimplicialSurface::from_triangles(
            vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        for f in 0..s.n_faces() {
            for (e, sign) in s.face_edges(f) {
                assert_eq!(s.d1().get(f, e), sign);
            }
        }
    }
}
