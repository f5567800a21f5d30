use super::{MeshError, Point3, SimplicialSurface};

/// Face is degenerate when `area < DEGENERATE_REL * longest_edge²`.
pub const DEGENERATE_REL: f64 = 1e-14;
/// A circumcenter this far (relative to the longest edge) outside a face still counts as inside.
pub const WELL_CENTERED_REL: f64 = 1e-12;
/// Interior dual edges shorter than this fraction of the primal edge are treated as zero.
pub const ZERO_DUAL_REL: f64 = 1e-10;

/// Primal and circumcentric-dual measures of a surface.
#[derive(Clone, Debug)]
pub struct DualMetrics {
    pub edge_len: Vec<f64>,
    pub face_area: Vec<f64>,
    /// Polyline length through the circumcenters of the incident faces.
    pub dual_edge_len: Vec<f64>,
    pub dual_vertex_area: Vec<f64>,
    pub face_circumcenters: Vec<Point3>,
    pub edge_midpoints: Vec<Point3>,
    /// Per face, the distance from each edge midpoint to the circumcenter in
    /// [`SimplicialSurface::face_edges`] order. Negative when the circumcenter
    /// lies across the edge from the opposite vertex.
    pub face_dual_segments: Vec<[f64; 3]>,
    pub well_centered: Vec<bool>,
    /// Dual lengths carry signs (some face is not well-centered).
    pub signed: bool,
}

/// Circumcenter of a triangle in 3-space, in the triangle's plane.
pub fn circumcenter(a: &Point3, b: &Point3, c: &Point3) -> Point3 {
    let ab = b - a;
    let ac = c - a;
    let n = ab.cross(&ac);
    let denom = 2.0 * n.norm_squared();
    a + (n.cross(&ab) * ac.norm_squared() + ac.cross(&n) * ab.norm_squared()) / denom
}

/// Raw geometry without the well-centeredness and zero-dual-edge checks.
///
/// Only degenerate faces are an error. Segment lengths are signed, and
/// `signed` records whether any face actually needed a negative one.
pub fn survey_dual_metrics(surface: &SimplicialSurface) -> Result<DualMetrics, MeshError> {
    let verts = surface.vertices();
    let edge_len: Vec<f64> = surface
        .edges()
        .iter()
        .map(|&[a, b]| (verts[b] - verts[a]).norm())
        .collect();
    let edge_midpoints: Vec<Point3> = surface
        .edges()
        .iter()
        .map(|&[a, b]| (verts[a] + verts[b]) * 0.5)
        .collect();

    let nf = surface.n_faces();
    let mut face_area = Vec::with_capacity(nf);
    let mut face_circumcenters = Vec::with_capacity(nf);
    let mut face_dual_segments = Vec::with_capacity(nf);
    let mut well_centered = Vec::with_capacity(nf);

    for (f, tri) in surface.faces().iter().enumerate() {
        let [a, b, c] = tri.map(|v| verts[v]);
        let area = 0.5 * (b - a).cross(&(c - a)).norm();
        let local = surface.face_edges(f);
        let longest = local.iter().map(|&(e, _)| edge_len[e]).fold(0.0, f64::max);
        if !(area >= DEGENERATE_REL * longest * longest) || area == 0.0 {
            return Err(MeshError::DegenerateFace { face: f, area });
        }
        let cc = circumcenter(&a, &b, &c);
        let mut segs = [0.0; 3];
        // local edge i runs tri[i] -> tri[i+1]; the opposite corner is tri[i+2]
        for (i, &(e, _)) in local.iter().enumerate() {
            let opposite = verts[tri[(i + 2) % 3]];
            let to_center = cc - edge_midpoints[e];
            let side = to_center.dot(&(opposite - edge_midpoints[e]));
            let dist = to_center.norm();
            segs[i] = if side < 0.0 { -dist } else { dist };
        }
        let inside = segs.iter().all(|&s| s >= -WELL_CENTERED_REL * longest);
        face_area.push(area);
        face_circumcenters.push(cc);
        face_dual_segments.push(segs);
        well_centered.push(inside);
    }

    let signed = well_centered.iter().any(|w| !w);
    Ok(assemble(
        surface,
        edge_len,
        face_area,
        edge_midpoints,
        face_circumcenters,
        face_dual_segments,
        well_centered,
        signed,
    ))
}

#[allow(clippy::too_many_arguments)]
fn assemble(
    surface: &SimplicialSurface,
    edge_len: Vec<f64>,
    face_area: Vec<f64>,
    edge_midpoints: Vec<Point3>,
    face_circumcenters: Vec<Point3>,
    mut face_dual_segments: Vec<[f64; 3]>,
    well_centered: Vec<bool>,
    signed: bool,
) -> DualMetrics {
    if !signed {
        for segs in &mut face_dual_segments {
            for s in segs.iter_mut() {
                *s = s.abs();
            }
        }
    }
    let mut dual_edge_len = vec![0.0; surface.n_edges()];
    let mut dual_vertex_area = vec![0.0; surface.n_vertices()];
    for (f, tri) in surface.faces().iter().enumerate() {
        for (i, &(e, _)) in surface.face_edges(f).iter().enumerate() {
            let seg = face_dual_segments[f][i];
            dual_edge_len[e] += seg;
            // two kite halves (endpoint, edge midpoint, circumcenter)
            let half_kite = 0.25 * edge_len[e] * seg;
            dual_vertex_area[tri[i]] += half_kite;
            dual_vertex_area[tri[(i + 1) % 3]] += half_kite;
        }
    }
    DualMetrics {
        edge_len,
        face_area,
        dual_edge_len,
        dual_vertex_area,
        face_circumcenters,
        edge_midpoints,
        face_dual_segments,
        well_centered,
        signed,
    }
}

/// Computes the dual measures, rejecting meshes the DEC operators cannot use.
///
/// Without `allow_non_well_centered`, any face whose circumcenter falls
/// outside it is an error. With it, dual lengths are signed and `signed` is set.
pub fn compute_dual_metrics(
    surface: &SimplicialSurface,
    allow_non_well_centered: bool,
) -> Result<DualMetrics, MeshError> {
    let metrics = survey_dual_metrics(surface)?;
    let bad = metrics.non_well_centered_faces();
    if !bad.is_empty() && !allow_non_well_centered {
        return Err(MeshError::NotWellCentered { faces: bad });
    }
    if let Some(&edge) = metrics.zero_dual_edges(surface).first() {
        return Err(MeshError::ZeroDualEdge { edge });
    }
    Ok(metrics)
}

impl DualMetrics {
    pub fn non_well_centered_faces(&self) -> Vec<usize> {
        self.well_centered
            .iter()
            .enumerate()
            .filter(|(_, &w)| !w)
            .map(|(f, _)| f)
            .collect()
    }

    /// Interior edges whose dual polyline has (numerically) zero length.
    pub fn zero_dual_edges(&self, surface: &SimplicialSurface) -> Vec<usize> {
        (0..surface.n_edges())
            .filter(|&e| {
                !surface.is_boundary_edge(e) && self.dual_edge_len[e].abs() <= ZERO_DUAL_REL * self.edge_len[e]
            })
            .collect()
    }

    pub fn min_dual_edge_len(&self) -> f64 {
        self.dual_edge_len.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_edge_len(&self) -> f64 {
        self.edge_len.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_edge_len(&self) -> f64 {
        self.edge_len.iter().copied().fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        self.face_area.iter().sum()
    }

    pub fn total_dual_area(&self) -> f64 {
        self.dual_vertex_area.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point3 {
        Point3::new(x, y, 0.0)
    }

    fn tri(a: Point3, b: Point3, c: Point3) -> SimplicialSurface {
        SimplicialSurface::from_triangles(vec![a, b, c], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn right_triangle_circumcenter_is_hypotenuse_midpoint() {
        let s = tri(p(0., 0.), p(2., 0.), p(0., 2.));
        let m = compute_dual_metrics(&s, false).unwrap();
        let c = m.face_circumcenters[0];
        assert!((c - p(1., 1.)).norm() < 1e-15);
        assert!(m.well_centered[0]);
    }

    #[test]
    fn circumcenter_is_equidistant_in_3d() {
        let a = Point3::new(0.3, -1.0, 2.0);
        let b = Point3::new(1.7, 0.2, 0.5);
        let c = Point3::new(-0.4, 0.9, 1.1);
        let cc = circumcenter(&a, &b, &c);
        let (ra, rb, rc) = ((cc - a).norm(), (cc - b).norm(), (cc - c).norm());
        assert!((ra - rb).abs() < 1e-12 * ra && (ra - rc).abs() < 1e-12 * ra);
        // in the plane of the triangle
        let n = (b - a).cross(&(c - a));
        assert!((cc - a).dot(&n).abs() < 1e-12 * n.norm());
    }

    #[test]
    fn equilateral_triangle_measures() {
        let h = 3f64.sqrt() / 2.0;
        let s = tri(p(0., 0.), p(1., 0.), p(0.5, h));
        let m = compute_dual_metrics(&s, false).unwrap();
        assert!((m.face_area[0] - 3f64.sqrt() / 4.0).abs() < 1e-15);
        let r = (m.face_circumcenters[0] - p(0., 0.)).norm();
        assert!((r - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        // inradius = distance from circumcenter to each edge
        for seg in m.face_dual_segments[0] {
            assert!((seg - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-15);
        }
        // kite at each corner: two triangles (corner, adjacent edge midpoint, circumcenter)
        let cc = m.face_circumcenters[0];
        let tri_area = |a: Point3, b: Point3, c: Point3| 0.5 * (b - a).cross(&(c - a)).norm();
        let vs = s.vertices();
        for (i, &area) in m.dual_vertex_area.iter().enumerate() {
            let v = vs[i];
            let kite: f64 = (0..3)
                .filter(|&j| j != i)
                .map(|j| tri_area(v, (v + vs[j]) * 0.5, cc))
                .sum();
            assert!((area - kite).abs() < 1e-15);
            assert!((kite - m.face_area[0] / 3.0).abs() < 1e-15);
        }
        assert!((m.total_dual_area() - m.total_area()).abs() < 1e-15);
    }

    #[test]
    fn diagonal_split_square_has_zero_dual_edge() {
        let s = SimplicialSurface::from_triangles(
            vec![p(0., 0.), p(1., 0.), p(1., 1.), p(0., 1.)],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let m = survey_dual_metrics(&s).unwrap();
        assert!((m.face_circumcenters[0] - p(0.5, 0.5)).norm() < 1e-15);
        assert!((m.face_circumcenters[1] - p(0.5, 0.5)).norm() < 1e-15);
        let err = compute_dual_metrics(&s, false).unwrap_err();
        assert!(matches!(err, MeshError::ZeroDualEdge { edge } if edge == s.edge_between(0, 2).unwrap()));
        assert!(err.to_string().contains("zero dual edge"));
    }

    #[test]
    fn obtuse_face_needs_flag_and_gets_negative_segment() {
        let s = tri(p(0., 0.), p(4., 0.), p(2., 0.5));
        let err = compute_dual_metrics(&s, false).unwrap_err();
        assert!(matches!(err, MeshError::NotWellCentered { ref faces } if faces == &vec![0]));
        let m = compute_dual_metrics(&s, true).unwrap();
        assert!(m.signed);
        let long = s.edge_between(0, 1).unwrap();
        assert!(m.dual_edge_len[long] < 0.0);
        // signed kites still tile the face
        assert!((m.total_dual_area() - m.total_area()).abs() < 1e-13);
    }

    #[test]
    fn degenerate_face_is_rejected() {
        let s = tri(p(0., 0.), p(1., 0.), p(2., 0.));
        assert!(matches!(
            compute_dual_metrics(&s, false),
            Err(MeshError::DegenerateFace { face: 0, .. })
        ));
    }
}
