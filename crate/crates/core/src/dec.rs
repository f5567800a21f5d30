//! Cochains, the discrete exterior derivative, diagonal Hodge stars, and the
//! gauge-field operators built from them.
//!
//! Cochains hold integrated values: a primal 1-cochain of E stores `E·t |e|`
//! per edge, a dual 0-cochain stores a pointwise value at a circumcenter.
//! The dual derivative is the plain transpose of the primal incidence matrix
//! of complementary degree, with no extra sign.

use thiserror::Error;

use crate::mesh::{DualMetrics, SimplicialSurface};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecError {
    #[error("no exterior derivative for {placement:?} degree {degree} on a surface")]
    TopDegree { degree: u8, placement: Placement },
    #[error("cochain has {got} values but {placement:?} degree {degree} has {expected} carriers")]
    Length {
        degree: u8,
        placement: Placement,
        expected: usize,
        got: usize,
    },
    #[error("degree {0} is not valid on a surface")]
    BadDegree(u8),
    #[error("Hodge star {which} has a zero entry at index {index}")]
    ZeroStar { which: &'static str, index: usize },
    #[error("operand mismatch: expected {expected}, got {got}")]
    Operand { expected: String, got: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Placement {
    Primal,
    Dual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cochain {
    pub degree: u8,
    pub placement: Placement,
    pub values: Vec<f64>,
}

/// Number of carriers of a cochain of the given degree and placement.
pub fn carrier_count(surface: &SimplicialSurface, degree: u8, placement: Placement) -> Result<usize, DecError> {
    let primal_degree = match placement {
        Placement::Primal => degree,
        Placement::Dual => 2u8.checked_sub(degree).ok_or(DecError::BadDegree(degree))?,
    };
    match primal_degree {
        0 => Ok(surface.n_vertices()),
        1 => Ok(surface.n_edges()),
        2 => Ok(surface.n_faces()),
        _ => Err(DecError::BadDegree(degree)),
    }
}

impl Cochain {
    pub fn new(
        surface: &SimplicialSurface,
        degree: u8,
        placement: Placement,
        values: Vec<f64>,
    ) -> Result<Self, DecError> {
        let expected = carrier_count(surface, degree, placement)?;
        if values.len() != expected {
            return Err(DecError::Length {
                degree,
                placement,
                expected,
                got: values.len(),
            });
        }
        Ok(Self {
            degree,
            placement,
            values,
        })
    }

    pub fn zeros(surface: &SimplicialSurface, degree: u8, placement: Placement) -> Result<Self, DecError> {
        let n = carrier_count(surface, degree, placement)?;
        Ok(Self {
            degree,
            placement,
            values: vec![0.0; n],
        })
    }

    pub fn primal(surface: &SimplicialSurface, degree: u8, values: Vec<f64>) -> Result<Self, DecError> {
        Self::new(surface, degree, Placement::Primal, values)
    }

    pub fn dual(surface: &SimplicialSurface, degree: u8, values: Vec<f64>) -> Result<Self, DecError> {
        Self::new(surface, degree, Placement::Dual, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dot(&self, other: &Cochain) -> Result<f64, DecError> {
        self.same_kind(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    pub fn add(&self, other: &Cochain) -> Result<Cochain, DecError> {
        self.same_kind(other)?;
        Ok(Cochain {
            degree: self.degree,
            placement: self.placement,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn same_kind(&self, other: &Cochain) -> Result<(), DecError> {
        if self.degree != other.degree || self.placement != other.placement || self.len() != other.len() {
            return Err(DecError::Operand {
                expected: self.describe(),
                got: other.describe(),
            });
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("{:?} {}-cochain[{}]", self.placement, self.degree, self.len())
    }

    fn expect(&self, degree: u8, placement: Placement) -> Result<(), DecError> {
        if self.degree != degree || self.placement != placement {
            return Err(DecError::Operand {
                expected: format!("{placement:?} {degree}-cochain"),
                got: self.describe(),
            });
        }
        Ok(())
    }
}

/// Exterior derivative. Primal k → k+1 uses the degree-k incidence matrix;
/// dual k → k+1 uses the transpose of the complementary primal one.
pub fn d(surface: &SimplicialSurface, c: &Cochain) -> Result<Cochain, DecError> {
    let expected = carrier_count(surface, c.degree, c.placement)?;
    if c.len() != expected {
        return Err(DecError::Length {
            degree: c.degree,
            placement: c.placement,
            expected,
            got: c.len(),
        });
    }
    let values = match (c.placement, c.degree) {
        (Placement::Primal, 0) => surface.d0().apply(&c.values),
        (Placement::Primal, 1) => surface.d1().apply(&c.values),
        (Placement::Dual, 0) => surface.d1().apply_transpose(&c.values),
        (Placement::Dual, 1) => surface.d0().apply_transpose(&c.values),
        (placement, degree) => return Err(DecError::TopDegree { degree, placement }),
    };
    Ok(Cochain {
        degree: c.degree + 1,
        placement: c.placement,
        values,
    })
}

/// Diagonal Hodge stars, primal → dual.
#[derive(Clone, Debug)]
pub struct HodgeStars {
    /// `|*v|`
    pub star0: Vec<f64>,
    /// `|*e| / |e|`
    pub star1: Vec<f64>,
    /// `1 / |P|`
    pub star2: Vec<f64>,
    /// Built from signed dual lengths; `star1` may be negative.
    pub signed: bool,
}

impl HodgeStars {
    pub fn from_metrics(metrics: &DualMetrics) -> Self {
        Self {
            star0: metrics.dual_vertex_area.clone(),
            star1: metrics
                .dual_edge_len
                .iter()
                .zip(&metrics.edge_len)
                .map(|(de, e)| de / e)
                .collect(),
            star2: metrics.face_area.iter().map(|a| 1.0 / a).collect(),
            signed: metrics.signed,
        }
    }

    pub fn all_positive(&self) -> bool {
        [&self.star0, &self.star1, &self.star2]
            .iter()
            .all(|s| s.iter().all(|&v| v > 0.0))
    }

    pub fn has_negative_star1(&self) -> bool {
        self.star1.iter().any(|&v| v < 0.0)
    }
}

fn nonzero(diag: &[f64], which: &'static str) -> Result<(), DecError> {
    match diag.iter().position(|&v| v == 0.0) {
        Some(index) => Err(DecError::ZeroStar { which, index }),
        None => Ok(()),
    }
}

/// Hodge star: primal k ↔ dual (2−k). Primal → dual multiplies by the
/// diagonal; dual → primal divides and applies the `(−1)^{k(2−k)}` sign so
/// that star∘star is `−1` on 1-cochains and `+1` otherwise.
pub fn star(c: &Cochain, h: &HodgeStars) -> Result<Cochain, DecError> {
    let (diag, which, out_degree) = match (c.placement, c.degree) {
        (Placement::Primal, 0) | (Placement::Dual, 2) => (&h.star0, "star0", 2 - c.degree),
        (Placement::Primal, 1) | (Placement::Dual, 1) => (&h.star1, "star1", 1),
        (Placement::Primal, 2) | (Placement::Dual, 0) => (&h.star2, "star2", 2 - c.degree),
        (_, degree) => return Err(DecError::BadDegree(degree)),
    };
    if diag.len() != c.len() {
        return Err(DecError::Operand {
            expected: format!("{} values for {which}", diag.len()),
            got: c.describe(),
        });
    }
    nonzero(diag, which)?;
    let values = match c.placement {
        Placement::Primal => c.values.iter().zip(diag).map(|(v, s)| v * s).collect(),
        Placement::Dual => {
            let sign = if c.degree == 1 { -1.0 } else { 1.0 };
            c.values.iter().zip(diag).map(|(v, s)| sign * v / s).collect()
        }
    };
    Ok(Cochain {
        degree: out_degree,
        placement: match c.placement {
            Placement::Primal => Placement::Dual,
            Placement::Dual => Placement::Primal,
        },
        values,
    })
}

/// Outcome of the Bianchi identity check `dF = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BianchiCheck {
    /// A surface has no 3-cells, so `dF` has no carriers.
    Vacuous,
}

#[derive(Clone, Debug)]
pub struct Curvature {
    pub f: Cochain,
    pub bianchi: BianchiCheck,
}

/// Discrete curvature `F = d1·A` of a connection 1-cochain.
pub fn curvature(surface: &SimplicialSurface, a: &Cochain) -> Result<Curvature, DecError> {
    a.expect(1, Placement::Primal)?;
    Ok(Curvature {
        f: d(surface, a)?,
        bianchi: BianchiCheck::Vacuous,
    })
}

/// `A + d0·f`
pub fn gauge_transform(surface: &SimplicialSurface, a: &Cochain, f: &Cochain) -> Result<Cochain, DecError> {
    a.expect(1, Placement::Primal)?;
    f.expect(0, Placement::Primal)?;
    a.add(&d(surface, f)?)
}

/// Residual of the static field equation: `d1ᵀ·star2·d1·A − star1·J`.
///
/// Zero exactly when `A` is a stationary point of the gauge Lagrangian.
pub fn maxwell_residual(
    surface: &SimplicialSurface,
    a: &Cochain,
    j: &Cochain,
    h: &HodgeStars,
) -> Result<Cochain, DecError> {
    a.expect(1, Placement::Primal)?;
    j.expect(1, Placement::Primal)?;
    let f = surface.d1().apply(&a.values);
    let scaled: Vec<f64> = f.iter().zip(&h.star2).map(|(v, s)| v * s).collect();
    let curl_curl = surface.d1().apply_transpose(&scaled);
    let values = curl_curl
        .iter()
        .zip(j.values.iter().zip(&h.star1))
        .map(|(cc, (jv, s))| cc - s * jv)
        .collect();
    Ok(Cochain {
        degree: 1,
        placement: Placement::Primal,
        values,
    })
}

/// Discrete divergence of a current, `d0ᵀ·star1·J`, per vertex.
/// Zero everywhere when the current satisfies continuity.
pub fn continuity_defect(surface: &SimplicialSurface, j: &Cochain, h: &HodgeStars) -> Result<Vec<f64>, DecError> {
    j.expect(1, Placement::Primal)?;
    let flux: Vec<f64> = j.values.iter().zip(&h.star1).map(|(v, s)| v * s).collect();
    Ok(surface.d0().apply_transpose(&flux))
}

/// `L(A, J) = −½⟨dA, dA⟩ + ⟨A, J⟩` with `⟨dA, dA⟩ = (d1A)ᵀ star2 (d1A)`
/// and `⟨A, J⟩ = Aᵀ star1 J`.
pub fn lagrangian(surface: &SimplicialSurface, a: &Cochain, j: &Cochain, h: &HodgeStars) -> Result<f64, DecError> {
    a.expect(1, Placement::Primal)?;
    j.expect(1, Placement::Primal)?;
    let f = surface.d1().apply(&a.values);
    let field: f64 = f.iter().zip(&h.star2).map(|(v, s)| v * v * s).sum();
    let coupling: f64 = a
        .values
        .iter()
        .zip(j.values.iter().zip(&h.star1))
        .map(|(av, (jv, s))| av * s * jv)
        .sum();
    Ok(-0.5 * field + coupling)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{compute_dual_metrics, Point3};

    fn two_triangles() -> SimplicialSurface {
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

    #[test]
    fn curvature_on_single_triangle_is_signed_sum() {
        let s = SimplicialSurface::from_triangles(
            vec![Point3::zeros(), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 1.0, 0.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let a = Cochain::primal(&s, 1, vec![0.7, -1.3, 2.9]).unwrap();
        let c = curvature(&s, &a).unwrap();
        assert_eq!(c.f.values, vec![0.7 - (-1.3) + 2.9]);
        assert_eq!(c.bianchi, BianchiCheck::Vacuous);
    }

    #[test]
    fn constant_zero_form_has_zero_derivative() {
        let s = two_triangles();
        let f = Cochain::primal(&s, 0, vec![3.5; 4]).unwrap();
        assert!(d(&s, &f).unwrap().values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn top_degree_has_no_derivative() {
        let s = two_triangles();
        let f = Cochain::zeros(&s, 2, Placement::Primal).unwrap();
        assert!(matches!(d(&s, &f), Err(DecError::TopDegree { degree: 2, .. })));
        let g = Cochain::zeros(&s, 2, Placement::Dual).unwrap();
        assert!(matches!(d(&s, &g), Err(DecError::TopDegree { .. })));
    }

    #[test]
    fn star1_is_dual_over_primal_length() {
        let h = HodgeStars {
            star0: vec![],
            star1: vec![0.5 / 2.0],
            star2: vec![],
            signed: false,
        };
        let c = Cochain {
            degree: 1,
            placement: Placement::Primal,
            values: vec![1.0],
        };
        let out = star(&c, &h).unwrap();
        assert_eq!(out.values, vec![0.25]);
        assert_eq!(out.placement, Placement::Dual);
    }

    #[test]
    fn star_twice_gives_sign() {
        let s = two_triangles();
        let h = HodgeStars::from_metrics(&compute_dual_metrics(&s, false).unwrap());
        let one = Cochain::primal(&s, 1, vec![1.0, -2.0, 0.5, 4.0, 3.0]).unwrap();
        let back = star(&star(&one, &h).unwrap(), &h).unwrap();
        for (b, o) in back.values.iter().zip(&one.values) {
            assert!((b + o).abs() < 1e-14 * o.abs().max(1.0));
        }
        let zero = Cochain::primal(&s, 0, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let back = star(&star(&zero, &h).unwrap(), &h).unwrap();
        assert_eq!(back.degree, 0);
        for (b, o) in back.values.iter().zip(&zero.values) {
            assert!((b - o).abs() < 1e-14 * o.abs());
        }
    }

    #[test]
    fn star0_of_ones_sums_to_area() {
        let s = two_triangles();
        let m = compute_dual_metrics(&s, false).unwrap();
        let h = HodgeStars::from_metrics(&m);
        let ones = Cochain::primal(&s, 0, vec![1.0; 4]).unwrap();
        let total: f64 = star(&ones, &h).unwrap().values.iter().sum();
        assert!((total - m.total_area()).abs() < 1e-14);
    }

    #[test]
    fn zero_star_entry_is_an_error() {
        let h = HodgeStars {
            star0: vec![],
            star1: vec![1.0, 0.0],
            star2: vec![],
            signed: false,
        };
        let c = Cochain {
            degree: 1,
            placement: Placement::Primal,
            values: vec![1.0, 1.0],
        };
        assert_eq!(star(&c, &h), Err(DecError::ZeroStar { which: "star1", index: 1 }));
    }

    #[test]
    fn pure_gauge_gives_zero_residual() {
        let s = two_triangles();
        let h = HodgeStars::from_metrics(&compute_dual_metrics(&s, false).unwrap());
        let f = Cochain::primal(&s, 0, vec![0.3, -1.0, 2.0, 0.1]).unwrap();
        let a = d(&s, &f).unwrap();
        let j = Cochain::zeros(&s, 1, Placement::Primal).unwrap();
        let r = maxwell_residual(&s, &a, &j, &h).unwrap();
        assert!(r.max_abs() < 1e-14);
    }

    #[test]
    fn divergent_current_is_reported() {
        let s = two_triangles();
        let h = HodgeStars::from_metrics(&compute_dual_metrics(&s, false).unwrap());
        let mut jv = vec![0.0; s.n_edges()];
        jv[0] = 1.0;
        let j = Cochain::primal(&s, 1, jv).unwrap();
        let defect = continuity_defect(&s, &j, &h).unwrap();
        assert!(defect.iter().any(|v| v.abs() > 1e-3));
        // total flux out of a closed set of dual cells always balances
        assert!(defect.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn wrong_length_is_rejected() {
        let s = two_triangles();
        assert!(matches!(
            Cochain::primal(&s, 1, vec![0.0; 3]),
            Err(DecError::Length { expected: 5, got: 3, .. })
        ));
    }
}
