//! Sparse storage used by the DEC operators and the implicit stepper.
//!
//! Two flavours live here: [`Incidence`], a signed integer matrix for the
//! exterior derivative, and [`CsrMatrix`], a real matrix for the assembled
//! per-step system. The Krylov solver works on the latter.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("iterative solver did not converge in {iterations} iterations (relative residual {residual:.3e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("solver breakdown at iteration {iteration}: p^T A p = {curvature:.3e}")]
    Breakdown { iteration: usize, curvature: f64 },
    #[error("dimension mismatch: matrix is {rows}x{cols}, vector has {len}")]
    Dimension { rows: usize, cols: usize, len: usize },
}

/// Signed incidence matrix in compressed-row form with entries in {-1, 0, +1}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Incidence {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    signs: Vec<i8>,
}

impl Incidence {
    /// Builds from per-row `(column, sign)` lists. Entries are sorted by column.
    pub fn from_rows<R>(ncols: usize, rows: R) -> Self
    where
        R: IntoIterator,
        R::Item: IntoIterator<Item = (usize, i8)>,
    {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut signs = Vec::new();
        for row in rows {
            let mut entries: Vec<(usize, i8)> = row.into_iter().collect();
            entries.sort_by_key(|&(c, _)| c);
            for (c, s) in entries {
                debug_assert!(c < ncols);
                cols.push(c);
                signs.push(s);
            }
            row_ptr.push(cols.len());
        }
        Self {
            nrows: row_ptr.len() - 1,
            ncols,
            row_ptr,
            cols,
            signs,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.signs[span].iter().copied())
    }

    pub fn nnz_in_row(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.row(r).find(|&(col, _)| col == c).map_or(0, |(_, s)| s)
    }

    /// `y = M x`
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "incidence apply: length mismatch");
        (0..self.nrows)
            .map(|r| self.row(r).map(|(c, s)| f64::from(s) * x[c]).sum())
            .collect()
    }

    /// `y = Mᵀ x`
    pub fn apply_transpose(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "incidence transpose apply: length mismatch");
        let mut y = vec![0.0; self.ncols];
        for (r, &xr) in x.iter().enumerate() {
            for (c, s) in self.row(r) {
                y[c] += f64::from(s) * xr;
            }
        }
        y
    }

    /// Exact integer product `self · rhs`, returned densely.
    pub fn mul_dense(&self, rhs: &Incidence) -> Vec<Vec<i64>> {
        assert_eq!(self.ncols, rhs.nrows);
        (0..self.nrows)
            .map(|r| {
                let mut out = vec![0i64; rhs.ncols];
                for (k, s) in self.row(r) {
                    for (c, t) in rhs.row(k) {
                        out[c] += i64::from(s) * i64::from(t);
                    }
                }
                out
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<i64>> {
        (0..self.nrows)
            .map(|r| {
                let mut out = vec![0i64; self.ncols];
                for (c, s) in self.row(r) {
                    out[c] = i64::from(s);
                }
                out
            })
            .collect()
    }
}

/// Real compressed-row matrix.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles from unsorted triplets; duplicates are summed.
    pub fn from_triplets(n_rows: usize, n_cols: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_by_key(|t| (t.0, t.1));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut cols: Vec<usize> = Vec::with_capacity(triplets.len());
        let mut vals: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < n_rows && c < n_cols, "triplet out of range");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(c);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..n_rows {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            n_rows,
            n_cols,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.n_rows
    }

    pub fn ncols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(col, _)| col == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows).map(|r| self.get(r, r)).collect()
    }

    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n_rows];
        self.mul_vec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                m[(r, c)] += v;
            }
        }
        m
    }

    /// Largest `|A_ij - A_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n_rows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions {
    /// Stop when `‖b − Ax‖ ≤ tolerance · ‖b‖`.
    pub tolerance: f64,
    pub max_iters: usize,
    /// Jacobi (diagonal) preconditioning.
    pub jacobi: bool,
    /// Keep iterating through negative curvature (symmetric indefinite
    /// operators); only a vanishing `pᵀAp` is then a breakdown.
    pub indefinite: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients for a symmetric matrix.
///
/// `x` holds the initial guess on entry and the solution on exit. A
/// non-positive `pᵀAp` is reported as a breakdown, which is how an
/// indefinite operator shows up.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x: &mut [f64],
    opts: CgOptions,
) -> Result<SolveStats, SolveError> {
    let n = a.nrows();
    if b.len() != n || x.len() != n || a.ncols() != n {
        return Err(SolveError::Dimension {
            rows: a.nrows(),
            cols: a.ncols(),
            len: b.len(),
        });
    }
    let b_norm = norm(b);
    if b_norm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveStats::default());
    }
    let inv_diag: Vec<f64> = if opts.jacobi {
        a.diagonal()
            .into_iter()
            .map(|d| if d > 0.0 { 1.0 / d } else { 1.0 })
            .collect()
    } else {
        vec![1.0; n]
    };

    let mut r = a.mul_vec(x);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut res = norm(&r) / b_norm;
    if res <= opts.tolerance {
        return Ok(SolveStats {
            iterations: 0,
            relative_residual: res,
        });
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for it in 1..=opts.max_iters {
        a.mul_vec_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        let scale = norm(&p) * norm(&ap);
        let broken = if opts.indefinite {
            !(curvature.abs() > 1e-14 * scale)
        } else {
            !(curvature > 1e-14 * scale)
        };
        if broken {
            return Err(SolveError::Breakdown {
                iteration: it,
                curvature,
            });
        }
        let step = rz / curvature;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        res = norm(&r) / b_norm;
        if res <= opts.tolerance {
            return Ok(SolveStats {
                iterations: it,
                relative_residual: res,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(SolveError::NotConverged {
        iterations: opts.max_iters,
        residual: res,
    })
}
