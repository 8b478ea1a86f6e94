//! Symmetric eigendecomposition and eigenvalue grouping.
//!
//! Everything downstream works in the eigenbasis of the quadratic part, so the
//! output here is normalized: eigenvalues sorted in non-increasing order and
//! each eigenvector column oriented so that its largest-magnitude entry is
//! positive. Identical input always yields identical output.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative symmetry tolerance: `|a_ij - a_ji| <= SYMMETRY_TOL * max(1, ||A||_F)`.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default relative tolerance for merging eigenvalues into one group.
pub const DEFAULT_GROUP_TOL: f64 = 1e-9;

/// Largest dimension solved with cyclic Jacobi by [`eig_sym`]. Above this the
/// tridiagonal QR solver is used; Jacobi costs several full sweeps of O(n^3).
pub const JACOBI_MAX_DIM: usize = 64;

const JACOBI_MAX_SWEEPS: usize = 30;
const JACOBI_OFF_TOL: f64 = 1e-14;

/// Eigenvalues (non-increasing) and the matching orthonormal eigenvectors,
/// stored as the columns of `vectors`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(values) V^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let scaled = &self.vectors * DMatrix::from_diagonal(&self.values);
        scaled * self.vectors.transpose()
    }
}

/// Which algorithm [`eig_sym_with`] should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Pick by dimension: Jacobi up to [`JACOBI_MAX_DIM`], tridiagonal QR above.
    Auto,
    /// Cyclic Jacobi rotations.
    Jacobi,
    /// Householder tridiagonalization followed by implicit QR (nalgebra).
    Tridiagonal,
}

/// Largest `|a_ij - a_ji|` over the matrix.
pub fn max_asymmetry(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            worst = worst.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    worst
}

/// Checks squareness, finiteness and symmetry within [`SYMMETRY_TOL`].
pub fn check_symmetric(a: &DMatrix<f64>) -> Result<()> {
    if a.nrows() == 0 {
        return Err(Error::EmptyDimension);
    }
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let tolerance = SYMMETRY_TOL * a.norm().max(1.0);
    let asymmetry = max_asymmetry(a);
    if asymmetry > tolerance {
        return Err(Error::NotSymmetric {
            asymmetry,
            tolerance,
        });
    }
    Ok(())
}

/// Eigendecomposition of a symmetric matrix.
pub fn eig_sym(a: &DMatrix<f64>) -> Result<EigenDecomposition> {
    eig_sym_with(a, EigenMethod::Auto)
}

pub fn eig_sym_with(a: &DMatrix<f64>, method: EigenMethod) -> Result<EigenDecomposition> {
    check_symmetric(a)?;
    // Work on the exactly symmetric part so both solvers see the same input.
    let sym = (a + a.transpose()) * 0.5;
    let method = match method {
        EigenMethod::Auto if sym.nrows() <= JACOBI_MAX_DIM => EigenMethod::Jacobi,
        EigenMethod::Auto => EigenMethod::Tridiagonal,
        m => m,
    };
    let (values, vectors) = match method {
        EigenMethod::Jacobi => jacobi(sym)?,
        _ => tridiagonal(sym)?,
    };
    Ok(normalize(values, vectors))
}

fn tridiagonal(a: DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let max_iter = 100 * a.nrows().max(10);
    match SymmetricEigen::try_new(a, f64::EPSILON, max_iter) {
        Some(eig) => Ok((eig.eigenvalues, eig.eigenvectors)),
        None => Err(Error::NoConvergence { sweeps: max_iter }),
    }
}

/// Cyclic Jacobi with the classical 2x2 symmetric Schur rotation.
fn jacobi(mut a: DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let mut v = DMatrix::<f64>::identity(n, n);
    let target = JACOBI_OFF_TOL * a.norm();

    for sweep in 0..=JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a);
        if off <= target {
            return Ok((a.diagonal(), v));
        }
        if sweep == JACOBI_MAX_SWEEPS {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // After a few sweeps, drop entries that can no longer change
                // the diagonal in floating point.
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                rotate(&mut a, &mut v, p, q, c, s, t * apq);
            }
        }
    }
    Err(Error::NoConvergence {
        sweeps: JACOBI_MAX_SWEEPS,
    })
}

/// Applies `A <- J^T A J`, `V <- V J` for the rotation in the (p, q) plane
/// that annihilates `a_pq`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize, c: f64, s: f64, shift: f64) {
    let n = a.nrows();
    a[(p, p)] -= shift;
    a[(q, q)] += shift;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for j in 0..n {
        for i in (j + 1)..n {
            sum += a[(i, j)] * a[(i, j)];
        }
    }
    (2.0 * sum).sqrt()
}

/// Sorts descending (stable, so equal values keep solver order) and fixes the
/// sign of every column.
fn normalize(values: DVector<f64>, vectors: DMatrix<f64>) -> EigenDecomposition {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));

    let sorted_values = DVector::from_iterator(n, order.iter().map(|&i| values[i]));
    let mut sorted_vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = vectors.column(src).into_owned();
        let mut pivot = 0;
        for k in 1..n {
            if col[k].abs() > col[pivot].abs() {
                pivot = k;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        sorted_vectors.set_column(dst, &col);
    }
    EigenDecomposition {
        values: sorted_values,
        vectors: sorted_vectors,
    }
}

/// Contiguous blocks of numerically equal eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenGroups {
    pub blocks: Vec<Range<usize>>,
    /// Mean of the values in each block.
    pub representatives: Vec<f64>,
}

impl EigenGroups {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Index of the block containing eigenvalue `i`.
    pub fn group_of(&self, i: usize) -> Option<usize> {
        self.blocks.iter().position(|b| b.contains(&i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Range<usize>, f64)> + '_ {
        self.blocks
            .iter()
            .cloned()
            .zip(self.representatives.iter().copied())
    }
}

/// Splits sorted `values` into blocks wherever the gap between neighbours
/// exceeds `tol * max(1, max |value|)`.
pub fn group_eigenvalues(values: &[f64], tol: f64) -> EigenGroups {
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let threshold = tol * scale;
    let mut blocks = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i - 1] - values[i]).abs() > threshold {
            if i > start {
                blocks.push(start..i);
            }
            start = i;
        }
    }
    let representatives = blocks
        .iter()
        .map(|b: &Range<usize>| values[b.clone()].iter().sum::<f64>() / b.len() as f64)
        .collect();
    EigenGroups {
        blocks,
        representatives,
    }
}
