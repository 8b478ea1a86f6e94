//! Quadric representation, classification and standardization.
//!
//! A quadric is the zero set of `psi(x) = x^T A x + b^T x + c`. For a
//! non-cylindrical central quadric (A nonsingular, `psi(d) != 0` at the
//! center `d = -A^{-1} b / 2`) the affine map
//!
//! ```text
//! y = V^T (x - d) / s,    s = sqrt(|gamma|),    gamma = psi(d) = c - b^T A^{-1} b / 4
//! ```
//!
//! turns the surface into `sum_i lambda_i y_i^2 = 1`, where `A = V diag(lambda) V^T`.
//! Substitution gives `psi(x) = |gamma| y^T D y + gamma`, so the unit right-hand
//! side needs `gamma < 0`. When `gamma > 0` the coefficients are negated first
//! (`flipped`), which leaves the zero set unchanged.

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::spectral::{self, EigenDecomposition};

/// Relative singular-value threshold used for every rank decision.
pub const RANK_TOL: f64 = 1e-10;

/// Default relative feasibility tolerance for [`Quadric::is_feasible`].
pub const DEFAULT_FEAS_TOL: f64 = 1e-8;

const GAMMA_TOL: f64 = 1e-12;

/// `{x : x^T A x + b^T x + c = 0}` with `A` symmetric and nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadric {
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: f64,
}

impl Quadric {
    /// Validates dimensions and symmetry, then stores `(A + A^T) / 2`.
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, c: f64) -> Result<Self> {
        spectral::check_symmetric(&a)?;
        if b.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                expected: a.nrows(),
                found: b.len(),
            });
        }
        if !c.is_finite() || b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        if a.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroQuadratic);
        }
        let a = (&a + a.transpose()) * 0.5;
        Ok(Self { a, b, c })
    }

    /// Builds from a row-major `n*n` slice.
    pub fn from_row_slice(n: usize, a: &[f64], b: &[f64], c: f64) -> Result<Self> {
        if a.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: a.len(),
            });
        }
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        Self::new(
            DMatrix::from_row_slice(n, n, a),
            DVector::from_column_slice(b),
            c,
        )
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// The same zero set with all coefficients negated.
    pub fn negated(&self) -> Self {
        Self {
            a: -&self.a,
            b: -&self.b,
            c: -self.c,
        }
    }

    /// `psi(x)`.
    pub fn evaluate(&self, x: &DVector<f64>) -> f64 {
        let (quad, lin) = self.terms(x);
        quad + lin + self.c
    }

    fn terms(&self, x: &DVector<f64>) -> (f64, f64) {
        (x.dot(&(&self.a * x)), self.b.dot(x))
    }

    /// `|psi(x)| <= tol * max(1, |x^T A x|, |b^T x|, |c|)`.
    pub fn is_feasible(&self, x: &DVector<f64>, tol: f64) -> bool {
        let (quad, lin) = self.terms(x);
        let scale = 1.0f64.max(quad.abs()).max(lin.abs()).max(self.c.abs());
        (quad + lin + self.c).abs() <= tol * scale
    }

    /// The `(n+1) x (n+1)` matrix `[[c, b^T/2], [b/2, A]]`.
    pub fn extended_matrix(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n + 1, n + 1);
        m[(0, 0)] = self.c;
        for i in 0..n {
            m[(0, i + 1)] = 0.5 * self.b[i];
            m[(i + 1, 0)] = 0.5 * self.b[i];
        }
        m.view_mut((1, 1), (n, n)).copy_from(&self.a);
        m
    }

    /// Rank-based type classification.
    pub fn classify(&self) -> QuadricClass {
        let n = self.dim();
        let rank_a = numerical_rank(&self.a);
        let mut ab = DMatrix::zeros(n, n + 1);
        ab.view_mut((0, 0), (n, n)).copy_from(&self.a);
        ab.set_column(n, &(&self.b * 0.5));
        let rank_ab = numerical_rank(&ab);
        let rank_astar = numerical_rank(&self.extended_matrix());

        let (positives, negatives) = match spectral::eig_sym(&self.a) {
            Ok(eig) => {
                let cut = RANK_TOL * eig.values.amax();
                (
                    eig.values.iter().filter(|&&v| v > cut).count(),
                    eig.values.iter().filter(|&&v| v < -cut).count(),
                )
            }
            // A was validated at construction; fall back to an empty signature.
            Err(_) => (0, 0),
        };

        let kind = if rank_ab > rank_a {
            QuadricKind::Parabolic
        } else if rank_astar > rank_ab {
            QuadricKind::Central
        } else {
            QuadricKind::Conical
        };
        let cylindrical = match kind {
            QuadricKind::Central | QuadricKind::Conical => rank_a < n,
            QuadricKind::Parabolic => rank_a + 1 < n,
        };
        QuadricClass {
            kind,
            cylindrical,
            dim: n,
            rank_a,
            positives,
            negatives,
            rank_astar,
            rank_ab,
        }
    }

    /// Eigendecomposition, center and scale for a non-cylindrical central quadric.
    pub fn standardize(&self) -> Result<StandardForm> {
        let eig = spectral::eig_sym(&self.a)?;
        StandardForm::from_parts(self, eig)
    }
}

/// Number of singular values above `RANK_TOL * sigma_max`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let max = sv.amax();
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOL * max).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuadricKind {
    Conical,
    Central,
    Parabolic,
}

impl QuadricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QuadricKind::Conical => "conical",
            QuadricKind::Central => "central",
            QuadricKind::Parabolic => "parabolic",
        }
    }
}

impl std::fmt::Display for QuadricKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuadricClass {
    pub kind: QuadricKind,
    pub cylindrical: bool,
    pub dim: usize,
    /// Rank of `A`.
    pub rank_a: usize,
    /// Positive eigenvalues of `A` (as given, before any sign normalization).
    pub positives: usize,
    pub negatives: usize,
    /// Rank of the extended matrix.
    pub rank_astar: usize,
    /// Rank of the block `[A | b/2]`.
    pub rank_ab: usize,
}

impl QuadricClass {
    /// Central and non-cylindrical. Emptiness is only detected by
    /// [`Quadric::standardize`].
    pub fn is_supported(&self) -> bool {
        self.kind == QuadricKind::Central && !self.cylindrical
    }
}

impl std::fmt::Display for QuadricClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}, {}, r={}, p={}",
            self.kind,
            if self.cylindrical {
                "cylindrical"
            } else {
                "non-cylindrical"
            },
            self.rank_a,
            self.positives
        )
    }
}

/// Everything needed to move between original and standardized coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardForm {
    /// Eigenvalues of the sign-normalized `A`, non-increasing.
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
    pub center: DVector<f64>,
    /// `psi(d)` of the sign-normalized quadric; always negative.
    pub gamma: f64,
    /// `sqrt(|gamma|)`.
    pub scale: f64,
    /// Whether `(A, b, c)` was negated during normalization.
    pub flipped: bool,
}

impl StandardForm {
    /// Builds the standard form from a precomputed eigendecomposition of `q.a()`.
    pub fn from_parts(q: &Quadric, eig: EigenDecomposition) -> Result<Self> {
        let n = q.dim();
        let max_abs = eig.values.amax();
        let min_abs = eig.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if min_abs <= RANK_TOL * max_abs {
            let class = q.classify();
            return Err(match class.kind {
                QuadricKind::Parabolic => Error::NotCentral,
                _ => Error::Cylindrical {
                    rank: class.rank_a.min(n - 1),
                    dim: n,
                },
            });
        }

        let center = solve_center(q, &eig);
        let gamma = q.c + 0.5 * q.b.dot(&center);
        let gamma_scale = 1.0f64.max(q.c.abs()).max(q.b.norm_squared() / q.a.norm());
        if gamma.abs() <= GAMMA_TOL * gamma_scale {
            return Err(Error::ConicalDegenerate { gamma });
        }

        let flipped = gamma > 0.0;
        let (values, vectors) = if flipped {
            // Ascending order of the original values; the stable sort keeps
            // equal eigenvalues in their original column order.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| eig.values[i].total_cmp(&eig.values[j]));
            let values = DVector::from_iterator(n, order.iter().map(|&i| -eig.values[i]));
            let mut vectors = eig.vectors.clone();
            for (j, &src) in order.iter().enumerate() {
                vectors.set_column(j, &eig.vectors.column(src));
            }
            (values, vectors)
        } else {
            (eig.values, eig.vectors)
        };

        if values[0] <= RANK_TOL * max_abs {
            return Err(Error::EmptyQuadric);
        }

        Ok(Self {
            values,
            vectors,
            center,
            gamma: -gamma.abs(),
            scale: gamma.abs().sqrt(),
            flipped,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `y = V^T (x - d) / s`.
    pub fn to_std(&self, x: &DVector<f64>) -> DVector<f64> {
        self.vectors.tr_mul(&(x - &self.center)) / self.scale
    }

    /// `x = s V y + d`.
    pub fn from_std(&self, y: &DVector<f64>) -> DVector<f64> {
        &self.vectors * y * self.scale + &self.center
    }

    /// `sum_i lambda_i y_i^2 - 1`.
    pub fn constraint(&self, y: &DVector<f64>) -> f64 {
        y.iter()
            .zip(self.values.iter())
            .map(|(yi, l)| l * yi * yi)
            .sum::<f64>()
            - 1.0
    }
}

/// `d = -A^{-1} b / 2` through the eigendecomposition, with one step of
/// iterative refinement.
fn solve_center(q: &Quadric, eig: &EigenDecomposition) -> DVector<f64> {
    let apply_inverse = |r: &DVector<f64>| {
        let mut w = eig.vectors.tr_mul(r);
        for (wi, l) in w.iter_mut().zip(eig.values.iter()) {
            *wi /= l;
        }
        &eig.vectors * w
    };
    let rhs = &q.b * -0.5;
    let mut d = apply_inverse(&rhs);
    let residual = &rhs - &q.a * &d;
    d += apply_inverse(&residual);
    d
}
