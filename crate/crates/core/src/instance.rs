//! Random problem instances for benchmarks and tests.
//!
//! Quadrics are assembled from their standard form: a Haar-random orthogonal
//! basis `V`, a spectrum, a center `d` and the normalized constant `gamma`,
//! giving `A = V diag(lambda) V^T`, `b = -2 A d`, `c = d^T A d + gamma`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::quadric::Quadric;

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Orthogonal matrix from the QR factorization of a Gaussian matrix, with
/// column signs fixed by `R`'s diagonal.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Magnitudes uniform on `[0.1, 1]` with random signs; at least one positive.
pub fn random_spectrum<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut values: Vec<f64> = (0..n)
        .map(|_| {
            let m = rng.random_range(0.1..=1.0);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect();
    if values.iter().all(|&v| v < 0.0) {
        let i = rng.random_range(0..n);
        values[i] = -values[i];
    }
    values
}

/// `A = V diag(values) V^T`, `b = -2 A d`, `c = d^T A d + gamma`.
pub fn quadric_from_parts(
    basis: &DMatrix<f64>,
    values: &[f64],
    center: &DVector<f64>,
    gamma: f64,
) -> Result<Quadric> {
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(values));
    let a = basis * d * basis.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let ad = &a * center;
    let b = &ad * -2.0;
    let c = center.dot(&ad) + gamma;
    Quadric::new(a, b, c)
}

/// A random non-cylindrical central quadric with normalized `gamma = -1`.
pub fn random_central_quadric<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Quadric {
    let basis = random_orthogonal(rng, n);
    let values = random_spectrum(rng, n);
    let center = gaussian_vector(rng, n);
    quadric_from_parts(&basis, &values, &center, -1.0)
        .expect("assembled matrix is symmetric and nonzero")
}
