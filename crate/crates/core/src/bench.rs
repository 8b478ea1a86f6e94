//! Cost split between the eigendecomposition and the rest of a projection.

use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::instance;
use crate::projection::{ProjectionOptions, Projector};
use crate::quadric::{StandardForm, DEFAULT_FEAS_TOL};
use crate::spectral;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub n: usize,
    pub count: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n: 500,
            count: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    /// Seconds per eigendecomposition.
    pub eig_mean: f64,
    pub eig_median: f64,
    /// Seconds per projection once the eigendecomposition is known: coordinate
    /// change, secular root, candidates, selection and back-transform.
    pub root_mean: f64,
    pub root_median: f64,
    pub newton_median: f64,
    pub newton_max: usize,
    pub iterations: Vec<usize>,
    pub infeasible: usize,
}

impl BenchReport {
    /// `eig_mean / root_mean`.
    pub fn ratio(&self) -> f64 {
        self.eig_mean / self.root_mean
    }
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n: {}", self.config.n)?;
        writeln!(f, "count: {}", self.config.count)?;
        writeln!(f, "seed: {}", self.config.seed)?;
        writeln!(f, "eig_mean_s: {:.6e}", self.eig_mean)?;
        writeln!(f, "eig_median_s: {:.6e}", self.eig_median)?;
        writeln!(f, "root_mean_s: {:.6e}", self.root_mean)?;
        writeln!(f, "root_median_s: {:.6e}", self.root_median)?;
        writeln!(f, "ratio_eig_over_root: {:.3}", self.ratio())?;
        writeln!(f, "newton_iterations_median: {}", self.newton_median)?;
        writeln!(f, "newton_iterations_max: {}", self.newton_max)?;
        write!(f, "infeasible: {}", self.infeasible)
    }
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Runs `count` random projections of dimension `n`, timing each phase on
/// the current thread.
pub fn run_bench(config: BenchConfig) -> Result<BenchReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eig_times = Vec::with_capacity(config.count);
    let mut root_times = Vec::with_capacity(config.count);
    let mut iterations = Vec::with_capacity(config.count);
    let mut infeasible = 0;

    for _ in 0..config.count {
        let q = instance::random_central_quadric(&mut rng, config.n);
        let x0 = instance::gaussian_vector(&mut rng, config.n);

        let start = Instant::now();
        let eig = spectral::eig_sym(q.a())?;
        eig_times.push(start.elapsed().as_secs_f64());

        let form = StandardForm::from_parts(&q, eig)?;
        let projector = Projector::from_standard_form(q, form, ProjectionOptions::default());
        let start = Instant::now();
        let res = projector.project(&x0)?;
        root_times.push(start.elapsed().as_secs_f64());

        iterations.push(res.newton_iterations);
        if !projector.quadric().is_feasible(&res.point, DEFAULT_FEAS_TOL) {
            infeasible += 1;
        }
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len().max(1) as f64;
    let iters_f: Vec<f64> = iterations.iter().map(|&k| k as f64).collect();
    Ok(BenchReport {
        config,
        eig_mean: mean(&eig_times),
        eig_median: median(&eig_times),
        root_mean: mean(&root_times),
        root_median: median(&root_times),
        newton_median: median(&iters_f),
        newton_max: iterations.iter().copied().max().unwrap_or(0),
        iterations,
        infeasible,
    })
}
