//! Boundary point clouds for 2D curves and 3D surfaces, for external plotting.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::quadric::Quadric;

/// Feasibility tolerance every emitted sample satisfies.
pub const SAMPLE_FEAS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    /// Hyperbolic parameter range `[-extent, extent]` (or `[0, extent]` per
    /// sheet of a two-sheet hyperboloid).
    pub extent: f64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { extent: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Ellipse,
    Hyperbola,
    Ellipsoid,
    OneSheetHyperboloid,
    TwoSheetHyperboloid,
}

impl Shape {
    pub fn as_str(self) -> &'static str {
        match self {
            Shape::Ellipse => "ellipse",
            Shape::Hyperbola => "hyperbola",
            Shape::Ellipsoid => "ellipsoid",
            Shape::OneSheetHyperboloid => "one-sheet hyperboloid",
            Shape::TwoSheetHyperboloid => "two-sheet hyperboloid",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySample {
    pub point: DVector<f64>,
    /// Connected component: hyperbola branch or hyperboloid sheet.
    pub branch: usize,
}

/// Shape of a supported 2D or 3D quadric, read from the normalized signature.
pub fn shape_of(q: &Quadric) -> Result<Shape> {
    let sf = q.standardize()?;
    let positives = sf.values.iter().filter(|&&v| v > 0.0).count();
    match (q.dim(), positives) {
        (2, 2) => Ok(Shape::Ellipse),
        (2, 1) => Ok(Shape::Hyperbola),
        (3, 3) => Ok(Shape::Ellipsoid),
        (3, 2) => Ok(Shape::OneSheetHyperboloid),
        (3, 1) => Ok(Shape::TwoSheetHyperboloid),
        (n, _) => Err(Error::Unsupported(format!(
            "boundary sampling needs n = 2 or 3, got {n}"
        ))),
    }
}

/// Roughly `count` points on the surface (exactly `count` for curves with one
/// branch; surfaces use a square parameter grid per branch).
pub fn sample_boundary(q: &Quadric, count: usize, options: &SampleOptions) -> Result<Vec<BoundarySample>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let shape = shape_of(q)?;
    let sf = q.standardize()?;
    let axis: Vec<f64> = sf.values.iter().map(|l| 1.0 / l.abs().sqrt()).collect();
    let ext = options.extent;

    let mut std_points: Vec<(Vec<f64>, usize)> = Vec::new();
    match shape {
        Shape::Ellipse => {
            for k in 0..count {
                let t = 2.0 * PI * k as f64 / count as f64;
                std_points.push((vec![axis[0] * t.cos(), axis[1] * t.sin()], 0));
            }
        }
        Shape::Hyperbola => {
            for (branch, s) in [1.0, -1.0].into_iter().enumerate() {
                let m = share(count, branch, 2);
                for t in linspace(-ext, ext, m) {
                    std_points.push((vec![s * axis[0] * t.cosh(), axis[1] * t.sinh()], branch));
                }
            }
        }
        Shape::Ellipsoid => {
            let m = grid_side(count);
            for theta in linspace(0.0, PI, m) {
                for k in 0..m {
                    let phi = 2.0 * PI * k as f64 / m as f64;
                    std_points.push((
                        vec![
                            axis[0] * theta.sin() * phi.cos(),
                            axis[1] * theta.sin() * phi.sin(),
                            axis[2] * theta.cos(),
                        ],
                        0,
                    ));
                }
            }
        }
        Shape::OneSheetHyperboloid => {
            let m = grid_side(count);
            for t in linspace(-ext, ext, m) {
                for k in 0..m {
                    let phi = 2.0 * PI * k as f64 / m as f64;
                    std_points.push((
                        vec![
                            axis[0] * t.cosh() * phi.cos(),
                            axis[1] * t.cosh() * phi.sin(),
                            axis[2] * t.sinh(),
                        ],
                        0,
                    ));
                }
            }
        }
        Shape::TwoSheetHyperboloid => {
            for (branch, s) in [1.0, -1.0].into_iter().enumerate() {
                let m = grid_side(share(count, branch, 2));
                for t in linspace(0.0, ext, m) {
                    for k in 0..m {
                        let phi = 2.0 * PI * k as f64 / m as f64;
                        std_points.push((
                            vec![
                                s * axis[0] * t.cosh(),
                                axis[1] * t.sinh() * phi.cos(),
                                axis[2] * t.sinh() * phi.sin(),
                            ],
                            branch,
                        ));
                    }
                }
            }
        }
    }

    std_points
        .into_iter()
        .map(|(y, branch)| {
            let point = sf.from_std(&DVector::from_vec(y));
            if !q.is_feasible(&point, SAMPLE_FEAS_TOL) {
                return Err(Error::Unsupported(format!(
                    "sample {point:?} misses the surface; parameter extent too large?"
                )));
            }
            Ok(BoundarySample { point, branch })
        })
        .collect()
}

fn share(count: usize, part: usize, parts: usize) -> usize {
    count / parts + usize::from(part < count % parts)
}

fn grid_side(count: usize) -> usize {
    ((count as f64).sqrt().ceil() as usize).max(2)
}

fn linspace(a: f64, b: f64, m: usize) -> impl Iterator<Item = f64> {
    let step = if m > 1 { (b - a) / (m - 1) as f64 } else { 0.0 };
    (0..m).map(move |k| a + step * k as f64)
}
