//! Brute-force reference solvers. Slow, independent of the Newton path, and
//! only meant for verification.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::projection::SecularProblem;
use crate::quadric::Quadric;

/// Largest dimension accepted by [`oracle_project_secular`].
pub const ORACLE_MAX_DIM: usize = 12;

/// Default number of grid points for the polynomial sign scan.
pub const DEFAULT_GRID: usize = 100_000;

/// Default sample count for [`oracle_project_param2d`].
pub const DEFAULT_PARAM_SAMPLES: usize = 1_000_000;

const GROUP_TOL: f64 = 1e-9;
const GOLDEN_STEPS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    /// Closest KKT point found (standardized coordinates).
    pub y: DVector<f64>,
    pub dist2: f64,
    /// Every real root of the cleared secular polynomial.
    pub roots: Vec<f64>,
    /// Number of distinct eigenvalues carrying part of `y0`.
    pub active_groups: usize,
    pub candidates: usize,
}

/// Enumerates every KKT point of the standardized problem and returns the
/// closest one.
///
/// The secular equation is multiplied through by its denominators, giving
///
/// ```text
/// P(mu) = sum_g l_g w_g prod_{h != g} (1 + mu l_h)^2 - prod_h (1 + mu l_h)^2
/// ```
///
/// over the distinct active eigenvalues `l_g` with weights `w_g = sum y0_i^2`.
/// All real roots are located by a sign scan between consecutive poles and
/// refined by bisection. Pole-type KKT points are added in closed form.
pub fn oracle_project_secular(sp: &SecularProblem) -> Result<OracleSolution> {
    oracle_project_secular_with(sp, DEFAULT_GRID)
}

pub fn oracle_project_secular_with(sp: &SecularProblem, grid: usize) -> Result<OracleSolution> {
    let n = sp.dim();
    if n > ORACLE_MAX_DIM {
        return Err(Error::CostGuard {
            n,
            max: ORACLE_MAX_DIM,
        });
    }
    let values = sp.values();
    let y0 = sp.y0();

    // Distinct eigenvalues (chained within a relative tolerance).
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match clusters.last_mut() {
            Some(last) if (values[*last.last().unwrap()] - values[i]).abs() <= GROUP_TOL * scale => {
                last.push(i)
            }
            _ => clusters.push(vec![i]),
        }
    }
    let mean = |c: &[usize]| c.iter().map(|&i| values[i]).sum::<f64>() / c.len() as f64;
    // Every coordinate uses its cluster's mean, so roots and points solve the
    // same (slightly perturbed) problem.
    let mut rep = vec![0.0; n];
    for c in &clusters {
        let m = mean(c);
        for &i in c {
            rep[i] = m;
        }
    }

    let mut terms: Vec<(f64, f64)> = Vec::new();
    for c in &clusters {
        let w: f64 = c
            .iter()
            .filter(|&&i| sp.is_active(i))
            .map(|&i| y0[i] * y0[i])
            .sum();
        if c.iter().any(|&i| sp.is_active(i)) {
            terms.push((mean(c), w));
        }
    }

    // P is evaluated at mu = -1/anchor + t, with every factor written as
    // (anchor - l)/anchor + t l so that roots close to the anchor pole keep
    // full relative precision in t.
    let poly = |anchor: f64, t: f64| -> f64 {
        let factors: Vec<f64> = terms
            .iter()
            .map(|(l, _)| ((anchor - l) / anchor + t * l).powi(2))
            .collect();
        let mut total = -factors.iter().product::<f64>();
        for (g, (l, w)) in terms.iter().enumerate() {
            let others: f64 = factors
                .iter()
                .enumerate()
                .filter(|(h, _)| *h != g)
                .map(|(_, f)| f)
                .product();
            total += l * w * others;
        }
        total
    };

    // Roots as (anchor eigenvalue, offset from its pole).
    let mut roots: Vec<(f64, f64)> = Vec::new();
    if !terms.is_empty() {
        // Beyond distance R from every pole, |f + 1| < 1, so no root lies there.
        let min_abs = terms.iter().fold(f64::INFINITY, |m, (l, _)| m.min(l.abs()));
        let radius = 2.0 * (1.0 + y0.norm() / min_abs.sqrt());
        let mut anchors: Vec<f64> = terms.iter().map(|(l, _)| *l).collect();
        anchors.sort_by(|a, b| (-1.0 / a).total_cmp(&(-1.0 / b)));
        let pole = |l: f64| -1.0 / l;

        // Each segment runs from a pole to the midpoint of the next one.
        let mut segments: Vec<(f64, f64, f64)> = vec![(anchors[0], -radius, 0.0)];
        for w in anchors.windows(2) {
            let half = 0.5 * (pole(w[1]) - pole(w[0]));
            segments.push((w[0], 0.0, half));
            segments.push((w[1], -half, 0.0));
        }
        segments.push((anchors[anchors.len() - 1], 0.0, radius));

        let per_segment = (grid / segments.len()).max(16);
        for &(anchor, a, b) in &segments {
            let p = |t: f64| poly(anchor, t);
            let mut prev_t = a;
            let mut prev = p(a);
            if prev == 0.0 {
                roots.push((anchor, a));
            }
            for k in 1..=per_segment {
                let t = a + (b - a) * k as f64 / per_segment as f64;
                let val = p(t);
                if val == 0.0 {
                    roots.push((anchor, t));
                } else if prev != 0.0 && (val > 0.0) != (prev > 0.0) {
                    roots.push((anchor, bisect(&p, prev_t, t, prev)));
                }
                prev_t = t;
                prev = val;
            }
        }
        roots.sort_by(|a, b| (pole(a.0) + a.1).total_cmp(&(pole(b.0) + b.1)));
        // A root on a segment boundary shows up from both sides.
        roots.dedup_by(|a, b| {
            let (ma, mb) = (pole(a.0) + a.1, pole(b.0) + b.1);
            (ma - mb).abs() <= 1e-14 * (1.0 + ma.abs()) && a.0 != b.0
        });
    }
    debug_assert!(roots.len() <= 2 * terms.len());

    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut candidates = 0;
    let mut consider = |y: DVector<f64>| {
        candidates += 1;
        let d2 = (&y - y0).norm_squared();
        if best.as_ref().is_none_or(|(_, b)| d2 < *b) {
            best = Some((y, d2));
        }
    };

    for &(anchor, t) in &roots {
        let y = DVector::from_iterator(
            n,
            (0..n).map(|i| {
                if sp.is_active(i) {
                    y0[i] / ((anchor - rep[i]) / anchor + t * rep[i])
                } else {
                    0.0
                }
            }),
        );
        consider(y);
    }

    // KKT points with mu on the pole of an eigenvalue whose y0 component is zero.
    for c in &clusters {
        if c.iter().any(|&i| sp.is_active(i)) {
            continue;
        }
        let l = mean(c);
        let mut y = DVector::zeros(n);
        let mut rest = 0.0;
        for j in 0..n {
            if c.contains(&j) || !sp.is_active(j) {
                continue;
            }
            y[j] = y0[j] * l / (l - rep[j]);
            rest += rep[j] * y[j] * y[j];
        }
        let t = (1.0 - rest) / l;
        if t >= -1e-12 {
            y[c[0]] = t.max(0.0).sqrt();
            consider(y);
        }
    }

    let (y, dist2) = best.ok_or(Error::InternalNoCandidate)?;
    Ok(OracleSolution {
        y,
        dist2,
        roots: roots.iter().map(|&(l, t)| -1.0 / l + t).collect(),
        active_groups: terms.len(),
        candidates,
    })
}

fn bisect(p: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut pa: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let pm = p(m);
        if pm == 0.0 {
            return m;
        }
        if (pm > 0.0) == (pa > 0.0) {
            a = m;
            pa = pm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Dense parametric sampling of a 2D ellipse or hyperbola, polished by
/// golden-section search. Returns the closest point in original coordinates
/// and its distance to `x0`.
pub fn oracle_project_param2d(q: &Quadric, x0: &DVector<f64>, samples: usize) -> Result<(DVector<f64>, f64)> {
    if q.dim() != 2 {
        return Err(Error::Unsupported(format!(
            "parametric oracle needs n = 2, got {}",
            q.dim()
        )));
    }
    if x0.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x0.len(),
        });
    }
    let sf = q.standardize()?;
    let (l1, l2) = (sf.values[0], sf.values[1]);
    let y0 = sf.to_std(x0);

    let dist = |y: [f64; 2]| (sf.from_std(&DVector::from_column_slice(&y)) - x0).norm();

    // Each branch is a map from a parameter interval to the curve.
    type Branch = (f64, f64, Box<dyn Fn(f64) -> [f64; 2]>);
    let branches: Vec<Branch> = if l2 > 0.0 {
        let (a, b) = (1.0 / l1.sqrt(), 1.0 / l2.sqrt());
        vec![(
            0.0,
            2.0 * std::f64::consts::PI,
            Box::new(move |t: f64| [a * t.cos(), b * t.sin()]),
        )]
    } else {
        let (a, b) = (1.0 / l1.sqrt(), 1.0 / (-l2).sqrt());
        let extent = (10.0 * (1.0 + y0.norm()) * (-l2).sqrt()).asinh();
        [1.0, -1.0]
            .into_iter()
            .map(|s| -> Branch {
                (
                    -extent,
                    extent,
                    Box::new(move |t: f64| [s * a * t.cosh(), b * t.sinh()]),
                )
            })
            .collect()
    };

    let per_branch = (samples / branches.len()).max(8);
    let mut best = (f64::INFINITY, [0.0; 2]);
    for (lo, hi, curve) in &branches {
        let step = (hi - lo) / per_branch as f64;
        let mut local = (f64::INFINITY, *lo);
        for k in 0..=per_branch {
            let t = lo + step * k as f64;
            let d = dist(curve(t));
            if d < local.0 {
                local = (d, t);
            }
        }
        let (mut a, mut b) = (local.1 - step, local.1 + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..GOLDEN_STEPS {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if dist(curve(c)) < dist(curve(d)) {
                b = d;
            } else {
                a = c;
            }
        }
        for t in [local.1, 0.5 * (a + b)] {
            let p = curve(t);
            let d = dist(p);
            if d < best.0 {
                best = (d, p);
            }
        }
    }
    let x = sf.from_std(&DVector::from_column_slice(&best.1));
    Ok((x, best.0))
}
