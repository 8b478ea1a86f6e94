//! Projection onto a quadric in standardized coordinates.
//!
//! In the standard form the problem reads
//!
//! ```text
//! minimize ||y - y0||^2   subject to   sum_i lambda_i y_i^2 = 1
//! ```
//!
//! Stationarity gives `y(mu) = (I + mu D)^{-1} y0`, and feasibility of that
//! point is the secular equation
//!
//! ```text
//! f(mu) = sum_{i : y0_i != 0} lambda_i (y0_i / (1 + mu lambda_i))^2 - 1 = 0.
//! ```
//!
//! On the open interval between the poles `-1/lambda_1` and `-1/lambda_n`
//! (or `+inf` when every eigenvalue is positive) all denominators are positive
//! and `f` is strictly decreasing, so it has at most one root there. The only
//! other KKT points that can be optimal sit exactly on a pole `-1/lambda` whose
//! eigenspace component of `y0` vanishes; those are enumerated in closed form.
//! The projection is the closest of all these candidates.

use std::cmp::Ordering;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::quadric::{Quadric, StandardForm};
use crate::spectral::{self, EigenGroups};

/// Relative threshold below which a standardized coordinate counts as zero:
/// `|y0_i| <= DEFAULT_AXIS_TOL * (1 + ||y0||)`.
pub const DEFAULT_AXIS_TOL: f64 = 1e-11;

/// Slack allowed on `sigma / lambda` before a degenerate branch is rejected.
pub const SLACK_TOL: f64 = 1e-12;

pub const NEWTON_MAX_ITER: usize = 100;

const POLE_TOL: f64 = 1e-14;
const POLE_OFFSET: f64 = 1e-8;
const F_TOL: f64 = 1e-12;
const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionOptions {
    /// Relative zero threshold for standardized coordinates of the input point.
    pub axis_tol: f64,
    /// Relative tolerance for merging eigenvalues into one group.
    pub group_tol: f64,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self {
            axis_tol: DEFAULT_AXIS_TOL,
            group_tol: spectral::DEFAULT_GROUP_TOL,
        }
    }
}

/// The standardized problem for one input point.
#[derive(Debug, Clone)]
pub struct SecularProblem {
    values: DVector<f64>,
    groups: EigenGroups,
    y0: DVector<f64>,
    active: Vec<bool>,
    poles: Vec<f64>,
}

/// Denominators `1 + mu lambda_i` written as `base_i + t lambda_i` with
/// `mu = anchor + t`. Anchoring at a pole keeps the vanishing denominator
/// free of cancellation.
struct Shifted {
    anchor: f64,
    /// Eigenvalue whose pole is the anchor.
    pole_value: Option<f64>,
    base: Vec<f64>,
}

/// The open interval on which the relevant root of `f` lives, with the limits
/// of `f` at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootInterval {
    pub lower: f64,
    /// `+inf` when every eigenvalue is positive.
    pub upper: f64,
    /// `+inf` when the top eigenspace carries part of `y0`, else the finite limit.
    pub lower_limit: f64,
    /// `-inf`, a finite limit, or `-1` when `upper` is infinite.
    pub upper_limit: f64,
}

impl RootInterval {
    pub fn has_root(&self) -> bool {
        self.lower_limit > 0.0 && self.upper_limit < 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonRoot {
    pub mu: f64,
    pub iterations: usize,
    pole_value: Option<f64>,
    offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateKind {
    /// `y(mu*)` for the root of the secular function.
    NewtonRoot,
    /// A KKT point sitting on the pole of eigenvalue group `group`.
    Degenerate { group: usize, positive: bool },
}

impl CandidateKind {
    fn rank(&self) -> u8 {
        match self {
            CandidateKind::NewtonRoot => 0,
            CandidateKind::Degenerate { .. } => 1,
        }
    }
}

/// A KKT point of the standardized problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub y: DVector<f64>,
    pub mu: f64,
    pub kind: CandidateKind,
    /// `||y - y0||^2`.
    pub dist2: f64,
}

impl SecularProblem {
    pub fn new(values: DVector<f64>, y0: DVector<f64>, options: &ProjectionOptions) -> Result<Self> {
        let groups = spectral::group_eigenvalues(values.as_slice(), options.group_tol);
        Self::with_groups(values, groups, y0, options.axis_tol)
    }

    pub fn with_groups(
        values: DVector<f64>,
        groups: EigenGroups,
        y0: DVector<f64>,
        axis_tol: f64,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDimension);
        }
        if y0.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: values.len(),
                found: y0.len(),
            });
        }
        if values[0] <= 0.0 {
            return Err(Error::EmptyQuadric);
        }
        let threshold = axis_tol * (1.0 + y0.norm());
        let active = y0.iter().map(|v| v.abs() > threshold).collect();
        let mut poles: Vec<f64> = groups.representatives.iter().map(|l| -1.0 / l).collect();
        poles.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            groups,
            y0,
            active,
            poles,
        })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn groups(&self) -> &EigenGroups {
        &self.groups
    }

    pub fn y0(&self) -> &DVector<f64> {
        &self.y0
    }

    /// `-1/lambda` for each eigenvalue group, ascending.
    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    /// Whether coordinate `i` of `y0` is treated as nonzero.
    pub fn is_active(&self, i: usize) -> bool {
        self.active[i]
    }

    fn group_active(&self, g: usize) -> bool {
        self.groups.blocks[g].clone().any(|i| self.active[i])
    }

    fn shifted(&self, pole_value: Option<f64>) -> Shifted {
        match pole_value {
            None => Shifted {
                anchor: 0.0,
                pole_value: None,
                base: vec![1.0; self.dim()],
            },
            Some(l) => Shifted {
                anchor: -1.0 / l,
                pole_value: Some(l),
                base: self.values.iter().map(|li| (l - li) / l).collect(),
            },
        }
    }

    fn eval(&self, s: &Shifted, t: f64) -> (f64, f64) {
        let mut f = -1.0;
        let mut df = 0.0;
        for i in 0..self.dim() {
            if !self.active[i] {
                continue;
            }
            let l = self.values[i];
            let den = s.base[i] + t * l;
            let r = self.y0[i] / den;
            f += l * r * r;
            df -= 2.0 * l * l * r * r / den;
        }
        (f, df)
    }

    fn point(&self, s: &Shifted, t: f64) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|i| {
                if self.active[i] {
                    self.y0[i] / (s.base[i] + t * self.values[i])
                } else {
                    0.0
                }
            }),
        )
    }

    fn check_pole(&self, mu: f64) -> Result<()> {
        for i in 0..self.dim() {
            if !self.active[i] {
                continue;
            }
            let pole = -1.0 / self.values[i];
            if (mu - pole).abs() <= POLE_TOL * pole.abs().max(1.0) {
                return Err(Error::PoleEvaluation { mu, pole });
            }
        }
        Ok(())
    }

    /// The secular function `f(mu)`.
    pub fn f_value(&self, mu: f64) -> Result<f64> {
        self.check_pole(mu)?;
        Ok(self.eval(&self.shifted(None), mu).0)
    }

    /// `f'(mu) = -2 sum lambda_i^2 y0_i^2 / (1 + mu lambda_i)^3`.
    pub fn f_derivative(&self, mu: f64) -> Result<f64> {
        self.check_pole(mu)?;
        Ok(self.eval(&self.shifted(None), mu).1)
    }

    /// `y(mu) = (I + mu D)^{-1} y0`, with inactive coordinates exactly zero.
    pub fn x_of_mu(&self, mu: f64) -> Result<DVector<f64>> {
        self.check_pole(mu)?;
        Ok(self.point(&self.shifted(None), mu))
    }

    pub fn root_interval(&self) -> RootInterval {
        let n = self.dim();
        let top = self.values[0];
        let bottom = self.values[n - 1];
        let lower = -1.0 / top;
        let lower_limit = if self.group_active(0) {
            f64::INFINITY
        } else {
            self.eval(&self.shifted(Some(top)), 0.0).0
        };
        let (upper, upper_limit) = if bottom > 0.0 {
            (f64::INFINITY, -1.0)
        } else if self.group_active(self.groups.len() - 1) {
            (-1.0 / bottom, f64::NEG_INFINITY)
        } else {
            (-1.0 / bottom, self.eval(&self.shifted(Some(bottom)), 0.0).0)
        };
        RootInterval {
            lower,
            upper,
            lower_limit,
            upper_limit,
        }
    }

    /// Safeguarded Newton iteration for the unique root of `f` inside `ri`.
    ///
    /// The iteration runs in a variable shifted to the pole on the root's side
    /// of `mu = 0` (0 always lies inside the interval) and keeps a sign bracket
    /// `f(lo) > 0 > f(hi)`; steps that leave the bracket become bisections.
    pub fn newton_root(&self, ri: &RootInterval) -> Result<NewtonRoot> {
        if !ri.has_root() {
            return Err(Error::Unsupported(
                "secular function has no root on the interval".into(),
            ));
        }
        let n = self.dim();
        let plain = self.shifted(None);
        let f0 = self.eval(&plain, 0.0).0;
        if f0 == 0.0 {
            return Ok(NewtonRoot {
                mu: 0.0,
                iterations: 0,
                pole_value: None,
                offset: 0.0,
            });
        }
        let f_tol = F_TOL * (1.0 + f0.abs());

        // Bracket [lo, hi] in the shifted variable t = mu - anchor.
        let (shift, lo, hi) = if f0 > 0.0 {
            if ri.upper.is_infinite() {
                let mut lo = 0.0;
                let mut hi = 1.0f64.max(ri.lower + 1.0);
                loop {
                    let f = self.eval(&plain, hi).0;
                    if f == 0.0 {
                        return Ok(self.finish(&plain, hi, 0));
                    }
                    if f < 0.0 {
                        break;
                    }
                    lo = hi;
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return Err(Error::MaxIterations { iterations: 0 });
                    }
                }
                (plain, lo, hi)
            } else {
                let s = self.shifted(Some(self.values[n - 1]));
                let at_zero = -s.anchor;
                let (lo, hi) = if ri.upper_limit.is_infinite() {
                    self.approach_pole(&s, at_zero, -1.0, ri.upper)?
                } else {
                    (at_zero, 0.0)
                };
                (s, lo, hi)
            }
        } else {
            let s = self.shifted(Some(self.values[0]));
            let at_zero = -s.anchor;
            let (lo, hi) = if ri.lower_limit.is_infinite() {
                self.approach_pole(&s, at_zero, 1.0, ri.lower)?
            } else {
                (0.0, at_zero)
            };
            (s, lo, hi)
        };
        // Start where Newton is monotone: from the left when the positive
        // (convex) terms dominate, i.e. on the mu > 0 side, else from the right.
        let start = if f0 > 0.0 { lo } else { hi };
        self.iterate(shift, lo, hi, start, f_tol)
    }

    /// Walks from the pole at `t = 0` outward along `direction` until the sign
    /// of `f` flips from the pole's infinite limit. `far` is the bracket end at
    /// `mu = 0`. Returns `(lo, hi)` with `f(lo) > 0 > f(hi)`.
    fn approach_pole(&self, s: &Shifted, far: f64, direction: f64, pole: f64) -> Result<(f64, f64)> {
        let mut delta = POLE_OFFSET * (1.0 + pole.abs());
        // Offsets are clamped so the probe stays between the pole and mu = 0.
        delta = delta.min(far.abs() * 0.5);
        let mut near_far = far;
        for _ in 0..2000 {
            let t = direction * delta;
            let f = self.eval(s, t).0;
            // direction > 0: lower pole, f -> +inf, root right of the probe
            // while f > 0. direction < 0: upper pole, f -> -inf.
            let pole_side = if direction > 0.0 { f > 0.0 } else { f < 0.0 };
            if pole_side {
                return Ok(if direction > 0.0 {
                    (t, near_far)
                } else {
                    (near_far, t)
                });
            }
            near_far = t;
            delta *= 0.5;
            if delta == 0.0 {
                break;
            }
        }
        Err(Error::MaxIterations { iterations: 0 })
    }

    fn iterate(&self, s: Shifted, mut lo: f64, mut hi: f64, start: f64, f_tol: f64) -> Result<NewtonRoot> {
        let mut t = start;
        let (mut f, mut df) = self.eval(&s, t);
        for iteration in 1..=NEWTON_MAX_ITER {
            if f == 0.0 {
                return Ok(self.finish(&s, t, iteration - 1));
            }
            if f.abs() <= f_tol {
                // One polishing step: quadratic convergence takes the residual
                // from f_tol to rounding level.
                let next = t - f / df;
                let t = if df != 0.0 && next.is_finite() && next >= lo && next <= hi {
                    next
                } else {
                    t
                };
                return Ok(self.finish(&s, t, iteration));
            }
            if f > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let width = hi - lo;
            if width <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) || width == 0.0 {
                return Ok(self.finish(&s, t, iteration - 1));
            }
            let mut next = if df.abs() >= 1e-300 { t - f / df } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if next == t {
                return Ok(self.finish(&s, t, iteration));
            }
            t = next;
            (f, df) = self.eval(&s, t);
        }
        if f.abs() <= f_tol {
            return Ok(self.finish(&s, t, NEWTON_MAX_ITER));
        }
        Err(Error::MaxIterations {
            iterations: NEWTON_MAX_ITER,
        })
    }

    fn finish(&self, s: &Shifted, t: f64, iterations: usize) -> NewtonRoot {
        NewtonRoot {
            mu: s.anchor + t,
            iterations,
            pole_value: s.pole_value,
            offset: t,
        }
    }

    /// `y(mu*)` evaluated in the same shifted variable the root was found in.
    pub fn root_point(&self, root: &NewtonRoot) -> DVector<f64> {
        self.point(&self.shifted(root.pole_value), root.offset)
    }

    /// KKT points located on the poles of eigenvalue groups whose component
    /// of `y0` vanishes.
    ///
    /// For such a group with value `l`, `mu = -1/l`; every other coordinate is
    /// `y0_j / (1 - lambda_j / l)` and the group's own coordinates carry the
    /// remaining slack `sigma / l` of the constraint. Within the group, the
    /// mass is placed on its first index; any direction in the eigenspace is
    /// equally close.
    pub fn degenerate_candidates(&self) -> Vec<Candidate> {
        let mut out = Vec::new();
        for (g, (block, l)) in self.groups.iter().enumerate() {
            if self.group_active(g) {
                continue;
            }
            let mu = -1.0 / l;
            let mut y = DVector::zeros(self.dim());
            let mut sigma = 1.0;
            for j in 0..self.dim() {
                if block.contains(&j) || !self.active[j] {
                    continue;
                }
                let lj = self.values[j];
                y[j] = self.y0[j] / ((l - lj) / l);
                sigma -= lj * y[j] * y[j];
            }
            let slack = sigma / l;
            if slack < -SLACK_TOL {
                continue;
            }
            let r = slack.max(0.0).sqrt();
            let signs: &[bool] = if r == 0.0 { &[true] } else { &[true, false] };
            for &positive in signs {
                let mut yc = y.clone();
                yc[block.start] = if positive { r } else { -r };
                let dist2 = (&yc - &self.y0).norm_squared();
                out.push(Candidate {
                    y: yc,
                    mu,
                    kind: CandidateKind::Degenerate { group: g, positive },
                    dist2,
                });
            }
        }
        out
    }

    /// `||(2(y - y0) + 2 mu D y, y^T D y - 1)|| / (1 + ||y0||)`.
    pub fn kkt_residual(&self, y: &DVector<f64>, mu: f64) -> f64 {
        let mut sum = 0.0;
        let mut constraint = -1.0;
        for i in 0..self.dim() {
            let l = self.values[i];
            let g = 2.0 * (y[i] - self.y0[i]) + 2.0 * mu * l * y[i];
            sum += g * g;
            constraint += l * y[i] * y[i];
        }
        (sum + constraint * constraint).sqrt() / (1.0 + self.y0.norm())
    }

    /// All candidates, sorted so that the selected one comes first.
    pub fn solve(&self) -> Result<SecularSolution> {
        let interval = self.root_interval();
        let mut candidates = self.degenerate_candidates();
        let degenerate = !candidates.is_empty();
        let mut newton_iterations = 0;
        let mut root_found = false;
        if interval.has_root() {
            let root = self.newton_root(&interval)?;
            let y = self.root_point(&root);
            let dist2 = (&y - &self.y0).norm_squared();
            newton_iterations = root.iterations;
            root_found = true;
            candidates.push(Candidate {
                y,
                mu: root.mu,
                kind: CandidateKind::NewtonRoot,
                dist2,
            });
        }
        if candidates.is_empty() {
            return Err(Error::InternalNoCandidate);
        }
        select(&mut candidates);
        Ok(SecularSolution {
            candidates,
            interval,
            newton_iterations,
            root_found,
            degenerate,
        })
    }
}

/// Orders candidates by distance; the first entry is the selected projection.
///
/// Distances within a relative `TIE_TOL` of the minimum count as tied. Ties go
/// to the Newton-root candidate, then to the lexicographically smallest `y`.
fn select(candidates: &mut [Candidate]) {
    candidates.sort_by(|a, b| a.dist2.total_cmp(&b.dist2).then_with(|| tie_order(a, b)));
    let best = candidates[0].dist2;
    let tied = candidates
        .iter()
        .take_while(|c| c.dist2 <= best + TIE_TOL * (1.0 + best))
        .count();
    candidates[..tied].sort_by(tie_order);
}

fn tie_order(a: &Candidate, b: &Candidate) -> Ordering {
    a.kind.rank().cmp(&b.kind.rank()).then_with(|| {
        a.y.iter()
            .zip(b.y.iter())
            .map(|(u, v)| u.total_cmp(v))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

#[derive(Debug, Clone)]
pub struct SecularSolution {
    /// Sorted; `candidates[0]` is the selected one.
    pub candidates: Vec<Candidate>,
    pub interval: RootInterval,
    pub newton_iterations: usize,
    pub root_found: bool,
    /// At least one degenerate candidate exists.
    pub degenerate: bool,
}

/// Result of projecting one point.
#[derive(Debug, Clone)]
pub struct ProjectionResult {
    /// The projection in original coordinates.
    pub point: DVector<f64>,
    /// `||point - x0||`.
    pub distance: f64,
    /// Lagrange multiplier of the selected candidate (standardized problem).
    pub multiplier: f64,
    /// The input lies on a principal axis: some eigenspace component of the
    /// standardized point vanishes, so closed-form candidates exist.
    pub degenerate: bool,
    pub newton_iterations: usize,
    pub root_found: bool,
    /// Standardized candidates sorted by distance; the first was selected.
    pub candidates: Vec<Candidate>,
    /// Standardized input point.
    pub y0: DVector<f64>,
}

impl ProjectionResult {
    pub fn selected(&self) -> &Candidate {
        &self.candidates[0]
    }
}

/// A quadric prepared for projection. Holds the eigendecomposition so many
/// points can be projected without repeating it.
#[derive(Debug, Clone)]
pub struct Projector {
    quadric: Quadric,
    form: StandardForm,
    groups: EigenGroups,
    options: ProjectionOptions,
}

impl Projector {
    pub fn new(quadric: Quadric) -> Result<Self> {
        Self::with_options(quadric, ProjectionOptions::default())
    }

    pub fn with_options(quadric: Quadric, options: ProjectionOptions) -> Result<Self> {
        let form = quadric.standardize()?;
        Ok(Self::from_standard_form(quadric, form, options))
    }

    pub fn from_standard_form(quadric: Quadric, form: StandardForm, options: ProjectionOptions) -> Self {
        let groups = spectral::group_eigenvalues(form.values.as_slice(), options.group_tol);
        Self {
            quadric,
            form,
            groups,
            options,
        }
    }

    pub fn quadric(&self) -> &Quadric {
        &self.quadric
    }

    pub fn standard_form(&self) -> &StandardForm {
        &self.form
    }

    pub fn options(&self) -> &ProjectionOptions {
        &self.options
    }

    pub fn dim(&self) -> usize {
        self.quadric.dim()
    }

    /// The standardized problem for `x0`.
    pub fn secular_problem(&self, x0: &DVector<f64>) -> Result<SecularProblem> {
        if x0.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x0.len(),
            });
        }
        if x0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        SecularProblem::with_groups(
            self.form.values.clone(),
            self.groups.clone(),
            self.form.to_std(x0),
            self.options.axis_tol,
        )
    }

    pub fn project(&self, x0: &DVector<f64>) -> Result<ProjectionResult> {
        let sp = self.secular_problem(x0)?;
        let solution = sp.solve()?;
        let best = &solution.candidates[0];
        let point = self.form.from_std(&best.y);
        let distance = (&point - x0).norm();
        Ok(ProjectionResult {
            distance,
            multiplier: best.mu,
            point,
            degenerate: solution.degenerate,
            newton_iterations: solution.newton_iterations,
            root_found: solution.root_found,
            candidates: solution.candidates,
            y0: sp.y0,
        })
    }
}

/// Projects `x0` onto a non-cylindrical central quadric.
pub fn project(q: &Quadric, x0: &DVector<f64>) -> Result<ProjectionResult> {
    Projector::new(q.clone())?.project(x0)
}

/// Projection onto the hyperplane `<b, x> + c = 0`.
pub fn project_hyperplane(b: &DVector<f64>, c: f64, x0: &DVector<f64>) -> Result<DVector<f64>> {
    if b.len() != x0.len() {
        return Err(Error::DimensionMismatch {
            expected: b.len(),
            found: x0.len(),
        });
    }
    let nb2 = b.norm_squared();
    if nb2 == 0.0 {
        return Err(Error::ZeroNormal);
    }
    Ok(x0 - b * ((b.dot(x0) + c) / nb2))
}
