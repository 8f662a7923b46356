//! Wrapped Dirac mixtures matched to circular moments.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::moments::{CircularMoments, MomentError};

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplingError {
    #[error("a wrapped Dirac needs at least one component")]
    Empty,
    #[error("weights and angles differ in length ({weights} vs {angles})")]
    LengthMismatch { weights: usize, angles: usize },
    #[error("weight {index} is {value}, outside [0, 1]")]
    InvalidWeight { index: usize, value: f64 },
    #[error("weights sum to {0}, not 1")]
    WeightSum(f64),
    #[error("angle {index} is {value}, outside [0, 2 pi)")]
    InvalidAngle { index: usize, value: f64 },
    #[error("target moments must include order {0}")]
    TooFewMoments(usize),
    #[error(transparent)]
    Moments(#[from] MomentError),
}

/// Weighted point masses on the circle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WrappedDirac {
    weights: Vec<f64>,
    angles: Vec<f64>,
}

impl WrappedDirac {
    pub fn new(weights: Vec<f64>, angles: Vec<f64>) -> Result<Self, SamplingError> {
        if weights.len() != angles.len() {
            return Err(SamplingError::LengthMismatch {
                weights: weights.len(),
                angles: angles.len(),
            });
        }
        if weights.is_empty() {
            return Err(SamplingError::Empty);
        }
        for (index, &value) in weights.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(SamplingError::InvalidWeight { index, value });
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(SamplingError::WeightSum(total));
        }
        for (index, &value) in angles.iter().enumerate() {
            if !(0.0..TWO_PI).contains(&value) {
                return Err(SamplingError::InvalidAngle { index, value });
            }
        }
        Ok(Self { weights, angles })
    }

    /// Clamp weights to `[0, 1]`, rescale them to sum to one and wrap angles.
    pub fn normalized(weights: &[f64], angles: &[f64]) -> Result<Self, SamplingError> {
        let clamped: Vec<f64> = weights.iter().map(|w| w.clamp(0.0, 1.0)).collect();
        let total: f64 = clamped.iter().sum();
        if !(total > 0.0) {
            return Err(SamplingError::WeightSum(total));
        }
        let weights = clamped.iter().map(|w| w / total).collect();
        let angles = angles.iter().map(|&a| wrap_two_pi(a)).collect();
        Self::new(weights, angles)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().copied().zip(self.angles.iter().copied())
    }

    /// Moment pairs for orders `1..=max_order`.
    pub fn moments(&self, max_order: usize) -> Vec<(f64, f64)> {
        (1..=max_order).map(|m| dirac_moments(self, m)).collect()
    }
}

fn wrap_two_pi(angle: f64) -> f64 {
    let a = angle.rem_euclid(TWO_PI);
    // rem_euclid can round up to exactly 2 pi for tiny negative inputs.
    if a >= TWO_PI {
        0.0
    } else {
        a
    }
}

/// `(sum_l w_l cos(m theta_l), sum_l w_l sin(m theta_l))`.
pub fn dirac_moments(d: &WrappedDirac, m: usize) -> (f64, f64) {
    let order = m as f64;
    d.iter().fold((0.0, 0.0), |(c, s), (w, a)| {
        let (sa, ca) = (order * a).sin_cos();
        (c + w * ca, s + w * sa)
    })
}

/// Euclidean norm of the stacked moment residual over orders `1..=M`.
pub fn moment_residual(d: &WrappedDirac, target: &CircularMoments) -> f64 {
    target
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, &(c, s))| {
            let (dc, ds) = dirac_moments(d, i + 1);
            (dc - c).powi(2) + (ds - s).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub max_iterations: usize,
    /// Random starts tried after the deterministic one.
    pub restarts: usize,
    pub seed: u64,
    /// Residual norm at which a start counts as solved.
    pub tolerance: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            restarts: 4,
            seed: 0,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    /// Moment residual norm of the returned (normalized) Dirac.
    pub residual_norm: f64,
    /// Iterations spent on the returned start.
    pub iterations: usize,
    pub converged: bool,
    /// Objective `0.5 |residual|^2` after each accepted step of the returned start.
    pub objective_history: Vec<f64>,
}

/// Projected gradient, relative to the residual norm, below which a start
/// counts as stationary.
const STATIONARY_GRADIENT: f64 = 1e-9;

/// Box-constrained Levenberg-Marquardt on weights and angles.
struct Problem<'a> {
    target: &'a [(f64, f64)],
    components: usize,
}

impl Problem<'_> {
    fn residual_len(&self) -> usize {
        2 * self.target.len() + 1
    }

    /// Residuals: the weight-sum row, then a cosine and sine row per order.
    fn residuals(&self, x: &[f64]) -> DVector<f64> {
        let (weights, angles) = x.split_at(self.components);
        let mut out = DVector::zeros(self.residual_len());
        out[0] = weights.iter().sum::<f64>() - 1.0;
        for (i, &(c, s)) in self.target.iter().enumerate() {
            let m = (i + 1) as f64;
            let (mut dc, mut ds) = (0.0, 0.0);
            for (w, a) in weights.iter().zip(angles) {
                let (sa, ca) = (m * a).sin_cos();
                dc += w * ca;
                ds += w * sa;
            }
            out[1 + 2 * i] = dc - c;
            out[2 + 2 * i] = ds - s;
        }
        out
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let l = self.components;
        let (weights, angles) = x.split_at(l);
        let mut jac = DMatrix::zeros(self.residual_len(), 2 * l);
        for k in 0..l {
            jac[(0, k)] = 1.0;
        }
        for i in 0..self.target.len() {
            let m = (i + 1) as f64;
            for k in 0..l {
                let (sa, ca) = (m * angles[k]).sin_cos();
                jac[(1 + 2 * i, k)] = ca;
                jac[(2 + 2 * i, k)] = sa;
                jac[(1 + 2 * i, l + k)] = -m * weights[k] * sa;
                jac[(2 + 2 * i, l + k)] = m * weights[k] * ca;
            }
        }
        jac
    }

    fn project(&self, x: &mut [f64]) {
        for w in &mut x[..self.components] {
            *w = w.clamp(0.0, 1.0);
        }
    }

    /// Variables free to move: angles always, weights unless pinned at a
    /// bound with the gradient pushing outward.
    fn free_mask(&self, x: &[f64], grad: &DVector<f64>) -> Vec<bool> {
        (0..x.len())
            .map(|k| {
                if k >= self.components {
                    return true;
                }
                let at_lower = x[k] <= 0.0 && grad[k] > 0.0;
                let at_upper = x[k] >= 1.0 && grad[k] < 0.0;
                !(at_lower || at_upper)
            })
            .collect()
    }

    fn solve(&self, start: Vec<f64>, cfg: &FitConfig) -> Attempt {
        let n = start.len();
        let mut x = start;
        self.project(&mut x);
        let mut res = self.residuals(&x);
        let mut objective = 0.5 * res.norm_squared();
        let mut history = vec![objective];
        let mut damping = 1e-3;
        let mut iterations = 0;
        let mut stationary = false;
        let target_objective = 0.5 * cfg.tolerance * cfg.tolerance;

        while iterations < cfg.max_iterations && objective > target_objective {
            iterations += 1;
            let jac = self.jacobian(&x);
            let grad = jac.transpose() * &res;
            let free = self.free_mask(&x, &grad);
            let idx: Vec<usize> = (0..n).filter(|&k| free[k]).collect();
            let projected_grad = idx.iter().map(|&k| grad[k].abs()).fold(0.0, f64::max);
            // Overdetermined targets stop at a least-squares optimum.
            if projected_grad < STATIONARY_GRADIENT * res.norm().max(cfg.tolerance) {
                stationary = true;
                break;
            }
            let jac_free = jac.select_columns(&idx);
            let normal = jac_free.transpose() * &jac_free;
            let grad_free = DVector::from_iterator(idx.len(), idx.iter().map(|&k| grad[k]));

            let floor = 1e-6 * (0..idx.len()).map(|d| normal[(d, d)]).fold(1e-9, f64::max);
            let mut accepted = false;
            while damping < 1e12 {
                let mut system = normal.clone();
                for d in 0..idx.len() {
                    system[(d, d)] += damping * normal[(d, d)].max(floor);
                }
                let Some(chol) = system.cholesky() else {
                    damping *= 4.0;
                    continue;
                };
                let step = chol.solve(&(-&grad_free));
                let mut trial = x.clone();
                for (d, &k) in idx.iter().enumerate() {
                    trial[k] += step[d];
                }
                self.project(&mut trial);
                let trial_res = self.residuals(&trial);
                let trial_objective = 0.5 * trial_res.norm_squared();
                if trial_objective < objective {
                    let moved = trial.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    x = trial;
                    res = trial_res;
                    objective = trial_objective;
                    history.push(objective);
                    damping = (damping / 3.0).max(1e-12);
                    accepted = true;
                    if moved < 1e-15 {
                        stationary = true;
                    }
                    break;
                }
                damping *= 4.0;
            }
            if !accepted || stationary {
                stationary = true;
                break;
            }
        }
        Attempt {
            x,
            iterations,
            converged: objective <= target_objective || stationary,
            history,
        }
    }
}

struct Attempt {
    x: Vec<f64>,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

impl Attempt {
    fn objective(&self) -> f64 {
        self.history.last().copied().unwrap_or(f64::INFINITY)
    }
}

impl Problem<'_> {
    /// Angle where adding mass would most reduce the residual.
    fn steepest_angle(&self, x: &[f64]) -> f64 {
        const GRID: usize = 720;
        let res = self.residuals(x);
        let score = |t: f64| {
            (0..self.target.len())
                .map(|i| {
                    let (s, c) = ((i + 1) as f64 * t).sin_cos();
                    -(res[1 + 2 * i] * c + res[2 + 2 * i] * s)
                })
                .sum::<f64>()
        };
        (0..GRID)
            .map(|i| TWO_PI * i as f64 / GRID as f64)
            .max_by(|a, b| score(*a).total_cmp(&score(*b)))
            .unwrap_or(0.0)
    }

    /// Solve from `start`; while stuck above tolerance, move the lightest
    /// point to [`Self::steepest_angle`] and solve again.
    fn solve_with_relocation(&self, start: Vec<f64>, cfg: &FitConfig) -> Attempt {
        let l = self.components;
        let target_objective = 0.5 * cfg.tolerance * cfg.tolerance;
        let mut best = self.solve(start, cfg);
        let mut iterations = best.iterations;
        for _ in 0..2 * l {
            if best.objective() <= target_objective {
                break;
            }
            let mut x = best.x.clone();
            let lightest = (0..l)
                .min_by(|&a, &b| x[a].total_cmp(&x[b]))
                .expect("at least one component");
            x[l + lightest] = self.steepest_angle(&best.x);
            x[lightest] = x[lightest].max(0.5 / l as f64);
            let trial = self.solve(x, cfg);
            iterations += trial.iterations;
            if trial.objective() < best.objective() * (1.0 - 1e-9) {
                best = trial;
            } else {
                break;
            }
        }
        best.iterations = iterations;
        best
    }
}

/// Fit `components` weighted points to the target moments.
///
/// Minimizes the stacked moment residual over weights in `[0, 1]` and
/// unconstrained angles, with an extra residual row pulling the weight sum to
/// one. Starts from equally spaced points anchored at the circular mean, then
/// from `cfg.restarts` seeded random configurations, keeping the best.
pub fn fit_wrapped_dirac(
    target: &CircularMoments,
    components: usize,
    cfg: &FitConfig,
) -> Result<(WrappedDirac, FitReport), SamplingError> {
    if components == 0 {
        return Err(SamplingError::Empty);
    }
    if target.max_order() == 0 {
        return Err(SamplingError::TooFewMoments(1));
    }
    let problem = Problem {
        target: target.pairs(),
        components,
    };
    let (c1, s1) = target.order(1)?;
    let mean = s1.atan2(c1);
    let uniform = 1.0 / components as f64;
    let mut start: Vec<f64> = vec![uniform; components];
    start.extend((0..components).map(|l| mean + TWO_PI * l as f64 / components as f64));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best: Option<(WrappedDirac, FitReport)> = None;
    for attempt in 0..=cfg.restarts {
        if attempt > 0 {
            let raw: Vec<f64> = (0..components).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = raw.iter().sum();
            start = raw.iter().map(|w| w / total).collect();
            start.extend((0..components).map(|_| rng.random_range(0.0..TWO_PI)));
        }
        let result = problem.solve_with_relocation(start.clone(), cfg);
        let (weights, angles) = result.x.split_at(components);
        let Ok(dirac) = WrappedDirac::normalized(weights, angles) else {
            continue;
        };
        let residual_norm = moment_residual(&dirac, target);
        let report = FitReport {
            residual_norm,
            iterations: result.iterations,
            converged: result.converged,
            objective_history: result.history,
        };
        let better = best.as_ref().is_none_or(|(_, b)| residual_norm < b.residual_norm);
        if better {
            best = Some((dirac, report));
        }
        if residual_norm <= cfg.tolerance {
            break;
        }
    }
    best.ok_or(SamplingError::WeightSum(0.0))
}

/// Symmetric point set about the circular mean matching the first-order
/// resultant and the second-order moment along the mean axis.
///
/// Points sit at offsets `+-alpha * t_i` from the mean on a fixed lattice
/// `t_i`; the centre (odd `L`) or innermost pair (even `L`) carries weight
/// `w0` and the rest share `1 - w0`. `alpha` and `w0` solve the two moment
/// equations. Targets out of the lattice's reach fall back to stacked points,
/// and only infeasible targets get a least-squares match.
pub fn symmetric_sampling_baseline(
    target: &CircularMoments,
    components: usize,
) -> Result<WrappedDirac, SamplingError> {
    if components == 0 {
        return Err(SamplingError::Empty);
    }
    if target.max_order() < 2 {
        return Err(SamplingError::TooFewMoments(2));
    }
    let (c1, s1) = target.order(1)?;
    let (c2, s2) = target.order(2)?;
    let resultant = c1.hypot(s1);
    let n = components;
    if resultant < 1e-12 {
        let angles: Vec<f64> = (0..n).map(|l| TWO_PI * l as f64 / n as f64).collect();
        return WrappedDirac::normalized(&vec![1.0; n], &angles);
    }
    let mean = s1.atan2(c1);
    if n == 1 {
        return WrappedDirac::normalized(&[1.0], &[mean]);
    }
    if n == 2 {
        let half = resultant.min(1.0).acos();
        return WrappedDirac::normalized(&[0.5, 0.5], &[mean - half, mean + half]);
    }
    let (sm, cm) = (2.0 * mean).sin_cos();
    let axial = c2 * cm + s2 * sm;
    let lattice = Lattice::new(n);
    let (weights, offsets) = match lattice.solve_exact(resultant, axial) {
        Some((alpha, inner)) => lattice.points(alpha, inner),
        None => clustered(n, resultant, axial).unwrap_or_else(|| {
            let (alpha, inner) = lattice.least_squares(resultant, axial);
            lattice.points(alpha, inner)
        }),
    };
    let angles: Vec<f64> = offsets.iter().map(|o| mean + o).collect();
    WrappedDirac::normalized(&weights, &angles)
}

/// Points stacked on three (odd `L`) or four (even `L`) locations: an inner
/// group near the mean and the remaining pairs at a common `+-alpha`. Reaches
/// any feasible `(resultant, axial)` the spread lattice cannot.
fn clustered(n: usize, resultant: f64, axial: f64) -> Option<(Vec<f64>, Vec<f64>)> {
    let k = n / 2;
    // Centre of weight 1 - u, the rest at cos(alpha) = x.
    let x = (1.0 - axial) / (2.0 * (1.0 - resultant)) - 1.0;
    let u = (1.0 - resultant) / (1.0 - x);
    let centred_ok = (-1.0..=1.0).contains(&x) && (0.0..=1.0).contains(&u);
    if n % 2 == 1 {
        if !centred_ok {
            return None;
        }
        let alpha = x.acos();
        let mut weights = vec![1.0 - u];
        let mut offsets = vec![0.0];
        for _ in 0..k {
            weights.extend([u / n.saturating_sub(1) as f64; 2]);
            offsets.extend([alpha, -alpha]);
        }
        return Some((weights, offsets));
    }

    // Even: split the centre into a pair at +-beta, shrinking beta until solvable.
    let mut beta = if centred_ok { x.acos() } else { PI } / (2 * k - 1) as f64;
    for _ in 0..60 {
        if let Some((u, x)) = solve_split(beta, resultant, axial) {
            let alpha = x.acos();
            let outer = u / (2 * (k - 1)) as f64;
            let mut weights = vec![0.5 * (1.0 - u); 2];
            let mut offsets = vec![beta, -beta];
            for _ in 1..k {
                weights.extend([outer; 2]);
                offsets.extend([alpha, -alpha]);
            }
            return Some((weights, offsets));
        }
        beta *= 0.5;
    }
    None
}

/// Outer weight `u` and outer cosine `x` for an inner pair at `+-beta`.
fn solve_split(beta: f64, resultant: f64, axial: f64) -> Option<(f64, f64)> {
    const GRID: usize = 2000;
    let (c1, c2) = (beta.cos(), (2.0 * beta).cos());
    let outer_cos = |u: f64| (resultant - (1.0 - u) * c1) / u;
    let mismatch = |u: f64| {
        let x = outer_cos(u);
        (-1.0..=1.0)
            .contains(&x)
            .then_some((1.0 - u) * c2 + u * (2.0 * x * x - 1.0) - axial)
    };
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..=GRID {
        let u = i as f64 / GRID as f64;
        let Some(f) = mismatch(u) else {
            prev = None;
            continue;
        };
        if f == 0.0 {
            return Some((u, outer_cos(u)));
        }
        if let Some((u0, f0)) = prev {
            if f0.signum() != f.signum() {
                let (mut lo, mut hi, mut flo) = (u0, u, f0);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    match mismatch(mid) {
                        Some(fm) if fm.signum() == flo.signum() => {
                            lo = mid;
                            flo = fm;
                        }
                        Some(_) => hi = mid,
                        None => break,
                    }
                }
                let u = 0.5 * (lo + hi);
                return Some((u, outer_cos(u)));
            }
        }
        prev = Some((u, f));
    }
    None
}

const LATTICE_GRID: usize = 4000;

/// Offsets `t_i` in units of `alpha` and the split between the inner group
/// and the outer points.
struct Lattice {
    /// Offsets of the inner group (a single zero, or a symmetric pair).
    inner: Vec<f64>,
    /// Offsets of the remaining points.
    outer: Vec<f64>,
}

impl Lattice {
    fn new(n: usize) -> Self {
        let k = n / 2;
        if n % 2 == 1 {
            let outer = (1..=k).flat_map(|i| [i as f64 / k as f64, -(i as f64) / k as f64]).collect();
            Self { inner: vec![0.0], outer }
        } else {
            let denom = (2 * k - 1) as f64;
            let outer = (2..=k)
                .flat_map(|i| {
                    let t = (2 * i - 1) as f64 / denom;
                    [t, -t]
                })
                .collect();
            Self {
                inner: vec![1.0 / denom, -1.0 / denom],
                outer,
            }
        }
    }

    fn group_mean(offsets: &[f64], m: f64, alpha: f64) -> f64 {
        offsets.iter().map(|t| (m * alpha * t).cos()).sum::<f64>() / offsets.len() as f64
    }

    /// Inner weight solving the first-moment equation at `alpha`.
    fn inner_weight(&self, alpha: f64, resultant: f64) -> Option<f64> {
        let g = Self::group_mean(&self.inner, 1.0, alpha);
        if self.outer.is_empty() {
            return Some(1.0);
        }
        let h = Self::group_mean(&self.outer, 1.0, alpha);
        ((g - h).abs() > 1e-14).then(|| (resultant - h) / (g - h))
    }

    fn axial(&self, alpha: f64, inner: f64) -> f64 {
        let g = Self::group_mean(&self.inner, 2.0, alpha);
        if self.outer.is_empty() {
            return g;
        }
        inner * g + (1.0 - inner) * Self::group_mean(&self.outer, 2.0, alpha)
    }

    fn first(&self, alpha: f64, inner: f64) -> f64 {
        let g = Self::group_mean(&self.inner, 1.0, alpha);
        if self.outer.is_empty() {
            return g;
        }
        inner * g + (1.0 - inner) * Self::group_mean(&self.outer, 1.0, alpha)
    }

    fn uniform_inner(&self) -> f64 {
        self.inner.len() as f64 / (self.inner.len() + self.outer.len()) as f64
    }

    fn grid() -> impl Iterator<Item = f64> {
        (1..=LATTICE_GRID).map(|i| PI * i as f64 / LATTICE_GRID as f64)
    }

    /// `(alpha, inner weight)` matching both moments exactly, preferring the
    /// inner weight closest to uniform.
    fn solve_exact(&self, resultant: f64, axial: f64) -> Option<(f64, f64)> {
        let mismatch = |alpha: f64| -> Option<f64> {
            let w = self.inner_weight(alpha, resultant)?;
            (0.0..=1.0).contains(&w).then(|| self.axial(alpha, w) - axial)
        };
        let grid: Vec<(f64, Option<f64>)> = Self::grid().map(|a| (a, mismatch(a))).collect();

        let mut roots = Vec::new();
        for pair in grid.windows(2) {
            let ((a0, Some(f0)), (a1, Some(f1))) = (pair[0], pair[1]) else {
                continue;
            };
            if f0 == 0.0 {
                roots.push(a0);
            } else if f0.signum() != f1.signum() {
                let (mut lo, mut hi, mut flo) = (a0, a1, f0);
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    match mismatch(mid) {
                        Some(fm) if fm.signum() == flo.signum() => {
                            lo = mid;
                            flo = fm;
                        }
                        Some(_) => hi = mid,
                        None => break,
                    }
                }
                roots.push(0.5 * (lo + hi));
            }
        }
        let uniform = self.uniform_inner();
        roots
            .iter()
            .filter_map(|&a| self.inner_weight(a, resultant).map(|w| (a, w)))
            .min_by(|x, y| (x.1 - uniform).abs().total_cmp(&(y.1 - uniform).abs()))
    }

    /// Closest `(alpha, inner weight)` in the least-squares sense.
    fn least_squares(&self, resultant: f64, axial: f64) -> (f64, f64) {
        let uniform = self.uniform_inner();
        let cost = |alpha: f64| {
            let w = self.inner_weight(alpha, resultant).unwrap_or(uniform).clamp(0.0, 1.0);
            let e1 = self.first(alpha, w) - resultant;
            let e2 = self.axial(alpha, w) - axial;
            (e1 * e1 + e2 * e2, w)
        };
        Self::grid()
            .map(|a| (a, cost(a)))
            .min_by(|x, y| x.1 .0.total_cmp(&y.1 .0))
            .map(|(a, (_, w))| (a, w))
            .unwrap_or((0.0, uniform))
    }

    fn points(&self, alpha: f64, inner: f64) -> (Vec<f64>, Vec<f64>) {
        let mut weights = Vec::new();
        let mut offsets = Vec::new();
        let inner_share = if self.outer.is_empty() { 1.0 } else { inner };
        for t in &self.inner {
            weights.push(inner_share / self.inner.len() as f64);
            offsets.push(alpha * t);
        }
        for t in &self.outer {
            weights.push((1.0 - inner_share) / self.outer.len() as f64);
            offsets.push(alpha * t);
        }
        (weights, offsets)
    }
}
