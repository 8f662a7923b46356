//! Adaptive Gauss-Kronrod quadrature over one period, used as the reference
//! for every density and moment integral.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::PolarParams;
use crate::moments::{CircularMoments, MomentError, TrigKind};

const TWO_PI: f64 = 2.0 * PI;

/// Kronrod abscissae on `[0, 1]`; odd indices are the 7-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for `XGK[1]`, `XGK[3]`, `XGK[5]` and the centre.
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Panels the period is split into before adapting.
const INITIAL_PANELS: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("quadrature did not converge: estimate {estimate}, error {error:e} after {subdivisions} subdivisions")]
    NotConverged {
        estimate: f64,
        error: f64,
        subdivisions: usize,
    },
    #[error("integrand is not finite at theta = {0}")]
    NonFinite(f64),
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(&'static str),
    #[error("range must be positive, got {0}")]
    NonPositiveRange(f64),
    #[error("quadrature moments are infeasible: {0}")]
    Infeasible(String),
}

/// Tolerances for the adaptive rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self, OracleError> {
        let spec = Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(OracleError::InvalidSpec("tolerances must be positive"));
        }
        if self.max_subdivisions < 10 {
            return Err(OracleError::InvalidSpec("max_subdivisions must be at least 10"));
        }
        Ok(())
    }

    fn tolerance(&self, magnitude: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * magnitude)
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    lo: f64,
    hi: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    worst: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.worst.total_cmp(&other.worst) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.worst.total_cmp(&other.worst)
    }
}

/// Vector-valued integrand evaluation, writing `dim` components.
struct Integrand<F> {
    f: F,
    dim: usize,
    evaluations: usize,
    buf: Vec<f64>,
}

impl<F: FnMut(f64, &mut [f64])> Integrand<F> {
    fn new(f: F, dim: usize) -> Self {
        Self {
            f,
            dim,
            evaluations: 0,
            buf: vec![0.0; dim],
        }
    }

    fn gk15(&mut self, lo: f64, hi: f64) -> Result<Panel, OracleError> {
        let dim = self.dim;
        let centre = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        // samples[k] holds f at centre - half*XGK[k] (left) and centre + half*XGK[k] (right).
        let mut left = vec![0.0; 7 * dim];
        let mut right = vec![0.0; 7 * dim];
        let mut mid = vec![0.0; dim];
        self.eval(centre, &mut mid)?;
        for k in 0..7 {
            let dx = half * XGK[k];
            self.eval(centre - dx, &mut left[k * dim..(k + 1) * dim])?;
            self.eval(centre + dx, &mut right[k * dim..(k + 1) * dim])?;
        }

        let mut values = vec![0.0; dim];
        let mut errors = vec![0.0; dim];
        for c in 0..dim {
            let fc = mid[c];
            let mut kronrod = WGK[7] * fc;
            let mut gauss = WG[3] * fc;
            let mut abs_sum = WGK[7] * fc.abs();
            for k in 0..7 {
                let (fl, fr) = (left[k * dim + c], right[k * dim + c]);
                kronrod += WGK[k] * (fl + fr);
                abs_sum += WGK[k] * (fl.abs() + fr.abs());
                if k % 2 == 1 {
                    gauss += WG[k / 2] * (fl + fr);
                }
            }
            let mean = 0.5 * kronrod;
            let mut asc = WGK[7] * (fc - mean).abs();
            for k in 0..7 {
                asc += WGK[k] * ((left[k * dim + c] - mean).abs() + (right[k * dim + c] - mean).abs());
            }
            let result = kronrod * half;
            let res_abs = abs_sum * half.abs();
            let res_asc = asc * half.abs();
            let mut err = ((kronrod - gauss) * half).abs();
            if res_asc != 0.0 && err != 0.0 {
                err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
            }
            if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
                err = err.max(50.0 * f64::EPSILON * res_abs);
            }
            values[c] = result;
            errors[c] = err;
        }
        let worst = errors.iter().copied().fold(0.0, f64::max);
        Ok(Panel {
            lo,
            hi,
            values,
            errors,
            worst,
        })
    }

    fn eval(&mut self, theta: f64, out: &mut [f64]) -> Result<(), OracleError> {
        (self.f)(theta, &mut self.buf);
        self.evaluations += 1;
        if self.buf.iter().any(|v| !v.is_finite()) {
            return Err(OracleError::NonFinite(theta));
        }
        out.copy_from_slice(&self.buf);
        Ok(())
    }
}

struct VectorEstimate {
    values: Vec<f64>,
    errors: Vec<f64>,
    evaluations: usize,
}

/// Adaptive integration of a vector integrand over `[0, 2 pi]`. Every
/// component must meet `max(abs_tol, rel_tol * max_c |I_c|)`.
fn adaptive_period<F: FnMut(f64, &mut [f64])>(
    f: F,
    dim: usize,
    breakpoints: &[f64],
    spec: &QuadratureSpec,
) -> Result<VectorEstimate, OracleError> {
    spec.validate()?;
    let mut edges: Vec<f64> = (0..=INITIAL_PANELS)
        .map(|i| TWO_PI * i as f64 / INITIAL_PANELS as f64)
        .collect();
    edges.extend(breakpoints.iter().map(|b| b.rem_euclid(TWO_PI)));
    edges.sort_by(f64::total_cmp);
    edges.dedup_by(|a, b| (*a - *b).abs() < 1e-9);

    let mut integrand = Integrand::new(f, dim);
    let mut heap = BinaryHeap::new();
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for pair in edges.windows(2) {
        let panel = integrand.gk15(pair[0], pair[1])?;
        add(&mut values, &mut errors, &panel, 1.0);
        heap.push(panel);
    }

    loop {
        let magnitude = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let worst_total = errors.iter().copied().fold(0.0, f64::max);
        if worst_total <= spec.tolerance(magnitude) {
            break;
        }
        let stalled = heap
            .peek()
            .is_none_or(|p| (p.hi - p.lo) < 64.0 * f64::EPSILON * TWO_PI);
        if heap.len() >= spec.max_subdivisions || stalled {
            return Err(OracleError::NotConverged {
                estimate: values[0],
                error: worst_total,
                subdivisions: heap.len(),
            });
        }
        let panel = heap.pop().expect("heap is non-empty");
        add(&mut values, &mut errors, &panel, -1.0);
        let mid = 0.5 * (panel.lo + panel.hi);
        for child in [integrand.gk15(panel.lo, mid)?, integrand.gk15(mid, panel.hi)?] {
            add(&mut values, &mut errors, &child, 1.0);
            heap.push(child);
        }
    }

    // Re-sum from the panels to drop the drift of the running totals.
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for panel in heap.iter() {
        add(&mut values, &mut errors, panel, 1.0);
    }
    Ok(VectorEstimate {
        values,
        errors,
        evaluations: integrand.evaluations,
    })
}

fn add(values: &mut [f64], errors: &mut [f64], panel: &Panel, sign: f64) {
    for c in 0..values.len() {
        values[c] += sign * panel.values[c];
        errors[c] = (errors[c] + sign * panel.errors[c]).max(0.0);
    }
}

/// Integral of `f` over `[0, 2 pi]`.
pub fn quad_periodic(
    mut f: impl FnMut(f64) -> f64,
    spec: &QuadratureSpec,
) -> Result<QuadEstimate, OracleError> {
    let est = adaptive_period(|t, out: &mut [f64]| out[0] = f(t), 1, &[], spec)?;
    Ok(QuadEstimate {
        value: est.values[0],
        error: est.errors[0],
        evaluations: est.evaluations,
    })
}

/// Azimuth-dependent exponent written directly from the Cartesian quadratic
/// form, independent of the polar parametrization used by the series.
#[derive(Debug, Clone, Copy)]
struct CartesianExponent {
    lin_x: f64,
    lin_y: f64,
    cos2: f64,
    sin2: f64,
}

impl CartesianExponent {
    fn new(pp: &PolarParams, range: f64) -> Self {
        let r2 = range * range;
        Self {
            lin_x: range * pp.info_mean_x,
            lin_y: range * pp.info_mean_y,
            cos2: -0.25 * r2 * (pp.info_xx - pp.info_yy),
            sin2: -0.5 * r2 * pp.info_xy,
        }
    }

    fn value(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let (s2, c2) = (2.0 * t).sin_cos();
        self.lin_x * c + self.lin_y * s + self.cos2 * c2 + self.sin2 * s2
    }

    fn slope(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let (s2, c2) = (2.0 * t).sin_cos();
        -self.lin_x * s + self.lin_y * c - 2.0 * self.cos2 * s2 + 2.0 * self.sin2 * c2
    }

    fn curvature(&self, t: f64) -> f64 {
        let (s, c) = t.sin_cos();
        let (s2, c2) = (2.0 * t).sin_cos();
        -self.lin_x * c - self.lin_y * s - 4.0 * self.cos2 * c2 - 4.0 * self.sin2 * s2
    }

    /// Local maxima, refined by Newton steps from a coarse grid.
    fn modes(&self) -> Vec<f64> {
        const GRID: usize = 360;
        let step = TWO_PI / GRID as f64;
        let grid: Vec<f64> = (0..GRID).map(|i| self.value(i as f64 * step)).collect();
        let mut modes = Vec::new();
        for i in 0..GRID {
            let prev = grid[(i + GRID - 1) % GRID];
            let next = grid[(i + 1) % GRID];
            if grid[i] >= prev && grid[i] >= next {
                modes.push(self.refine(i as f64 * step, step));
            }
        }
        modes
    }

    fn refine(&self, start: f64, step: f64) -> f64 {
        let mut t = start;
        for _ in 0..50 {
            let curv = self.curvature(t);
            if !(curv < 0.0) {
                return start;
            }
            let delta = -self.slope(t) / curv;
            t += delta.clamp(-step, step);
            if delta.abs() < 1e-15 {
                break;
            }
        }
        if self.value(t) >= self.value(start) {
            t
        } else {
            start
        }
    }
}

fn check_range(range: f64) -> Result<(), OracleError> {
    if range > 0.0 && range.is_finite() {
        Ok(())
    } else {
        Err(OracleError::NonPositiveRange(range))
    }
}

/// Normalizer and raw trigonometric integrals for orders `1..=max_order`,
/// with the exponent shifted so its maximum is zero.
fn shifted_integrals(
    pp: &PolarParams,
    range: f64,
    max_order: usize,
    spec: &QuadratureSpec,
) -> Result<VectorEstimate, OracleError> {
    check_range(range)?;
    let expo = CartesianExponent::new(pp, range);
    let modes = expo.modes();
    let peak = modes.iter().map(|&t| expo.value(t)).fold(f64::NEG_INFINITY, f64::max);
    let dim = 1 + 2 * max_order;
    let integrand = |t: f64, out: &mut [f64]| {
        let weight = (expo.value(t) - peak).exp();
        out[0] = weight;
        let (s1, c1) = t.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        for m in 0..max_order {
            (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
            out[1 + 2 * m] = weight * c;
            out[2 + 2 * m] = weight * s;
        }
    };
    adaptive_period(integrand, dim, &modes, spec)
}

/// `E[cos m theta | r]` or `E[sin m theta | r]` by quadrature.
pub fn quad_moment(
    m: usize,
    kind: TrigKind,
    pp: &PolarParams,
    range: f64,
    spec: &QuadratureSpec,
) -> Result<f64, OracleError> {
    if m == 0 {
        // Still integrate, so invalid inputs are reported.
        shifted_integrals(pp, range, 0, spec)?;
        return Ok(match kind {
            TrigKind::Cos => 1.0,
            TrigKind::Sin => 0.0,
        });
    }
    // Only order m is needed; integrate cos(m t), sin(m t) directly.
    check_range(range)?;
    let expo = CartesianExponent::new(pp, range);
    let modes = expo.modes();
    let peak = modes.iter().map(|&t| expo.value(t)).fold(f64::NEG_INFINITY, f64::max);
    let order = m as f64;
    let integrand = |t: f64, out: &mut [f64]| {
        let weight = (expo.value(t) - peak).exp();
        out[0] = weight;
        out[1] = weight
            * match kind {
                TrigKind::Cos => (order * t).cos(),
                TrigKind::Sin => (order * t).sin(),
            };
    };
    let est = adaptive_period(integrand, 2, &modes, spec)?;
    Ok(est.values[1] / est.values[0])
}

/// All moments up to `max_order` from one adaptive pass.
pub fn quad_moments(
    pp: &PolarParams,
    range: f64,
    max_order: usize,
    spec: &QuadratureSpec,
) -> Result<CircularMoments, OracleError> {
    let est = shifted_integrals(pp, range, max_order, spec)?;
    let norm = est.values[0];
    let pairs = (0..max_order)
        .map(|m| (est.values[1 + 2 * m] / norm, est.values[2 + 2 * m] / norm))
        .collect();
    CircularMoments::from_pairs(range, None, pairs).map_err(|e| match e {
        MomentError::Infeasible { order, length } => {
            OracleError::Infeasible(format!("order {order} resultant {length}"))
        }
        other => OracleError::Infeasible(other.to_string()),
    })
}

/// `ln` of the azimuth normalizer by quadrature.
pub fn quad_log_normalizer(
    pp: &PolarParams,
    range: f64,
    spec: &QuadratureSpec,
) -> Result<f64, OracleError> {
    check_range(range)?;
    let expo = CartesianExponent::new(pp, range);
    let modes = expo.modes();
    let peak = modes.iter().map(|&t| expo.value(t)).fold(f64::NEG_INFINITY, f64::max);
    let est = adaptive_period(|t, out: &mut [f64]| out[0] = (expo.value(t) - peak).exp(), 1, &modes, spec)?;
    // The Cartesian exponent differs from the polar one by a constant.
    let offset = pp.exponent(0.0, range) - expo.value(0.0);
    Ok(est.values[0].ln() + peak + offset)
}
