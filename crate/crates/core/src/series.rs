//! Bessel-product series shared by the range density normalizer and the
//! circular moments.
//!
//! All sums are carried normalized by `I_0(A3 r^2) I_0(D r)`; the scale is
//! kept separately as a logarithm.

use std::f64::consts::PI;

use crate::density::PolarParams;
use crate::special::{bessel_i0_scaled, bessel_ratio, bessel_ratios, BesselRegime};

#[derive(Debug, Clone)]
pub(crate) struct BesselSeries {
    n_terms: usize,
    psi: f64,
    half_phase: f64,
    /// `I_j(A3 r^2) / I_0(A3 r^2)` for `j = 0..=n_terms + 1`.
    quad_ratios: Vec<f64>,
    /// `I_n(D r) / I_0(D r)` for `n = 0..=2 (n_terms + 1) + max_order`.
    lin_ratios: Vec<f64>,
    /// `ln I_0(A3 r^2) + ln I_0(D r)`.
    log_scale: f64,
}

impl BesselSeries {
    /// Series for moments up to `max_order`. With a regime, large-argument
    /// ratios are replaced by `exp(-n^2/2x)` wherever the regime allows it.
    pub(crate) fn new(
        pp: &PolarParams,
        range: f64,
        n_terms: usize,
        max_order: usize,
        regime: Option<&BesselRegime>,
    ) -> Self {
        let quad_arg = pp.quadratic_gain * range * range;
        let lin_arg = pp.rotated_gain * range;
        let quad_top = n_terms + 1;
        let lin_top = 2 * (n_terms + 1) + max_order;
        Self {
            n_terms,
            psi: pp.rotated_phase,
            half_phase: 0.5 * pp.quadratic_phase,
            quad_ratios: ratios(quad_top, quad_arg, regime),
            lin_ratios: ratios(lin_top, lin_arg, regime),
            log_scale: log_i0(quad_arg) + log_i0(lin_arg),
        }
    }

    pub(crate) fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub(crate) fn log_scale(&self) -> f64 {
        self.log_scale
    }

    fn lin(&self, order: i64) -> f64 {
        self.lin_ratios[order.unsigned_abs() as usize]
    }

    fn delta_term(&self, j: usize) -> f64 {
        let jj = j as f64;
        2.0 * self.quad_ratios[j] * self.lin_ratios[2 * j] * (2.0 * jj * self.psi).cos()
    }

    /// `Delta / (2 pi I_0 I_0)`: `1 + 2 sum_j rho_j(A3 r^2) rho_2j(D r) cos(2 j psi)`.
    pub(crate) fn normalizer(&self) -> f64 {
        1.0 + (1..=self.n_terms).map(|j| self.delta_term(j)).sum::<f64>()
    }

    /// `ln Delta`, or `None` when the truncated normalizer is not positive.
    pub(crate) fn log_normalizer(&self) -> Option<f64> {
        let n = self.normalizer();
        (n > 0.0).then(|| (2.0 * PI).ln() + self.log_scale + n.ln())
    }

    /// Sum of absolute normalizer terms; large values relative to the
    /// normalizer itself indicate cancellation.
    pub(crate) fn normalizer_abs_sum(&self) -> f64 {
        1.0 + (1..=self.n_terms).map(|j| self.delta_term(j).abs()).sum::<f64>()
    }

    fn diag_term(&self, m: usize, j: usize) -> (f64, f64) {
        let m = m as i64;
        let j = j as i64;
        let plus = 2 * j + m;
        let minus = 2 * j - m;
        let weight = self.quad_ratios[j as usize];
        let (sp, cp) = (plus as f64 * self.psi).sin_cos();
        let (sm, cm) = (minus as f64 * self.psi).sin_cos();
        (
            weight * (self.lin(plus) * cp + self.lin(minus) * cm),
            weight * (self.lin(plus) * sp - self.lin(minus) * sm),
        )
    }

    /// Diagonal-case cosine and sine integrals, normalized by
    /// `2 pi I_0(A3 r^2) I_0(D r)`.
    pub(crate) fn diag(&self, m: usize) -> (f64, f64) {
        let (s, c) = (m as f64 * self.psi).sin_cos();
        let lead = self.lin(m as i64);
        let mut cos_sum = lead * c;
        let mut sin_sum = lead * s;
        for j in 1..=self.n_terms {
            let (tc, ts) = self.diag_term(m, j);
            cos_sum += tc;
            sin_sum += ts;
        }
        (cos_sum, sin_sum)
    }

    /// Unnormalized circular moment numerators rotated back by `m phi2 / 2`.
    pub(crate) fn rotated(&self, m: usize) -> (f64, f64) {
        if m == 0 {
            return (self.normalizer(), 0.0);
        }
        let (dc, ds) = self.diag(m);
        let (s, c) = (m as f64 * self.half_phase).sin_cos();
        (c * dc + s * ds, c * ds - s * dc)
    }

    /// Size of the first omitted term (index `n_terms + 1`) across the
    /// normalizer and the order-`m` numerators.
    pub(crate) fn first_omitted(&self, max_order: usize) -> f64 {
        let j = self.n_terms + 1;
        let mut worst = self.delta_term(j).abs();
        for m in 1..=max_order {
            let (tc, ts) = self.diag_term(m, j);
            worst = worst.max(tc.abs()).max(ts.abs());
        }
        worst
    }
}

fn log_i0(x: f64) -> f64 {
    bessel_i0_scaled(x).ln() + x
}

fn ratios(top: usize, x: f64, regime: Option<&BesselRegime>) -> Vec<f64> {
    if let Some(regime) = regime {
        // Validity is monotone in the order, so checking the top one suffices.
        if top > 0 && regime.approximation_valid(top as u32, x) {
            return (0..=top).map(|n| bessel_ratio(n as u32, x)).collect();
        }
    }
    let mut exact = bessel_ratios(top, x);
    if let Some(regime) = regime {
        for (n, value) in exact.iter_mut().enumerate() {
            if regime.approximation_valid(n as u32, x) {
                *value = bessel_ratio(n as u32, x);
            }
        }
    }
    exact
}
