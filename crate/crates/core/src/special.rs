//! Modified Bessel functions of the first kind, integer order.
//!
//! Everything here is assembled from two primitives: the exponentially scaled
//! `e^{-x} I_0(x)` and the successive ratios `I_n(x) / I_{n-1}(x)`. Values,
//! logarithms and order ratios are products of those, so nothing overflows
//! until a caller explicitly asks for an unscaled value.

use std::f64::consts::PI;

use thiserror::Error;

/// Below this argument `e^{-x} I_0(x)` is summed from the power series, above
/// it from the large-argument expansion.
const I0_SERIES_LIMIT: f64 = 30.0;

/// Arguments above this use the Hankel expansion for order ratios instead of
/// backward recurrence, whose cost grows like `sqrt(x)`.
const HANKEL_MIN_ARG: f64 = 1.0e7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BesselError {
    #[error("I_{order}({x}) exceeds the f64 range; use the log-domain variant")]
    Overflow { order: u32, x: f64 },
    #[error("Bessel argument must be finite and non-negative, got {0}")]
    InvalidArgument(f64),
    #[error("invalid Bessel regime: {0}")]
    InvalidRegime(&'static str),
}

/// Switching thresholds for approximate Bessel ratios.
///
/// `threshold_direct` is the argument up to which exact ratios are always
/// used. Above it, `I_n(x)/I_0(x)` may be replaced by `exp(-n^2 / 2x)` for
/// every order with `x >= threshold_ratio_validity * n^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselRegime {
    pub threshold_direct: f64,
    pub threshold_ratio_validity: f64,
}

impl Default for BesselRegime {
    fn default() -> Self {
        Self {
            threshold_direct: 700.0,
            threshold_ratio_validity: 100.0,
        }
    }
}

impl BesselRegime {
    pub fn new(threshold_direct: f64, threshold_ratio_validity: f64) -> Result<Self, BesselError> {
        if !(threshold_direct > 0.0) || !threshold_direct.is_finite() {
            return Err(BesselError::InvalidRegime("threshold_direct must be positive"));
        }
        if !(threshold_ratio_validity >= 10.0) {
            return Err(BesselError::InvalidRegime(
                "threshold_ratio_validity must be at least 10",
            ));
        }
        Ok(Self {
            threshold_direct,
            threshold_ratio_validity,
        })
    }

    /// Whether `bessel_ratio(order, x)` may stand in for the exact ratio.
    pub fn approximation_valid(&self, order: u32, x: f64) -> bool {
        let n = f64::from(order);
        order > 0 && x > self.threshold_direct && x >= self.threshold_ratio_validity * n * n
    }
}

/// `e^{-x} I_0(x)` for `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> f64 {
    let x = x.abs();
    if x <= I0_SERIES_LIMIT {
        let quarter_sq = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= quarter_sq / (k * k);
            sum += term;
            if term <= sum * 0.5 * f64::EPSILON {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // All terms of the expansion are positive for order zero.
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let odd = 2.0 * k - 1.0;
            let next = term * odd * odd / (8.0 * k * x);
            if next <= sum * 0.5 * f64::EPSILON || next >= term {
                break;
            }
            term = next;
            sum += term;
            k += 1.0;
        }
        sum / (2.0 * PI * x).sqrt()
    }
}

/// Successive ratios `I_k(x) / I_{k-1}(x)` for `k = 1..=max_order`.
fn successive_ratios(max_order: usize, x: f64) -> Vec<f64> {
    if max_order == 0 {
        return Vec::new();
    }
    if x == 0.0 {
        return vec![0.0; max_order];
    }
    let top = max_order as f64;
    if x >= HANKEL_MIN_ARG && 100.0 * top * top <= x {
        let sums: Vec<f64> = (0..=max_order).map(|n| hankel_sum(n as f64, x)).collect();
        return sums.windows(2).map(|w| w[1] / w[0]).collect();
    }
    // Backward recurrence I_{k-1} = (2k/x) I_k + I_{k+1}, seeded far enough
    // above `max_order` that the dominant solution has died out.
    let start = max_order + 20 + (6.0 * x.sqrt()).ceil() as usize;
    let nu = (start + 1) as f64;
    let mut ratio = x / (nu + (nu * nu + x * x).sqrt());
    let mut out = vec![0.0; max_order];
    for k in (1..=start).rev() {
        ratio = x / (2.0 * k as f64 + x * ratio);
        if k <= max_order {
            out[k - 1] = ratio;
        }
    }
    out
}

/// `sqrt(2 pi x) e^{-x} I_order(x)` from the Hankel expansion (large `x`).
fn hankel_sum(order: f64, x: f64) -> f64 {
    let mu = 4.0 * order * order;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..64 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (8.0 * k as f64 * x);
        sum += term;
        if term.abs() <= sum.abs() * 0.5 * f64::EPSILON {
            break;
        }
    }
    sum
}

/// Exact ratios `I_n(x) / I_0(x)` for `n = 0..=max_order`.
///
/// Tiny ratios underflow to zero, which is harmless for series weights.
pub fn bessel_ratios(max_order: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(1.0);
    let mut acc = 1.0;
    for r in successive_ratios(max_order, x) {
        acc *= r;
        out.push(acc);
    }
    out
}

/// `ln(I_n(x) / I_0(x))` for `n = 0..=max_order`.
pub fn log_bessel_ratios(max_order: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max_order + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for r in successive_ratios(max_order, x) {
        acc += r.ln();
        out.push(acc);
    }
    out
}

/// `ln I_order(x)`. Returns NaN for negative or NaN arguments.
pub fn log_bessel_i(order: u32, x: f64) -> f64 {
    if x.is_nan() || x < 0.0 {
        return f64::NAN;
    }
    if x == f64::INFINITY {
        return f64::INFINITY;
    }
    if x == 0.0 {
        return if order == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let log_ratio = log_bessel_ratios(order as usize, x)[order as usize];
    bessel_i0_scaled(x).ln() + x + log_ratio
}

/// `I_order(x)`, or [`BesselError::Overflow`] when the value is not
/// representable as an `f64`.
pub fn bessel_i(order: u32, x: f64) -> Result<f64, BesselError> {
    if !x.is_finite() || x < 0.0 {
        return Err(BesselError::InvalidArgument(x));
    }
    if x <= 700.0 {
        let ratio = bessel_ratios(order as usize, x)[order as usize];
        return Ok(bessel_i0_scaled(x) * x.exp() * ratio);
    }
    let log_value = log_bessel_i(order, x);
    if log_value >= f64::MAX.ln() {
        return Err(BesselError::Overflow { order, x });
    }
    Ok(log_value.exp())
}

/// Large-argument approximation `I_N(x) / I_0(x) ~ exp(-N^2 / 2x)`.
///
/// Relative error is of order `N^4 / x^2`; only meaningful for `x >> N^2`.
pub fn bessel_ratio(order: u32, x: f64) -> f64 {
    let n = f64::from(order);
    (-(n * n) / (2.0 * x)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Direct power series sum_k (x/2)^{2k+n} / (k! (k+n)!).
    fn power_series(order: u32, x: f64) -> f64 {
        let half = 0.5 * x;
        let mut term = 1.0;
        for k in 1..=order {
            term *= half / f64::from(k);
        }
        let mut sum = term;
        let n = f64::from(order);
        let mut k = 1.0;
        loop {
            term *= half * half / (k * (k + n));
            sum += term;
            if term < sum * 1e-18 {
                break;
            }
            k += 1.0;
        }
        sum
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_i(7, 0.0).unwrap(), 0.0);
        assert_eq!(log_bessel_i(0, 0.0), 0.0);
    }

    #[test]
    fn matches_power_series() {
        assert_relative_eq!(bessel_i(0, 2.0).unwrap(), power_series(0, 2.0), max_relative = 1e-13);
        // 2.2795853023360673 from tables of I_0(2).
        assert_relative_eq!(bessel_i(0, 2.0).unwrap(), 2.2795853023360673, max_relative = 1e-14);
        for &order in &[0u32, 1, 2, 5, 13, 30] {
            for &x in &[1e-3, 0.1, 1.0, 7.5, 29.0, 31.0, 45.0] {
                let expected = power_series(order, x);
                assert_relative_eq!(bessel_i(order, x).unwrap(), expected, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn log_domain_beyond_overflow() {
        assert!(matches!(bessel_i(0, 800.0), Err(BesselError::Overflow { .. })));
        // ln I_0(x) ~ x - ln(2 pi x)/2 + ln(1 + 1/(8x) + 9/(128x^2) + 225/(3072x^3))
        let x = 700.0_f64;
        let series = 1.0 + 1.0 / (8.0 * x) + 9.0 / (128.0 * x * x) + 225.0 / (3072.0 * x.powi(3));
        let expected = x - 0.5 * (2.0 * PI * x).ln() + series.ln();
        let got = log_bessel_i(0, 700.0);
        assert!(got.is_finite());
        assert_relative_eq!(got, expected, max_relative = 1e-14);
        assert_relative_eq!(
            log_bessel_i(2, 50.0),
            bessel_i(2, 50.0).unwrap().ln(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn ratio_approximation_examples() {
        assert_eq!(bessel_ratio(0, 3.0), 1.0);
        assert_eq!(bessel_ratio(2, 1e6), (-2e-6_f64).exp());
        let exact = (log_bessel_i(3, 1e4) - log_bessel_i(0, 1e4)).exp();
        assert_relative_eq!(bessel_ratio(3, 1e4), exact, max_relative = 1e-5);
    }

    #[test]
    fn hankel_and_recurrence_agree() {
        let x = 2.0e7;
        let direct = bessel_ratios(40, x);
        let start = 40 + 20 + (6.0 * x.sqrt()).ceil() as usize;
        let nu = (start + 1) as f64;
        let mut ratio = x / (nu + (nu * nu + x * x).sqrt());
        let mut successive = vec![0.0; 40];
        for k in (1..=start).rev() {
            ratio = x / (2.0 * k as f64 + x * ratio);
            if k <= 40 {
                successive[k - 1] = ratio;
            }
        }
        let mut acc = 1.0;
        for (n, r) in successive.iter().enumerate() {
            acc *= r;
            assert_relative_eq!(direct[n + 1], acc, max_relative = 1e-12);
        }
    }

    #[test]
    fn regime_validation() {
        assert!(BesselRegime::new(0.0, 100.0).is_err());
        assert!(BesselRegime::new(10.0, 5.0).is_err());
        let regime = BesselRegime::default();
        assert!(!regime.approximation_valid(0, 1e6));
        assert!(regime.approximation_valid(3, 1e4));
        assert!(!regime.approximation_valid(20, 1e4));
    }

    #[test]
    fn approximation_error_bound() {
        let regime = BesselRegime::default();
        for order in 1..=30u32 {
            for factor in [100.0, 150.0, 400.0, 1e3] {
                let x = factor * f64::from(order * order);
                let x = x.max(regime.threshold_direct + 1.0);
                let exact = bessel_ratios(order as usize, x)[order as usize];
                let rel = (bessel_ratio(order, x) / exact - 1.0).abs();
                assert!(rel < 1e-4, "order {order}, x {x}: {rel}");
            }
        }
    }

    proptest! {
        #[test]
        fn non_negative_and_order_monotone(order in 0u32..50, x in 0.0f64..500.0) {
            let lower = bessel_i(order, x).unwrap();
            let upper = bessel_i(order + 1, x).unwrap();
            prop_assert!(lower >= 0.0);
            prop_assert!(upper >= 0.0);
            if x > 0.0 {
                prop_assert!(upper <= lower);
            }
        }

        #[test]
        fn recurrence_residual(order in 1u32..=30, x in 0.1f64..100.0) {
            let below = bessel_i(order - 1, x).unwrap();
            let mid = bessel_i(order, x).unwrap();
            let above = bessel_i(order + 1, x).unwrap();
            let residual = (below - above - 2.0 * f64::from(order) / x * mid).abs();
            prop_assert!(residual < 1e-9 * below, "residual {}", residual);
        }

        #[test]
        fn monotone_in_argument(order in 0u32..20, x in 0.0f64..600.0, dx in 1e-3f64..5.0) {
            prop_assert!(bessel_i(order, x + dx).unwrap() >= bessel_i(order, x).unwrap());
        }

        #[test]
        fn log_and_direct_agree(order in 0u32..40, x in 1e-3f64..650.0) {
            let direct = bessel_i(order, x).unwrap();
            prop_assume!(direct > 1e-250);
            let rel = (log_bessel_i(order, x).exp() / direct - 1.0).abs();
            prop_assert!(rel < 1e-11, "rel {}", rel);
        }
    }
}
