use nalgebra::{Matrix4, Vector4};

use super::MotionModel;

fn invert_information(info: &Matrix4<f64>, step: usize) -> Matrix4<f64> {
    if let Some(chol) = info.cholesky() {
        return chol.inverse();
    }
    log::warn!("information matrix at step {step} is singular; using the pseudo-inverse");
    info.pseudo_inverse(1e-12).unwrap_or_else(|_| Matrix4::zeros())
}

/// Posterior Cramer-Rao information recursion for range measurements.
///
/// `truths[run][k]` is the true relative state of run `run` at step `k`.
/// Step 0 carries `initial` and no range information; every later step adds
/// the run-averaged `h h^T / sigma_r^2` with `h = (x, y, 0, 0) / |(x, y)|`.
/// An infinite `sigma_r` gives the prediction-only bound.
pub fn crlb_recursion(
    truths: &[Vec<Vector4<f64>>],
    model: &MotionModel,
    sigma_r: f64,
    initial: &Matrix4<f64>,
) -> Vec<Matrix4<f64>> {
    let steps = truths.iter().map(Vec::len).min().unwrap_or(0);
    let mut out = Vec::with_capacity(steps.max(1));
    out.push(*initial);
    let var = sigma_r * sigma_r;
    let f = &model.transition;
    for k in 1..steps {
        let prev_cov = invert_information(&out[k - 1], k - 1);
        let predicted = model.process_noise + f * prev_cov * f.transpose();
        let mut info = invert_information(&predicted, k);
        if var.is_finite() {
            let mut meas = Matrix4::zeros();
            for run in truths {
                let pos = run[k].fixed_rows::<2>(0);
                let rho = pos.norm();
                if rho > 0.0 {
                    let h = Vector4::new(pos[0] / rho, pos[1] / rho, 0.0, 0.0);
                    meas += h * h.transpose();
                }
            }
            info += meas / (var * truths.len() as f64);
        }
        out.push(0.5 * (info + info.transpose()));
    }
    out
}

/// `(position bound, velocity bound)`: square roots of the traces of the
/// position and velocity blocks of `J^-1`.
pub fn crlb_bounds(info: &Matrix4<f64>) -> (f64, f64) {
    let cov = invert_information(info, 0);
    let pos = (cov[(0, 0)] + cov[(1, 1)]).max(0.0).sqrt();
    let vel = (cov[(2, 2)] + cov[(3, 3)]).max(0.0).sqrt();
    (pos, vel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circling(steps: usize, radius: f64) -> Vec<Vector4<f64>> {
        (0..steps)
            .map(|k| {
                let a = 0.2 * k as f64;
                Vector4::new(radius * a.cos(), radius * a.sin(), 0.0, 0.0)
            })
            .collect()
    }

    #[test]
    fn prediction_only_bound_grows() {
        let model = MotionModel::ncv(60.0, 1e-3).unwrap();
        let truths = vec![circling(10, 1000.0)];
        let info = crlb_recursion(&truths, &model, f64::INFINITY, &Matrix4::identity());
        let bounds: Vec<f64> = info.iter().map(|j| crlb_bounds(j).0).collect();
        for pair in bounds.windows(2) {
            assert!(pair[1] > pair[0]);
        }
    }

    #[test]
    fn precise_ranges_pin_position() {
        let model = MotionModel::ncv(60.0, 1e-14).unwrap();
        let truths = vec![circling(31, 1000.0)];
        let initial = Matrix4::from_diagonal(&Vector4::new(1e-4, 1e-4, 1.0, 1.0));
        let info = crlb_recursion(&truths, &model, 1e-3, &initial);
        let (pos, _) = crlb_bounds(info.last().unwrap());
        assert!(pos < 0.1, "{pos}");
    }

    #[test]
    fn singular_information_uses_pseudo_inverse() {
        let model = MotionModel::ncv(1.0, 0.0).unwrap();
        let truths = vec![circling(3, 10.0)];
        let info = crlb_recursion(&truths, &model, 1.0, &Matrix4::zeros());
        assert_eq!(info.len(), 3);
        assert!(info.iter().all(|j| j.iter().all(|v| v.is_finite())));
    }
}
