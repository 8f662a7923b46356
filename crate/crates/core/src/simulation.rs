//! Maneuvering-observer range-only scenario and the Monte-Carlo harness.

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::filter::{
    crlb_bounds, crlb_recursion, ekf_update, predict, proposed_update, ukf_update, FilterError, GaussianState,
    MotionModel, ProposedConfig, SamplerSource, UkfParams,
};
use crate::moments::{MomentPolicy, MomentSettings, MomentSource};
use crate::sampling::FitConfig;

pub const KNOT: f64 = 0.514444;

/// Fraction of failed runs above which the study is rejected.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("{filter} failed in {failed} of {runs} runs")]
    TooManyFailures { filter: FilterKind, failed: usize, runs: usize },
    #[error(transparent)]
    Filter(#[from] FilterError),
}

/// Scenario and filter settings. Angles are in degrees counter-clockwise
/// from the x axis, speeds in knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Sampling period in seconds.
    pub period: f64,
    /// Number of measurement steps after the initial one.
    pub steps: usize,
    pub target_position: [f64; 2],
    pub target_heading_deg: f64,
    pub target_speed_kn: f64,
    pub observer_speed_kn: f64,
    pub observer_heading_initial_deg: f64,
    pub observer_heading_final_deg: f64,
    /// Time of the observer's heading change.
    pub maneuver_minutes: f64,
    pub q_tilde: f64,
    pub sigma_r: f64,
    /// Standard deviation of the one azimuth used to build the prior.
    pub sigma_theta_deg: f64,
    pub n_terms: usize,
    pub max_order: usize,
    pub components: usize,
    pub runs: usize,
    pub seed: u64,
    pub fit_restarts: usize,
    pub moment_policy: MomentPolicy,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            period: 60.0,
            steps: 30,
            target_position: [7072.1, 7072.1],
            target_heading_deg: 225.0,
            target_speed_kn: 15.0,
            observer_speed_kn: 5.0,
            observer_heading_initial_deg: 170.0,
            observer_heading_final_deg: 304.0,
            maneuver_minutes: 15.0,
            q_tilde: 1e-3,
            sigma_r: 10.0,
            sigma_theta_deg: 1.0,
            n_terms: 5,
            max_order: 10,
            components: 8,
            runs: 100,
            seed: 0,
            fit_restarts: 4,
            moment_policy: MomentPolicy::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |msg: &str| Err(SimulationError::InvalidConfig(msg.to_owned()));
        let positive = [
            ("period", self.period),
            ("target_speed_kn", self.target_speed_kn),
            ("sigma_r", self.sigma_r),
            ("sigma_theta_deg", self.sigma_theta_deg),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive"));
            }
        }
        if !(self.q_tilde >= 0.0 && self.observer_speed_kn >= 0.0 && self.maneuver_minutes >= 0.0) {
            return bad("q_tilde, observer_speed_kn and maneuver_minutes must be non-negative");
        }
        if self.steps == 0 || self.runs == 0 || self.components == 0 || self.max_order == 0 {
            return bad("steps, runs, components and max_order must be at least 1");
        }
        if self.maneuver_step() >= self.steps {
            return bad("maneuver must happen before the last step");
        }
        if Vector2::from(self.target_position).norm() == 0.0 {
            return bad("target must not start at the observer");
        }
        Ok(())
    }

    /// Last step flown on the initial heading.
    pub fn maneuver_step(&self) -> usize {
        (self.maneuver_minutes * 60.0 / self.period).round() as usize
    }

    pub fn motion_model(&self) -> Result<MotionModel, FilterError> {
        MotionModel::ncv(self.period, self.q_tilde)
    }

    pub fn proposed_config(&self, run: usize) -> ProposedConfig {
        ProposedConfig {
            sigma_r: self.sigma_r,
            moments: MomentSettings {
                n_terms: self.n_terms,
                max_order: self.max_order,
                policy: self.moment_policy,
                ..MomentSettings::default()
            },
            components: self.components,
            fit: FitConfig {
                restarts: self.fit_restarts,
                seed: self.seed.wrapping_add(run as u64),
                ..FitConfig::default()
            },
            ..ProposedConfig::default()
        }
    }

    fn velocity(speed_kn: f64, heading_deg: f64) -> Vector2<f64> {
        let (s, c) = heading_deg.to_radians().sin_cos();
        speed_kn * KNOT * Vector2::new(c, s)
    }
}

/// One noise realization of the scenario, indexed by step `0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// Target state relative to the observer.
    pub truth: Vec<Vector4<f64>>,
    pub observer: Vec<Vector4<f64>>,
    pub ranges: Vec<f64>,
    /// Noisy azimuth taken at step 0.
    pub initial_azimuth: f64,
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Draw truth, observer track and measurements.
pub fn generate_scenario(cfg: &ScenarioConfig, rng: &mut ChaCha8Rng) -> Result<Scenario, SimulationError> {
    cfg.validate()?;
    let model = cfg.motion_model()?;
    let noise_factor = model
        .process_noise
        .cholesky()
        .map(|c| c.l())
        .unwrap_or_else(Matrix4::zeros);
    let turn = cfg.maneuver_step();
    let leg_one = ScenarioConfig::velocity(cfg.observer_speed_kn, cfg.observer_heading_initial_deg);
    let leg_two = ScenarioConfig::velocity(cfg.observer_speed_kn, cfg.observer_heading_final_deg);
    let observer_velocity = |k: usize| if k < turn { leg_one } else { leg_two };

    let target_velocity = ScenarioConfig::velocity(cfg.target_speed_kn, cfg.target_heading_deg);
    let [tx, ty] = cfg.target_position;
    let mut target = Vector4::new(tx, ty, target_velocity.x, target_velocity.y);
    let v0 = observer_velocity(0);
    let mut observer = Vector4::new(0.0, 0.0, v0.x, v0.y);

    let mut out = Scenario {
        truth: Vec::with_capacity(cfg.steps + 1),
        observer: Vec::with_capacity(cfg.steps + 1),
        ranges: Vec::with_capacity(cfg.steps + 1),
        initial_azimuth: 0.0,
    };
    for k in 0..=cfg.steps {
        if k > 0 {
            let w = Vector4::from_fn(|_, _| normal(rng));
            target = model.transition * target + noise_factor * w;
            let v = observer_velocity(k);
            let pos = observer.fixed_rows::<2>(0) + cfg.period * observer.fixed_rows::<2>(2);
            observer = Vector4::new(pos.x, pos.y, v.x, v.y);
        }
        let rel = target - observer;
        let range = rel.fixed_rows::<2>(0).norm() + cfg.sigma_r * normal(rng);
        if k == 0 {
            out.initial_azimuth = rel.y.atan2(rel.x) + cfg.sigma_theta_deg.to_radians() * normal(rng);
        }
        out.truth.push(rel);
        out.observer.push(observer);
        out.ranges.push(range);
    }
    Ok(out)
}

/// Gaussian prior from one range and one azimuth, using a linearized
/// polar-to-Cartesian conversion. Velocity is zero-mean with standard
/// deviation twice `speed` per axis.
pub fn initialize_prior(
    range: f64,
    azimuth: f64,
    sigma_r: f64,
    sigma_theta: f64,
    speed: f64,
) -> Result<GaussianState, FilterError> {
    if !(range > 0.0) {
        return Err(FilterError::NonPositiveRange(range));
    }
    let (s, c) = azimuth.sin_cos();
    let jac = Matrix2::new(c, -range * s, s, range * c);
    let polar = Matrix2::new(sigma_r * sigma_r, 0.0, 0.0, sigma_theta * sigma_theta);
    let pos_cov = jac * polar * jac.transpose();
    let mut cov = Matrix4::zeros();
    cov.fixed_view_mut::<2, 2>(0, 0).copy_from(&pos_cov);
    let vel_var = (2.0 * speed).powi(2);
    cov[(2, 2)] = vel_var;
    cov[(3, 3)] = vel_var;
    GaussianState::new(Vector4::new(range * c, range * s, 0.0, 0.0), cov)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterKind {
    Proposed,
    Ekf,
    Ukf,
}

impl FilterKind {
    pub const ALL: [FilterKind; 3] = [FilterKind::Proposed, FilterKind::Ekf, FilterKind::Ukf];

    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Proposed => "proposed",
            FilterKind::Ekf => "ekf",
            FilterKind::Ukf => "ukf",
        }
    }
}

impl std::fmt::Display for FilterKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Counters for how the proposed update obtained its moments and samples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct UpdateCounts {
    pub series: usize,
    pub quadrature: usize,
    pub fit: usize,
    pub symmetric_baseline: usize,
}

impl UpdateCounts {
    fn add(&mut self, other: &UpdateCounts) {
        self.series += other.series;
        self.quadrature += other.quadrature;
        self.fit += other.fit;
        self.symmetric_baseline += other.symmetric_baseline;
    }
}

/// Posterior estimates of one filter over one scenario, steps `0..=steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Track {
    pub estimates: Vec<GaussianState>,
    pub counts: UpdateCounts,
}

/// Run one filter over a scenario. Step 0 holds the prior built from the
/// first range and the azimuth.
pub fn run_filter(cfg: &ScenarioConfig, scenario: &Scenario, kind: FilterKind, run: usize) -> Result<Track, FilterError> {
    let model = cfg.motion_model()?;
    let proposed_cfg = cfg.proposed_config(run);
    let ukf = UkfParams::default();
    let mut counts = UpdateCounts::default();
    let mut state = initialize_prior(
        scenario.ranges[0],
        scenario.initial_azimuth,
        cfg.sigma_r,
        cfg.sigma_theta_deg.to_radians(),
        cfg.target_speed_kn * KNOT,
    )?;
    let mut estimates = Vec::with_capacity(scenario.ranges.len());
    estimates.push(state);
    for k in 1..scenario.ranges.len() {
        let pred = predict(&state, &model, &scenario.observer[k - 1], &scenario.observer[k])?;
        let range = scenario.ranges[k];
        state = match kind {
            FilterKind::Proposed => {
                let up = proposed_update(&pred, range, &proposed_cfg)?;
                match up.moment_source {
                    MomentSource::Series => counts.series += 1,
                    MomentSource::Quadrature => counts.quadrature += 1,
                }
                match up.sampler {
                    SamplerSource::Fit => counts.fit += 1,
                    SamplerSource::SymmetricBaseline => counts.symmetric_baseline += 1,
                }
                up.collapsed
            }
            FilterKind::Ekf => match ekf_update(&pred, range, cfg.sigma_r) {
                Err(FilterError::DegenerateGeometry) => pred,
                other => other?,
            },
            FilterKind::Ukf => ukf_update(&pred, range, cfg.sigma_r, &ukf)?,
        };
        estimates.push(state);
    }
    Ok(Track { estimates, counts })
}

/// Per-step aggregates of one filter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub filter: FilterKind,
    pub pos_rmse: Vec<f64>,
    pub vel_rmse: Vec<f64>,
    pub nees: Vec<f64>,
    pub failed_runs: usize,
}

/// Step-wise squared errors and NEES for one track.
struct Errors {
    pos: Vec<f64>,
    vel: Vec<f64>,
    nees: Vec<f64>,
}

fn track_errors(track: &Track, truth: &[Vector4<f64>]) -> Errors {
    let mut out = Errors {
        pos: Vec::with_capacity(truth.len()),
        vel: Vec::with_capacity(truth.len()),
        nees: Vec::with_capacity(truth.len()),
    };
    for (est, x) in track.estimates.iter().zip(truth) {
        let e = est.mean - x;
        out.pos.push(e[0] * e[0] + e[1] * e[1]);
        out.vel.push(e[2] * e[2] + e[3] * e[3]);
        out.nees.push(est.nees(x));
    }
    out
}

fn aggregate(kind: FilterKind, errors: &[Errors], failed_runs: usize, len: usize) -> RunMetrics {
    let n = errors.len().max(1) as f64;
    let mean_at = |k: usize, pick: fn(&Errors) -> &Vec<f64>| errors.iter().map(|e| pick(e)[k]).sum::<f64>() / n;
    RunMetrics {
        filter: kind,
        pos_rmse: (0..len).map(|k| mean_at(k, |e| &e.pos).sqrt()).collect(),
        vel_rmse: (0..len).map(|k| mean_at(k, |e| &e.vel).sqrt()).collect(),
        nees: (0..len).map(|k| mean_at(k, |e| &e.nees)).collect(),
        failed_runs,
    }
}

/// Absolute positions of one run, for plotting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub step: usize,
    pub truth_x: f64,
    pub truth_y: f64,
    pub est_x: f64,
    pub est_y: f64,
    pub observer_x: f64,
    pub observer_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyResults {
    pub filters: Vec<RunMetrics>,
    pub crlb_pos: Vec<f64>,
    pub crlb_vel: Vec<f64>,
    /// Run 0 with the proposed filter's estimates.
    pub trajectory: Vec<TrajectoryPoint>,
    pub counts: UpdateCounts,
}

impl StudyResults {
    pub fn metrics(&self, kind: FilterKind) -> Option<&RunMetrics> {
        self.filters.iter().find(|m| m.filter == kind)
    }
}

struct RunOutcome {
    scenario: Scenario,
    prior_info: Matrix4<f64>,
    tracks: Vec<Result<Track, FilterError>>,
}

fn run_once(cfg: &ScenarioConfig, run: usize) -> Result<RunOutcome, SimulationError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(run as u64);
    let scenario = generate_scenario(cfg, &mut rng)?;
    let tracks: Vec<_> = FilterKind::ALL
        .iter()
        .map(|&kind| {
            run_filter(cfg, &scenario, kind, run).inspect_err(|e| log::warn!("run {run}: {kind} failed: {e}"))
        })
        .collect();
    let prior = initialize_prior(
        scenario.ranges[0],
        scenario.initial_azimuth,
        cfg.sigma_r,
        cfg.sigma_theta_deg.to_radians(),
        cfg.target_speed_kn * KNOT,
    )?;
    let prior_info = prior.cov.try_inverse().ok_or(FilterError::SingularInnovation)?;
    Ok(RunOutcome {
        scenario,
        prior_info,
        tracks,
    })
}

/// Monte-Carlo study of the proposed filter, the EKF and the UKF on paired
/// noise realizations, plus the range-only CRLB.
///
/// Run `i` draws from stream `i` of a ChaCha generator seeded with
/// `cfg.seed`, so results do not depend on thread scheduling.
pub fn run_monte_carlo(cfg: &ScenarioConfig) -> Result<StudyResults, SimulationError> {
    cfg.validate()?;
    let outcomes = (0..cfg.runs)
        .into_par_iter()
        .map(|run| run_once(cfg, run))
        .collect::<Result<Vec<_>, _>>()?;
    let len = cfg.steps + 1;

    let mut filters = Vec::with_capacity(FilterKind::ALL.len());
    let mut counts = UpdateCounts::default();
    for (i, kind) in FilterKind::ALL.into_iter().enumerate() {
        let mut errors = Vec::with_capacity(outcomes.len());
        let mut failed = 0;
        for outcome in &outcomes {
            match &outcome.tracks[i] {
                Ok(track) => {
                    counts.add(&track.counts);
                    errors.push(track_errors(track, &outcome.scenario.truth));
                }
                Err(_) => failed += 1,
            }
        }
        if failed as f64 > MAX_FAILURE_FRACTION * cfg.runs as f64 {
            return Err(SimulationError::TooManyFailures {
                filter: kind,
                failed,
                runs: cfg.runs,
            });
        }
        filters.push(aggregate(kind, &errors, failed, len));
    }

    let model = cfg.motion_model()?;
    let initial = outcomes.iter().map(|o| o.prior_info).sum::<Matrix4<f64>>() / outcomes.len() as f64;
    let truths: Vec<Vec<Vector4<f64>>> = outcomes.iter().map(|o| o.scenario.truth.clone()).collect();
    let info = crlb_recursion(&truths, &model, cfg.sigma_r, &initial);
    let (crlb_pos, crlb_vel) = info.iter().map(crlb_bounds).unzip();

    let first = &outcomes[0];
    let trajectory = match &first.tracks[0] {
        Ok(track) => first
            .scenario
            .truth
            .iter()
            .zip(&first.scenario.observer)
            .zip(&track.estimates)
            .enumerate()
            .map(|(step, ((truth, obs), est))| TrajectoryPoint {
                step,
                truth_x: truth.x + obs.x,
                truth_y: truth.y + obs.y,
                est_x: est.mean.x + obs.x,
                est_y: est.mean.y + obs.y,
                observer_x: obs.x,
                observer_y: obs.y,
            })
            .collect(),
        Err(_) => Vec::new(),
    };

    Ok(StudyResults {
        filters,
        crlb_pos,
        crlb_vel,
        trajectory,
        counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter::linear_position_update;
    use approx::assert_relative_eq;

    fn quiet() -> ScenarioConfig {
        ScenarioConfig {
            q_tilde: 0.0,
            sigma_r: 1e-12,
            sigma_theta_deg: 1e-12,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn default_matches_reference_scenario() {
        let cfg = ScenarioConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.maneuver_step(), 15);
        let model = cfg.motion_model().unwrap();
        assert_relative_eq!(model.process_noise[(0, 0)], 72.0, max_relative = 1e-12);
        assert_relative_eq!(model.process_noise[(0, 2)], 1.8, max_relative = 1e-12);
        assert_relative_eq!(model.process_noise[(2, 2)], 0.06, max_relative = 1e-12);
    }

    #[test]
    fn noiseless_geometry() {
        let cfg = quiet();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sc = generate_scenario(&cfg, &mut rng).unwrap();
        assert_relative_eq!(sc.ranges[0], 7072.1 * 2f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(sc.ranges[0], 10001.46, epsilon = 0.01);
        let leg = 15.0 * 60.0 * 5.0 * KNOT;
        let (s, c) = 170f64.to_radians().sin_cos();
        assert_relative_eq!(sc.observer[15].x, leg * c, max_relative = 1e-12);
        assert_relative_eq!(sc.observer[15].y, leg * s, max_relative = 1e-12);
        let (s, c) = 304f64.to_radians().sin_cos();
        assert_relative_eq!(sc.observer[15].z, 5.0 * KNOT * c, max_relative = 1e-12);
        assert_relative_eq!(sc.observer[14].w, 5.0 * KNOT * 170f64.to_radians().sin(), max_relative = 1e-12);
        assert_relative_eq!(sc.observer[15].w, 5.0 * KNOT * s, max_relative = 1e-12);
        // Target heads at 225 degrees, straight towards the start.
        let target = sc.truth[3] + sc.observer[3];
        let travelled = 3.0 * 60.0 * 15.0 * KNOT / 2f64.sqrt();
        assert_relative_eq!(target.x, 7072.1 - travelled, max_relative = 1e-12);
        for (k, (x, r)) in sc.truth.iter().zip(&sc.ranges).enumerate() {
            assert_relative_eq!(x.fixed_rows::<2>(0).norm(), *r, max_relative = 1e-12, epsilon = 1e-9);
            assert!(k <= cfg.steps);
        }
    }

    #[test]
    fn regeneration_is_bit_identical() {
        let cfg = ScenarioConfig::default();
        let draw = || {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            rng.set_stream(3);
            generate_scenario(&cfg, &mut rng).unwrap()
        };
        assert_eq!(draw(), draw());
    }

    #[test]
    fn prior_on_axis() {
        let p = initialize_prior(10001.0, 0.0, 10.0, 1f64.to_radians(), 7.7).unwrap();
        assert_relative_eq!(p.cov[(0, 0)], 100.0, max_relative = 1e-12);
        assert_relative_eq!(p.cov[(1, 1)], (10001.0 * 1f64.to_radians()).powi(2), max_relative = 1e-12);
        assert_relative_eq!(p.cov[(1, 1)], 3.05e4, max_relative = 2e-3);
        assert!(p.cov[(0, 1)].abs() < 1e-9);
        assert_relative_eq!(p.cov[(2, 2)], 15.4f64.powi(2), max_relative = 1e-12);
    }

    #[test]
    fn prior_limit_is_polar_point() {
        let p = initialize_prior(50.0, 2.0, 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(p.mean.x, 50.0 * 2f64.cos(), max_relative = 1e-15);
        assert_relative_eq!(p.mean.y, 50.0 * 2f64.sin(), max_relative = 1e-15);
        assert_eq!(p.cov.fixed_view::<2, 2>(0, 0).abs().max(), 0.0);
    }

    #[test]
    fn linear_measurements_give_consistent_nees() {
        // Direct position measurements on the scenario truth: a linear-Gaussian
        // filter whose average NEES must sit near the state dimension.
        let cfg = ScenarioConfig::default();
        let model = cfg.motion_model().unwrap();
        let noise = Matrix2::identity() * 400.0;
        let runs = 400;
        let mut nees = vec![0.0; cfg.steps + 1];
        for run in 0..runs {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            rng.set_stream(run);
            let sc = generate_scenario(&cfg, &mut rng).unwrap();
            let init_cov = Matrix4::from_diagonal(&Vector4::new(400.0, 400.0, 100.0, 100.0));
            let x0 = sc.truth[0] + init_cov.cholesky().unwrap().l() * Vector4::from_fn(|_, _| normal(&mut rng));
            let mut state = GaussianState::new(x0, init_cov).unwrap();
            nees[0] += state.nees(&sc.truth[0]);
            for (k, total) in nees.iter_mut().enumerate().skip(1) {
                let pred = predict(&state, &model, &sc.observer[k - 1], &sc.observer[k]).unwrap();
                let y = sc.truth[k].fixed_rows::<2>(0) + 20.0 * Vector2::new(normal(&mut rng), normal(&mut rng));
                state = linear_position_update(&pred, &y, &noise).unwrap();
                *total += state.nees(&sc.truth[k]);
            }
        }
        let avg: f64 = nees.iter().sum::<f64>() / (runs as f64 * nees.len() as f64);
        assert!((avg - 4.0).abs() < 0.15, "{avg}");
    }

    #[test]
    fn monte_carlo_is_deterministic_and_finite() {
        let cfg = ScenarioConfig {
            runs: 3,
            steps: 18,
            ..ScenarioConfig::default()
        };
        let a = run_monte_carlo(&cfg).unwrap();
        let b = run_monte_carlo(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.filters.len(), 3);
        for m in &a.filters {
            assert_eq!(m.pos_rmse.len(), 19);
            assert!(m.pos_rmse.iter().chain(&m.vel_rmse).chain(&m.nees).all(|v| v.is_finite() && *v >= 0.0));
        }
        assert_eq!(a.crlb_pos.len(), 19);
        assert_eq!(a.trajectory.len(), 19);
        assert_eq!(a.counts.series + a.counts.quadrature, 3 * 18);
    }

    #[test]
    fn rejects_invalid_configs() {
        let late = ScenarioConfig {
            maneuver_minutes: 40.0,
            ..ScenarioConfig::default()
        };
        assert!(late.validate().is_err());
        let zero = ScenarioConfig {
            sigma_r: 0.0,
            ..ScenarioConfig::default()
        };
        assert!(matches!(run_monte_carlo(&zero), Err(SimulationError::InvalidConfig(_))));
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ScenarioConfig {
            runs: 7,
            moment_policy: MomentPolicy::SeriesOnly,
            ..ScenarioConfig::default()
        };
        let json = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioConfig>(&json).unwrap(), cfg);
        let partial: ScenarioConfig = serde_json::from_str(r#"{"runs": 7, "moment_policy": "series_only"}"#).unwrap();
        assert_eq!(partial, cfg);
    }
}
