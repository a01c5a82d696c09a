//! Synthetic trajectory and sensor-stream generation.
//!
//! Truth comes from closed-form planar trajectories (level flight, yaw =
//! course) mapped onto the ellipsoid around a fixed anchor point. Sensors
//! are derived from truth with structured, contraction-bounded errors:
//!
//! * gyro:  `(I + S_g + M_g)·ω + b_g + w_g` — diagonal scale factor `S`,
//!   skew misalignment `M`, Gauss-Markov bias `b`, white noise `w`;
//! * accel: the same structure applied to the body-frame specific force
//!   (gravity included);
//! * IMU angles: truth attitude plus white noise, with a constant heading
//!   offset standing in for magnetic declination;
//! * GPS: truth position and course plus white noise.
//!
//! Biases use the exact discretization of a first-order Gauss-Markov
//! process with stationary initialization. All randomness flows from one
//! seeded stream in a fixed draw order — per IMU epoch: gyro noise,
//! accel noise, angle noise, then the two bias innovations; after the IMU
//! loop, per GPS epoch: position noise, then yaw noise — so identical
//! `(scenario, seed)` pairs generate byte-identical files.

use erkf::filter::UncertaintyEnvelope;
use erkf::linalg::{eigenvalue_extrema, LinalgError, Mat};
use erkf::models::{
    dcm_ned_to_body, meridian_radius, transverse_radius, wrap_angle, GpsSample, ImuSample,
    STANDARD_GRAVITY,
};

use crate::rng::NoiseRng;

/// Errors raised by scenario validation and generation.
#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    /// The scenario violates one of its invariants.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    /// Numerical failure while checking the contraction bound.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Closed-form reference trajectory family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[clap(rename_all = "snake_case")]
pub enum Trajectory {
    /// 50 m radius at 5 m/s: constant 0.1 rad/s yaw rate.
    Circle,
    /// Lemniscate-like loop, 100 m amplitude, 60 s period.
    FigureEight,
    /// Constant 5 m/s due north.
    Straight,
}

impl std::fmt::Display for Trajectory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Trajectory::Circle => "circle",
            Trajectory::FigureEight => "figure_eight",
            Trajectory::Straight => "straight",
        })
    }
}

/// One ground-truth row at an IMU epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthRecord {
    /// Epoch timestamp (s).
    pub t: f64,
    /// True Euler angles `(φ, θ, ψ)` (rad).
    pub attitude: [f64; 3],
    /// True geodetic position (rad, rad, m).
    pub position: [f64; 3],
    /// True NED velocity (m/s).
    pub velocity: [f64; 3],
}

/// Full description of one synthetic run.
#[derive(Debug, Clone)]
pub struct SyntheticScenario {
    /// Reference trajectory.
    pub trajectory: Trajectory,
    /// Run length (s).
    pub duration: f64,
    /// IMU sample rate (Hz); must be an integer multiple of the GPS rate.
    pub imu_rate: f64,
    /// GPS fix rate (Hz).
    pub gps_rate: f64,
    /// White noise on each gyro axis (rad/s, 1σ).
    pub gyro_noise_sigma: f64,
    /// White noise on each accelerometer axis (m/s², 1σ).
    pub accel_noise_sigma: f64,
    /// White noise on the IMU's own angle outputs (rad, 1σ).
    pub angle_noise_sigma: f64,
    /// Constant IMU heading offset (rad); what `δψ` must recover.
    pub imu_yaw_offset: f64,
    /// GPS position noise (m, 1σ, per axis).
    pub gps_pos_sigma_m: f64,
    /// GPS course noise (rad, 1σ).
    pub gps_yaw_sigma: f64,
    /// Correlation time of both sensor biases (s).
    pub bias_tau: f64,
    /// Stationary gyro-bias magnitude (rad/s, 1σ).
    pub gyro_bias_sigma: f64,
    /// Stationary accelerometer-bias magnitude (m/s², 1σ).
    pub accel_bias_sigma: f64,
    /// Diagonal gyro scale-factor errors.
    pub gyro_scale: [f64; 3],
    /// Gyro misalignment magnitude (skew pattern).
    pub gyro_misalign: f64,
    /// Diagonal accelerometer scale-factor errors.
    pub accel_scale: [f64; 3],
    /// Accelerometer misalignment magnitude (skew pattern).
    pub accel_misalign: f64,
    /// Structured-uncertainty envelope the injected errors must respect:
    /// each sensor's combined scale-plus-misalignment operator norm must
    /// stay below `delta1_bound`.
    pub uncertainty: UncertaintyEnvelope,
    /// Geodetic anchor of the local level frame (rad, rad, m).
    pub anchor: [f64; 3],
    /// Down gravity used in the specific-force model (m/s²).
    pub gravity: f64,
}

impl SyntheticScenario {
    /// The named scenario defaults at the standard 400/10 Hz rates.
    pub fn named(trajectory: Trajectory, duration: f64) -> SyntheticScenario {
        SyntheticScenario {
            trajectory,
            duration,
            imu_rate: 400.0,
            gps_rate: 10.0,
            gyro_noise_sigma: 0.005,
            accel_noise_sigma: 0.05,
            angle_noise_sigma: 2e-3,
            imu_yaw_offset: 0.05,
            gps_pos_sigma_m: 2.0,
            gps_yaw_sigma: 0.02,
            bias_tau: 100.0,
            gyro_bias_sigma: 2e-4,
            accel_bias_sigma: 2e-3,
            gyro_scale: [0.01, -0.008, 0.012],
            gyro_misalign: 0.002,
            accel_scale: [-0.006, 0.009, 0.007],
            accel_misalign: 0.002,
            uncertainty: UncertaintyEnvelope {
                m1: Mat::identity(3),
                m2: Mat::identity(3),
                delta1_bound: 0.5,
                delta2_bound: 0.5,
            },
            anchor: [0.7, 0.1, 100.0],
            gravity: STANDARD_GRAVITY,
        }
    }

    /// Combined scale-plus-misalignment error matrix for one sensor.
    fn error_matrix(scale: &[f64; 3], misalign: f64) -> Mat {
        let mut e = Mat::zeros(3, 3);
        for i in 0..3 {
            e[(i, i)] = scale[i];
        }
        // Skew pattern: equal-magnitude cross-axis leakage.
        e[(0, 1)] = -misalign;
        e[(0, 2)] = misalign;
        e[(1, 0)] = misalign;
        e[(1, 2)] = -misalign;
        e[(2, 0)] = -misalign;
        e[(2, 1)] = misalign;
        e
    }

    /// Largest singular value via the eigenvalues of `EᵀE`.
    fn operator_norm(e: &Mat) -> Result<f64, LinalgError> {
        let (l_max, _) = eigenvalue_extrema(&e.transpose().matmul(e))?;
        Ok(l_max.max(0.0).sqrt())
    }

    /// Check every scenario invariant.
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |msg: String| Err(SynthError::InvalidScenario(msg));
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return bad(format!("duration {} must be positive", self.duration));
        }
        if !(self.imu_rate > 0.0 && self.gps_rate > 0.0) {
            return bad("sample rates must be positive".into());
        }
        let ratio = self.imu_rate / self.gps_rate;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio < 1.0 {
            return bad(format!(
                "IMU rate {} must be an integer multiple of GPS rate {}",
                self.imu_rate, self.gps_rate
            ));
        }
        let sigmas = [
            self.gyro_noise_sigma,
            self.accel_noise_sigma,
            self.angle_noise_sigma,
            self.gps_pos_sigma_m,
            self.gps_yaw_sigma,
            self.gyro_bias_sigma,
            self.accel_bias_sigma,
        ];
        if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return bad("noise magnitudes must be finite and non-negative".into());
        }
        if !(self.bias_tau > 0.0) {
            return bad(format!("bias correlation time {} must be positive", self.bias_tau));
        }
        self.uncertainty
            .validate()
            .map_err(|e| SynthError::InvalidScenario(e.to_string()))?;
        let gyro_norm =
            Self::operator_norm(&Self::error_matrix(&self.gyro_scale, self.gyro_misalign))?;
        if gyro_norm >= self.uncertainty.delta1_bound {
            return bad(format!(
                "gyro scale/misalignment norm {gyro_norm} exceeds the contraction bound {}",
                self.uncertainty.delta1_bound
            ));
        }
        let accel_norm =
            Self::operator_norm(&Self::error_matrix(&self.accel_scale, self.accel_misalign))?;
        if accel_norm >= self.uncertainty.delta1_bound {
            return bad(format!(
                "accel scale/misalignment norm {accel_norm} exceeds the contraction bound {}",
                self.uncertainty.delta1_bound
            ));
        }
        Ok(())
    }
}

/// Kinematic state of the reference trajectory at one instant.
struct TrajPoint {
    pos_ned: [f64; 3],
    vel_ned: [f64; 3],
    acc_ned: [f64; 3],
    yaw: f64,
    yaw_rate: f64,
}

fn traj_point(trajectory: Trajectory, t: f64) -> TrajPoint {
    match trajectory {
        Trajectory::Circle => {
            let (r, v) = (50.0, 5.0);
            let w = v / r;
            let (s, c) = (w * t).sin_cos();
            TrajPoint {
                pos_ned: [r * s, r * (1.0 - c), 0.0],
                vel_ned: [v * c, v * s, 0.0],
                acc_ned: [-v * w * s, v * w * c, 0.0],
                yaw: wrap_angle(w * t),
                yaw_rate: w,
            }
        }
        Trajectory::FigureEight => {
            let a = 100.0;
            let w = std::f64::consts::TAU / 60.0;
            let (s1, c1) = (w * t).sin_cos();
            let (s2, c2) = (2.0 * w * t).sin_cos();
            let vel = [a * w * c1, a * w * c2, 0.0];
            let acc = [-a * w * w * s1, -2.0 * a * w * w * s2, 0.0];
            let speed_sq = vel[0] * vel[0] + vel[1] * vel[1];
            TrajPoint {
                pos_ned: [a * s1, 0.5 * a * s2, 0.0],
                vel_ned: vel,
                acc_ned: acc,
                yaw: vel[1].atan2(vel[0]),
                yaw_rate: (vel[0] * acc[1] - vel[1] * acc[0]) / speed_sq,
            }
        }
        Trajectory::Straight => {
            let v = 5.0;
            TrajPoint {
                pos_ned: [v * t, 0.0, 0.0],
                vel_ned: [v, 0.0, 0.0],
                acc_ned: [0.0; 3],
                yaw: 0.0,
                yaw_rate: 0.0,
            }
        }
    }
}

/// Map a local NED offset from the anchor into geodetic coordinates.
fn ned_to_geodetic(anchor: &[f64; 3], ned: &[f64; 3]) -> [f64; 3] {
    let rm = meridian_radius(anchor[0]) + anchor[2];
    let rt = transverse_radius(anchor[0]) + anchor[2];
    [
        anchor[0] + ned[0] / rm,
        anchor[1] + ned[1] / (rt * anchor[0].cos()),
        anchor[2] - ned[2],
    ]
}

/// `(I + E)·v + bias + noise` for one sensor triad.
fn apply_errors(e: &Mat, v: &[f64; 3], bias: &[f64; 3], noise: &[f64; 3]) -> [f64; 3] {
    let mut out = [0.0f64; 3];
    for i in 0..3 {
        let mut sum = v[i];
        for j in 0..3 {
            sum += e[(i, j)] * v[j];
        }
        out[i] = sum + bias[i] + noise[i];
    }
    out
}

/// Exactly discretized Gauss-Markov bias state for one sensor triad.
struct BiasState {
    b: [f64; 3],
    alpha: f64,
    drive: f64,
}

impl BiasState {
    /// Stationary initialization: `b₀ ~ N(0, σ²)` per axis.
    fn new(sigma: f64, tau: f64, dt: f64, rng: &mut NoiseRng) -> BiasState {
        let alpha = (-dt / tau).exp();
        BiasState {
            b: [rng.normal(sigma), rng.normal(sigma), rng.normal(sigma)],
            alpha,
            drive: sigma * (1.0 - alpha * alpha).sqrt(),
        }
    }

    /// One exact step: `b ← α b + σ√(1−α²)·ξ` keeps the stationary law.
    fn step(&mut self, rng: &mut NoiseRng) {
        for i in 0..3 {
            self.b[i] = self.alpha * self.b[i] + self.drive * rng.standard_normal();
        }
    }
}

/// Generate the three streams for one scenario and seed.
pub fn generate_synthetic(
    scn: &SyntheticScenario,
    seed: u64,
) -> Result<(Vec<ImuSample>, Vec<GpsSample>, Vec<TruthRecord>), SynthError> {
    scn.validate()?;
    let mut rng = NoiseRng::new(seed);
    let dt = 1.0 / scn.imu_rate;
    let n_imu = (scn.duration * scn.imu_rate).round() as usize;
    let n_gps = (scn.duration * scn.gps_rate).round() as usize;

    let e_gyro = SyntheticScenario::error_matrix(&scn.gyro_scale, scn.gyro_misalign);
    let e_accel = SyntheticScenario::error_matrix(&scn.accel_scale, scn.accel_misalign);
    let mut gyro_bias = BiasState::new(scn.gyro_bias_sigma, scn.bias_tau, dt, &mut rng);
    let mut accel_bias = BiasState::new(scn.accel_bias_sigma, scn.bias_tau, dt, &mut rng);

    let mut imu = Vec::with_capacity(n_imu);
    let mut truth = Vec::with_capacity(n_imu);
    for i in 0..n_imu {
        let t = i as f64 / scn.imu_rate;
        let pt = traj_point(scn.trajectory, t);

        // Level flight: body rates are pure yaw rate, and the body frame
        // is the navigation frame rotated by the course angle.
        let omega_body = [0.0, 0.0, pt.yaw_rate];
        let a = dcm_ned_to_body(0.0, 0.0, pt.yaw);
        let f_ned = [
            pt.acc_ned[0],
            pt.acc_ned[1],
            pt.acc_ned[2] - scn.gravity,
        ];
        let mut f_body = [0.0f64; 3];
        for r in 0..3 {
            f_body[r] = a[(r, 0)] * f_ned[0] + a[(r, 1)] * f_ned[1] + a[(r, 2)] * f_ned[2];
        }

        let w_gyro = [
            rng.normal(scn.gyro_noise_sigma),
            rng.normal(scn.gyro_noise_sigma),
            rng.normal(scn.gyro_noise_sigma),
        ];
        let w_accel = [
            rng.normal(scn.accel_noise_sigma),
            rng.normal(scn.accel_noise_sigma),
            rng.normal(scn.accel_noise_sigma),
        ];
        let w_angle = [
            rng.normal(scn.angle_noise_sigma),
            rng.normal(scn.angle_noise_sigma),
            rng.normal(scn.angle_noise_sigma),
        ];

        imu.push(ImuSample {
            t,
            gyro: apply_errors(&e_gyro, &omega_body, &gyro_bias.b, &w_gyro),
            accel: apply_errors(&e_accel, &f_body, &accel_bias.b, &w_accel),
            angles_imu: [
                w_angle[0],
                w_angle[1],
                wrap_angle(pt.yaw + scn.imu_yaw_offset + w_angle[2]),
            ],
        });
        truth.push(TruthRecord {
            t,
            attitude: [0.0, 0.0, pt.yaw],
            position: ned_to_geodetic(&scn.anchor, &pt.pos_ned),
            velocity: pt.vel_ned,
        });

        gyro_bias.step(&mut rng);
        accel_bias.step(&mut rng);
    }

    let rm = meridian_radius(scn.anchor[0]) + scn.anchor[2];
    let rt = transverse_radius(scn.anchor[0]) + scn.anchor[2];
    let mut gps = Vec::with_capacity(n_gps);
    for j in 0..n_gps {
        let t = j as f64 / scn.gps_rate;
        let pt = traj_point(scn.trajectory, t);
        let pos = ned_to_geodetic(&scn.anchor, &pt.pos_ned);
        let noise_n = rng.normal(scn.gps_pos_sigma_m);
        let noise_e = rng.normal(scn.gps_pos_sigma_m);
        let noise_d = rng.normal(scn.gps_pos_sigma_m);
        gps.push(GpsSample {
            t,
            pos_lla: [
                pos[0] + noise_n / rm,
                pos[1] + noise_e / (rt * scn.anchor[0].cos()),
                pos[2] + noise_d,
            ],
            yaw_gps: wrap_angle(pt.yaw + rng.normal(scn.gps_yaw_sigma)),
        });
    }

    Ok((imu, gps, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csvio::{render_gps_csv, render_imu_csv, render_truth_csv};

    fn noiseless(trajectory: Trajectory, duration: f64) -> SyntheticScenario {
        let mut scn = SyntheticScenario::named(trajectory, duration);
        scn.gyro_noise_sigma = 0.0;
        scn.accel_noise_sigma = 0.0;
        scn.angle_noise_sigma = 0.0;
        scn.imu_yaw_offset = 0.0;
        scn.gps_pos_sigma_m = 0.0;
        scn.gps_yaw_sigma = 0.0;
        scn.gyro_bias_sigma = 0.0;
        scn.accel_bias_sigma = 0.0;
        scn.gyro_scale = [0.0; 3];
        scn.gyro_misalign = 0.0;
        scn.accel_scale = [0.0; 3];
        scn.accel_misalign = 0.0;
        scn
    }

    #[test]
    fn noiseless_straight_run_degenerates_to_gravity_only() {
        let scn = noiseless(Trajectory::Straight, 1.0);
        let (imu, gps, truth) = generate_synthetic(&scn, 5).unwrap();
        assert_eq!(imu.len(), 400);
        assert_eq!(gps.len(), 10);
        for s in &imu {
            assert_eq!(s.gyro, [0.0; 3]);
            assert_eq!(s.accel, [0.0, 0.0, -scn.gravity]);
            assert_eq!(s.angles_imu[0], 0.0);
            assert_eq!(s.angles_imu[2], 0.0);
        }
        // GPS equals truth exactly at the coinciding epochs (40j).
        for (j, g) in gps.iter().enumerate() {
            let tr = &truth[40 * j];
            assert_eq!(g.t, tr.t);
            assert_eq!(g.pos_lla, tr.position);
            assert_eq!(g.yaw_gps, tr.attitude[2]);
        }
    }

    #[test]
    fn circle_gyro_z_mean_reflects_the_injected_scale_factor() {
        let scn = SyntheticScenario::named(Trajectory::Circle, 10.0);
        let (imu, _, _) = generate_synthetic(&scn, 7).unwrap();
        let mean: f64 = imu.iter().map(|s| s.gyro[2]).sum::<f64>() / imu.len() as f64;
        let expected = 0.1 * (1.0 + scn.gyro_scale[2]);
        // Bias (σ 2e-4) dominates the white-noise standard error here.
        assert!(
            (mean - expected).abs() < 1e-3,
            "gyro z mean {mean}, expected near {expected}"
        );
    }

    #[test]
    fn identical_scenario_and_seed_give_byte_identical_files() {
        let scn = SyntheticScenario::named(Trajectory::FigureEight, 2.0);
        let (imu_a, gps_a, truth_a) = generate_synthetic(&scn, 11).unwrap();
        let (imu_b, gps_b, truth_b) = generate_synthetic(&scn, 11).unwrap();
        assert_eq!(render_imu_csv(&imu_a), render_imu_csv(&imu_b));
        assert_eq!(render_gps_csv(&gps_a), render_gps_csv(&gps_b));
        assert_eq!(render_truth_csv(&truth_a), render_truth_csv(&truth_b));

        let (imu_c, _, _) = generate_synthetic(&scn, 12).unwrap();
        assert_ne!(render_imu_csv(&imu_a), render_imu_csv(&imu_c));
    }

    #[test]
    fn scenario_invariants_are_enforced() {
        let mut scn = SyntheticScenario::named(Trajectory::Circle, 1.0);
        scn.gps_rate = 7.0;
        assert!(matches!(
            scn.validate(),
            Err(SynthError::InvalidScenario(_))
        ));

        let mut scn = SyntheticScenario::named(Trajectory::Circle, 1.0);
        scn.gyro_misalign = 0.9;
        assert!(matches!(
            scn.validate(),
            Err(SynthError::InvalidScenario(_))
        ));

        let mut scn = SyntheticScenario::named(Trajectory::Circle, 1.0);
        scn.uncertainty.delta1_bound = 1.0;
        assert!(scn.validate().is_err());

        let mut scn = SyntheticScenario::named(Trajectory::Circle, 1.0);
        scn.duration = 0.0;
        assert!(scn.validate().is_err());
    }

    #[test]
    fn truth_velocity_is_the_derivative_of_truth_position() {
        for trajectory in [
            Trajectory::Circle,
            Trajectory::FigureEight,
            Trajectory::Straight,
        ] {
            let scn = noiseless(trajectory, 2.0);
            let (_, _, truth) = generate_synthetic(&scn, 1).unwrap();
            let rm = meridian_radius(scn.anchor[0]) + scn.anchor[2];
            let rt = transverse_radius(scn.anchor[0]) + scn.anchor[2];
            let dt = 2.0 / scn.imu_rate;
            for i in (1..truth.len() - 1).step_by(97) {
                let (prev, mid, next) = (&truth[i - 1], &truth[i], &truth[i + 1]);
                let vn = (next.position[0] - prev.position[0]) * rm / dt;
                let ve = (next.position[1] - prev.position[1]) * rt * scn.anchor[0].cos() / dt;
                let vd = -(next.position[2] - prev.position[2]) / dt;
                assert!((vn - mid.velocity[0]).abs() < 1e-5, "{trajectory} vN");
                assert!((ve - mid.velocity[1]).abs() < 1e-5, "{trajectory} vE");
                assert!((vd - mid.velocity[2]).abs() < 1e-5, "{trajectory} vD");
            }
        }
    }

    #[test]
    fn figure_eight_speed_never_vanishes() {
        let scn = noiseless(Trajectory::FigureEight, 60.0);
        let (_, _, truth) = generate_synthetic(&scn, 1).unwrap();
        for r in &truth {
            let speed = (r.velocity[0] * r.velocity[0] + r.velocity[1] * r.velocity[1]).sqrt();
            assert!(speed > 1.0, "speed {speed} at t={}", r.t);
        }
    }
}
