//! Linearization and discretization of the attitude and position
//! systems into [`UncertainModel`] instances, plus the envelope-row
//! construction and the attitude measurement assembly.

use super::kinematics::{attitude_jacobian, dcm_ned_to_body, omega_matrix, psi_matrix, wrap_angle};
use super::{AttitudeState, ImuSample, ModelConfig, ModelError, PositionState};
use crate::filter::UncertainModel;
use crate::linalg::Mat;

/// Envelope rows for a discretized `(F, G)` pair by column averaging.
///
/// The state-equation row averages the deviation of `F` from the
/// identity and the entries of `G` down each column:
/// `N_F[l] = scale · Σᵢ (F − I)[i][l] / n` and
/// `N_G[l] = scale · Σᵢ G[i][l] / n`. A zero `scale` zeroes the row,
/// which the assembly treats as a vacuous constraint, so the filter
/// degrades gracefully to the nominal Kalman recursion.
///
/// The measurement-equation row is identically zero (`N_H = 0`,
/// `N_K = 0`): both navigation measurement maps are exact identity
/// selections with no modeled parametric deviation, and the assembly
/// keeps an all-zero row vacuous. Any nonzero direction here would
/// bind an exact constraint tying state and noise estimates together —
/// the step output is invariant under row scaling, so there is no
/// "weak" version of such a row — which on the position system turns
/// one GPS channel into an exactly trusted measurement and pumps its
/// noise into the velocity states at every fix.
pub fn build_n_matrices(f: &Mat, g: &Mat, p: usize, scale: f64) -> (Mat, Mat, Mat, Mat) {
    let n = f.rows();
    let q = g.cols();
    assert_eq!(f.cols(), n, "F must be square");
    assert_eq!(g.rows(), n, "G must have one row per state");

    let mut n_f = Mat::zeros(1, n);
    for l in 0..n {
        let mut sum = 0.0;
        for i in 0..n {
            let f_bar = f[(i, l)] - if i == l { 1.0 } else { 0.0 };
            sum += f_bar;
        }
        n_f[(0, l)] = scale * sum / n as f64;
    }

    let mut n_g = Mat::zeros(1, q);
    for l in 0..q {
        let mut sum = 0.0;
        for i in 0..n {
            sum += g[(i, l)];
        }
        n_g[(0, l)] = scale * sum / n as f64;
    }

    (n_f, n_g, Mat::zeros(1, n), Mat::zeros(1, p))
}

/// Attitude system linearized about `x` and discretized with period
/// `cfg.dt`.
///
/// State `[φ, θ, ψ, b_g]`; the angle block propagates through
/// `I + T·J` with `J` the Jacobian of `Ω(φ,θ)·(ω_meas − b̂_g)`, the
/// gyro noise enters through `−T·Ω`, and the bias follows a
/// Gauss-Markov decay `1 − T/τ_g`. The measurement is the IMU's own
/// angle output, `H = [I 0]`.
pub fn build_attitude_model(
    x: &AttitudeState,
    imu: &ImuSample,
    cfg: &ModelConfig,
) -> Result<UncertainModel, ModelError> {
    let t = cfg.dt;
    let w = [
        imu.gyro[0] - x.bias_g[0],
        imu.gyro[1] - x.bias_g[1],
        imu.gyro[2] - x.bias_g[2],
    ];
    let omega = omega_matrix(x.phi, x.theta)?;
    let jac = attitude_jacobian(x.phi, x.theta, &w)?;

    let mut f = Mat::zeros(6, 6);
    let mut g = Mat::zeros(6, 6);
    for i in 0..3 {
        for j in 0..3 {
            f[(i, j)] = t * jac[(i, j)];
            f[(i, j + 3)] = -t * omega[(i, j)];
            g[(i, j)] = -t * omega[(i, j)];
        }
        f[(i, i)] += 1.0;
        f[(i + 3, i + 3)] = 1.0 - t / cfg.tau_g;
        g[(i + 3, i + 3)] = t;
    }

    let mut h = Mat::zeros(3, 6);
    for i in 0..3 {
        h[(i, i)] = 1.0;
    }

    let (n_f, n_g, n_h, n_k) = build_n_matrices(&f, &g, 3, cfg.n_scale);
    Ok(UncertainModel {
        n: 6,
        q: 6,
        p: 3,
        f,
        g,
        h,
        k: Mat::identity(3),
        q_cov: cfg.q_a.clone(),
        r_cov: cfg.r_a.clone(),
        n_f,
        n_g,
        n_h,
        n_k,
        measurement_fn: None,
    })
}

/// Position system linearized about `x` (with the attitude estimate
/// `att` supplying the body-to-NED rotation) and discretized with
/// period `cfg.dt`.
///
/// State `[λ, l, h, υ_NED, b_a]`; geodetic position integrates
/// velocity through `T·Ψ`, velocity couples to the accel bias through
/// `−T·Aᵀ`, and the bias follows a Gauss-Markov decay `1 − T/τ_a`.
/// The measurement is the GPS fix, `H = [I 0₃ₓ₆]`.
pub fn build_position_model(
    x: &PositionState,
    att: &AttitudeState,
    cfg: &ModelConfig,
) -> Result<UncertainModel, ModelError> {
    let t = cfg.dt;
    let psi = psi_matrix(x.lat, x.alt)?;
    let a_t = dcm_ned_to_body(att.phi, att.theta, att.psi).transpose();

    let mut f = Mat::zeros(9, 9);
    let mut g = Mat::zeros(9, 6);
    for i in 0..3 {
        for j in 0..3 {
            f[(i, j + 3)] = t * psi[(i, j)];
            f[(i + 3, j + 6)] = -t * a_t[(i, j)];
            g[(i + 3, j)] = -t * a_t[(i, j)];
        }
        f[(i, i)] = 1.0;
        f[(i + 3, i + 3)] = 1.0;
        f[(i + 6, i + 6)] = 1.0 - t / cfg.tau_a;
        g[(i + 6, i + 3)] = t;
    }

    let mut h = Mat::zeros(3, 9);
    for i in 0..3 {
        h[(i, i)] = 1.0;
    }

    let (n_f, n_g, n_h, n_k) = build_n_matrices(&f, &g, 3, cfg.n_scale);
    Ok(UncertainModel {
        n: 9,
        q: 6,
        p: 3,
        f,
        g,
        h,
        k: Mat::identity(3),
        q_cov: cfg.q_p.clone(),
        r_cov: cfg.r_p.clone(),
        n_f,
        n_g,
        n_h,
        n_k,
        measurement_fn: None,
    })
}

/// Attitude measurement vector from one IMU epoch: the unit's roll and
/// pitch as-is, and its yaw corrected by the held GPS−IMU offset and
/// wrapped into `(−π, π]`.
pub fn measurement_attitude(imu: &ImuSample, delta_psi: f64) -> Vec<f64> {
    vec![
        imu.angles_imu[0],
        imu.angles_imu[1],
        wrap_angle(imu.angles_imu[2] + delta_psi),
    ]
}
