//! Vehicle state-space models for loosely coupled IMU/GPS fusion: an
//! attitude system (Euler angles plus gyro bias) and a position system
//! (geodetic position, NED velocity, accelerometer bias).
//!
//! [`kinematics`] holds the frame transformations — the angular-rate
//! map `Ω`, the velocity-to-geodetic map `Ψ`, the NED-to-body rotation,
//! and angle wrapping. [`build`] linearizes and discretizes the two
//! systems about the current estimate, producing
//! [`UncertainModel`](crate::filter::UncertainModel) instances whose
//! envelope rows follow a column-averaging rule applied to the
//! discretized matrices.
//!
//! Conventions: angles in radians, wrapped to `(−π, π]`; positions as
//! (latitude, longitude, altitude) on the WGS-84 ellipsoid; velocities
//! in the North-East-Down frame; gravity pointing Down.

pub mod build;
pub mod kinematics;

pub use build::{
    build_attitude_model, build_n_matrices, build_position_model, measurement_attitude,
};
pub use kinematics::{
    attitude_jacobian, dcm_ned_to_body, meridian_radius, omega_matrix, psi_matrix,
    transverse_radius, wrap_angle,
};

use crate::linalg::Mat;

/// WGS-84 semi-major axis (m).
pub const WGS84_A: f64 = 6_378_137.0;

/// WGS-84 first eccentricity squared.
pub const WGS84_E2: f64 = 6.69437999014e-3;

/// Standard gravity magnitude (m/s²), the default Down component.
pub const STANDARD_GRAVITY: f64 = 9.80665;

/// Guard band (rad) kept between an angle and its singular value: pitch
/// must stay this far from ±π/2 (tan/sec blow-up in `Ω`) and latitude
/// this far from the poles (cos blow-up in `Ψ`).
pub const SINGULARITY_GUARD: f64 = 1e-6;

/// Errors raised by model construction and the kinematic maps.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ModelError {
    /// Pitch within the guard band of ±π/2, where `Ω` is singular.
    #[error("pitch angle {0} rad is within the guard band of ±π/2")]
    SingularAttitude(f64),
    /// Latitude within the guard band of the poles, where `Ψ` is singular.
    #[error("latitude {0} rad is within the guard band of ±π/2")]
    SingularLatitude(f64),
}

/// Attitude-system state: Euler angles and gyro bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttitudeState {
    /// Roll (rad).
    pub phi: f64,
    /// Pitch (rad); must stay clear of ±π/2.
    pub theta: f64,
    /// Yaw (rad).
    pub psi: f64,
    /// Gyro bias estimate (rad/s), body axes.
    pub bias_g: [f64; 3],
}

impl AttitudeState {
    /// State dimension of the attitude system.
    pub const DIM: usize = 6;

    /// Flatten to the filter's state vector `[φ, θ, ψ, b_g]`.
    pub fn to_vec(self) -> Vec<f64> {
        vec![
            self.phi,
            self.theta,
            self.psi,
            self.bias_g[0],
            self.bias_g[1],
            self.bias_g[2],
        ]
    }

    /// Rebuild from a filter state vector.
    ///
    /// # Panics
    /// Panics if `v` does not have exactly six entries.
    pub fn from_vec(v: &[f64]) -> AttitudeState {
        assert_eq!(v.len(), Self::DIM, "attitude state must have 6 entries");
        AttitudeState {
            phi: v[0],
            theta: v[1],
            psi: v[2],
            bias_g: [v[3], v[4], v[5]],
        }
    }
}

/// Position-system state: geodetic position, NED velocity, accel bias.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionState {
    /// Latitude (rad); must stay clear of the poles.
    pub lat: f64,
    /// Longitude (rad).
    pub lon: f64,
    /// Altitude above the ellipsoid (m); must exceed −1e4.
    pub alt: f64,
    /// Velocity (m/s) in North-East-Down axes.
    pub vel_ned: [f64; 3],
    /// Accelerometer bias estimate (m/s²), body axes.
    pub bias_a: [f64; 3],
}

impl PositionState {
    /// State dimension of the position system.
    pub const DIM: usize = 9;

    /// Flatten to the filter's state vector `[p, υ, b_a]`.
    pub fn to_vec(self) -> Vec<f64> {
        vec![
            self.lat,
            self.lon,
            self.alt,
            self.vel_ned[0],
            self.vel_ned[1],
            self.vel_ned[2],
            self.bias_a[0],
            self.bias_a[1],
            self.bias_a[2],
        ]
    }

    /// Rebuild from a filter state vector.
    ///
    /// # Panics
    /// Panics if `v` does not have exactly nine entries.
    pub fn from_vec(v: &[f64]) -> PositionState {
        assert_eq!(v.len(), Self::DIM, "position state must have 9 entries");
        PositionState {
            lat: v[0],
            lon: v[1],
            alt: v[2],
            vel_ned: [v[3], v[4], v[5]],
            bias_a: [v[6], v[7], v[8]],
        }
    }
}

/// One IMU epoch: body rates, specific force, and the unit's own
/// Euler-angle outputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImuSample {
    /// Gyro rates (rad/s), body axes.
    pub gyro: [f64; 3],
    /// Accelerometer specific force (m/s²), body axes.
    pub accel: [f64; 3],
    /// Euler angles `(φ, θ, ψ)` (rad) computed by the IMU itself.
    pub angles_imu: [f64; 3],
    /// Timestamp (s).
    pub t: f64,
}

/// One GPS epoch: geodetic fix and heading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpsSample {
    /// Position `(lat, lon, alt)` in (rad, rad, m).
    pub pos_lla: [f64; 3],
    /// Heading (rad).
    pub yaw_gps: f64,
    /// Timestamp (s).
    pub t: f64,
}

/// Tuning and discretization parameters shared by both systems.
///
/// The noise weights are full matrices so that correlated tunings can
/// be expressed, but the defaults are diagonal. Defaults target a
/// MEMS-grade IMU at 400 Hz with a 2 m-class GPS.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    /// Sample period `T` (s) of the discretization; IMU epoch spacing.
    pub dt: f64,
    /// Gyro-bias correlation time (s).
    pub tau_g: f64,
    /// Accelerometer-bias correlation time (s).
    pub tau_a: f64,
    /// Attitude process-noise weight, 6×6 (gyro noise, bias drive).
    pub q_a: Mat,
    /// Attitude measurement-noise weight, 3×3 (IMU angle outputs).
    pub r_a: Mat,
    /// Position process-noise weight, 6×6 (accel noise, bias drive).
    pub q_p: Mat,
    /// Position measurement-noise weight, 3×3 (GPS lat/lon/alt).
    pub r_p: Mat,
    /// Down component of gravity (m/s²).
    pub gravity: f64,
    /// Scale factor applied to the averaged envelope rows.
    pub n_scale: f64,
    /// Initial attitude covariance, 6×6.
    pub pi0_a: Mat,
    /// Initial position covariance, 9×9.
    pub pi0_p: Mat,
}

/// Roughly 2 m of horizontal GPS error expressed in radians of arc.
const GPS_ARC_SIGMA: f64 = 2.0 / WGS84_A;

impl Default for ModelConfig {
    fn default() -> ModelConfig {
        ModelConfig {
            dt: 1.0 / 400.0,
            tau_g: 100.0,
            tau_a: 100.0,
            q_a: Mat::from_diag(&[
                0.005 * 0.005,
                0.005 * 0.005,
                0.005 * 0.005,
                1e-4 * 1e-4,
                1e-4 * 1e-4,
                1e-4 * 1e-4,
            ]),
            // The yaw channel carries the GPS-referenced offset correction,
            // so it sees GPS heading noise on top of the unit's own output.
            r_a: Mat::from_diag(&[4e-6, 4e-6, 4e-4 + 4e-6]),
            q_p: Mat::from_diag(&[
                0.05 * 0.05,
                0.05 * 0.05,
                0.05 * 0.05,
                1e-4 * 1e-4,
                1e-4 * 1e-4,
                1e-4 * 1e-4,
            ]),
            r_p: Mat::from_diag(&[
                GPS_ARC_SIGMA * GPS_ARC_SIGMA,
                GPS_ARC_SIGMA * GPS_ARC_SIGMA,
                4.0,
            ]),
            gravity: STANDARD_GRAVITY,
            n_scale: 1e2,
            pi0_a: Mat::from_diag(&[1e-4, 1e-4, 1e-4, 1e-6, 1e-6, 1e-6]),
            // Velocity starts unanchored — the first fixes must be free to
            // set it — while lat/lon/alt start at the anchoring fix itself.
            pi0_p: Mat::from_diag(&[1e-13, 1e-13, 4.0, 25.0, 25.0, 25.0, 1e-4, 1e-4, 1e-4]),
        }
    }
}

impl ModelConfig {
    /// Check positivity and shape constraints on every parameter.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt > 0.0) {
            return Err(format!("sample period must be positive, got {}", self.dt));
        }
        if !(self.tau_g > 0.0) || !(self.tau_a > 0.0) {
            return Err("correlation times must be positive".into());
        }
        if !(self.gravity.is_finite()) {
            return Err("gravity must be finite".into());
        }
        if !(self.n_scale >= 0.0) {
            return Err(format!(
                "envelope scale must be nonnegative, got {}",
                self.n_scale
            ));
        }
        let weights: [(&str, &Mat, usize); 6] = [
            ("Q_a", &self.q_a, 6),
            ("R_a", &self.r_a, 3),
            ("Q_p", &self.q_p, 6),
            ("R_p", &self.r_p, 3),
            ("pi0_a", &self.pi0_a, 6),
            ("pi0_p", &self.pi0_p, 9),
        ];
        for (name, m, dim) in weights {
            if m.rows() != dim || m.cols() != dim {
                return Err(format!(
                    "{name} must be {dim}x{dim}, got {}x{}",
                    m.rows(),
                    m.cols()
                ));
            }
            if m.max_asymmetry() > 0.0 {
                return Err(format!("{name} must be symmetric"));
            }
            for i in 0..dim {
                if !(m[(i, i)] > 0.0) {
                    return Err(format!("{name} diagonal entry {i} must be positive"));
                }
            }
        }
        Ok(())
    }
}
