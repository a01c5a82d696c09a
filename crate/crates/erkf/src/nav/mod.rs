//! Multi-rate fusion of IMU and GPS streams.
//!
//! The attitude filter runs at the IMU rate (every epoch has an angle
//! measurement), while the position filter only gets a measurement when a
//! GPS fix arrives; between fixes the position estimate dead-reckons by
//! strapdown mechanization — rotating bias-corrected specific force into
//! the navigation frame, removing gravity, and integrating velocity into
//! geodetic coordinates. The scheduler also maintains the yaw offset `δψ`
//! between the IMU's magnetic heading and the GPS course, re-measured at
//! every fix.
//!
//! A driver feeds epochs in timestamp order: [`FusionState::process_imu_epoch`]
//! for every IMU sample, and [`FusionState::process_gps_epoch`] additionally
//! at the first IMU epoch at or after each GPS timestamp. Each call returns
//! one [`EstimateRecord`]; at a fix epoch the update record replaces the
//! dead-reckoned one, so the output stays on the IMU time grid.

use crate::filter::{erkf_step, Backend, FilterError, FilterState};
use crate::models::{
    build_attitude_model, build_position_model, dcm_ned_to_body, measurement_attitude,
    omega_matrix, psi_matrix, wrap_angle, AttitudeState, GpsSample, ImuSample, ModelConfig,
    ModelError, PositionState,
};

/// Errors raised by the fusion scheduler.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FusionError {
    /// Kinematic-map failure propagated from model construction.
    #[error(transparent)]
    Model(#[from] ModelError),
    /// Numerical or validation failure propagated from a filter step.
    #[error(transparent)]
    Filter(#[from] FilterError),
    /// An epoch arrived out of timestamp order.
    #[error("time order violated: {0}")]
    TimeOrder(String),
}

/// How an estimate record was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    /// A position-filter measurement update ran at this epoch.
    ErkfUpdate,
    /// Dead reckoning only; no GPS fix at this epoch.
    InsPropagated,
}

impl Source {
    /// Stable tag used in serialized output.
    pub fn as_str(self) -> &'static str {
        match self {
            Source::ErkfUpdate => "ERKF_UPDATE",
            Source::InsPropagated => "INS_PROPAGATED",
        }
    }
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One fused estimate, emitted once per IMU epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    /// Epoch timestamp (s); strictly increasing across a run.
    pub t: f64,
    /// Filtered Euler angles `(φ, θ, ψ)` (rad), yaw wrapped to `(−π, π]`.
    pub attitude: [f64; 3],
    /// Geodetic position `(λ, l, h)` — latitude, longitude (rad), altitude (m).
    pub position: [f64; 3],
    /// NED velocity (m/s).
    pub velocity: [f64; 3],
    /// Whether this epoch carried a position measurement update.
    pub source: Source,
}

/// Scheduler state for one fusion run.
///
/// `ins_position` carries the live position estimate between fixes; the
/// stored `pos_filter` keeps the covariance current every epoch (and the
/// last update's one-step prediction, which the mechanization supersedes).
/// Immediately after [`FusionState::process_gps_epoch`], `ins_position`
/// equals the filtered output exactly.
#[derive(Debug, Clone)]
pub struct FusionState {
    /// Attitude-filter prior for the next epoch (6-dim).
    pub att_filter: FilterState,
    /// Position-filter state (9-dim): current covariance and the last
    /// update's one-step prediction.
    pub pos_filter: FilterState,
    /// Yaw offset added to the IMU heading, re-measured at each fix (rad).
    pub delta_psi: f64,
    /// Timestamp of the last processed GPS fix, if any.
    pub last_gps_t: Option<f64>,
    /// Dead-reckoned position estimate, reset to the filtered output at
    /// each fix.
    pub ins_position: PositionState,
    backend: Backend,
    /// Filtered attitude from the most recent epoch; linearization point
    /// for the position model and the mechanization rotation.
    att_estimate: AttitudeState,
    last_imu_t: Option<f64>,
    /// Set after a fix: the update already produced the next epoch's
    /// covariance, so the next epoch must not advance it again.
    cov_lead: bool,
}

impl FusionState {
    /// Anchor a new run on the first sample of each stream.
    ///
    /// Attitude starts at the first IMU angles with the yaw re-based onto
    /// the GPS heading through `δψ = wrap(ψ_GPS − ψ_IMU)`; position starts
    /// at the first fix. Velocities and both bias estimates start at zero,
    /// and both covariances start at the configured `Π₀`. The anchoring
    /// samples should still be processed as ordinary epochs afterwards.
    pub fn initialize(
        imu0: &ImuSample,
        gps0: &GpsSample,
        backend: Backend,
        cfg: &ModelConfig,
    ) -> FusionState {
        let delta_psi = wrap_angle(gps0.yaw_gps - imu0.angles_imu[2]);
        let att = AttitudeState {
            phi: imu0.angles_imu[0],
            theta: imu0.angles_imu[1],
            psi: wrap_angle(imu0.angles_imu[2] + delta_psi),
            bias_g: [0.0; 3],
        };
        let pos = PositionState {
            lat: gps0.pos_lla[0],
            lon: gps0.pos_lla[1],
            alt: gps0.pos_lla[2],
            vel_ned: [0.0; 3],
            bias_a: [0.0; 3],
        };
        FusionState {
            att_filter: FilterState::new(att.to_vec(), cfg.pi0_a.clone()),
            pos_filter: FilterState::new(pos.to_vec(), cfg.pi0_p.clone()),
            delta_psi,
            last_gps_t: None,
            ins_position: pos,
            backend,
            att_estimate: att,
            last_imu_t: None,
            // Π₀ is already the prior for the first epoch; nothing to advance.
            cov_lead: true,
        }
    }

    /// Run one IMU epoch: attitude update, then dead reckoning.
    ///
    /// In order: (1) advance the position covariance by one prediction,
    /// `P ← F P Fᵀ + G Q Gᵀ`, linearized at the previous epoch's estimates
    /// (skipped right after a fix, whose update already emitted it);
    /// (2) run the attitude filter on the measured angles with the yaw
    /// re-based through `δψ` and re-branched next to the prior, so the
    /// residual never sees a `2π` seam, then re-propagate the angle block
    /// of the next prior through the nonlinear rate map at the filtered
    /// estimate; (3) mechanize: rotate bias-corrected specific force into
    /// NED, add gravity, integrate velocity first and then position
    /// through `T·Ψ`.
    pub fn process_imu_epoch(
        &mut self,
        imu: &ImuSample,
        cfg: &ModelConfig,
    ) -> Result<EstimateRecord, FusionError> {
        if let Some(tp) = self.last_imu_t {
            if imu.t <= tp {
                return Err(FusionError::TimeOrder(format!(
                    "IMU epoch {} does not follow previous epoch {tp}",
                    imu.t
                )));
            }
        }

        // (1) Position covariance advance, linearized at the epoch the
        // transition starts from.
        if self.cov_lead {
            self.cov_lead = false;
        } else {
            let model = build_position_model(&self.ins_position, &self.att_estimate, cfg)?;
            let fp = model.f.matmul(&self.pos_filter.p_pred).matmul(&model.f.transpose());
            let gq = model.g.matmul(&model.q_cov).matmul(&model.g.transpose());
            let mut p_next = fp;
            for i in 0..p_next.rows() {
                for j in 0..p_next.cols() {
                    p_next[(i, j)] += gq[(i, j)];
                }
            }
            self.pos_filter.p_pred = p_next.symmetrized();
        }

        // (2) Attitude update. The stored prior yaw is wrapped first —
        // safe because nothing in the model depends on the yaw branch —
        // and the measured yaw is moved to the branch nearest the prior.
        self.att_filter.x_pred[2] = wrap_angle(self.att_filter.x_pred[2]);
        let att_prior = AttitudeState::from_vec(&self.att_filter.x_pred);
        let model = build_attitude_model(&att_prior, imu, cfg)?;
        let mut z = measurement_attitude(imu, self.delta_psi);
        z[2] = att_prior.psi + wrap_angle(z[2] - att_prior.psi);
        let out = erkf_step(self.backend, &model, &self.att_filter, &z)?;
        let mut filtered = AttitudeState::from_vec(&out.x_filtered);
        filtered.psi = wrap_angle(filtered.psi);
        self.att_estimate = filtered;
        self.att_filter = out.into_next_state();
        // The step's linear prediction `F x̂` carries only the Jacobian of
        // the rate map, not the rates themselves, so the angle block of the
        // next prior is re-propagated through the nonlinear flow at the
        // filtered estimate: angles ← angles + T·Ω(φ,θ)·(ω − b̂). The
        // covariance keeps the step's linearized advance.
        let w_corr = [
            imu.gyro[0] - filtered.bias_g[0],
            imu.gyro[1] - filtered.bias_g[1],
            imu.gyro[2] - filtered.bias_g[2],
        ];
        let rate = omega_matrix(filtered.phi, filtered.theta)?.matvec(&w_corr);
        self.att_filter.x_pred[0] = filtered.phi + cfg.dt * rate[0];
        self.att_filter.x_pred[1] = filtered.theta + cfg.dt * rate[1];
        self.att_filter.x_pred[2] = filtered.psi + cfg.dt * rate[2];

        // (3) Strapdown mechanization: υ ← υ + T(g_e + Aᵀ(a − b̂_a)),
        // then p ← p + T·Ψ·υ with the updated velocity.
        let a = dcm_ned_to_body(filtered.phi, filtered.theta, filtered.psi);
        let mut f_ned = [0.0f64; 3];
        for i in 0..3 {
            let mut sum = 0.0;
            for j in 0..3 {
                sum += a[(j, i)] * (imu.accel[j] - self.ins_position.bias_a[j]);
            }
            f_ned[i] = sum;
        }
        let t = cfg.dt;
        let g_e = [0.0, 0.0, cfg.gravity];
        for i in 0..3 {
            self.ins_position.vel_ned[i] += t * (g_e[i] + f_ned[i]);
        }
        let psi_map = psi_matrix(self.ins_position.lat, self.ins_position.alt)?;
        let dp = psi_map.matvec(&self.ins_position.vel_ned);
        self.ins_position.lat += t * dp[0];
        self.ins_position.lon += t * dp[1];
        self.ins_position.alt += t * dp[2];

        self.last_imu_t = Some(imu.t);
        Ok(EstimateRecord {
            t: imu.t,
            attitude: [filtered.phi, filtered.theta, filtered.psi],
            position: [
                self.ins_position.lat,
                self.ins_position.lon,
                self.ins_position.alt,
            ],
            velocity: self.ins_position.vel_ned,
            source: Source::InsPropagated,
        })
    }

    /// Run the position update riding on the current IMU epoch.
    ///
    /// Re-measures `δψ = wrap(ψ_GPS − ψ_IMU)` from the raw IMU heading at
    /// this epoch, runs the position filter on the fix with the mechanized
    /// state and current covariance as the prior, and resets the
    /// dead-reckoning state to the filtered output. The returned record
    /// replaces this epoch's dead-reckoned record in the output stream.
    pub fn process_gps_epoch(
        &mut self,
        gps: &GpsSample,
        imu_yaw: f64,
        cfg: &ModelConfig,
    ) -> Result<EstimateRecord, FusionError> {
        let epoch_t = self.last_imu_t.ok_or_else(|| {
            FusionError::TimeOrder(format!(
                "GPS fix at {} arrived before any IMU epoch",
                gps.t
            ))
        })?;
        if gps.t > epoch_t {
            return Err(FusionError::TimeOrder(format!(
                "GPS fix at {} is ahead of the current IMU epoch {epoch_t}",
                gps.t
            )));
        }
        if epoch_t - gps.t > cfg.dt {
            return Err(FusionError::TimeOrder(format!(
                "GPS fix at {} missed its IMU epoch (now at {epoch_t})",
                gps.t
            )));
        }
        if let Some(tp) = self.last_gps_t {
            if gps.t <= tp {
                return Err(FusionError::TimeOrder(format!(
                    "GPS fix at {} does not follow previous fix {tp}",
                    gps.t
                )));
            }
        }

        self.delta_psi = wrap_angle(gps.yaw_gps - imu_yaw);

        let model = build_position_model(&self.ins_position, &self.att_estimate, cfg)?;
        let prior = FilterState::new(self.ins_position.to_vec(), self.pos_filter.p_pred.clone());
        let out = erkf_step(self.backend, &model, &prior, &gps.pos_lla)?;

        self.ins_position = PositionState::from_vec(&out.x_filtered);
        self.pos_filter = out.into_next_state();
        self.cov_lead = true;
        self.last_gps_t = Some(gps.t);

        Ok(EstimateRecord {
            t: epoch_t,
            attitude: [
                self.att_estimate.phi,
                self.att_estimate.theta,
                self.att_estimate.psi,
            ],
            position: [
                self.ins_position.lat,
                self.ins_position.lon,
                self.ins_position.alt,
            ],
            velocity: self.ins_position.vel_ned,
            source: Source::ErkfUpdate,
        })
    }
}
