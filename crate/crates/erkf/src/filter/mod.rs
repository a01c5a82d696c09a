//! One filter step for uncertain state-space models: problem types, the
//! augmented-system assembly, and two interchangeable solver backends.
//!
//! A model describes the nominal system `x⁺ = F x + G w`, `z = H x + K v`
//! together with envelope rows `[N_F N_G]` and `[N_H N_K]` that bound the
//! directions in which the true matrices may deviate from the nominal
//! ones. Each step poses one symmetric saddle-point system whose solution
//! contains the filtered state, the one-step prediction, and the predicted
//! error covariance; see [`assemble_augmented`] for the block layout and
//! [`erkf_step_givens`] / [`erkf_step_oracle`] for the two ways the system
//! is solved.

mod assemble;
pub mod fixtures;
mod kf;
mod step;

pub use assemble::assemble_augmented;
pub use kf::kalman_predict_step;
pub use step::{
    erkf_step, erkf_step_givens, erkf_step_givens_counted, erkf_step_oracle,
    erkf_step_oracle_counted, flop_report, predicted_givens_flops, predicted_inverse_flops,
    FlopReport,
};

use crate::linalg::{eigenvalue_extrema, LinalgError, Mat};
use std::sync::Arc;

/// Relative tolerance on covariance symmetry, `max|P−Pᵀ| ≤ tol·max|P|`.
pub const SYMMETRY_REL_TOL: f64 = 1e-10;

/// Eigenvalue floor for the positive-semidefinite check, relative to the
/// largest singular value: `σ_min ≥ −PSD_REL_TOL · σ_max`.
pub const PSD_REL_TOL: f64 = 1e-10;

/// Errors raised by model validation and the step backends.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum FilterError {
    /// The model or prior state violates a documented precondition.
    #[error("invalid model: {0}")]
    Model(String),
    /// Numerical failure propagated from the linear-algebra kernels.
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Optional nonlinear measurement map `h(x)`; when present, the residual
/// in the right-hand side uses `z − h(x̂)` instead of `z − H x̂`.
pub type MeasurementFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Which backend solves the augmented system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Givens-rotation QR with partial back-substitution.
    Givens,
    /// Explicit inversion by Gaussian elimination (reference path).
    Inverse,
}

/// A discrete-time state-space model with norm-bounded uncertainty.
///
/// Nominal dynamics `x⁺ = F x + G w` and measurement `z = H x + K v`,
/// with `w ~ (0, Q)` and `v ~ (0, R)`. The true matrices are allowed to
/// deviate along the envelope rows: `u_F` rows `[N_F N_G]` for the state
/// equation and `u_H` rows `[N_H N_K]` for the measurement equation.
///
/// A concatenated envelope row that is identically zero declares the
/// corresponding equation free of modeled uncertainty: the assembly keeps
/// such a row vacuous (its multiplier solves to exactly zero) instead of
/// letting it zero out a row of the augmented system, so zeroing both
/// measurement rows recovers the standard Kalman step exactly. Scaling a
/// *nonzero* row, by contrast, changes nothing — each nonzero row enters
/// as an exact linear constraint whose scale is absorbed by its
/// multiplier — so only row directions matter, never magnitudes.
#[derive(Clone)]
pub struct UncertainModel {
    /// State dimension.
    pub n: usize,
    /// Process-noise dimension.
    pub q: usize,
    /// Measurement dimension.
    pub p: usize,
    /// State transition, `n × n`.
    pub f: Mat,
    /// Process-noise input, `n × q`.
    pub g: Mat,
    /// Measurement matrix, `p × n`.
    pub h: Mat,
    /// Measurement-noise input, `p × p`.
    pub k: Mat,
    /// Process-noise covariance, `q × q`, symmetric positive definite.
    pub q_cov: Mat,
    /// Measurement-noise covariance, `p × p`, symmetric positive definite.
    pub r_cov: Mat,
    /// State-equation envelope rows, `u_F × n`.
    pub n_f: Mat,
    /// Process-input envelope rows, `u_F × q`.
    pub n_g: Mat,
    /// Measurement envelope rows, `u_H × n`.
    pub n_h: Mat,
    /// Measurement-input envelope rows, `u_H × p`.
    pub n_k: Mat,
    /// Optional nonlinear measurement map for the residual.
    pub measurement_fn: Option<MeasurementFn>,
}

impl UncertainModel {
    /// Number of state-equation envelope rows.
    pub fn u_f(&self) -> usize {
        self.n_f.rows()
    }

    /// Number of measurement-equation envelope rows.
    pub fn u_h(&self) -> usize {
        self.n_h.rows()
    }

    /// Order of the augmented system this model assembles into.
    pub fn m_total(&self) -> usize {
        4 * self.n + 2 * (self.q + self.p) + self.p + self.u_f() + self.u_h()
    }

    /// Copy of the model with every envelope row multiplied by `eps`.
    ///
    /// Used to probe the weak-uncertainty limit. Note that the step output
    /// is invariant under positive row scaling: each nonzero envelope row
    /// enters the augmented system as an exact linear constraint, so its
    /// scale is absorbed by the corresponding Lagrange multiplier and only
    /// the row direction matters. The genuine no-uncertainty limit is a
    /// row of exact zeros, which the assembly treats as vacuous.
    pub fn with_scaled_envelopes(&self, eps: f64) -> UncertainModel {
        let mut out = self.clone();
        out.n_f = self.n_f.scale(eps);
        out.n_g = self.n_g.scale(eps);
        out.n_h = self.n_h.scale(eps);
        out.n_k = self.n_k.scale(eps);
        out
    }

    /// Check every documented model precondition.
    pub fn validate(&self) -> Result<(), FilterError> {
        let (n, q, p) = (self.n, self.q, self.p);
        if n == 0 || q == 0 || p == 0 {
            return Err(FilterError::Model("dimensions must be positive".into()));
        }
        let shapes: [(&str, &Mat, usize, usize); 10] = [
            ("F", &self.f, n, n),
            ("G", &self.g, n, q),
            ("H", &self.h, p, n),
            ("K", &self.k, p, p),
            ("Q", &self.q_cov, q, q),
            ("R", &self.r_cov, p, p),
            ("N_F", &self.n_f, self.u_f(), n),
            ("N_G", &self.n_g, self.u_f(), q),
            ("N_H", &self.n_h, self.u_h(), n),
            ("N_K", &self.n_k, self.u_h(), p),
        ];
        for (name, m, rows, cols) in shapes {
            if m.rows() != rows || m.cols() != cols {
                return Err(FilterError::Model(format!(
                    "{name} must be {rows}x{cols}, got {}x{}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.all_finite() {
                return Err(FilterError::Model(format!("{name} has non-finite entries")));
            }
        }
        if self.u_f() == 0 || self.u_h() == 0 {
            return Err(FilterError::Model(
                "need at least one envelope row per equation".into(),
            ));
        }
        for (name, m) in [("Q", &self.q_cov), ("R", &self.r_cov)] {
            if m.max_asymmetry() > SYMMETRY_REL_TOL * m.max_abs() {
                return Err(FilterError::Model(format!("{name} is not symmetric")));
            }
            for i in 0..m.rows() {
                if m[(i, i)] <= 0.0 {
                    return Err(FilterError::Model(format!(
                        "{name} diagonal entry {i} is not positive"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Contraction-bounded uncertainty description of a model.
///
/// The true matrices deviate from the nominal ones as
/// `[δF δG] = M₁ Δ₁ [N_F N_G]` and `[δH δK] = M₂ Δ₂ [N_H N_K]` with
/// `‖Δ₁‖ < 1` and `‖Δ₂‖ < 1`. The filter recursion consumes only the
/// `N` rows of [`UncertainModel`]; the left factors and contraction
/// bounds here drive synthetic data generation, where concrete
/// perturbations inside the envelope are sampled and injected.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyEnvelope {
    /// Left factor of the state-equation perturbation, `n × u_F`.
    pub m1: Mat,
    /// Left factor of the measurement-equation perturbation, `p × u_H`.
    pub m2: Mat,
    /// Norm bound on the state-equation contraction, strictly below 1.
    pub delta1_bound: f64,
    /// Norm bound on the measurement-equation contraction, strictly below 1.
    pub delta2_bound: f64,
}

impl UncertaintyEnvelope {
    /// Check that both contraction bounds are valid.
    pub fn validate(&self) -> Result<(), FilterError> {
        for (name, b) in [("delta1", self.delta1_bound), ("delta2", self.delta2_bound)] {
            if !(0.0..1.0).contains(&b) {
                return Err(FilterError::Model(format!(
                    "{name} bound must lie in [0, 1), got {b}"
                )));
            }
        }
        if !self.m1.all_finite() || !self.m2.all_finite() {
            return Err(FilterError::Model(
                "envelope left factor has non-finite entries".into(),
            ));
        }
        Ok(())
    }
}

/// Prior of one filter step: the predicted state and its covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    /// Predicted state estimate `x̂_{k|k−1}`.
    pub x_pred: Vec<f64>,
    /// Predicted error covariance `P_{k|k−1}`.
    pub p_pred: Mat,
}

impl FilterState {
    /// New prior from a state vector and covariance.
    pub fn new(x_pred: Vec<f64>, p_pred: Mat) -> FilterState {
        FilterState { x_pred, p_pred }
    }

    /// Check the prior invariants for state dimension `n`.
    pub fn validate(&self, n: usize) -> Result<(), FilterError> {
        if self.x_pred.len() != n || self.p_pred.rows() != n || self.p_pred.cols() != n {
            return Err(FilterError::Model(format!(
                "state dimension mismatch: expected {n}, got x of {} and P {}x{}",
                self.x_pred.len(),
                self.p_pred.rows(),
                self.p_pred.cols()
            )));
        }
        if !self.x_pred.iter().all(|v| v.is_finite()) || !self.p_pred.all_finite() {
            return Err(FilterError::Model("state has non-finite entries".into()));
        }
        if self.p_pred.max_asymmetry() > SYMMETRY_REL_TOL * self.p_pred.max_abs() {
            return Err(FilterError::Model("P is not symmetric".into()));
        }
        let (l_max, l_min) = eigenvalue_extrema(&self.p_pred)?;
        let scale = l_max.abs().max(l_min.abs());
        if l_min < -PSD_REL_TOL * scale {
            return Err(FilterError::Model(
                "P has a negative eigenvalue beyond tolerance".into(),
            ));
        }
        Ok(())
    }
}

/// The assembled saddle-point system `A y = B` for one step.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    /// Symmetric system matrix, `M × M`; equals its transpose exactly.
    pub a: Mat,
    /// Right-hand sides: column 0 drives the state solution, columns
    /// `1..=n` recover the predicted covariance.
    pub b: Mat,
    /// Start index of each of the seven block rows/columns.
    pub block_offsets: [usize; 7],
    /// Total system order, `4n + 2(q+p) + p + u_F + u_H`.
    pub m: usize,
}

/// Result of one filter step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    /// Filtered estimate `x̂_{k|k}`.
    pub x_filtered: Vec<f64>,
    /// One-step prediction `x̂_{k+1|k}`.
    pub x_pred_next: Vec<f64>,
    /// Predicted covariance `P_{k+1|k}`, symmetrized.
    pub p_pred_next: Mat,
}

impl StepOutput {
    /// The (state, covariance) pair as the next step's prior.
    pub fn into_next_state(self) -> FilterState {
        FilterState::new(self.x_pred_next, self.p_pred_next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn scalar_model() -> UncertainModel {
        UncertainModel {
            n: 1,
            q: 1,
            p: 1,
            f: Mat::identity(1),
            g: Mat::identity(1),
            h: Mat::identity(1),
            k: Mat::identity(1),
            q_cov: Mat::identity(1),
            r_cov: Mat::identity(1),
            n_f: Mat::from_rows(&[vec![1e-8]]),
            n_g: Mat::from_rows(&[vec![1e-8]]),
            n_h: Mat::from_rows(&[vec![0.0]]),
            n_k: Mat::from_rows(&[vec![1e-8]]),
            measurement_fn: None,
        }
    }

    #[test]
    fn valid_scalar_model_passes_validation() {
        assert!(scalar_model().validate().is_ok());
        assert_eq!(scalar_model().m_total(), 11);
    }

    #[test]
    fn zero_envelope_rows_are_valid() {
        // An all-zero [N_H N_K] row means "no measurement uncertainty";
        // validation accepts it and the assembly keeps it vacuous.
        let mut m = scalar_model();
        m.n_h = Mat::zeros(1, 1);
        m.n_k = Mat::zeros(1, 1);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn asymmetric_q_is_rejected() {
        let mut m = scalar_model();
        m.q = 2;
        m.g = Mat::zeros(1, 2);
        m.n_g = Mat::from_rows(&[vec![1e-8, 0.0]]);
        m.q_cov = Mat::from_rows(&[vec![1.0, 0.5], vec![0.0, 1.0]]);
        assert!(matches!(m.validate(), Err(FilterError::Model(_))));
    }

    #[test]
    fn state_validation_catches_indefinite_covariance() {
        let state = FilterState::new(vec![0.0, 0.0], Mat::from_diag(&[1.0, -1.0]));
        assert!(state.validate(2).is_err());
        let ok = FilterState::new(vec![0.0, 0.0], Mat::from_diag(&[1.0, 2.0]));
        assert!(ok.validate(2).is_ok());
    }

    #[test]
    fn uncertainty_envelope_rejects_bounds_of_one_or_more() {
        let env = UncertaintyEnvelope {
            m1: Mat::identity(2),
            m2: Mat::identity(1),
            delta1_bound: 0.3,
            delta2_bound: 1.0,
        };
        assert!(env.validate().is_err());
        let ok = UncertaintyEnvelope { delta2_bound: 0.99, ..env };
        assert!(ok.validate().is_ok());
    }

    #[test]
    fn envelope_scaling_is_applied_to_all_four_blocks() {
        let m = scalar_model().with_scaled_envelopes(10.0);
        assert!((m.n_f[(0, 0)] - 1e-7).abs() < 1e-20);
        assert!((m.n_g[(0, 0)] - 1e-7).abs() < 1e-20);
        assert_eq!(m.n_h[(0, 0)], 0.0);
        assert!((m.n_k[(0, 0)] - 1e-7).abs() < 1e-20);
    }
}
