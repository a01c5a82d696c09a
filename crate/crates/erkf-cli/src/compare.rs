//! Backend equivalence audit: run both solver paths in lockstep.
//!
//! The rotation backend and the explicit-inversion backend implement the
//! same recursion, so on identical inputs their covariances must agree to
//! roundoff. This module drives one fusion pass with both backends side by
//! side and records the extreme singular values of every produced
//! covariance — the attitude filter's after each IMU epoch, the position
//! filter's after each fix — then compares them against a threshold.

use erkf::filter::Backend;
use erkf::linalg::singular_value_extrema;
use erkf::models::{GpsSample, ImuSample, ModelConfig};
use erkf::nav::FusionState;

use crate::pipeline::{validate_streams, PipelineError};

/// Extreme singular values of one covariance under both backends.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    /// Epoch timestamp (s).
    pub t: f64,
    /// Which filter produced the covariance: `attitude` or `position`.
    pub system: &'static str,
    /// Largest singular value, rotation backend.
    pub smax_givens: f64,
    /// Largest singular value, inversion backend.
    pub smax_inv: f64,
    /// Smallest singular value, rotation backend.
    pub smin_givens: f64,
    /// Smallest singular value, inversion backend.
    pub smin_inv: f64,
    /// `|smax_givens − smax_inv|`.
    pub dmax: f64,
    /// `|smin_givens − smin_inv|`.
    pub dmin: f64,
}

/// Verdict of one lockstep comparison run.
#[derive(Debug, Clone)]
pub struct CompareOutcome {
    /// One row per covariance produced during the run.
    pub rows: Vec<CompareRow>,
    /// Largest singular-value discrepancy seen anywhere.
    pub max_delta: f64,
    /// The acceptance threshold the verdict used.
    pub threshold: f64,
    /// `max_delta < threshold`.
    pub pass: bool,
}

impl std::fmt::Display for CompareOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: max singular-value discrepancy {:.3e} across {} covariances (threshold {:.3e})",
            if self.pass { "PASS" } else { "FAIL" },
            self.max_delta,
            self.rows.len(),
            self.threshold
        )
    }
}

fn row(
    t: f64,
    system: &'static str,
    p_givens: &erkf::linalg::Mat,
    p_inv: &erkf::linalg::Mat,
) -> Result<CompareRow, PipelineError> {
    let (smax_givens, smin_givens) = singular_value_extrema(p_givens)?;
    let (smax_inv, smin_inv) = singular_value_extrema(p_inv)?;
    Ok(CompareRow {
        t,
        system,
        smax_givens,
        smax_inv,
        smin_givens,
        smin_inv,
        dmax: (smax_givens - smax_inv).abs(),
        dmin: (smin_givens - smin_inv).abs(),
    })
}

/// Run both backends over the same streams and compare every covariance.
pub fn compare_backends(
    imu: &[ImuSample],
    gps: &[GpsSample],
    cfg: &ModelConfig,
    threshold: f64,
) -> Result<CompareOutcome, PipelineError> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(PipelineError::Scheduler(format!(
            "comparison threshold {threshold} must be positive"
        )));
    }
    validate_streams(imu, gps, cfg)?;
    if gps.is_empty() {
        return Err(PipelineError::Scheduler(
            "backend comparison needs at least one GPS fix".into(),
        ));
    }

    let mut givens = FusionState::initialize(&imu[0], &gps[0], Backend::Givens, cfg);
    let mut inverse = FusionState::initialize(&imu[0], &gps[0], Backend::Inverse, cfg);

    let mut rows = Vec::with_capacity(imu.len() + gps.len());
    let mut next_gps = 0usize;
    for sample in imu {
        givens.process_imu_epoch(sample, cfg)?;
        inverse.process_imu_epoch(sample, cfg)?;
        rows.push(row(
            sample.t,
            "attitude",
            &givens.att_filter.p_pred,
            &inverse.att_filter.p_pred,
        )?);
        while next_gps < gps.len() && gps[next_gps].t <= sample.t {
            let fix = &gps[next_gps];
            givens.process_gps_epoch(fix, sample.angles_imu[2], cfg)?;
            inverse.process_gps_epoch(fix, sample.angles_imu[2], cfg)?;
            rows.push(row(
                sample.t,
                "position",
                &givens.pos_filter.p_pred,
                &inverse.pos_filter.p_pred,
            )?);
            next_gps += 1;
        }
    }

    let max_delta = rows
        .iter()
        .flat_map(|r| [r.dmax, r.dmin])
        .fold(0.0f64, f64::max);
    Ok(CompareOutcome {
        rows,
        max_delta,
        threshold,
        pass: max_delta < threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SyntheticScenario, Trajectory};

    #[test]
    fn short_noisy_run_passes_at_the_acceptance_threshold() {
        let scn = SyntheticScenario::named(Trajectory::Circle, 2.0);
        let (imu, gps, _) = generate_synthetic(&scn, 5).unwrap();
        let cfg = ModelConfig::default();
        let outcome = compare_backends(&imu, &gps, &cfg, 1e-12).unwrap();

        // 800 attitude rows plus 20 position rows.
        assert_eq!(outcome.rows.len(), 820);
        assert_eq!(
            outcome.rows.iter().filter(|r| r.system == "position").count(),
            20
        );
        assert!(outcome.pass, "max delta {:.3e}", outcome.max_delta);
        assert!(outcome.max_delta < 1e-12);
        // The rows carry real spectra, not zeros.
        assert!(outcome.rows.iter().all(|r| r.smax_givens > 0.0));
        assert!(outcome
            .rows
            .iter()
            .all(|r| r.smin_givens <= r.smax_givens));
    }

    #[test]
    fn verdict_fails_when_the_threshold_is_unachievable() {
        let scn = SyntheticScenario::named(Trajectory::Straight, 1.0);
        let (imu, gps, _) = generate_synthetic(&scn, 5).unwrap();
        let cfg = ModelConfig::default();
        let outcome = compare_backends(&imu, &gps, &cfg, 1e-30).unwrap();
        assert!(!outcome.pass);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let scn = SyntheticScenario::named(Trajectory::Straight, 1.0);
        let (imu, gps, _) = generate_synthetic(&scn, 5).unwrap();
        let cfg = ModelConfig::default();
        assert!(compare_backends(&imu, &gps, &cfg, 0.0).is_err());
        assert!(compare_backends(&imu, &gps, &cfg, f64::NAN).is_err());
        assert!(compare_backends(&imu, &[], &cfg, 1e-12).is_err());
    }
}
