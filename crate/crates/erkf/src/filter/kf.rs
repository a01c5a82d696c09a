//! Reference standard Kalman recursion in predicted-estimator form.

use super::{FilterError, FilterState, StepOutput, UncertainModel};
use crate::linalg::Mat;

/// One step of the nominal-system Kalman filter.
///
/// Coded independently of the augmented-system machinery — the only
/// shared ingredient is the dense matrix container, and the innovation
/// system is solved by a local Cholesky factorization rather than either
/// step backend — so it can serve as an external reference when probing
/// the weak-uncertainty behavior of the robust step. Envelope rows and
/// the nonlinear measurement map are ignored.
///
/// With `S = H P Hᵀ + K R Kᵀ` and gain `W = P Hᵀ S⁻¹`:
/// `x̂_{k|k} = x̂ + W (z − H x̂)`, `x̂_{k+1|k} = F x̂_{k|k}`, and
/// `P_{k+1|k} = F (P − W H P) Fᵀ + G Q Gᵀ`.
pub fn kalman_predict_step(
    model: &UncertainModel,
    state: &FilterState,
    z: &[f64],
) -> Result<StepOutput, FilterError> {
    model.validate()?;
    state.validate(model.n)?;
    let (n, p) = (model.n, model.p);
    if z.len() != p {
        return Err(FilterError::Model(format!(
            "measurement length {} does not match p = {p}",
            z.len()
        )));
    }
    let p_mat = state.p_pred.symmetrized();
    let hp = model.h.matmul(&p_mat);
    let kr = model.k.matmul(&model.r_cov.symmetrized());
    let s = mat_add(
        &hp.matmul(&model.h.transpose()),
        &kr.matmul(&model.k.transpose()),
    )
    .symmetrized();
    let l = cholesky(&s).ok_or_else(|| {
        FilterError::Model("innovation covariance is not positive definite".into())
    })?;
    // Gain W = P Hᵀ S⁻¹, computed as Wᵀ = S⁻¹ (H P) one column at a time.
    let mut gain = Mat::zeros(n, p);
    for col in 0..n {
        let rhs: Vec<f64> = (0..p).map(|r| hp[(r, col)]).collect();
        let sol = cholesky_solve(&l, &rhs);
        for r in 0..p {
            gain[(col, r)] = sol[r];
        }
    }
    let hx = model.h.matvec(&state.x_pred);
    let innovation: Vec<f64> = (0..p).map(|i| z[i] - hx[i]).collect();
    let correction = gain.matvec(&innovation);
    let x_filtered: Vec<f64> = (0..n).map(|i| state.x_pred[i] + correction[i]).collect();
    let x_pred_next = model.f.matvec(&x_filtered);
    let p_filtered = mat_sub(&p_mat, &gain.matmul(&hp));
    let gq = model.g.matmul(&model.q_cov.symmetrized());
    let p_pred_next = mat_add(
        &model.f.matmul(&p_filtered).matmul(&model.f.transpose()),
        &gq.matmul(&model.g.transpose()),
    )
    .symmetrized();
    Ok(StepOutput {
        x_filtered,
        x_pred_next,
        p_pred_next,
    })
}

fn mat_add(a: &Mat, b: &Mat) -> Mat {
    let mut out = a.clone();
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            out[(r, c)] += b[(r, c)];
        }
    }
    out
}

fn mat_sub(a: &Mat, b: &Mat) -> Mat {
    let mut out = a.clone();
    for r in 0..b.rows() {
        for c in 0..b.cols() {
            out[(r, c)] -= b[(r, c)];
        }
    }
    out
}

/// Lower Cholesky factor of a symmetric positive-definite matrix, or
/// `None` when a pivot is nonpositive.
fn cholesky(a: &Mat) -> Option<Mat> {
    let n = a.rows();
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

/// Solve `L Lᵀ x = b` by forward then backward substitution.
fn cholesky_solve(l: &Mat, b: &[f64]) -> Vec<f64> {
    let n = l.rows();
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[(i, k)] * y[k];
        }
        y[i] = sum / l[(i, i)];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[(k, i)] * x[k];
        }
        x[i] = sum / l[(i, i)];
    }
    x
}
