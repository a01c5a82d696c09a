//! Singular-value extrema of symmetric matrices via cyclic Jacobi sweeps.

use super::{LinalgError, Mat, JACOBI_MAX_SWEEPS, JACOBI_REL_TOL};

/// Largest and smallest singular values of a (nearly) symmetric matrix.
///
/// For a symmetric matrix the singular values are the absolute
/// eigenvalues; this is [`eigenvalue_extrema`] with signs dropped.
/// Returns `(s_max, s_min)`.
pub fn singular_value_extrema(m: &Mat) -> Result<(f64, f64), LinalgError> {
    let eig = jacobi_eigenvalues(m)?;
    let mut s_max = 0.0f64;
    let mut s_min = f64::INFINITY;
    for v in eig {
        s_max = s_max.max(v.abs());
        s_min = s_min.min(v.abs());
    }
    Ok((s_max, s_min))
}

/// Largest and smallest eigenvalues of a (nearly) symmetric matrix,
/// with signs kept: returns `(λ_max, λ_min)`. Useful for definiteness
/// checks, where the sign of the extreme eigenvalue matters.
pub fn eigenvalue_extrema(m: &Mat) -> Result<(f64, f64), LinalgError> {
    let eig = jacobi_eigenvalues(m)?;
    let mut l_max = f64::NEG_INFINITY;
    let mut l_min = f64::INFINITY;
    for v in eig {
        l_max = l_max.max(v);
        l_min = l_min.min(v);
    }
    Ok((l_max, l_min))
}

/// Eigenvalues of the symmetrized input via cyclic Jacobi sweeps.
///
/// The input is symmetrized first, so tiny asymmetry left over from
/// floating-point accumulation does not matter. Rotations drive the
/// off-diagonal to zero; the diagonal is returned once every off-diagonal
/// entry is below `JACOBI_REL_TOL` relative to the Frobenius norm of the
/// input (computed once, up front).
fn jacobi_eigenvalues(m: &Mat) -> Result<Vec<f64>, LinalgError> {
    let n = m.rows();
    if m.cols() != n || n == 0 {
        return Err(LinalgError::DimensionMismatch(format!(
            "eigenvalues need a nonempty square matrix, got {}x{}",
            n,
            m.cols()
        )));
    }
    let mut a = m.symmetrized();
    let norm = a.frobenius_norm();
    if norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let tol = JACOBI_REL_TOL * norm;
    let max_offdiag = |a: &Mat| {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                off = off.max(a[(p, q)].abs());
            }
        }
        off
    };
    for _ in 0..JACOBI_MAX_SWEEPS {
        if max_offdiag(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                // Smaller-angle root of t^2 + 2t*theta - 1 = 0; for huge
                // theta the quadratic form would overflow, but the root
                // tends to 1/(2*theta) there.
                let t = if theta.abs() > 1e100 {
                    1.0 / (2.0 * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..n {
                    if i == p || i == q {
                        continue;
                    }
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    let rot_p = c * aip - s * aiq;
                    let rot_q = s * aip + c * aiq;
                    a[(i, p)] = rot_p;
                    a[(p, i)] = rot_p;
                    a[(i, q)] = rot_q;
                    a[(q, i)] = rot_q;
                }
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
            }
        }
    }
    if max_offdiag(&a) > tol {
        return Err(LinalgError::NoConvergence);
    }
    Ok((0..n).map(|i| a[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix_is_read_directly() {
        let m = Mat::from_diag(&[9.0, 4.0, 1.0]);
        assert_eq!(singular_value_extrema(&m).unwrap(), (9.0, 1.0));
    }

    #[test]
    fn two_by_two_coupled() {
        let m = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let (s_max, s_min) = singular_value_extrema(&m).unwrap();
        assert!((s_max - 3.0).abs() < 1e-12);
        assert!((s_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tridiagonal_three_by_three() {
        let m = Mat::from_rows(&[
            vec![4.0, 1.0, 0.0],
            vec![1.0, 4.0, 1.0],
            vec![0.0, 1.0, 4.0],
        ]);
        let (s_max, s_min) = singular_value_extrema(&m).unwrap();
        let root2 = 2.0f64.sqrt();
        assert!((s_max - (4.0 + root2)).abs() < 1e-12);
        assert!((s_min - (4.0 - root2)).abs() < 1e-12);
    }

    #[test]
    fn negative_eigenvalues_enter_by_magnitude() {
        let m = Mat::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]]);
        let (s_max, s_min) = singular_value_extrema(&m).unwrap();
        assert!((s_max - 2.0).abs() < 1e-12);
        assert!((s_min - 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_matrix_short_circuits() {
        assert_eq!(singular_value_extrema(&Mat::zeros(4, 4)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn asymmetric_input_is_symmetrized_first() {
        let m = Mat::from_rows(&[vec![2.0, 0.0], vec![2.0, 2.0]]);
        let (s_max, s_min) = singular_value_extrema(&m).unwrap();
        assert!((s_max - 3.0).abs() < 1e-12);
        assert!((s_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_square() {
        assert!(matches!(
            singular_value_extrema(&Mat::zeros(2, 3)),
            Err(LinalgError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn eigenvalue_extrema_keep_signs() {
        let m = Mat::from_diag(&[4.0, -7.0, 2.0]);
        assert_eq!(eigenvalue_extrema(&m).unwrap(), (4.0, -7.0));
        assert_eq!(singular_value_extrema(&m).unwrap(), (7.0, 2.0));
    }
}
