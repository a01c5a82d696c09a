//! Frame transformations shared by the attitude and position systems:
//! the Euler-rate map `Ω`, its partial derivatives, the geodetic
//! velocity map `Ψ` with its WGS-84 curvature radii, the NED-to-body
//! rotation, and angle wrapping.

use super::{ModelError, SINGULARITY_GUARD, WGS84_A, WGS84_E2};
use crate::linalg::Mat;
use std::f64::consts::PI;

/// Map from body angular rates to Euler-angle rates.
///
/// ```text
///         ⎡ 1   sinφ·tanθ   cosφ·tanθ ⎤
/// Ω(φ,θ) = ⎢ 0   cosφ       −sinφ      ⎥
///         ⎣ 0   sinφ·secθ   cosφ·secθ ⎦
/// ```
///
/// Singular at pitch ±π/2; rejected inside the guard band.
pub fn omega_matrix(phi: f64, theta: f64) -> Result<Mat, ModelError> {
    check_pitch(theta)?;
    let (sp, cp) = (phi.sin(), phi.cos());
    let (tt, ct) = (theta.tan(), theta.cos());
    Ok(Mat::from_rows(&[
        vec![1.0, sp * tt, cp * tt],
        vec![0.0, cp, -sp],
        vec![0.0, sp / ct, cp / ct],
    ]))
}

/// Jacobian of `Ω(φ,θ)·w` with respect to the Euler angles `(φ, θ, ψ)`.
///
/// Columns are `∂(Ωw)/∂φ` and `∂(Ωw)/∂θ`; the third column is zero
/// because `Ω` does not depend on yaw. `w` is the bias-corrected body
/// rate about which the attitude dynamics are linearized.
pub fn attitude_jacobian(phi: f64, theta: f64, w: &[f64; 3]) -> Result<Mat, ModelError> {
    check_pitch(theta)?;
    let (sp, cp) = (phi.sin(), phi.cos());
    let (st, ct) = (theta.sin(), theta.cos());
    let (tt, sec2) = (st / ct, 1.0 / (ct * ct));
    // ∂Ω/∂φ and ∂Ω/∂θ, each applied to w.
    let d_phi = [
        cp * tt * w[1] - sp * tt * w[2],
        -sp * w[1] - cp * w[2],
        cp / ct * w[1] - sp / ct * w[2],
    ];
    let d_theta = [
        sp * sec2 * w[1] + cp * sec2 * w[2],
        0.0,
        sp * st * sec2 * w[1] + cp * st * sec2 * w[2],
    ];
    let mut j = Mat::zeros(3, 3);
    for i in 0..3 {
        j[(i, 0)] = d_phi[i];
        j[(i, 1)] = d_theta[i];
    }
    Ok(j)
}

/// Meridian radius of curvature `R_λ` (m) on the WGS-84 ellipsoid.
pub fn meridian_radius(lat: f64) -> f64 {
    let s2 = lat.sin() * lat.sin();
    WGS84_A * (1.0 - WGS84_E2) / (1.0 - WGS84_E2 * s2).powf(1.5)
}

/// Transverse radius of curvature `R_φ` (m) on the WGS-84 ellipsoid.
pub fn transverse_radius(lat: f64) -> f64 {
    let s2 = lat.sin() * lat.sin();
    WGS84_A / (1.0 - WGS84_E2 * s2).sqrt()
}

/// Map from NED velocity to geodetic position rates.
///
/// ```text
///            ⎡ 1/(R_λ+h)          0          0 ⎤
/// Ψ(λ,h) =   ⎢ 0          1/((R_φ+h)·cosλ)   0 ⎥
///            ⎣ 0                  0         −1 ⎦
/// ```
///
/// Singular at the poles; rejected inside the guard band.
pub fn psi_matrix(lat: f64, alt: f64) -> Result<Mat, ModelError> {
    if lat.abs() >= PI / 2.0 - SINGULARITY_GUARD {
        return Err(ModelError::SingularLatitude(lat));
    }
    let mut psi = Mat::zeros(3, 3);
    psi[(0, 0)] = 1.0 / (meridian_radius(lat) + alt);
    psi[(1, 1)] = 1.0 / ((transverse_radius(lat) + alt) * lat.cos());
    psi[(2, 2)] = -1.0;
    Ok(psi)
}

/// Rotation from the NED frame to the body frame, yaw-pitch-roll
/// (Z-Y-X) Euler sequence.
pub fn dcm_ned_to_body(phi: f64, theta: f64, psi: f64) -> Mat {
    let (sp, cp) = (phi.sin(), phi.cos());
    let (st, ct) = (theta.sin(), theta.cos());
    let (ss, cs) = (psi.sin(), psi.cos());
    Mat::from_rows(&[
        vec![ct * cs, ct * ss, -st],
        vec![sp * st * cs - cp * ss, sp * st * ss + cp * cs, sp * ct],
        vec![cp * st * cs + sp * ss, cp * st * ss - sp * cs, cp * ct],
    ])
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    PI - (PI - x).rem_euclid(2.0 * PI)
}

fn check_pitch(theta: f64) -> Result<(), ModelError> {
    if theta.abs() >= PI / 2.0 - SINGULARITY_GUARD {
        return Err(ModelError::SingularAttitude(theta));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Deterministic angle sequence spread over the valid range.
    fn angle_grid(count: usize, span: f64) -> Vec<f64> {
        (0..count)
            .map(|i| span * (2.0 * (i as f64 + 0.5) / count as f64 - 1.0))
            .collect()
    }

    #[test]
    fn omega_is_identity_at_level_attitude() {
        let w = omega_matrix(0.0, 0.0).unwrap();
        assert_eq!(w, Mat::identity(3));
    }

    #[test]
    fn omega_at_quarter_roll_matches_hand_value() {
        let w = omega_matrix(PI / 2.0, 0.0).unwrap();
        let expect = Mat::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 0.0, -1.0],
            vec![0.0, 1.0, 0.0],
        ]);
        assert!(w.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn omega_rejects_pitch_inside_guard_band() {
        let r = omega_matrix(0.0, PI / 2.0 - 1e-9);
        assert!(matches!(r, Err(ModelError::SingularAttitude(_))));
        assert!(omega_matrix(0.0, -PI / 2.0 + 1e-9).is_err());
    }

    #[test]
    fn omega_entries_match_elementwise_formulas_on_grid() {
        for &phi in &angle_grid(40, PI) {
            for &theta in &angle_grid(25, PI / 2.0 - 1e-3) {
                let w = omega_matrix(phi, theta).unwrap();
                assert_eq!(w[(0, 0)], 1.0);
                assert_eq!(w[(1, 0)], 0.0);
                assert_eq!(w[(2, 0)], 0.0);
                assert_eq!(w[(0, 1)], phi.sin() * theta.tan());
                assert_eq!(w[(0, 2)], phi.cos() * theta.tan());
                assert_eq!(w[(1, 1)], phi.cos());
                assert_eq!(w[(1, 2)], -phi.sin());
                assert_eq!(w[(2, 1)], phi.sin() / theta.cos());
                assert_eq!(w[(2, 2)], phi.cos() / theta.cos());
            }
        }
    }

    #[test]
    fn attitude_jacobian_matches_central_differences() {
        let cases = [
            (0.3, -0.4, [0.2, -0.1, 0.5]),
            (-1.2, 0.9, [0.01, 0.02, -0.03]),
            (2.8, -1.1, [1.0, -2.0, 0.7]),
        ];
        for (phi, theta, w) in cases {
            let j = attitude_jacobian(phi, theta, &w).unwrap();
            let h = 1e-6;
            let map = |ph: f64, th: f64| omega_matrix(ph, th).unwrap().matvec(&w);
            let d_phi: Vec<f64> = map(phi + h, theta)
                .iter()
                .zip(map(phi - h, theta))
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let d_theta: Vec<f64> = map(phi, theta + h)
                .iter()
                .zip(map(phi, theta - h))
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect();
            let scale = j.max_abs().max(1.0);
            for i in 0..3 {
                assert!((j[(i, 0)] - d_phi[i]).abs() < 1e-6 * scale);
                assert!((j[(i, 1)] - d_theta[i]).abs() < 1e-6 * scale);
                assert_eq!(j[(i, 2)], 0.0);
            }
        }
    }

    #[test]
    fn psi_diagonal_at_equator_matches_curvature_radii() {
        let psi = psi_matrix(0.0, 0.0).unwrap();
        // At the equator the meridian radius reduces to a(1−e²).
        let r_meridian = WGS84_A * (1.0 - WGS84_E2);
        assert!((psi[(0, 0)] - 1.0 / r_meridian).abs() < 1e-22);
        assert!((psi[(1, 1)] - 1.0 / WGS84_A).abs() < 1e-22);
        assert_eq!(psi[(2, 2)], -1.0);
    }

    #[test]
    fn psi_at_sixty_degrees_matches_independent_evaluation() {
        let lat = PI / 3.0;
        let psi = psi_matrix(lat, 100.0).unwrap();
        // Re-derive the transverse radius from scratch.
        let s = lat.sin();
        let r_t = 6_378_137.0 / (1.0 - 6.69437999014e-3 * s * s).sqrt();
        let expect = 1.0 / ((r_t + 100.0) * lat.cos());
        assert!((psi[(1, 1)] - expect).abs() < 1e-20);
    }

    #[test]
    fn psi_is_diagonal_with_fixed_down_entry() {
        for &lat in &angle_grid(50, PI / 2.0 - 1e-3) {
            for &alt in &[-100.0, 0.0, 500.0, 1e4] {
                let psi = psi_matrix(lat, alt).unwrap();
                assert_eq!(psi[(2, 2)], -1.0);
                for i in 0..3 {
                    for j in 0..3 {
                        if i != j {
                            assert_eq!(psi[(i, j)], 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn psi_rejects_latitude_near_pole() {
        assert!(matches!(
            psi_matrix(PI / 2.0 - 1e-9, 0.0),
            Err(ModelError::SingularLatitude(_))
        ));
    }

    #[test]
    fn dcm_is_identity_at_zero_angles() {
        assert_eq!(dcm_ned_to_body(0.0, 0.0, 0.0), Mat::identity(3));
    }

    #[test]
    fn dcm_quarter_yaw_points_body_x_east() {
        let a = dcm_ned_to_body(0.0, 0.0, PI / 2.0);
        let expect = Mat::from_rows(&[
            vec![0.0, 1.0, 0.0],
            vec![-1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ]);
        assert!(a.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn dcm_is_orthogonal_for_random_angles() {
        let mut x = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64 * 2.0 * PI - PI
        };
        for _ in 0..200 {
            let a = dcm_ned_to_body(next(), next(), next());
            let prod = a.matmul(&a.transpose());
            assert!(prod.max_abs_diff(&Mat::identity(3)) < 1e-12);
        }
    }

    #[test]
    fn wrap_angle_lands_in_half_open_interval() {
        assert!((wrap_angle(3.5) - (3.5 - 2.0 * PI)).abs() < 1e-15);
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert_eq!(wrap_angle(0.0), 0.0);
        for k in -8i32..=8 {
            let x = 0.77 + 2.0 * PI * k as f64;
            let w = wrap_angle(x);
            assert!(w > -PI && w <= PI);
            assert!((w - 0.77).abs() < 1e-12);
        }
    }
}
