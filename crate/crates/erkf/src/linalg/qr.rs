//! QR triangularization by Givens rotations and tail back-substitution.

use super::{givens_coeffs, FlopCounter, LinalgError, Mat, PIVOT_REL_TOL};

/// Triangularize the augmented system `[A | b]` with Givens rotations.
///
/// `m_aug` must be `m × (m + 1)`; the last column is the right-hand side
/// and is carried through every rotation. Columns are processed left to
/// right and, within a column, entries are eliminated from the bottom row
/// upward, each rotated against the diagonal row. Entries that are already
/// exactly zero are skipped, so structurally sparse systems cost fewer
/// operations than dense ones. Rows are sign-flipped at the end so the
/// diagonal of `R` is nonnegative (sign flips cost no counted arithmetic).
///
/// Returns upper-triangular `R` (exact zeros below the diagonal) and the
/// transformed right-hand side `z`.
pub fn qr_triangularize(
    m_aug: &Mat,
    counter: &mut FlopCounter,
) -> Result<(Mat, Vec<f64>), LinalgError> {
    let m = m_aug.rows();
    if m_aug.cols() != m + 1 {
        return Err(LinalgError::DimensionMismatch(format!(
            "expected {m}x{} augmented matrix, got {m}x{}",
            m + 1,
            m_aug.cols()
        )));
    }
    let mut w = m_aug.clone();
    for j in 0..m {
        for i in (j + 1..m).rev() {
            let b = w[(i, j)];
            if b == 0.0 {
                continue;
            }
            let a = w[(j, j)];
            let g = givens_coeffs(a, b, counter);
            let (top, bot) = w.two_rows_mut(j, i);
            let len = (m + 1 - j) as u64;
            for k in j..=m {
                let x = top[k];
                let y = bot[k];
                top[k] = g.c * x + g.s * y;
                bot[k] = -g.s * x + g.c * y;
            }
            counter.mul(4 * len);
            counter.add(2 * len);
            w[(i, j)] = 0.0;
        }
    }
    for i in 0..m {
        if w[(i, i)] < 0.0 {
            let row = w.row_mut(i);
            for v in row[i..].iter_mut() {
                *v = -*v;
            }
        }
    }
    let mut r = Mat::zeros(m, m);
    let mut z = vec![0.0; m];
    for i in 0..m {
        r.row_mut(i).copy_from_slice(&w.row(i)[..m]);
        z[i] = w[(i, m)];
    }
    Ok((r, z))
}

/// Solve for the trailing `tail` unknowns of `R y = z` only.
///
/// `R` must be upper triangular with nonzero pivots in its last `tail`
/// rows; earlier pivots are never touched, so a rank-deficient leading
/// block does not prevent recovering a well-determined tail. A pivot is
/// treated as singular when it is negligible relative to its own row's
/// largest entry — not relative to the whole matrix, because systems
/// assembled from mixed physical units legitimately carry rows that are
/// uniformly many decades smaller than others. The returned vector holds
/// `y[m - tail .. m]` in order and is bit-identical to the corresponding
/// slice of a full back-substitution.
pub fn back_substitute_tail(
    r: &Mat,
    z: &[f64],
    tail: usize,
    counter: &mut FlopCounter,
) -> Result<Vec<f64>, LinalgError> {
    let m = r.rows();
    if r.cols() != m || z.len() != m {
        return Err(LinalgError::DimensionMismatch(format!(
            "triangular solve wants square R and matching z, got {}x{} with z of {}",
            m,
            r.cols(),
            z.len()
        )));
    }
    if tail == 0 || tail > m {
        return Err(LinalgError::DimensionMismatch(format!(
            "tail {tail} out of range for order {m}"
        )));
    }
    let base = m - tail;
    let mut y = vec![0.0; tail];
    for i in (base..m).rev() {
        let row = r.row(i);
        let mut sum = z[i];
        for k in i + 1..m {
            sum -= row[k] * y[k - base];
        }
        counter.mul((m - 1 - i) as u64);
        counter.add((m - 1 - i) as u64);
        let pivot = row[i];
        let row_scale = row[i..m].iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if pivot.abs() <= PIVOT_REL_TOL * row_scale {
            return Err(LinalgError::SingularPivot(i));
        }
        y[i - base] = sum / pivot;
        counter.div(1);
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system_needs_no_rotations() {
        let m_aug = Mat::from_rows(&[
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
        ]);
        let mut fc = FlopCounter::new();
        let (r, z) = qr_triangularize(&m_aug, &mut fc).unwrap();
        assert_eq!(r, Mat::identity(3));
        assert_eq!(z, vec![1.0, 0.0, 0.0]);
        assert_eq!(fc.total(), 0);
    }

    #[test]
    fn single_rotation_swap_system() {
        let m_aug = Mat::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 0.0, 0.0]]);
        let mut fc = FlopCounter::new();
        let (r, z) = qr_triangularize(&m_aug, &mut fc).unwrap();
        assert_eq!(r, Mat::identity(2));
        assert_eq!(z, vec![0.0, 1.0]);
    }

    #[test]
    fn rejects_non_augmented_shape() {
        let bad = Mat::zeros(3, 3);
        let mut fc = FlopCounter::new();
        assert!(matches!(
            qr_triangularize(&bad, &mut fc),
            Err(LinalgError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn below_diagonal_is_exactly_zero_and_diagonal_nonnegative() {
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed ^= seed << 13;
            seed ^= seed >> 7;
            seed ^= seed << 17;
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m = 12;
        let mut aug = Mat::zeros(m, m + 1);
        for r in 0..m {
            for c in 0..=m {
                aug[(r, c)] = next();
            }
        }
        let mut fc = FlopCounter::new();
        let (r, _z) = qr_triangularize(&aug, &mut fc).unwrap();
        for i in 0..m {
            assert!(r[(i, i)] >= 0.0);
            for j in 0..i {
                assert_eq!(r[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn tail_solve_upper_two_by_two() {
        let r = Mat::from_rows(&[vec![2.0, 1.0], vec![0.0, 4.0]]);
        let mut fc = FlopCounter::new();
        let y = back_substitute_tail(&r, &[4.0, 8.0], 2, &mut fc).unwrap();
        assert_eq!(y, vec![1.0, 2.0]);
    }

    #[test]
    fn tail_solve_identity_suffix() {
        let r = Mat::identity(3);
        let mut fc = FlopCounter::new();
        let y = back_substitute_tail(&r, &[1.0, 2.0, 3.0], 2, &mut fc).unwrap();
        assert_eq!(y, vec![2.0, 3.0]);
    }

    #[test]
    fn zero_pivot_in_tail_is_reported_with_row_index() {
        let r = Mat::from_rows(&[vec![1.0, 5.0], vec![0.0, 0.0]]);
        let mut fc = FlopCounter::new();
        assert_eq!(
            back_substitute_tail(&r, &[1.0, 1.0], 1, &mut fc),
            Err(LinalgError::SingularPivot(1))
        );
    }

    #[test]
    fn partial_tail_equals_suffix_of_full_solve_bitwise() {
        let r = Mat::from_rows(&[
            vec![3.0, 1.0, -2.0, 0.5],
            vec![0.0, 2.5, 0.7, -1.1],
            vec![0.0, 0.0, 1.9, 0.3],
            vec![0.0, 0.0, 0.0, 4.2],
        ]);
        let z = [1.0, -2.0, 0.25, 3.0];
        let mut fc = FlopCounter::new();
        let full = back_substitute_tail(&r, &z, 4, &mut fc).unwrap();
        for tail in 1..=4 {
            let part = back_substitute_tail(&r, &z, tail, &mut fc).unwrap();
            assert_eq!(part.as_slice(), &full[4 - tail..]);
        }
    }
}
