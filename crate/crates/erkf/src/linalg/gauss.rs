//! Matrix inversion by column-at-a-time Gaussian elimination.

use super::{FlopCounter, LinalgError, Mat};

/// Invert a square matrix by solving `A x = e_i` for every unit vector.
///
/// Each column of the inverse is obtained from a fresh forward elimination
/// followed by a full back-substitution; nothing is shared between
/// columns. The elimination is dense — no sparsity is exploited — so the
/// cost is the textbook `2m^4/3` floating-point operations. That is
/// deliberate: this routine serves as the reference answer the
/// rotation-based solver is checked against, and its operation count is
/// the baseline the rotation approach is claimed to beat, so it should
/// stay as close to textbook arithmetic as possible.
///
/// Pivoting is complete (row and column swaps to the largest remaining
/// entry). Systems assembled from mixed physical units are strongly
/// graded — whole rows sit many decades below others — and row-only
/// pivoting can then be forced through cancellation residue while large
/// entries remain in the row, destroying the factorization's accuracy.
/// With complete pivoting each pivot is the remaining submatrix maximum,
/// so a zero pivot means the remainder is exactly zero and the matrix is
/// singular.
pub fn gaussian_inverse(a: &Mat, counter: &mut FlopCounter) -> Result<Mat, LinalgError> {
    let m = a.rows();
    if a.cols() != m {
        return Err(LinalgError::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            m,
            a.cols()
        )));
    }
    let mut inv = Mat::zeros(m, m);
    for col in 0..m {
        let mut w = Mat::zeros(m, m + 1);
        for r in 0..m {
            w.row_mut(r)[..m].copy_from_slice(a.row(r));
        }
        w[(col, m)] = 1.0;
        // col_perm[i] is the original variable sitting at position i.
        let mut col_perm: Vec<usize> = (0..m).collect();
        for j in 0..m {
            let (mut pivot_row, mut pivot_col) = (j, j);
            let mut pivot_mag = 0.0f64;
            for i in j..m {
                let row = &w.row(i)[j..m];
                for (off, v) in row.iter().enumerate() {
                    let mag = v.abs();
                    if mag > pivot_mag {
                        pivot_row = i;
                        pivot_col = j + off;
                        pivot_mag = mag;
                    }
                }
            }
            if pivot_mag == 0.0 {
                return Err(LinalgError::SingularMatrix);
            }
            if pivot_row != j {
                w.swap_rows(j, pivot_row);
            }
            if pivot_col != j {
                for i in 0..m {
                    let tmp = w[(i, j)];
                    w[(i, j)] = w[(i, pivot_col)];
                    w[(i, pivot_col)] = tmp;
                }
                col_perm.swap(j, pivot_col);
            }
            for i in j + 1..m {
                let factor = w[(i, j)] / w[(j, j)];
                counter.div(1);
                let (top, bot) = w.two_rows_mut(j, i);
                for (b, t) in bot[j + 1..=m].iter_mut().zip(&top[j + 1..=m]) {
                    *b -= factor * *t;
                }
                counter.mul((m - j) as u64);
                counter.add((m - j) as u64);
                bot[j] = 0.0;
            }
        }
        for i in (0..m).rev() {
            let mut sum = w[(i, m)];
            for k in i + 1..m {
                sum -= w[(i, k)] * inv[(col_perm[k], col)];
            }
            counter.mul((m - 1 - i) as u64);
            counter.add((m - 1 - i) as u64);
            inv[(col_perm[i], col)] = sum / w[(i, i)];
            counter.div(1);
        }
    }
    Ok(inv)
}
