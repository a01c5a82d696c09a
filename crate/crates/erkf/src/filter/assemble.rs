//! Assembly of the augmented saddle-point system solved at each step.

use super::{AugmentedSystem, FilterError, FilterState, UncertainModel};
use crate::linalg::Mat;

/// Assemble `A y = B` for one filter step.
///
/// With `ℱ = [F; H]`, `𝒢 = diag(G, K)`, `ℰ = [−I; 0]`, `ℛ = diag(Q, R)`,
/// `N_ℱ = [N_F; N_H]` and `N_𝒢 = diag(N_G, N_K)`, the system matrix has
/// seven block rows and columns of sizes `n, q+p, n+p, u_F+u_H, n, q+p, n`:
///
/// ```text
///     | P   .   .    .    I    .    .  |
///     | .   ℛ   .    .    .    I    .  |
///     | .   .   .    .    ℱ    𝒢    ℰ  |
/// A = | .   .   .    .    N_ℱ  N_𝒢  .  |
///     | I   .   ℱᵀ   N_ℱᵀ .    .    .  |
///     | .   I   𝒢ᵀ   N_𝒢ᵀ .    .    .  |
///     | .   .   ℰᵀ   .    .    .    .  |
/// ```
///
/// Column 0 of `B` stacks `b = [−F x̂; z − H x̂]` (or `z − h(x̂)` when the
/// model carries a nonlinear measurement map) and `N_b = [−N_F x̂; −N_H x̂]`
/// at the third and fourth block rows; columns `1..=n` carry `−I` at the
/// last block row and recover the predicted covariance.
///
/// An identically zero envelope row would leave its row and column of `A`
/// empty, so each such row instead gets a unit entry on the diagonal of
/// the fourth block. That is the finite-penalty form of an absent
/// constraint: the row then reads `λ_l = 0`, the multiplier decouples
/// from every other unknown, and the solution is exactly the one without
/// the constraint. Nonzero rows keep the zero diagonal and bind exactly.
///
/// `A` equals its transpose exactly: symmetric inputs are symmetrized on
/// placement and every off-diagonal block is mirrored by its transpose.
pub fn assemble_augmented(
    model: &UncertainModel,
    state: &FilterState,
    z: &[f64],
) -> Result<AugmentedSystem, FilterError> {
    model.validate()?;
    state.validate(model.n)?;
    let (n, q, p) = (model.n, model.q, model.p);
    if z.len() != p {
        return Err(FilterError::Model(format!(
            "measurement length {} does not match p = {p}",
            z.len()
        )));
    }
    let (u_f, u_h) = (model.u_f(), model.u_h());
    let u = u_f + u_h;
    let dims = [n, q + p, n + p, u, n, q + p, n];
    let mut off = [0usize; 7];
    for i in 1..7 {
        off[i] = off[i - 1] + dims[i - 1];
    }
    let m = off[6] + dims[6];
    debug_assert_eq!(m, model.m_total());

    let f_script = vstack(&model.f, &model.h);
    let g_script = block_diag(&model.g, &model.k);
    let mut e_script = Mat::zeros(n + p, n);
    for i in 0..n {
        e_script[(i, i)] = -1.0;
    }
    let r_script = block_diag(&model.q_cov.symmetrized(), &model.r_cov.symmetrized());
    let nf_script = vstack(&model.n_f, &model.n_h);
    let ng_script = block_diag(&model.n_g, &model.n_k);

    let mut a = Mat::zeros(m, m);
    a.set_block(off[0], off[0], &state.p_pred.symmetrized());
    a.set_block(off[1], off[1], &r_script);
    let mirrored = [
        (off[0], off[4], Mat::identity(n)),
        (off[1], off[5], Mat::identity(q + p)),
        (off[2], off[4], f_script),
        (off[2], off[5], g_script),
        (off[2], off[6], e_script),
        (off[3], off[4], nf_script),
        (off[3], off[5], ng_script),
    ];
    for (r, c, block) in &mirrored {
        a.set_block(*r, *c, block);
        a.set_block(*c, *r, &block.transpose());
    }
    for l in 0..u {
        let vacuous = if l < u_f {
            row_is_zero(&model.n_f, l) && row_is_zero(&model.n_g, l)
        } else {
            row_is_zero(&model.n_h, l - u_f) && row_is_zero(&model.n_k, l - u_f)
        };
        if vacuous {
            a[(off[3] + l, off[3] + l)] = 1.0;
        }
    }

    let mut b = Mat::zeros(m, n + 1);
    let fx = model.f.matvec(&state.x_pred);
    for i in 0..n {
        b[(off[2] + i, 0)] = -fx[i];
    }
    let hx = match &model.measurement_fn {
        Some(h_fn) => {
            let hx = h_fn(&state.x_pred);
            if hx.len() != p {
                return Err(FilterError::Model(format!(
                    "measurement_fn returned {} values, expected {p}",
                    hx.len()
                )));
            }
            hx
        }
        None => model.h.matvec(&state.x_pred),
    };
    for i in 0..p {
        b[(off[2] + n + i, 0)] = z[i] - hx[i];
    }
    let nfx = model.n_f.matvec(&state.x_pred);
    for i in 0..u_f {
        b[(off[3] + i, 0)] = -nfx[i];
    }
    let nhx = model.n_h.matvec(&state.x_pred);
    for i in 0..u_h {
        b[(off[3] + u_f + i, 0)] = -nhx[i];
    }
    for i in 0..n {
        b[(off[6] + i, 1 + i)] = -1.0;
    }

    Ok(AugmentedSystem {
        a,
        b,
        block_offsets: off,
        m,
    })
}

fn row_is_zero(m: &Mat, r: usize) -> bool {
    m.row(r).iter().all(|&v| v == 0.0)
}

/// Stack `top` over `bot` (same column count).
fn vstack(top: &Mat, bot: &Mat) -> Mat {
    assert_eq!(top.cols(), bot.cols());
    let mut out = Mat::zeros(top.rows() + bot.rows(), top.cols());
    out.set_block(0, 0, top);
    out.set_block(top.rows(), 0, bot);
    out
}

/// Block-diagonal `[A 0; 0 B]`.
fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let mut out = Mat::zeros(a.rows() + b.rows(), a.cols() + b.cols());
    out.set_block(0, 0, a);
    out.set_block(a.rows(), a.cols(), b);
    out
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::{random_model, random_state};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use std::sync::Arc;

    fn scalar_parts() -> (UncertainModel, FilterState, Vec<f64>) {
        let model = UncertainModel {
            n: 1,
            q: 1,
            p: 1,
            f: Mat::from_rows(&[vec![0.9]]),
            g: Mat::identity(1),
            h: Mat::from_rows(&[vec![2.0]]),
            k: Mat::identity(1),
            q_cov: Mat::identity(1),
            r_cov: Mat::from_rows(&[vec![0.25]]),
            n_f: Mat::from_rows(&[vec![0.1]]),
            n_g: Mat::from_rows(&[vec![0.1]]),
            n_h: Mat::from_rows(&[vec![0.0]]),
            n_k: Mat::from_rows(&[vec![1.0]]),
            measurement_fn: None,
        };
        let state = FilterState::new(vec![0.5], Mat::from_rows(&[vec![2.0]]));
        (model, state, vec![1.5])
    }

    #[test]
    fn attitude_and_position_dimensions() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let att = random_model(6, 6, 3, 1, 1, &mut rng);
        let st6 = random_state(6, &mut rng);
        let sys = assemble_augmented(&att, &st6, &[0.0; 3]).unwrap();
        assert_eq!(sys.m, 47);
        assert_eq!(sys.block_offsets, [0, 6, 15, 24, 26, 32, 41]);
        assert_eq!(sys.b.rows(), 47);
        assert_eq!(sys.b.cols(), 7);

        let pos = random_model(9, 6, 3, 1, 1, &mut rng);
        let st9 = random_state(9, &mut rng);
        let sys = assemble_augmented(&pos, &st9, &[0.0; 3]).unwrap();
        assert_eq!(sys.m, 59);
        assert_eq!(sys.block_offsets, [0, 9, 18, 30, 32, 41, 50]);
    }

    #[test]
    fn a_is_exactly_symmetric() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..5 {
            let model = random_model(4, 3, 2, 2, 1, &mut rng);
            let state = random_state(4, &mut rng);
            let sys = assemble_augmented(&model, &state, &[0.3, -0.7]).unwrap();
            assert_eq!(sys.a.max_asymmetry(), 0.0);
        }
    }

    #[test]
    fn scalar_system_entries_match_hand_assembly() {
        let (model, state, z) = scalar_parts();
        let sys = assemble_augmented(&model, &state, &z).unwrap();
        // dims [1, 2, 2, 2, 1, 2, 1], offsets [0, 1, 3, 5, 7, 8, 10], m = 11
        assert_eq!(sys.m, 11);
        assert_eq!(sys.block_offsets, [0, 1, 3, 5, 7, 8, 10]);
        assert_eq!(sys.a[(0, 0)], 2.0); // P
        assert_eq!(sys.a[(1, 1)], 1.0); // Q
        assert_eq!(sys.a[(2, 2)], 0.25); // R
        assert_eq!(sys.a[(0, 7)], 1.0); // identity link to a
        assert_eq!(sys.a[(3, 7)], 0.9); // F inside ℱ
        assert_eq!(sys.a[(4, 7)], 2.0); // H inside ℱ
        assert_eq!(sys.a[(3, 8)], 1.0); // G inside 𝒢
        assert_eq!(sys.a[(4, 9)], 1.0); // K inside 𝒢
        assert_eq!(sys.a[(3, 10)], -1.0); // ℰ upper block
        assert_eq!(sys.a[(4, 10)], 0.0); // ℰ lower block
        assert_eq!(sys.a[(5, 7)], 0.1); // N_F
        assert_eq!(sys.a[(5, 8)], 0.1); // N_G
        assert_eq!(sys.a[(6, 9)], 1.0); // N_K
        assert_eq!(sys.a[(6, 10)], 0.0); // N_ℰ is zero
        // b column 0: −F x̂ = −0.45, z − H x̂ = 0.5, −N_F x̂ = −0.05, −N_H x̂ = 0
        assert_eq!(sys.b[(3, 0)], -0.45);
        assert_eq!(sys.b[(4, 0)], 0.5);
        assert_eq!(sys.b[(5, 0)], -0.05);
        assert_eq!(sys.b[(6, 0)], 0.0);
        // b column 1: −1 at the last block row only
        assert_eq!(sys.b[(10, 1)], -1.0);
        let nonzero: usize = (0..11).filter(|&r| sys.b[(r, 1)] != 0.0).count();
        assert_eq!(nonzero, 1);
    }

    #[test]
    fn zero_envelope_row_gets_a_vacuous_unit_diagonal() {
        let (mut model, state, z) = scalar_parts();
        model.n_h = Mat::zeros(1, 1);
        model.n_k = Mat::zeros(1, 1);
        let sys = assemble_augmented(&model, &state, &z).unwrap();
        // The [N_F N_G] row is nonzero, so its diagonal slot stays zero and
        // the row binds; the zero [N_H N_K] row reads λ = 0 instead.
        assert_eq!(sys.a[(5, 5)], 0.0);
        assert_eq!(sys.a[(6, 6)], 1.0);
        let coupled: usize = (0..11).filter(|&c| c != 6 && sys.a[(6, c)] != 0.0).count();
        assert_eq!(coupled, 0);
        assert_eq!(sys.a.max_asymmetry(), 0.0);
    }

    #[test]
    fn nonlinear_measurement_replaces_residual() {
        let (mut model, state, z) = scalar_parts();
        model.measurement_fn = Some(Arc::new(|x: &[f64]| vec![x[0] * x[0]]));
        let sys = assemble_augmented(&model, &state, &z).unwrap();
        // residual = z − x̂² = 1.5 − 0.25; the H block in A is unchanged
        assert_eq!(sys.b[(4, 0)], 1.25);
        assert_eq!(sys.a[(4, 7)], 2.0);
    }

    #[test]
    fn measurement_length_is_checked() {
        let (model, state, _) = scalar_parts();
        assert!(matches!(
            assemble_augmented(&model, &state, &[1.0, 2.0]),
            Err(FilterError::Model(_))
        ));
    }
}
