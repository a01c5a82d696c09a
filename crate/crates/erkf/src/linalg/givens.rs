//! Givens plane-rotation coefficients.

use super::FlopCounter;

/// Rotation coefficients `(c, s)` and the resulting leading entry `r`.
///
/// Applying `[c s; -s c]` to the pair `(a, b)` the coefficients were
/// computed from yields `(r, 0)` with `r = sqrt(a² + b²) ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GivensCoeffs {
    pub c: f64,
    pub s: f64,
    pub r: f64,
}

/// Rotation annihilating `b` against `a`.
///
/// The magnitudes are rescaled by the larger of `|a|`, `|b|` before the
/// square root so no intermediate overflows, and the sign of the
/// coefficients is chosen so that `r` is never negative. `b == 0` costs no
/// arithmetic and returns the (possibly sign-flipped) identity rotation.
pub fn givens_coeffs(a: f64, b: f64, counter: &mut FlopCounter) -> GivensCoeffs {
    if b == 0.0 {
        if a < 0.0 {
            return GivensCoeffs { c: -1.0, s: 0.0, r: -a };
        }
        // Covers a == 0 (and a == -0.0): the degenerate pair maps to
        // (c, s, r) = (1, 0, 0).
        return GivensCoeffs { c: 1.0, s: 0.0, r: a.abs() };
    }
    if a == 0.0 {
        return GivensCoeffs {
            c: 0.0,
            s: if b < 0.0 { -1.0 } else { 1.0 },
            r: b.abs(),
        };
    }
    let (aa, ab) = (a.abs(), b.abs());
    let r = if aa > ab {
        let t = b / a;
        aa * (1.0 + t * t).sqrt()
    } else {
        let t = a / b;
        ab * (1.0 + t * t).sqrt()
    };
    // t*t, 1+t*t, sqrt, scale, then the two coefficient divisions.
    counter.mul(2);
    counter.add(1);
    counter.sqrt(1);
    counter.div(3);
    GivensCoeffs { c: a / r, s: b / r, r }
}
