//! Dense linear-algebra kernels used by the filter backends.
//!
//! Everything here operates on the row-major [`Mat`] type and threads a
//! [`FlopCounter`] through the arithmetic so callers can compare measured
//! floating-point operation counts against analytic predictions. The
//! kernels are deliberately plain loops: the operation counts are part of
//! the library's contract, so no work is delegated to an external solver.

mod gauss;
mod givens;
mod jacobi;
mod mat;
mod qr;

pub use gauss::gaussian_inverse;
pub use givens::{givens_coeffs, GivensCoeffs};
pub use jacobi::{eigenvalue_extrema, singular_value_extrema};
pub use mat::Mat;
pub use qr::{back_substitute_tail, qr_triangularize};

use thiserror::Error;

/// Relative pivot tolerance: a pivot whose magnitude does not exceed
/// `PIVOT_REL_TOL` times the largest entry of its own pivot row is
/// treated as numerically zero. The scale is per-row, not global,
/// because systems mixing physical units carry rows many decades apart
/// in magnitude that are nonetheless perfectly solvable.
pub const PIVOT_REL_TOL: f64 = 1e-13;

/// Relative off-diagonal threshold for Jacobi eigenvalue sweeps.
pub const JACOBI_REL_TOL: f64 = 1e-14;

/// Sweep limit for the cyclic Jacobi iteration.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Errors raised by the dense kernels.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LinalgError {
    /// Operand shapes are inconsistent with the requested operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    /// A back-substitution pivot at the given row is numerically zero.
    #[error("singular pivot at row {0}")]
    SingularPivot(usize),
    /// Gaussian elimination found no usable pivot in some column.
    #[error("matrix is singular to working precision")]
    SingularMatrix,
    /// The Jacobi iteration did not reach the off-diagonal threshold.
    #[error("Jacobi iteration failed to converge")]
    NoConvergence,
}

/// Running tally of floating-point operations, split by kind.
///
/// Counts only ever increase; a fresh counter is zero. Kernels take the
/// counter as `&mut` so a caller that does not care can pass a scratch
/// value and ignore it.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct FlopCounter {
    adds: u64,
    muls: u64,
    divs: u64,
    sqrts: u64,
}

impl FlopCounter {
    /// A counter with all tallies at zero.
    pub fn new() -> Self {
        Self::default()
    }

    /// Record `n` additions or subtractions.
    pub fn add(&mut self, n: u64) {
        self.adds += n;
    }

    /// Record `n` multiplications.
    pub fn mul(&mut self, n: u64) {
        self.muls += n;
    }

    /// Record `n` divisions.
    pub fn div(&mut self, n: u64) {
        self.divs += n;
    }

    /// Record `n` square roots.
    pub fn sqrt(&mut self, n: u64) {
        self.sqrts += n;
    }

    /// Additions/subtractions recorded so far.
    pub fn adds(&self) -> u64 {
        self.adds
    }

    /// Multiplications recorded so far.
    pub fn muls(&self) -> u64 {
        self.muls
    }

    /// Divisions recorded so far.
    pub fn divs(&self) -> u64 {
        self.divs
    }

    /// Square roots recorded so far.
    pub fn sqrts(&self) -> u64 {
        self.sqrts
    }

    /// Total operations of all kinds.
    pub fn total(&self) -> u64 {
        self.adds + self.muls + self.divs + self.sqrts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counter_starts_at_zero_and_is_monotone() {
        let mut c = FlopCounter::new();
        assert_eq!(c.total(), 0);
        c.add(3);
        c.mul(4);
        c.div(2);
        c.sqrt(1);
        assert_eq!(c.adds(), 3);
        assert_eq!(c.muls(), 4);
        assert_eq!(c.divs(), 2);
        assert_eq!(c.sqrts(), 1);
        assert_eq!(c.total(), 10);
    }
}
