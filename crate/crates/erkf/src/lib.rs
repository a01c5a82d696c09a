//! Robust Kalman filtering for discrete-time systems with norm-bounded
//! parametric uncertainty.
//!
//! The filter step is posed as one augmented symmetric linear system per
//! epoch whose solution contains the filtered state, the predicted state,
//! and the predicted error covariance. Two interchangeable backends solve
//! that system:
//!
//! * [`filter::erkf_step_givens`] — Givens-rotation QR triangularization
//!   followed by partial back-substitution of only the trailing unknowns,
//! * [`filter::erkf_step_oracle`] — explicit matrix inversion by Gaussian
//!   elimination, kept as a slow reference implementation.
//!
//! Both backends carry FLOP counters so their costs can be compared against
//! closed-form operation-count predictions.
//!
//! On top of the filter core, [`models`] builds attitude and position
//! estimation models for an IMU + GPS sensor pair (gyro/accelerometer bias
//! states, WGS-84 geodesy), and [`nav`] schedules the two filters at
//! different rates with inertial mechanization between GPS fixes.

pub mod filter;
pub mod linalg;
pub mod models;
pub mod nav;
