//! Batch front end for the `erkf` sensor-fusion library.
//!
//! Four subcommands cover the artifact workflow: `synth` generates
//! deterministic IMU/GPS/truth streams from closed-form trajectories with
//! contraction-bounded sensor errors; `run` replays a stream pair through
//! the fusion scheduler with a chosen solver backend; `compare` runs both
//! backends step-locked and verdicts on the covariance singular values;
//! `bench` measures solver cost against the closed-form operation-count
//! predictions over a ladder of system orders.

pub mod args;
pub mod bench;
pub mod compare;
pub mod config;
pub mod csvio;
pub mod pipeline;
pub mod rng;
pub mod synth;
