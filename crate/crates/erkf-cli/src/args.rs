//! Command-line argument definitions.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use erkf::filter::Backend;

use crate::synth::Trajectory;

/// Solver backend selector for the `run` subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum BackendArg {
    /// Givens-rotation QR with partial back-substitution.
    Givens,
    /// Explicit inversion by Gaussian elimination (reference path).
    Inverse,
}

impl From<BackendArg> for Backend {
    fn from(arg: BackendArg) -> Backend {
        match arg {
            BackendArg::Givens => Backend::Givens,
            BackendArg::Inverse => Backend::Inverse,
        }
    }
}

/// Batch sensor-fusion toolkit: robust filtering of IMU and GPS streams.
#[derive(Debug, Parser)]
#[command(name = "erkf", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic IMU, GPS, and truth streams for a named scenario.
    Synth {
        /// Reference trajectory family.
        #[arg(long)]
        scenario: Trajectory,
        /// Run length in seconds.
        #[arg(long)]
        duration: f64,
        /// Noise seed; identical seeds reproduce identical files.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Directory receiving imu.csv, gps.csv, and truth.csv.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fuse recorded IMU and GPS streams into an estimate file.
    Run {
        /// IMU stream (csv).
        #[arg(long)]
        imu: PathBuf,
        /// GPS stream (csv).
        #[arg(long)]
        gps: PathBuf,
        /// Solver backend.
        #[arg(long, value_enum, default_value_t = BackendArg::Givens)]
        backend: BackendArg,
        /// Filter configuration (key=value lines); defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output estimate file (csv).
        #[arg(long)]
        out: PathBuf,
        /// Optional truth stream; adds RMSE figures to the summary.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Run both backends in lockstep and compare every covariance.
    Compare {
        /// IMU stream (csv).
        #[arg(long)]
        imu: PathBuf,
        /// GPS stream (csv).
        #[arg(long)]
        gps: PathBuf,
        /// Largest tolerated singular-value discrepancy.
        #[arg(long, default_value_t = 1e-12)]
        threshold: f64,
        /// Output comparison file (csv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Measure solver cost across augmented system orders.
    Bench {
        /// Augmented orders to ladder through.
        #[arg(long, value_delimiter = ',', default_value = "47,59,100")]
        dims: Vec<usize>,
        /// Timed steps per backend and order (median reported).
        #[arg(long, default_value_t = 5)]
        trials: usize,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synth_flags_parse() {
        let cli = Cli::try_parse_from([
            "erkf", "synth", "--scenario", "figure_eight", "--duration", "60", "--seed", "7",
            "--out-dir", "/tmp/x",
        ])
        .unwrap();
        match cli.command {
            Command::Synth {
                scenario,
                duration,
                seed,
                out_dir,
            } => {
                assert_eq!(scenario, Trajectory::FigureEight);
                assert_eq!(duration, 60.0);
                assert_eq!(seed, 7);
                assert_eq!(out_dir, PathBuf::from("/tmp/x"));
            }
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn run_backend_and_optional_flags() {
        let cli = Cli::try_parse_from([
            "erkf", "run", "--imu", "i.csv", "--gps", "g.csv", "--backend", "inverse", "--out",
            "e.csv",
        ])
        .unwrap();
        match cli.command {
            Command::Run {
                backend,
                config,
                truth,
                ..
            } => {
                assert_eq!(Backend::from(backend), Backend::Inverse);
                assert!(config.is_none());
                assert!(truth.is_none());
            }
            other => panic!("parsed {other:?}"),
        }
        assert!(Cli::try_parse_from([
            "erkf", "run", "--imu", "i", "--gps", "g", "--backend", "cholesky", "--out", "e",
        ])
        .is_err());
    }

    #[test]
    fn compare_threshold_defaults() {
        let cli = Cli::try_parse_from([
            "erkf", "compare", "--imu", "i.csv", "--gps", "g.csv", "--out", "c.csv",
        ])
        .unwrap();
        match cli.command {
            Command::Compare { threshold, .. } => assert_eq!(threshold, 1e-12),
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn bench_dims_list_parses_with_commas() {
        let cli = Cli::try_parse_from(["erkf", "bench", "--dims", "47,59,100", "--trials", "3"])
            .unwrap();
        match cli.command {
            Command::Bench { dims, trials } => {
                assert_eq!(dims, vec![47, 59, 100]);
                assert_eq!(trials, 3);
            }
            other => panic!("parsed {other:?}"),
        }
        let cli = Cli::try_parse_from(["erkf", "bench"]).unwrap();
        match cli.command {
            Command::Bench { dims, trials } => {
                assert_eq!(dims, vec![47, 59, 100]);
                assert_eq!(trials, 5);
            }
            other => panic!("parsed {other:?}"),
        }
    }

    #[test]
    fn missing_required_flags_are_rejected() {
        assert!(Cli::try_parse_from(["erkf", "synth", "--duration", "1"]).is_err());
        assert!(Cli::try_parse_from(["erkf", "run", "--imu", "i"]).is_err());
        assert!(Cli::try_parse_from(["erkf", "frobnicate"]).is_err());
    }
}
