//! Batch sensor-fusion CLI.
//!
//! Exit codes: 0 on success (and passing verdicts), 1 when a comparison or
//! bench verdict fails, 2 on unusable input (bad flags, malformed files,
//! invalid configuration).

use std::error::Error;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use erkf::models::ModelConfig;

use erkf_cli::args::{Cli, Command};
use erkf_cli::bench::run_bench;
use erkf_cli::compare::compare_backends;
use erkf_cli::config::load_config;
use erkf_cli::csvio::{
    atomic_write, read_gps_csv, read_imu_csv, read_truth_csv, render_compare_csv,
    render_estimates_csv, render_gps_csv, render_imu_csv, render_truth_csv,
};
use erkf_cli::pipeline::run_pipeline;
use erkf_cli::synth::{generate_synthetic, SyntheticScenario};

type CmdResult = Result<ExitCode, Box<dyn Error>>;

/// Prefix an error with the file it came from.
fn at_path<E: Error + 'static>(path: &Path) -> impl Fn(E) -> Box<dyn Error> + '_ {
    move |e| format!("{}: {e}", path.display()).into()
}

fn cmd_synth(cli_seed: u64, scn: &SyntheticScenario, out_dir: &Path) -> CmdResult {
    let (imu, gps, truth) = generate_synthetic(scn, cli_seed)?;
    std::fs::create_dir_all(out_dir).map_err(at_path(out_dir))?;
    for (name, contents) in [
        ("imu.csv", render_imu_csv(&imu)),
        ("gps.csv", render_gps_csv(&gps)),
        ("truth.csv", render_truth_csv(&truth)),
    ] {
        let path = out_dir.join(name);
        atomic_write(&path, &contents).map_err(at_path(&path))?;
        println!("wrote {}", path.display());
    }
    println!(
        "scenario {} for {} s at seed {cli_seed}: {} imu epochs, {} gps fixes",
        scn.trajectory,
        scn.duration,
        imu.len(),
        gps.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_or_default_config(path: Option<&Path>) -> Result<ModelConfig, Box<dyn Error>> {
    match path {
        Some(p) => load_config(p).map_err(at_path(p)),
        None => Ok(ModelConfig::default()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Synth {
            scenario,
            duration,
            seed,
            out_dir,
        } => cmd_synth(seed, &SyntheticScenario::named(scenario, duration), &out_dir),
        Command::Run {
            imu,
            gps,
            backend,
            config,
            out,
            truth,
        } => {
            let imu_stream = read_imu_csv(&imu).map_err(at_path(&imu))?;
            let gps_stream = read_gps_csv(&gps).map_err(at_path(&gps))?;
            let truth_stream = match &truth {
                Some(p) => Some(read_truth_csv(p).map_err(at_path(p))?),
                None => None,
            };
            let cfg = load_or_default_config(config.as_deref())?;
            let summary = run_pipeline(
                &imu_stream,
                &gps_stream,
                backend.into(),
                &cfg,
                truth_stream.as_deref(),
            )?;
            atomic_write(&out, &render_estimates_csv(&summary.records)).map_err(at_path(&out))?;
            println!("wrote {}", out.display());
            println!("{summary}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare {
            imu,
            gps,
            threshold,
            out,
        } => {
            let imu_stream = read_imu_csv(&imu).map_err(at_path(&imu))?;
            let gps_stream = read_gps_csv(&gps).map_err(at_path(&gps))?;
            let cfg = ModelConfig::default();
            let outcome = compare_backends(&imu_stream, &gps_stream, &cfg, threshold)?;
            atomic_write(&out, &render_compare_csv(&outcome.rows)).map_err(at_path(&out))?;
            println!("wrote {}", out.display());
            println!("{outcome}");
            Ok(if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Bench { dims, trials } => {
            let outcome = run_bench(&dims, trials)?;
            println!("{outcome}");
            Ok(if outcome.all_ordered {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
