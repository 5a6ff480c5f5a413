//! `ofdmsar`: run a JSON-configured imaging scenario.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};
use ofdmsar::metrics::Mode;
use ofdmsar::scenario::{load_config, run_scenario, Overrides};
use ofdmsar::FilterKind;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FilterArg {
    Rf,
    Mf,
    Wf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    DataAided,
    PilotOnly,
}

#[derive(Debug, Parser)]
#[command(name = "ofdmsar", version, about = "Simulate, focus and score OFDM SAR scenarios")]
struct Args {
    /// Scenario JSON file.
    #[arg(long)]
    config: PathBuf,
    /// Directory receiving metrics.json, images and CSV tables.
    #[arg(long)]
    out_dir: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Run a single filter instead of the configured list.
    #[arg(long, value_enum)]
    filter: Option<FilterArg>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Input SNR in dB; repeat to sweep.
    #[arg(long = "snr-db", allow_negative_numbers = true)]
    snr_db: Vec<f64>,
}

fn run(args: Args) -> anyhow::Result<()> {
    let mut cfg = load_config(&args.config)
        .with_context(|| format!("reading {}", args.config.display()))?;
    let overrides = Overrides {
        seed: args.seed,
        filter: args.filter.map(|f| match f {
            FilterArg::Rf => FilterKind::Rf,
            FilterArg::Mf => FilterKind::Mf,
            FilterArg::Wf => FilterKind::Wf,
        }),
        mode: args.mode.map(|m| match m {
            ModeArg::DataAided => Mode::DataAided,
            ModeArg::PilotOnly => Mode::PilotOnly,
        }),
        snr_in_db: args.snr_db,
    };
    cfg.apply(&overrides)?;
    let outcome = run_scenario(&cfg, &args.out_dir)?;
    for p in &outcome.points {
        println!(
            "snr {:>6.1} dB  {:<2}  nmse {:.4e}",
            p.snr_in_db, p.report.filter, p.report.nmse
        );
    }
    for f in &outcome.files {
        log::info!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
