use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use qce_lab::config::{load, Overrides};
use qce_lab::run_experiment;

/// SER sweeps for quantized constant-envelope MISO transmission with M-PSK.
///
/// Writes one CSV per quantization level plus summary.csv into --out.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Cli {
    /// TOML file with flat keys (n, m, l, snr_db, trials, ...); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of transmit antennas N.
    #[arg(long)]
    n: Option<u32>,
    /// PSK order M.
    #[arg(long)]
    m: Option<u32>,
    /// Quantization levels L: integer or "inf", comma-separated for several variants.
    #[arg(long)]
    l: Option<String>,
    /// SNR grid in dB: "a,b,c" or "lo:step:hi".
    #[arg(long = "snr-db", allow_hyphen_values = true)]
    snr_db: Option<String>,
    /// Trials per SNR point.
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Stop a point after this many errors (0 runs the full budget).
    #[arg(long = "min-errors")]
    min_errors: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Safety-margin samples for the bound columns (0 disables them).
    #[arg(long = "alpha-samples")]
    alpha_samples: Option<u64>,
    /// Slope-fit window "lo:hi" in dB.
    #[arg(long = "fit-window", allow_hyphen_values = true)]
    fit_window: Option<String>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        n: cli.n,
        m: cli.m,
        l: cli.l,
        snr_db: cli.snr_db,
        trials: cli.trials,
        seed: cli.seed,
        min_errors: cli.min_errors,
        out: cli.out,
        alpha_samples: cli.alpha_samples,
        fit_window: cli.fit_window,
        workers: cli.workers,
    };
    let result = load(cli.config.as_deref(), &overrides).and_then(|spec| run_experiment(&spec));
    match result {
        Ok(out) => {
            for v in &out.variants {
                let fitted = v
                    .fit
                    .map(|f| format!("{:.3}", f.slope))
                    .unwrap_or_else(|| "n/a".into());
                println!(
                    "L={:<4} predicted d={:<4} fitted d={:<6} -> {}",
                    v.curve.config.quant_levels.to_string(),
                    v.predicted.to_string(),
                    fitted,
                    v.csv_path.display()
                );
            }
            println!("summary: {}", out.summary_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("qce-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
