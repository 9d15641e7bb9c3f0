use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use log::error;
use nlse_cli::{catalog_help, parse_config_with, run};

/// Gauged nonlinear Schrödinger lattice laboratory.
#[derive(Parser, Debug)]
#[command(name = "simulate", version, after_help = catalog_help())]
struct Cli {
    /// TOML scenario file.
    config: PathBuf,
    /// Overrides the `mode` key.
    #[arg(long)]
    mode: Option<String>,
    /// Overrides the `output` directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// `section.key=value`, may be repeated.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Overrides `integrator.snapshot_stride`.
    #[arg(long)]
    stride: Option<u64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SIMULATE_LOG", "warn")).init();
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    let mut overrides = cli.overrides.clone();
    if let Some(m) = &cli.mode {
        overrides.push(format!("mode=\"{m}\""));
    }
    if let Some(o) = &cli.out {
        overrides.push(format!("output={:?}", o.display().to_string()));
    }
    if let Some(s) = cli.stride {
        overrides.push(format!("integrator.snapshot_stride={s}"));
    }
    let cfg = match parse_config_with(&text, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.config.display());
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(outcome) => {
            if outcome.exit_code() != 0 {
                eprintln!("checks failed; see {}", cfg.output.join("report.txt").display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
