//! `dce`: command-line front end for the dynamical Casimir flux engine.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 non-converged
//! numerics (results are still written, flagged in the CSVs).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dce_core::config::load_config;
use dce_core::runner::{emit_plot_data, run_dispersion, run_indicators, run_sweep, worker_count, RunError, RunOptions, RunReport, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "dce", version, about = "Near-field dynamical Casimir effect between two polar bodies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the flux sweeps of a configuration.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Run only this sweep.
        #[arg(long)]
        sweep: Option<String>,
        /// Output directory (overrides run.output_dir).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Harmonic truncation N_h (overrides the configuration).
        #[arg(long)]
        nh: Option<usize>,
        /// Repeat every point at N_h + 1 and fail with exit code 2 if Φ^Q moves by more than 1%.
        #[arg(long)]
        check_convergence: bool,
    },
    /// Gap-mode dispersion of the unmodulated stack.
    Dispersion {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nonclassicality indicator grids.
    Indicator {
        #[arg(long)]
        config: PathBuf,
        /// Run only this grid.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        nh: Option<usize>,
    },
    /// Convert run CSV files into whitespace-separated `.dat` plot files.
    PlotData {
        /// CSV files written by simulate, indicator or dispersion.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Directory for the `.dat` files.
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
}

fn report(result: Result<RunReport, RunError>) -> ExitCode {
    match result {
        Ok(r) => {
            for f in &r.files {
                println!("{}", f.display());
            }
            if !r.converged {
                eprintln!("warning: some quadratures did not converge; see the `converged` columns");
            }
            ExitCode::from(r.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = worker_count();
    let load = |path: &PathBuf| load_config(path).map_err(RunError::from);
    match cli.command {
        Command::Simulate {
            config,
            sweep,
            out,
            nh,
            check_convergence,
        } => report(load(&config).and_then(|cfg| {
            let opts = RunOptions {
                out_dir: out,
                only: sweep,
                truncation: nh,
                check_convergence,
                workers: Some(workers),
            };
            eprintln!("running with {workers} worker(s) (set {WORKERS_ENV} to change)");
            run_sweep(&cfg, &opts)
        })),
        Command::Dispersion { config, out } => report(load(&config).and_then(|cfg| {
            run_dispersion(
                &cfg,
                &RunOptions {
                    out_dir: out,
                    ..Default::default()
                },
            )
        })),
        Command::Indicator { config, grid, out, nh } => report(load(&config).and_then(|cfg| {
            let opts = RunOptions {
                out_dir: out,
                only: grid,
                truncation: nh,
                check_convergence: false,
                workers: Some(workers),
            };
            run_indicators(&cfg, &opts)
        })),
        Command::PlotData { inputs, out } => {
            let mut files = Vec::new();
            for input in &inputs {
                match emit_plot_data(input, &out) {
                    Ok(p) => files.push(p),
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(e.exit_code() as u8);
                    }
                }
            }
            report(Ok(RunReport { files, converged: true }))
        }
    }
}
