use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nhse_cli::config::load_config;
use nhse_cli::{runner, CliError};

#[derive(Parser)]
#[command(
    name = "nhse",
    about = "Spectra, point-gap topology, and state classification for 1D non-reciprocal lattices",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration (schema 1).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize the configured chain and write spectrum.csv.
    Spectrum(Common),
    /// Trace the PBC spectral loop over the twist grid.
    Loop(Common),
    /// Point-gap winding number around a reference energy.
    Winding {
        #[command(flatten)]
        common: Common,
        /// Re E_ref.
        #[arg(long)]
        re: f64,
        /// Im E_ref.
        #[arg(long)]
        im: f64,
    },
    /// Classify every OBC eigenstate against the defect-supercell loop.
    Classify(Common),
    /// Run the configured parameter sweep and summarize each point.
    Sweep(Common),
    /// Critical lattice size N_c that suppresses hybrid skin-defect states.
    CriticalSize(Common),
    /// Defect-free SSH gap-closure scan over the base hopping t.
    GapScan(Common),
    /// Measure the AII† time-reversal symmetry deviation.
    CheckSymmetry(Common),
}

fn run() -> Result<(), CliError> {
    // Worker-pool parallelism is ours (rayon); keep BLAS single-threaded.
    std::env::set_var("OPENBLAS_NUM_THREADS", "1");
    if let Ok(v) = std::env::var("NHSE_WORKERS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Config(format!(
                "NHSE_WORKERS must be a positive integer, got \"{v}\""
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let cli = Cli::parse();
    let files = match &cli.command {
        Command::Spectrum(c) => runner::cmd_spectrum(&load_config(&c.config)?, &c.out)?,
        Command::Loop(c) => runner::cmd_loop(&load_config(&c.config)?, &c.out)?,
        Command::Winding { common: c, re, im } => {
            runner::cmd_winding(&load_config(&c.config)?, &c.out, *re, *im)?
        }
        Command::Classify(c) => runner::cmd_classify(&load_config(&c.config)?, &c.out)?,
        Command::Sweep(c) => runner::cmd_sweep(&load_config(&c.config)?, &c.out)?,
        Command::CriticalSize(c) => runner::cmd_critical_size(&load_config(&c.config)?, &c.out)?,
        Command::GapScan(c) => runner::cmd_gap_scan(&load_config(&c.config)?, &c.out)?,
        Command::CheckSymmetry(c) => runner::cmd_check_symmetry(&load_config(&c.config)?, &c.out)?,
    };
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
