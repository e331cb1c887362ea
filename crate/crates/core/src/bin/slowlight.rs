use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slowlight::config::ScenarioConfig;
use slowlight::runner::{self, RunMetadata};
use slowlight::Error;

#[derive(Parser)]
#[command(
    name = "slowlight",
    version,
    about = "Diffraction-cancelling slow-light propagation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate χ(Δ, k⊥)/α against k⊥/k₀ for several detunings.
    ChiScan(Common),
    /// Propagate the configured source in each requested mode.
    Propagate(Common),
    /// Design a medium that cancels diffraction and report derived quantities.
    Design(Common),
    /// Run one propagation per value of a swept parameter.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Treat unknown keys as errors and warnings as failures.
    #[arg(long)]
    strict: bool,
}

const EXIT_WARNINGS: u8 = 3;

type Runner = fn(&ScenarioConfig, &Path) -> Result<RunMetadata, Error>;

fn execute(command: &Command) -> Result<RunMetadata, Error> {
    let (common, run): (&Common, Runner) = match command {
        Command::ChiScan(c) => (c, runner::run_chi_scan),
        Command::Propagate(c) => (c, |cfg, out| {
            runner::run_propagate(cfg, out).map(|o| o.metadata)
        }),
        Command::Design(c) => (c, |cfg, out| {
            let (report, meta) = runner::run_design(cfg, out)?;
            println!(
                "k0 = {:.6e} 1/m, v_g = {:.6e} m/s, kappa*z_R = {:.6e}, residual = {:.3e}",
                report.k0, report.group_velocity, report.kappa_z_r, report.cancellation_residual
            );
            Ok(meta)
        }),
        Command::Sweep(c) => (c, |cfg, out| runner::run_sweep(cfg, out).map(|(_, m)| m)),
    };
    let config = ScenarioConfig::from_file(&common.config, common.strict)?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    pool.install(|| run(&config, &common.out))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let strict = match &cli.command {
        Command::ChiScan(c) | Command::Propagate(c) | Command::Design(c) | Command::Sweep(c) => {
            c.strict
        }
    };
    match execute(&cli.command) {
        Ok(meta) => {
            for w in &meta.warnings {
                eprintln!("warning: {w}");
            }
            if strict && !meta.warnings.is_empty() {
                ExitCode::from(EXIT_WARNINGS)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
