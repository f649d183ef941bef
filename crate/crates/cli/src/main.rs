use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jja_cli::commands::{cmd_kerr, cmd_normal_modes, cmd_oracle_check, cmd_spectrum, cmd_sweep, Summary};
use jja_cli::{CliError, Flags, Preset, RunConfig, Scale};

#[derive(Parser, Debug)]
#[command(name = "jja", version, about = "Excitation spectra and Kerr couplings of Josephson-junction arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration (see schema/run_config.schema.json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Bundled parameter set; replaces any circuit in the config file.
    #[arg(long, global = true, value_enum)]
    preset: Option<Preset>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Lift the desk-scale limits on solver runs.
    #[arg(long, global = true)]
    unbounded: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Normal-mode frequencies, first-order Kerr and edge participation.
    NormalModes,
    /// Ground state and targeted excitations.
    Spectrum,
    /// Cross-Kerr couplings from four-state combinations.
    Kerr,
    /// Cross-Kerr over a flux, offset-charge or impedance grid.
    Sweep,
    /// Small-instance comparison against exact diagonalization.
    OracleCheck,
}

fn run(cli: &Cli) -> Result<Summary, CliError> {
    let config = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let flags = Flags { preset: cli.preset, out: cli.out.clone(), seed: cli.seed, unbounded: cli.unbounded };
    let scale = if matches!(cli.command, Command::NormalModes) { Scale::Analytic } else { Scale::Solver };
    let r = config.resolve(&flags, scale)?;
    log::info!(target: "jja::cli", "N_J = {}, config {}", r.params.n_junctions, r.hash);
    match cli.command {
        Command::NormalModes => cmd_normal_modes(&r),
        Command::Spectrum => cmd_spectrum(&r),
        Command::Kerr => cmd_kerr(&r),
        Command::Sweep => cmd_sweep(&r),
        Command::OracleCheck => {
            let (s, report) = cmd_oracle_check(&r)?;
            if report.passed {
                Ok(s)
            } else {
                let failed: Vec<_> = report.items.iter().filter(|i| !i.passed).map(|i| i.name.as_str()).collect();
                Err(CliError::Numerical(jja_core::Error::Numerical(format!("oracle check failed: {}", failed.join(", ")))))
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(s) if s.total > 0 && s.converged == 0 => {
            eprintln!("jja: none of {} results converged", s.total);
            ExitCode::from(4)
        }
        Ok(s) => {
            for f in &s.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("jja: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
