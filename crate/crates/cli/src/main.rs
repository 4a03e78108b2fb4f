use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use loc1d::selftest::Fault;
use loc1d_cli::commands::{self, LyapunovFlags, PofeFlags, ProfileFlags};
use loc1d_cli::config::{ExperimentConfig, Preset};
use loc1d_cli::CliError;

/// Localization of a wave packet in a correlated 1D random potential:
/// theory curves, exact-diagonalization ensembles and self-checks.
#[derive(Parser, Debug)]
#[command(name = "loc1d", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON experiment config; replaces the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "desk")]
    preset: Preset,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write JSON next to the CSV files.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lyapunov exponent: Born, model and transfer matrix.
    Lyapunov {
        #[command(flatten)]
        common: Common,
        /// Only the Born curve; skips the transfer matrix.
        #[arg(long)]
        born_only: bool,
    },
    /// Energy distribution of the packet: theory, free particle and numerics.
    Pofe {
        #[command(flatten)]
        common: Common,
        /// Add the free distribution in its printed normalization.
        #[arg(long)]
        free: bool,
    },
    /// Long-time density profile: theory, simplified theory and numerics.
    Profile {
        #[command(flatten)]
        common: Common,
        /// One file per energy window.
        #[arg(long)]
        windows: bool,
        /// Add log10 columns.
        #[arg(long)]
        log: bool,
    },
    /// Internal consistency checks; exit code 1 on any failure.
    Selftest {
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FaultArg {
    AiryConstant,
}

fn load(common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::preset(common.preset),
    };
    if let Some(seed) = common.seed {
        cfg.ensemble.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.outputs.directory = out.clone();
    }
    if common.json
        && !cfg
            .outputs
            .formats
            .contains(&loc1d_cli::config::Format::Json)
    {
        cfg.outputs.formats.push(loc1d_cli::config::Format::Json);
    }
    let cfg = cfg.normalized();
    cfg.validate()?;
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(cfg)
}

fn report(paths: Vec<PathBuf>) {
    for p in paths {
        println!("{}", p.display());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Lyapunov { common, born_only } => {
            let cfg = load(&common)?;
            report(commands::lyapunov(&cfg, LyapunovFlags { born_only })?);
        }
        Command::Pofe { common, free } => {
            let cfg = load(&common)?;
            report(commands::pofe(&cfg, PofeFlags { free_printed: free })?);
        }
        Command::Profile {
            common,
            windows,
            log,
        } => {
            let cfg = load(&common)?;
            report(commands::profile(&cfg, ProfileFlags { windows, log })?);
        }
        Command::Selftest { json, inject_fault } => {
            let fault = inject_fault.map(|f| match f {
                FaultArg::AiryConstant => Fault::AiryConstant,
            });
            commands::selftest(json, fault)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Usage(e.to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
