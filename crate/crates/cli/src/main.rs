use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rfharm_cli::commands::{self, CliError};
use rfharm_cli::config::RunConfig;

/// Harmonic-sum signal synthesis and diagnostics.
///
/// Settings come from the JSON file given by --config; --seed overrides
/// `generation.seed`. Fields missing from the `analysis` block take their
/// built-in defaults.
#[derive(Debug, Parser)]
#[command(name = "rfharm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Table {
    Cf,
    Density,
    Acov,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate one expansion and its sampled path.
    Simulate,
    /// Tabulate the marginal CF, density or autocovariance.
    Theory {
        #[arg(long, value_enum)]
        what: Table,
    },
    /// Time averages of one realization and ensemble statistics.
    Ergodic,
    /// Density and single/pooled histogram data.
    Figures,
    /// Moment and normalization checks of the Lévy measure.
    CheckMeasure,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli.config.ok_or_else(|| CliError::config("--config", "a configuration file is required"))?;
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut config = RunConfig::parse(&text).map_err(CliError::Config)?;
    if let Some(seed) = cli.seed {
        config.generation.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::config("--jobs", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Numerical(format!("thread pool: {e}")))?;
    }
    let resolved = config.resolve().map_err(CliError::Config)?;
    std::fs::create_dir_all(&cli.out).map_err(|e| CliError::Io(format!("{}: {e}", cli.out.display())))?;
    let out = cli.out.as_path();
    match cli.command {
        Command::Simulate => commands::simulate(&config, &resolved, out),
        Command::Theory { what: Table::Cf } => commands::theory_cf(&config, &resolved, out),
        Command::Theory { what: Table::Density } => commands::theory_density(&config, &resolved, out),
        Command::Theory { what: Table::Acov } => commands::theory_acov(&config, &resolved, out),
        Command::Ergodic => commands::ergodic(&config, &resolved, out),
        Command::Figures => commands::figures(&config, &resolved, out),
        Command::CheckMeasure => commands::check_measure(&resolved, out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rfharm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
