use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use superakns::cli::{
    self, CliError, ExportTarget, Format, NumcheckOptions, SessionConfig, VerifyTarget, CACHE_ENV,
    EXIT_USAGE,
};
use superakns::diffring::MuMode;
use superakns::numcheck::NumConfig;
use superakns::superlie::Algebra;

#[derive(Parser, Debug)]
#[command(
    name = "superakns",
    version,
    about = "Derive and verify the super AKNS integrable couplings"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// `symbolic` or a rational value such as `0` or `1/2`.
    #[arg(long, global = true, default_value = "symbolic", value_parser = parse_mu)]
    mu: MuMode,
    #[arg(long = "out", global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[arg(long, global = true, env = CACHE_ENV)]
    cache_dir: Option<PathBuf>,
    /// Errata ledger to use instead of the bundled one.
    #[arg(long, global = true)]
    ledger: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the printed superalgebra relations.
    VerifyLie {
        #[arg(long, value_enum, default_value_t = Which::Both)]
        algebra: Which,
        /// Also print the block-parity table of each basis.
        #[arg(long)]
        audit: bool,
    },
    /// Derive levels and flows and compare them with the printed values.
    Derive {
        #[arg(long, default_value_t = 3)]
        levels: usize,
        /// Directory for level files and the diff report.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
    /// Run one symbolic verification.
    Verify {
        #[arg(long, value_enum)]
        what: VerifyTarget,
        #[arg(long, default_value_t = 2)]
        n: usize,
    },
    /// Evaluate the certified identities on random Grassmann-valued fields.
    Numcheck {
        #[arg(long, default_value_t = 32)]
        grid: usize,
        #[arg(long, default_value_t = 5)]
        modes: usize,
        #[arg(long, default_value_t = 6)]
        grassmann_gens: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
        #[arg(long, default_value_t = 50)]
        skew_trials: usize,
        /// Numeric value substituted for a symbolic μ.
        #[arg(long, default_value_t = 0.3)]
        mu_value: f64,
        /// Probe all candidate operators for skewness.
        #[arg(long)]
        skew_all: bool,
        /// Time-step the second flow and track the conserved density.
        #[arg(long)]
        probe: bool,
    },
    /// Print levels, flows, operators or the errata ledger.
    Export {
        #[arg(value_enum)]
        what: ExportTarget,
        #[arg(long, default_value_t = 3)]
        levels: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Which {
    Sl21,
    Sl41,
    Both,
}

fn parse_mu(s: &str) -> Result<MuMode, String> {
    MuMode::parse(s).ok_or_else(|| format!("expected `symbolic` or a rational, got {s:?}"))
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let mut config = SessionConfig {
        mu: cli.common.mu,
        format: cli.common.format,
        cache_dir: cli.common.cache_dir,
        ledger: cli.common.ledger,
        seed: cli.common.seed,
        ..SessionConfig::default()
    };
    let mut dir = None;
    let outcome = match cli.command {
        Command::VerifyLie { algebra, audit } => {
            let algs: &[Algebra] = match algebra {
                Which::Sl21 => &[Algebra::Sl21],
                Which::Sl41 => &[Algebra::Sl41],
                Which::Both => &[Algebra::Sl21, Algebra::Sl41],
            };
            cli::verify_lie(&config, algs, audit)?
        }
        Command::Derive { levels, dir: d } => {
            config.n_max = levels;
            dir = d;
            cli::derive(&config)?
        }
        Command::Verify { what, n } => cli::verify(&config, what, n)?,
        Command::Numcheck {
            grid,
            modes,
            grassmann_gens,
            samples,
            tolerance,
            skew_trials,
            mu_value,
            skew_all,
            probe,
        } => {
            let mut nc = NumConfig {
                samples,
                tolerance,
                skew_trials,
                mu: mu_value,
                ..NumConfig::default()
            };
            nc.sample.grid = grid;
            nc.sample.modes = modes;
            nc.sample.gens = grassmann_gens;
            config.numcheck = nc;
            cli::numcheck(&config, NumcheckOptions { skew_all, probe })?
        }
        Command::Export { what, levels } => {
            config.n_max = levels;
            cli::export(&config, what)?
        }
    };
    for note in &outcome.notes {
        eprintln!("{note}");
    }
    if let Some(d) = dir {
        for p in outcome.write_to(&d, &config)? {
            eprintln!("wrote {}", p.display());
        }
    }
    print!("{}", outcome.render(&config)?);
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
