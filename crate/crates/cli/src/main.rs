use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use neutral_assign::linalg::c;
use neutral_assign_cli::commands::{self, Outcome, Overrides};
use neutral_assign_cli::fixtures::{self, FixtureName};
use neutral_assign_cli::format::to_json;
use neutral_assign_cli::{CliError, CliResult};

/// Spectral assignment for neutral-type delay systems.
#[derive(Debug, Parser)]
#[command(name = "nassign", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a realization carrying the problem's spectrum.
    Assign {
        problem: PathBuf,
        /// Realization file; standard output when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Check a realization against a problem. Exit 0 iff every target passes.
    Verify {
        realization: PathBuf,
        problem: PathBuf,
        /// Plot data; defaults to `<realization>.verify.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Roots of det Δ near the logarithmic grid of A₋₁.
    Forward {
        realization: PathBuf,
        #[arg(long, default_value_t = 8)]
        window: usize,
        /// Spectrum dump; defaults to `<realization>.spectrum.csv`.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Assign then verify.
    Roundtrip {
        problem: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Gram matrix conditioning of the exponentials on one logarithmic grid.
    GramReport {
        #[arg(long, allow_hyphen_values = true)]
        re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        im: f64,
        #[arg(long = "window", required = true)]
        windows: Vec<usize>,
        #[arg(long)]
        matrix: bool,
    },
    /// Write a built-in problem file.
    Fixture {
        #[arg(value_enum)]
        name: FixtureName,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<Outcome> {
    match cli.command {
        Command::Assign { problem, out, overrides } => commands::cmd_assign(&problem, out.as_deref(), &overrides),
        Command::Verify { realization, problem, csv, overrides } => {
            commands::cmd_verify(&realization, &problem, csv.as_deref(), &overrides)
        }
        Command::Forward { realization, window, csv } => commands::cmd_forward(&realization, csv.as_deref(), window),
        Command::Roundtrip { problem, overrides } => commands::cmd_roundtrip(&problem, &overrides),
        Command::GramReport { re, im, windows, matrix } => commands::cmd_gram_report(c(re, im), &windows, matrix),
        Command::Fixture { name, out } => {
            let text = to_json(&fixtures::problem(name));
            match out {
                Some(path) => commands::write_file(&path, &text).map(|_| Outcome { stdout: String::new(), failure: None }),
                None => Ok(Outcome { stdout: text, failure: None }),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            let err = CliError::Input(e.kind().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code());
        }
    };
    let failure = match run(cli) {
        Ok(outcome) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(outcome.stdout.as_bytes());
            let _ = stdout.flush();
            outcome.failure
        }
        Err(e) => Some(e),
    };
    match failure {
        None => ExitCode::SUCCESS,
        Some(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code())
        }
    }
}
