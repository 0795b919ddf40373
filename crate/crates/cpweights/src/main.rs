use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use cpweights::harness::commands::{execute, Command};
use cpweights::harness::{emit_report, render, ExperimentConfig, Format};
use cpweights::Error;

#[derive(Parser)]
#[command(name = "cpweights", version, about = "C_p weight experiments and the acceptance battery")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    /// JSON experiment config
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// output directory; the report goes to stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Json)]
    format: OutFormat,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// hole ratios of a KM weight
    Km,
    /// tail functionals over a seeded cube menu
    Tail,
    /// C_ψ certification in the three menu modes
    Certify,
    /// Whitney decompositions of seeded open sets
    Whitney,
    /// stopping families and sparse forms
    Sparse,
    /// per-level Marcinkiewicz integrals
    Marcinkiewicz,
    /// Coifman–Fefferman ratios
    Cf,
    /// maximal function profiles and norms
    Maximal,
    /// configured batteries; exit code 1 when a criterion fails
    Suite,
}

#[derive(ValueEnum, Clone, Copy)]
enum OutFormat {
    Json,
    Csv,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Command {
        match s {
            Sub::Km => Command::Km,
            Sub::Tail => Command::Tail,
            Sub::Certify => Command::Certify,
            Sub::Whitney => Command::Whitney,
            Sub::Sparse => Command::Sparse,
            Sub::Marcinkiewicz => Command::Marcinkiewicz,
            Sub::Cf => Command::Cf,
            Sub::Maximal => Command::Maximal,
            Sub::Suite => Command::Suite,
        }
    }
}

fn exit_for(e: &Error) -> ExitCode {
    match e {
        Error::Config(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("cpweights: {e}");
                return ExitCode::from(2);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    let cmd = Command::from(cli.command);
    if cli.config.is_none() {
        config.id = cmd.label().into();
    }
    let format = match cli.format {
        OutFormat::Json => Format::Json,
        OutFormat::Csv => Format::Csv,
    };
    let report = match execute(cmd, &config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("cpweights: {e}");
            return exit_for(&e);
        }
    };
    for c in &report.criteria {
        eprintln!("criterion {:>2} {}: {}  {}", c.id, if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    let written = match &cli.out {
        Some(dir) => emit_report(&report, format, dir).map(|p| eprintln!("wrote {}", p.display())),
        None => render(&report, format).map(|t| print!("{t}")),
    };
    if let Err(e) = written {
        eprintln!("cpweights: {e}");
        return ExitCode::from(1);
    }
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
