use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use torsion_lab::runner::{run, RunError, RunOptions, Subcommand, JOBS_ENV};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Command {
    /// List every torsion representative with its valuation.
    Torsion,
    /// Weyl sums against skeleton characters.
    Weyl,
    /// Corner-locus cancellation counts.
    Corner,
    /// Convergence of torsion averages to Haar integrals.
    Equidist,
    /// Finite-field counts for the good-reduction case.
    Goodred,
    /// Everything the config supports.
    All,
}

impl From<Command> for Subcommand {
    fn from(c: Command) -> Self {
        match c {
            Command::Torsion => Subcommand::Torsion,
            Command::Weyl => Subcommand::Weyl,
            Command::Corner => Subcommand::Corner,
            Command::Equidist => Subcommand::Equidist,
            Command::Goodred => Subcommand::Goodred,
            Command::All => Subcommand::All,
        }
    }
}

/// Exact torsion-equidistribution experiments. Exit status: 0 on success,
/// 1 on config or I/O errors, 2 when an internal assertion fails.
#[derive(Debug, Parser)]
#[command(name = "torsion-lab", version, after_help = format!("Default worker count: ${JOBS_ENV}"))]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config file.
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Worker threads (overrides the config and the environment).
    #[arg(long, short)]
    jobs: Option<usize>,
    /// Record wall-clock times in the `wall_ms` column.
    #[arg(long)]
    timings: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions {
        out: cli.out,
        jobs: cli.jobs,
        timings: cli.timings,
    };
    match run(cli.command.into(), &cli.config, &opts) {
        Ok(summary) => {
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            for n in &summary.notes {
                println!("{n}");
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            match &err {
                RunError::Config(d) => eprintln!("error: {}:{d}", cli.config.display()),
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
