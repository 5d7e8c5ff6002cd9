use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rsfkit_cli::{
    cmd_check, cmd_crosscheck, cmd_laws, cmd_normalize, cmd_run, cmd_translate, resolve_seed,
    CmdResult, UsageError,
};

/// Toolkit for resource-effectful reactive programs: check resource
/// usage, normalize, translate to a pure stream transformer, run, and
/// exercise the equational law catalog.
#[derive(Parser)]
#[command(name = "rsfkit", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check resource well-typedness of a program file.
    Check { file: PathBuf },
    /// Print the normal form of the program's term.
    Normalize { file: PathBuf },
    /// Print the pure stream transformer of the collapsed program.
    Translate { file: PathBuf },
    /// Run a program over an input stream, one output row per line.
    Run {
        file: PathBuf,
        /// Number of synchronous steps to run.
        #[arg(long)]
        steps: usize,
        /// File with one space-separated input row per line; required
        /// when the program declares inputs.
        #[arg(long)]
        inputs: Option<PathBuf>,
    },
    /// Run the equational law catalog, one line per law.
    Laws {
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Suite seed; RSFKIT_SEED overrides the default when unset.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare a program against its translation on random streams.
    Crosscheck {
        file: PathBuf,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<CmdResult, UsageError> = match cli.cmd {
        Cmd::Check { file } => cmd_check(&file),
        Cmd::Normalize { file } => cmd_normalize(&file),
        Cmd::Translate { file } => cmd_translate(&file),
        Cmd::Run {
            file,
            steps,
            inputs,
        } => cmd_run(&file, steps, inputs.as_deref()),
        Cmd::Laws { samples, seed } => Ok(cmd_laws(samples, resolve_seed(seed))),
        Cmd::Crosscheck {
            file,
            steps,
            samples,
            seed,
        } => cmd_crosscheck(&file, steps, samples, resolve_seed(seed)),
    };
    match result {
        Ok(res) => {
            print!("{}", res.stdout);
            ExitCode::from(res.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
