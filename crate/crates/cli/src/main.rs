use clap::{ArgAction, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

mod export;
mod kernel;
mod run;

/// Exit status when a check or an assertion fails.
const EXIT_FAILED: u8 = 2;
/// Exit status for usage errors, bad configs and missing inputs.
const EXIT_USAGE: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "parastokes", version, about = "Kernel checks, scenario runs and CSV export for local Stokes expansions")]
struct Cli {
    /// Repeat for more log output.
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,

    /// Root directory for outputs when `--out` is not given.
    #[arg(long, env = "PARASTOKES_OUT_ROOT", default_value = "parastokes-out", global = true)]
    out_root: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate or validate the Stokes kernel.
    #[command(subcommand)]
    Kernel(kernel::KernelCommand),
    /// Run a scenario and write its report bundle.
    Run(run::RunArgs),
    /// Flatten a report bundle into CSV tables.
    Export(export::ExportArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();

    let outcome = match &cli.command {
        Command::Kernel(cmd) => kernel::execute(cmd, &cli.out_root),
        Command::Run(args) => run::execute(args, &cli.out_root),
        Command::Export(args) => export::execute(args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAILED),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
