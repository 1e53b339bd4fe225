use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use spotmatch_cli::args::{Cli, Command};
use spotmatch_cli::{cmd_assign, cmd_correlate, cmd_evaluate, cmd_synth, CliError};

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Other(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Assign(a) => {
            let mut out = output(a.out.as_deref())?;
            cmd_assign(&a.teacher, &a.student, &a.run.config(), &mut out)
        }
        Command::Evaluate(a) => {
            let mut out = output(a.out.as_deref())?;
            cmd_evaluate(&a.pred, &a.gt, &a.options(), &mut out).map(drop)
        }
        Command::Synth(a) => cmd_synth(&a.options(), &a.out).map(drop),
        Command::Correlate(a) => {
            let mut out = output(a.out.as_deref())?;
            cmd_correlate(&a.source(), &mut out, a.csv.as_deref()).map(drop)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spotmatch: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
