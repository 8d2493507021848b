use clap::Parser;
use cvieval_cli::args::{Cli, Command};
use cvieval_cli::pipeline::{cmd_evaluate, cmd_plot, cmd_synth};
use cvieval_cli::CliError;

fn run() -> Result<(), CliError> {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments");
            return Err(CliError::Config(first.trim_start_matches("error: ").to_string()));
        }
    };
    match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&a).map(|_| ()),
        Command::Plot(a) => cmd_plot(&a).map(|_| ()),
        Command::Synth(a) => cmd_synth(&a).map(|_| ()),
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{}", e.one_line());
        std::process::exit(e.exit_code());
    }
}
