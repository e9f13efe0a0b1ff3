mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

/// Usage errors and rejected parameter values.
const EXIT_USAGE: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .parse_env("RUST_LOG")
        .init();

    let outcome = match &cli.command {
        Command::Point(a) => commands::point(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Analytic(a) => commands::analytic(a),
        Command::Validate(a) => commands::validate(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let usage = matches!(
                e.downcast_ref::<dicke_pdc::Error>(),
                Some(dicke_pdc::Error::InvalidParameter(_))
            );
            ExitCode::from(if usage { EXIT_USAGE } else { commands::EXIT_FAILURE })
        }
    }
}
