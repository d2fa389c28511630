mod args;
mod commands;
mod io;

use std::process::ExitCode;

use clap::Parser;
use serde_json::Value;

use args::{Cli, Format};

const REFUTED: u8 = 1;
const USAGE: u8 = 2;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return if usage { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let format = cli.format;
    match commands::run(cli.command, format) {
        Ok(report) => {
            if report.value != Value::Null {
                match format {
                    Format::Json => println!("{}", report.value),
                    Format::Text => print!("{}", io::render_text(&report.value)),
                }
            }
            if report.holds {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(REFUTED)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}
