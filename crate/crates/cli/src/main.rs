mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use serde_json::json;
use slr_core::ErrorClass;

use args::{Cli, Format};

fn exit_code(class: ErrorClass) -> u8 {
    match class {
        ErrorClass::Precondition => 1,
        ErrorClass::Io => 2,
        ErrorClass::Integrity => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| level.into()))
        .with_writer(std::io::stderr)
        .init();
    let format = cli.format;
    match commands::run(cli) {
        Ok(out) => {
            print!("{}", out.render(format));
            ExitCode::from(out.status as u8)
        }
        Err(e) => {
            match format {
                Format::Json => {
                    let body = json!({ "error": { "code": e.code(), "message": e.to_string(), "details": e.details() } });
                    eprintln!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
                }
                Format::Table => {
                    eprintln!("error[{}]: {e}", e.code());
                    for d in e.details() {
                        eprintln!("  {d}");
                    }
                }
            }
            ExitCode::from(exit_code(e.class()))
        }
    }
}
