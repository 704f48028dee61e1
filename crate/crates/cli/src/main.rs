//! `varnorm`: train embeddings, build normalization maps, inject noise and
//! score maps from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or parse error, 3 internal
//! failure.

mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

/// Errors that map onto an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        use varnorm::Error as E;
        match e.downcast_ref::<E>() {
            Some(E::InvalidConfig(msg)) => Failure::Usage(msg.clone()),
            Some(E::MissingNode(_)) => Failure::Internal(e),
            Some(_) => Failure::Data(e),
            None if e.downcast_ref::<std::io::Error>().is_some() => Failure::Data(e),
            None if e.downcast_ref::<serde_json::Error>().is_some() => Failure::Data(e),
            None => Failure::Internal(e),
        }
    }
}

impl From<varnorm::Error> for Failure {
    fn from(e: varnorm::Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

/// The error chain joined by ": ", skipping causes a message already ends with.
fn render(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let text = cause.to_string();
        if out.is_empty() {
            out = text;
        } else if !out.ends_with(&text) {
            out.push_str(": ");
            out.push_str(&text);
        }
    }
    out
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(cli, &argv[1..]) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(msg) => eprintln!("error: {msg}"),
                Failure::Data(e) => eprintln!("error: {}", render(e)),
                Failure::Internal(e) => eprintln!("internal error: {}", render(e)),
            }
            ExitCode::from(f.code())
        }
    }
}
