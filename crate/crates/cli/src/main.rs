use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use zerostab::cli::Cli;
use zerostab::commands::run;
use zerostab::CliError;

#[derive(Serialize)]
struct ErrorReport<'a> {
    schema: u32,
    error: &'static str,
    kind: &'static str,
    message: &'a str,
}

fn fail(err: &CliError) -> ExitCode {
    let message = err.to_string();
    eprintln!("zerostab: {message}");
    if !matches!(err, CliError::Usage(_)) {
        let (error, kind) = err.tags();
        let doc = ErrorReport {
            schema: 1,
            error,
            kind,
            message: &message,
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("error report serializes")
        );
    }
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((text, None)) => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                return fail(&CliError::Io {
                    path: "<stdout>".into(),
                    source: e,
                });
            }
            ExitCode::SUCCESS
        }
        Ok((text, Some(path))) => match std::fs::write(path, text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(source) => fail(&CliError::Io {
                path: path.display().to_string(),
                source,
            }),
        },
        Err(e) => fail(&e),
    }
}
