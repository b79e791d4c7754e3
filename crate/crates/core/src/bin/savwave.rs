use std::process::ExitCode;

use savwave::cli::{execute, exit_code, ParseOutcome, RunConfig, EXIT_USAGE};

fn main() -> ExitCode {
    let cfg = match RunConfig::parse_from(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(ParseOutcome::Info(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(ParseOutcome::Usage(text)) => {
            eprintln!("{}", text.trim_end());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let csv = match execute(&cfg) {
        Ok(csv) => csv,
        Err(e) => {
            eprintln!("savwave: {e}");
            return ExitCode::from(exit_code(&e) as u8);
        }
    };
    match &cfg.output_path {
        Some(path) => {
            if let Err(e) = std::fs::write(path, csv) {
                eprintln!("savwave: cannot write {}: {e}", path.display());
                return ExitCode::from(EXIT_USAGE as u8);
            }
        }
        None => print!("{csv}"),
    }
    ExitCode::SUCCESS
}
