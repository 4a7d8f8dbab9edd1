use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::Duration;

use jointorbit::{Error, SampleCfg};
use serde::Serialize;
use serde_json::Value;

use crate::commands::{Input, Outcome};

const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Serialize)]
pub struct Timing {
    pub elapsed_ms: f64,
}

/// Machine-readable record of one invocation. Everything except `timing`
/// is a deterministic function of the command, the input and the flags.
#[derive(Serialize)]
pub struct RunReport<'a> {
    pub version: &'static str,
    pub command: &'a str,
    pub input_digest: &'a str,
    pub cfg: &'a SampleCfg,
    pub result: &'a Value,
    pub warnings: &'a [String],
    pub timing: Timing,
}

impl<'a> RunReport<'a> {
    pub fn new(
        command: &'a str,
        input: &'a Input,
        cfg: &'a SampleCfg,
        outcome: &'a Outcome,
        elapsed: Duration,
    ) -> Self {
        RunReport {
            version: env!("CARGO_PKG_VERSION"),
            command,
            input_digest: &input.digest,
            cfg,
            result: &outcome.result,
            warnings: &outcome.warnings,
            timing: Timing {
                elapsed_ms: elapsed.as_secs_f64() * 1e3,
            },
        }
    }
}

pub fn emit(
    report: &RunReport,
    outcome: &Outcome,
    out: Option<&Path>,
    porcelain: bool,
) -> ExitCode {
    let json = serde_json::to_string_pretty(report).expect("reports serialize");
    if let Some(path) = out {
        if let Err(e) = std::fs::write(path, format!("{json}\n")) {
            eprintln!("error: cannot write `{}`: {e}", path.display());
            return ExitCode::from(EXIT_INPUT);
        }
    }
    let mut stdout = std::io::stdout().lock();
    if porcelain {
        let _ = writeln!(stdout, "{json}");
    } else {
        let _ = writeln!(stdout, "{}", outcome.summary);
        for w in &outcome.warnings {
            eprintln!("warning: {w}");
        }
    }
    if outcome.failed {
        ExitCode::from(EXIT_NUMERIC)
    } else {
        ExitCode::SUCCESS
    }
}

pub fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    if e.is_input_error() {
        ExitCode::from(EXIT_INPUT)
    } else {
        ExitCode::from(EXIT_NUMERIC)
    }
}
