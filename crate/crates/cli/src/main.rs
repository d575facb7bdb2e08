//! Configuration-driven experiment runner.
//!
//! Reads a JSON experiment description, executes it, and writes a result
//! document with the inputs echoed, the measured values, and one
//! pass/fail entry per declared check.
//!
//! Exit status: 0 when every check passes, 1 on a failed check or a
//! numeric failure, 2 on configuration or i/o problems.

mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;

use config::{ConfigDoc, OutputFormat};
use report::{Outcome, ResultDoc};

#[derive(Debug, Parser)]
#[command(
    name = "multitime",
    about = "Run multi-time evolution experiments from a JSON configuration"
)]
struct Cli {
    /// Path to the experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Where to write the result document (defaults to the config's `out`
    /// field, or stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format (defaults to the config's `format` field, or json).
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Reserved for future randomized experiments; echoed into the result
    /// document. All current experiments are deterministic.
    #[arg(long)]
    seed: Option<u64>,
    /// Print a human-oriented summary to stderr.
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(all_passed) => {
            if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(message) => {
            eprintln!("multitime: {message}");
            ExitCode::from(2)
        }
    }
}

/// Outer error = configuration/i-o problem (exit 2). The Ok payload says
/// whether every check passed.
fn run(cli: &Cli) -> Result<bool, String> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| format!("cannot read {}: {e}", cli.config.display()))?;
    let doc: ConfigDoc =
        serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))?;

    let inputs = doc.params.clone();
    let outcome = experiments::run_experiment(&doc.experiment, doc.params.clone());

    // Configuration-level failures (unknown kind, malformed params) exit 2
    // without a result document; numeric failures produce a document with
    // an error block and exit 1.
    let (outcome, error) = match outcome {
        Ok(outcome) => (outcome, None),
        Err((code, message)) if code == "config" => {
            return Err(format!("{}: {message}", doc.experiment));
        }
        Err((code, message)) => {
            (Outcome { results: serde_json::Value::Null, checks: Vec::new() }, Some((code, message)))
        }
    };

    let pass = error.is_none() && outcome.pass();
    let result = ResultDoc {
        experiment: doc.experiment.clone(),
        timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        seed: cli.seed,
        inputs,
        results: outcome.results,
        checks: outcome.checks,
        error,
        pass,
    };

    if cli.verbose {
        for check in &result.checks {
            eprintln!(
                "  [{}] {} (measured {:.6e}, threshold {:.6e}, {})",
                if check.pass { "pass" } else { "FAIL" },
                check.name,
                check.measured,
                check.threshold,
                check.comparison,
            );
        }
        if let Some((code, message)) = &result.error {
            eprintln!("  [FAIL] {code}: {message}");
        }
    }

    let format = cli.format.or(doc.format).unwrap_or(OutputFormat::Json);
    let rendered = match format {
        OutputFormat::Json => result.to_json(),
        OutputFormat::Csv => result.to_csv(),
    };
    let out_path = cli.out.clone().or_else(|| doc.out.clone().map(PathBuf::from));
    match out_path {
        Some(path) => std::fs::write(&path, rendered)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{rendered}"),
    }

    Ok(pass)
}
