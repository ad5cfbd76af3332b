//! Batch front end for figscan. Each subcommand writes its artifacts and
//! exactly one `manifest.json` into `--output`.

pub mod args;
mod commands;
pub mod config;
pub mod error;
mod run_manifest;

use std::path::Path;

pub use args::{Cli, Command};
pub use config::RunConfig;
pub use error::{exit, CliError};
use run_manifest::{Outcome, RunClock};

pub const MANIFEST_FILE: &str = "manifest.json";

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Augment { .. } => "augment",
            Command::Induce { .. } => "induce",
            Command::Split { .. } => "split",
            Command::Evaluate(_) => "evaluate",
            Command::Ablate => "ablate",
            Command::Report { .. } => "report",
        }
    }
}

/// Runs one invocation and returns its exit code.
pub fn run(cli: Cli) -> u8 {
    let clock = RunClock::start();
    let Some(output) = cli.global.output.clone() else {
        eprintln!("error: --output <DIR> is required");
        return exit::BAD_INPUT;
    };
    if let Err(e) = std::fs::create_dir_all(&output) {
        eprintln!("error: cannot create {}: {e}", output.display());
        return exit::INTERNAL;
    }

    let mut outcome = Outcome::default();
    let (config, result) = match RunConfig::resolve(&cli.global) {
        Ok(cfg) => {
            let result = run_in_pool(cli.global.jobs, || {
                dispatch(&cli.command, &cfg, &output, &mut outcome)
            });
            (cfg, result)
        }
        Err(e) => (RunConfig::default(), Err(e)),
    };

    let code = match &result {
        Ok(()) if outcome.counts.failed > 0 => exit::PARTIAL_FAILURE,
        Ok(()) => exit::OK,
        Err(e) => e.code,
    };
    let error = result.as_ref().err().map(ToString::to_string);
    if let Some(msg) = &error {
        eprintln!("error: {msg}");
    }
    for f in &outcome.failures {
        eprintln!("failed: {}: {}", f.item, f.reason);
    }
    if let Some(summary) = &outcome.summary {
        println!("{summary}");
    }

    let manifest = run_manifest::build(
        cli.command.name(),
        clock,
        &output,
        &config,
        outcome,
        code,
        error,
    );
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    if let Err(e) = std::fs::write(output.join(MANIFEST_FILE), text + "\n") {
        eprintln!("error: cannot write manifest: {e}");
        return exit::INTERNAL;
    }
    code
}

fn run_in_pool<F>(jobs: usize, f: F) -> Result<(), CliError>
where
    F: FnOnce() -> Result<(), CliError> + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(CliError::internal)?;
    pool.install(f)
}

fn dispatch(
    command: &Command,
    cfg: &RunConfig,
    out: &Path,
    o: &mut Outcome,
) -> Result<(), CliError> {
    match command {
        Command::Augment { input } => commands::augment::run(input, cfg, out, o),
        Command::Induce { sources } => commands::induce::run(sources, cfg, out, o),
        Command::Split { manifest, kind, k } => {
            commands::split::run(manifest, *kind, *k, cfg, out, o)
        }
        Command::Evaluate(args) => commands::evaluate::run(args, cfg, out, o),
        Command::Ablate => commands::ablate::run(cfg, out, o),
        Command::Report { reports } => commands::report::run(reports, out, o),
    }
}
