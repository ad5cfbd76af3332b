use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use figscan_core::raster::GENERATOR_NAME;
use serde::Serialize;
use serde_json::Value;

use crate::config::RunConfig;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub processed: usize,
    pub succeeded: usize,
    pub skipped: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Failure {
    pub item: String,
    pub reason: String,
}

/// What a command reports back for the run record.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub counts: Counts,
    pub failures: Vec<Failure>,
    pub inputs: Vec<String>,
    /// Seeds actually used, keyed by what they seeded.
    pub seeds: BTreeMap<String, u64>,
    /// Only set by commands that apply transforms.
    pub transform_order: Option<Vec<String>>,
    pub summary: Option<String>,
}

impl Outcome {
    pub fn fail(&mut self, item: impl Into<String>, reason: impl ToString) {
        self.counts.failed += 1;
        self.failures.push(Failure {
            item: item.into(),
            reason: reason.to_string(),
        });
    }
}

/// The single reproducibility record each run leaves in its output
/// directory. Wall time and timestamp live only here.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub version: &'static str,
    pub started_at: String,
    pub wall_time_seconds: f64,
    pub inputs: Vec<String>,
    pub output: String,
    pub config: Value,
    pub generator: &'static str,
    pub seeds: BTreeMap<String, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform_order: Option<Vec<String>>,
    pub counts: Counts,
    pub failures: Vec<Failure>,
    pub exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub struct RunClock {
    started: Instant,
    started_at: String,
}

impl RunClock {
    pub fn start() -> Self {
        Self {
            started: Instant::now(),
            started_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        }
    }
}

pub fn build(
    command: &str,
    clock: RunClock,
    output: &Path,
    config: &RunConfig,
    outcome: Outcome,
    exit_code: u8,
    error: Option<String>,
) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        arguments: std::env::args().skip(1).collect(),
        version: env!("CARGO_PKG_VERSION"),
        started_at: clock.started_at,
        wall_time_seconds: clock.started.elapsed().as_secs_f64(),
        inputs: outcome.inputs,
        output: output.display().to_string(),
        config: serde_json::to_value(config).unwrap_or(Value::Null),
        generator: GENERATOR_NAME,
        seeds: outcome.seeds,
        transform_order: outcome.transform_order,
        counts: outcome.counts,
        failures: outcome.failures,
        exit_code,
        error,
    }
}
