use std::path::{Path, PathBuf};

use figscan_core::evaluator::{fold_statistics, FoldStatistics, Scores};
use serde::{Deserialize, Serialize};

use super::{read_input, write_json};
use crate::error::CliError;
use crate::run_manifest::Outcome;

pub const STATISTICS_FILE: &str = "fold_statistics.json";

#[derive(Deserialize)]
struct ReportCorpus {
    corpus: CorpusScores,
}

#[derive(Deserialize, Serialize, Clone, Copy)]
struct CorpusScores {
    precision: f64,
    recall: f64,
    f1: f64,
}

#[derive(Serialize)]
struct PerReport {
    report: String,
    #[serde(flatten)]
    scores: CorpusScores,
}

#[derive(Serialize)]
struct StatisticsFile {
    reports: Vec<PerReport>,
    statistics: FoldStatistics<f64>,
}

pub fn run(reports: &[PathBuf], out: &Path, o: &mut Outcome) -> Result<(), CliError> {
    let mut rows = Vec::new();
    for path in reports {
        o.inputs.push(path.display().to_string());
        let parsed: ReportCorpus = serde_json::from_str(&read_input(path)?)
            .map_err(|e| CliError::bad_input(anyhow::anyhow!("{}: {e}", path.display())))?;
        rows.push(PerReport {
            report: path.display().to_string(),
            scores: parsed.corpus,
        });
    }
    let scores: Vec<Scores<f64>> = rows
        .iter()
        .map(|r| Scores {
            precision: r.scores.precision,
            recall: r.scores.recall,
            f1: r.scores.f1,
        })
        .collect();
    let statistics = fold_statistics(&scores).map_err(CliError::bad_input)?;
    o.counts.processed = rows.len();
    o.counts.succeeded = rows.len();
    o.summary = Some(format!(
        "{} reports: precision {:.3} ± {:.3}, recall {:.3} ± {:.3}, f1 {:.3} ± {:.3}",
        statistics.folds,
        statistics.precision.mean,
        statistics.precision.std,
        statistics.recall.mean,
        statistics.recall.std,
        statistics.f1.mean,
        statistics.f1.std
    ));
    write_json(
        &out.join(STATISTICS_FILE),
        &StatisticsFile {
            reports: rows,
            statistics,
        },
    )
}
