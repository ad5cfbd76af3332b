use std::collections::BTreeSet;
use std::path::Path;

use figscan_core::dataset::parse_predictions;
use figscan_core::evaluator::{
    aggregate, aggregate_macro, fold_statistics, match_page, FoldStatistics,
};
use figscan_core::{CorpusMetricsF64, MatchConfigF64, PageEvalF64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{read_input, write_json, PageSource};
use crate::args::EvaluateArgs;
use crate::config::{Aggregation, RunConfig};
use crate::error::CliError;
use crate::run_manifest::Outcome;

pub const REPORT_FILE: &str = "report.json";

#[derive(Deserialize)]
struct FoldsInput {
    folds: Vec<FoldInput>,
}

#[derive(Deserialize)]
struct FoldInput {
    index: usize,
    held_out: Vec<String>,
}

#[derive(Serialize)]
pub struct FoldReport {
    pub index: usize,
    pub pages: usize,
    pub metrics: CorpusMetricsF64,
}

#[derive(Serialize)]
pub struct EvalReport {
    pub aggregation: Aggregation,
    pub match_config: MatchConfigF64,
    pub corpus: CorpusMetricsF64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub folds: Option<Vec<FoldReport>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fold_statistics: Option<FoldStatistics<f64>>,
    /// Prediction pages with no ground-truth entry; ignored in scoring.
    pub unknown_prediction_pages: Vec<String>,
    pub pages: Vec<PageEvalF64>,
}

fn score(pages: &[PageEvalF64], how: Aggregation) -> Result<CorpusMetricsF64, CliError> {
    match how {
        Aggregation::Micro => aggregate(pages),
        Aggregation::Macro => aggregate_macro(pages),
    }
    .map_err(CliError::bad_input)
}

pub fn run(
    args: &EvaluateArgs,
    cfg: &RunConfig,
    out: &Path,
    o: &mut Outcome,
) -> Result<(), CliError> {
    o.inputs.push(args.annotations.display().to_string());
    o.inputs.push(args.predictions.display().to_string());
    let match_cfg = cfg.evaluate.match_config()?;
    let how = if args.macro_average {
        Aggregation::Macro
    } else {
        cfg.evaluate.aggregation
    };

    let truth = PageSource::load(&args.annotations)?.annotations();
    let preds = parse_predictions(&read_input(&args.predictions)?)
        .map_err(|e| CliError::bad_input(anyhow::anyhow!("{}: {e}", args.predictions.display())))?;
    let unknown: Vec<String> = preds
        .keys()
        .filter(|k| !truth.contains_key(*k))
        .cloned()
        .collect();
    for page in &unknown {
        log::warn!("predictions for unknown page {page} are ignored");
    }

    let pages: Vec<PageEvalF64> = truth
        .par_iter()
        .map(|(id, gt)| {
            match_page(
                id,
                gt,
                preds.get(id).map_or(&[][..], Vec::as_slice),
                &match_cfg,
            )
        })
        .collect();
    let corpus = score(&pages, how)?;

    let (folds, stats) = match &args.folds {
        None => (None, None),
        Some(path) => {
            o.inputs.push(path.display().to_string());
            let input: FoldsInput = serde_json::from_str(&read_input(path)?)
                .map_err(|e| CliError::bad_input(anyhow::anyhow!("{}: {e}", path.display())))?;
            let mut reports = Vec::new();
            for fold in input.folds {
                let held: BTreeSet<&str> = fold.held_out.iter().map(String::as_str).collect();
                for missing in held.iter().filter(|p| !truth.contains_key(**p)) {
                    log::warn!("fold {}: page {missing} has no ground truth", fold.index);
                }
                let subset: Vec<PageEvalF64> = pages
                    .iter()
                    .filter(|p| held.contains(p.page_id.as_str()))
                    .cloned()
                    .collect();
                let metrics = score(&subset, how).map_err(|e| {
                    CliError::bad_input(anyhow::anyhow!("fold {}: {e}", fold.index))
                })?;
                reports.push(FoldReport {
                    index: fold.index,
                    pages: subset.len(),
                    metrics,
                });
            }
            let scores: Vec<_> = reports.iter().map(|r| r.metrics.scores).collect();
            let stats = fold_statistics(&scores).ok();
            (Some(reports), stats)
        }
    };

    o.counts.processed = pages.len();
    o.counts.succeeded = pages.len();
    o.summary = Some(format!(
        "precision {:.3}  recall {:.3}  f1 {:.3}  (tp {} fp {} fn {})",
        corpus.scores.precision,
        corpus.scores.recall,
        corpus.scores.f1,
        corpus.counts.tp,
        corpus.counts.fp,
        corpus.counts.fn_
    ));
    let report = EvalReport {
        aggregation: how,
        match_config: match_cfg,
        corpus,
        folds,
        fold_statistics: stats,
        unknown_prediction_pages: unknown,
        pages,
    };
    write_json(&out.join(REPORT_FILE), &report)
}
