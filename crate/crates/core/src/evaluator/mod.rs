//! Detection scoring: confidence filtering, center-distance assignment,
//! IOU-thresholded TP/FP/FN classification, and corpus/fold aggregation.

mod hungarian;
mod matching;
mod metrics;

use thiserror::Error;

pub use hungarian::{hungarian_assign, AssignCost, AssignError, CostMatrix, Lexicographic};
pub use matching::{
    filter_predictions, match_page, MatchConfig, MatchRecord, PageEval, Prediction,
};
pub use metrics::{
    aggregate, aggregate_macro, f1_score, fold_statistics, mean_and_sample_std, CorpusMetrics,
    Counts, FoldStatistics, MeanStd, Scores,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("cannot aggregate an empty list of pages")]
    EmptyCorpus,
    #[error("fold statistics need at least 2 folds, got {got}")]
    TooFewFolds { got: usize },
    #[error("{name} = {value} must lie in [0, 1]")]
    InvalidThreshold { name: &'static str, value: f64 },
    #[error(transparent)]
    Assign(#[from] AssignError),
}
