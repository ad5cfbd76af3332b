//! Annotation and prediction file formats, the ScanBank-style manifest, and
//! seeded page splits.

mod manifest;
mod predictions;
mod split;
mod via;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::BoundingBox;

pub use manifest::{page_id, ManifestDocument, ScanBankManifest};
pub use predictions::{emit_predictions, parse_predictions, PredictionSet, PREDICTION_HEADER};
pub use split::{k_fold, split_half, Fold, HalfSplit, SplitKind, SplitSpec};
pub use via::{emit_via, parse_via};

/// Page id to the figure boxes on that page.
pub type AnnotationMap = BTreeMap<String, Vec<BoundingBox<f64>>>;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("malformed JSON at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("page {page}: {message}")]
    Schema { page: String, message: String },
    #[error("page {page}: unsupported region shape {shape:?}, only \"rect\" is accepted")]
    UnsupportedShape { page: String, shape: String },
    #[error("page {page}: invalid region: {reason}")]
    InvalidRegion { page: String, reason: String },
    #[error("page {page} appears more than once")]
    DuplicatePage { page: String },
    #[error("page id {page_id:?} is not of the form <doc_id>_<page_index>")]
    MalformedPageId { page_id: String },
    #[error("page {page_id} references unknown document {doc_id}")]
    UnknownDocument { page_id: String, doc_id: String },
    #[error("page {page_id}: index {index} outside document of {page_count} pages")]
    PageOutOfRange {
        page_id: String,
        index: usize,
        page_count: usize,
    },
    #[error("document {doc_id} listed more than once")]
    DuplicateDocument { doc_id: String },
    #[error("a split needs at least {need} pages, got {got}")]
    TooFewPages { got: usize, need: usize },
    #[error("k-fold needs k >= 2, got {k}")]
    FoldCountTooSmall { k: usize },
    #[error("k = {k} is invalid for {pages} pages (need 2 <= k <= pages)")]
    InvalidFoldCount { k: usize, pages: usize },
    #[error("line {line}: {reason}")]
    InvalidRow { line: u64, reason: String },
    #[error("line {line}: confidence {value} outside [0, 1]")]
    ConfidenceOutOfRange { line: u64, value: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl DatasetError {
    pub(crate) fn from_json(text: &str, err: serde_json::Error) -> Self {
        DatasetError::Parse {
            offset: byte_offset(text, err.line(), err.column()),
            message: err.to_string(),
        }
    }
}

/// Converts serde_json's 1-based (line, byte column) to a byte offset.
fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    if line == 0 {
        return 0;
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + column.saturating_sub(1)).min(text.len())
}
