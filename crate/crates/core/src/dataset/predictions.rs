//! Detector output as CSV, one prediction per row:
//!
//! ```text
//! page_id,x1,y1,x2,y2,confidence
//! page_001.png,10,20,310,220,0.93
//! ```
//!
//! One record per line. The header row is optional. Lines starting with
//! `#` and blank lines are ignored. Coordinates are page pixels with
//! `x1 <= x2` and `y1 <= y2`.

use std::collections::BTreeMap;

use super::DatasetError;
use crate::evaluator::Prediction;
use crate::geometry::BoundingBox;

pub const PREDICTION_HEADER: [&str; 6] = ["page_id", "x1", "y1", "x2", "y2", "confidence"];

/// Page id to that page's predictions, in file order.
pub type PredictionSet = BTreeMap<String, Vec<Prediction<f64>>>;

pub fn parse_predictions(text: &str) -> Result<PredictionSet, DatasetError> {
    let mut out = PredictionSet::new();
    let mut seen_data = false;
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx as u64 + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let record = parse_line(raw_line, line)?;
        if !seen_data && record.get(0) == Some(PREDICTION_HEADER[0]) {
            if record.iter().ne(PREDICTION_HEADER) {
                return Err(DatasetError::InvalidRow {
                    line,
                    reason: format!("header must be {}", PREDICTION_HEADER.join(",")),
                });
            }
            seen_data = true;
            continue;
        }
        seen_data = true;
        if record.len() != PREDICTION_HEADER.len() {
            return Err(DatasetError::InvalidRow {
                line,
                reason: format!(
                    "expected {} fields, found {}",
                    PREDICTION_HEADER.len(),
                    record.len()
                ),
            });
        }
        let page = record[0].to_string();
        if page.is_empty() {
            return Err(DatasetError::InvalidRow {
                line,
                reason: "empty page_id".into(),
            });
        }
        let mut nums = [0.0f64; 5];
        for (k, slot) in nums.iter_mut().enumerate() {
            let raw = &record[k + 1];
            *slot = raw
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| DatasetError::InvalidRow {
                    line,
                    reason: format!(
                        "{} = {raw:?} is not a finite number",
                        PREDICTION_HEADER[k + 1]
                    ),
                })?;
        }
        let [x1, y1, x2, y2, confidence] = nums;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(DatasetError::ConfidenceOutOfRange {
                line,
                value: confidence,
            });
        }
        let bbox = BoundingBox::new(x1, y1, x2, y2).map_err(|e| DatasetError::InvalidRow {
            line,
            reason: e.to_string(),
        })?;
        out.entry(page)
            .or_default()
            .push(Prediction::new(bbox, confidence));
    }
    Ok(out)
}

/// One record per line; quoting follows RFC 4180 within the line.
fn parse_line(raw: &str, line: u64) -> Result<csv::StringRecord, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(raw.as_bytes());
    let mut record = csv::StringRecord::new();
    match reader.read_record(&mut record) {
        Ok(true) => Ok(record),
        Ok(false) => Ok(csv::StringRecord::new()),
        Err(e) => Err(DatasetError::InvalidRow {
            line,
            reason: e.to_string(),
        }),
    }
}

/// Writes `set` with a header row. Floats use the shortest form that
/// parses back to the same value.
pub fn emit_predictions(set: &PredictionSet) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(PREDICTION_HEADER)
        .expect("in-memory write");
    for (page, preds) in set {
        for p in preds {
            let b = p.bbox;
            writer
                .write_record([
                    page.clone(),
                    b.x1().to_string(),
                    b.y1().to_string(),
                    b.x2().to_string(),
                    b.y2().to_string(),
                    p.confidence.to_string(),
                ])
                .expect("in-memory write");
        }
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush"))
        .expect("CSV of UTF-8 fields is UTF-8")
}
