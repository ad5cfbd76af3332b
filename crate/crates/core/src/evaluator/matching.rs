use std::cmp::Ordering;

use serde::Serialize;

use super::hungarian::{solve, CostMatrix, Lexicographic};
use super::EvalError;
use crate::geometry::{center_distance, iou, BoundingBox};
use crate::scalar::Scalar;

/// Thresholds of the matching protocol. Predictions with confidence below
/// `confidence_threshold` are discarded; a matched pair counts as correct
/// when its IOU is at least `iou_threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchConfig<T> {
    pub confidence_threshold: T,
    pub iou_threshold: T,
}

impl<T: Scalar> MatchConfig<T> {
    pub fn new(confidence_threshold: T, iou_threshold: T) -> Result<Self, EvalError> {
        let unit = |name: &'static str, v: T| {
            if v >= T::zero() && v <= T::one() {
                Ok(())
            } else {
                Err(EvalError::InvalidThreshold {
                    name,
                    value: v.to_f64_lossy(),
                })
            }
        };
        unit("confidence_threshold", confidence_threshold)?;
        unit("iou_threshold", iou_threshold)?;
        Ok(Self {
            confidence_threshold,
            iou_threshold,
        })
    }
}

impl<T: Scalar> Default for MatchConfig<T> {
    fn default() -> Self {
        Self {
            confidence_threshold: T::lit(0.5),
            iou_threshold: T::lit(0.8),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction<T> {
    #[serde(rename = "box")]
    pub bbox: BoundingBox<T>,
    pub confidence: T,
}

impl<T: Scalar> Prediction<T> {
    pub fn new(bbox: BoundingBox<T>, confidence: T) -> Self {
        Self { bbox, confidence }
    }
}

/// Keeps predictions with `confidence >= threshold`, preserving order.
pub fn filter_predictions<T: Scalar>(
    preds: &[Prediction<T>],
    cfg: &MatchConfig<T>,
) -> Vec<Prediction<T>> {
    preds
        .iter()
        .filter(|p| p.confidence >= cfg.confidence_threshold)
        .copied()
        .collect()
}

/// One assigned (prediction, ground truth) pair. Indices refer to the
/// unfiltered inputs of [`match_page`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchRecord<T> {
    pub prediction: usize,
    pub ground_truth: usize,
    pub iou: T,
    pub center_distance: T,
    pub true_positive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageEval<T> {
    pub page_id: String,
    #[serde(rename = "tp")]
    pub true_positives: usize,
    #[serde(rename = "fp")]
    pub false_positives: usize,
    #[serde(rename = "fn")]
    pub false_negatives: usize,
    pub matches: Vec<MatchRecord<T>>,
}

fn box_key_cmp<T: Scalar>(a: &BoundingBox<T>, b: &BoundingBox<T>) -> Ordering {
    [a.x1(), a.y1(), a.x2(), a.y2()]
        .iter()
        .zip([b.x1(), b.y1(), b.x2(), b.y2()].iter())
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Scores one page: filter by confidence, assign predictions to ground
/// truth minimizing total center distance, then classify each pair by IOU.
///
/// A pair below the IOU threshold counts as one false positive and one
/// false negative. Unassigned predictions are false positives and
/// unassigned ground truths false negatives, so `tp + fn == gt.len()` and
/// `tp + fp == filtered.len()`.
///
/// Among assignments with the same total center distance the one with the
/// largest total IOU wins. Both inputs are put into a canonical geometric
/// order before assignment, which makes the result independent of the
/// order they were given in.
pub fn match_page<T: Scalar>(
    page_id: &str,
    gt: &[BoundingBox<T>],
    preds: &[Prediction<T>],
    cfg: &MatchConfig<T>,
) -> PageEval<T> {
    let mut kept: Vec<usize> = (0..preds.len())
        .filter(|&i| preds[i].confidence >= cfg.confidence_threshold)
        .collect();
    kept.sort_by(|&a, &b| {
        box_key_cmp(&preds[a].bbox, &preds[b].bbox).then(
            preds[b]
                .confidence
                .partial_cmp(&preds[a].confidence)
                .unwrap_or(Ordering::Equal),
        )
    });
    let mut truth: Vec<usize> = (0..gt.len()).collect();
    truth.sort_by(|&a, &b| box_key_cmp(&gt[a], &gt[b]));

    // ties on total center distance go to the assignment with more overlap
    let cost = CostMatrix::from_fn(kept.len(), truth.len(), |r, c| {
        let (p, g) = (&preds[kept[r]].bbox, &gt[truth[c]]);
        Lexicographic {
            primary: center_distance(p, g),
            secondary: -iou(p, g),
        }
    });
    let pairs = solve(&cost);

    let mut matches: Vec<MatchRecord<T>> = pairs
        .into_iter()
        .map(|(r, c)| {
            let (p, g) = (kept[r], truth[c]);
            let Lexicographic { primary, secondary } = cost.get(r, c);
            let overlap = -secondary;
            MatchRecord {
                prediction: p,
                ground_truth: g,
                iou: overlap,
                center_distance: primary,
                true_positive: overlap >= cfg.iou_threshold,
            }
        })
        .collect();
    matches.sort_by_key(|m| (m.ground_truth, m.prediction));

    let tp = matches.iter().filter(|m| m.true_positive).count();
    PageEval {
        page_id: page_id.to_string(),
        true_positives: tp,
        false_positives: kept.len() - tp,
        false_negatives: gt.len() - tp,
        matches,
    }
}
