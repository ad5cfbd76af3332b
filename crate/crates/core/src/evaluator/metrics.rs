use serde::Serialize;

use super::matching::PageEval;
use super::EvalError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Counts {
    pub fn of_page<T>(page: &PageEval<T>) -> Self {
        Self {
            tp: page.true_positives,
            fp: page.false_positives,
            fn_: page.false_negatives,
        }
    }
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Scores<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

impl<T: Scalar> Scores<T> {
    /// Scores from published precision/recall, with F1 derived.
    pub fn from_precision_recall(precision: T, recall: T) -> Self {
        Self {
            precision,
            recall,
            f1: f1_score(precision, recall),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorpusMetrics<T> {
    #[serde(flatten)]
    pub scores: Scores<T>,
    #[serde(flatten)]
    pub counts: Counts,
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1_score<T: Scalar>(precision: T, recall: T) -> T {
    let sum = precision + recall;
    if sum > T::zero() {
        T::lit(2.0) * precision * recall / sum
    } else {
        T::zero()
    }
}

impl<T: Scalar> CorpusMetrics<T> {
    /// Precision is 1 when nothing was predicted and nothing was there to
    /// find, 0 when nothing was predicted but something was missed. Recall
    /// is 1 when there was nothing to find.
    pub fn from_counts(counts: Counts) -> Self {
        let Counts { tp, fp, fn_ } = counts;
        let ratio = |num: usize, den: usize| T::lit(num as f64) / T::lit(den as f64);
        let precision = if tp + fp > 0 {
            ratio(tp, tp + fp)
        } else if fn_ == 0 {
            T::one()
        } else {
            T::zero()
        };
        let recall = if tp + fn_ > 0 {
            ratio(tp, tp + fn_)
        } else {
            T::one()
        };
        Self {
            scores: Scores::from_precision_recall(precision, recall),
            counts,
        }
    }
}

/// Micro-aggregate: sums TP/FP/FN over pages, then scores the sums.
pub fn aggregate<T: Scalar>(pages: &[PageEval<T>]) -> Result<CorpusMetrics<T>, EvalError> {
    if pages.is_empty() {
        return Err(EvalError::EmptyCorpus);
    }
    let total = pages
        .iter()
        .map(Counts::of_page)
        .fold(Counts::default(), |a, b| a + b);
    Ok(CorpusMetrics::from_counts(total))
}

/// Macro-aggregate: mean of per-page precision, recall and F1. Counts are
/// still the corpus sums.
pub fn aggregate_macro<T: Scalar>(pages: &[PageEval<T>]) -> Result<CorpusMetrics<T>, EvalError> {
    let micro = aggregate(pages)?;
    let n = T::lit(pages.len() as f64);
    let per_page: Vec<Scores<T>> = pages
        .iter()
        .map(|p| CorpusMetrics::<T>::from_counts(Counts::of_page(p)).scores)
        .collect();
    let mean = |f: fn(&Scores<T>) -> T| per_page.iter().map(f).sum::<T>() / n;
    Ok(CorpusMetrics {
        scores: Scores {
            precision: mean(|s| s.precision),
            recall: mean(|s| s.recall),
            f1: mean(|s| s.f1),
        },
        counts: micro.counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanStd<T> {
    pub mean: T,
    /// Sample standard deviation (n - 1 denominator).
    pub std: T,
}

pub fn mean_and_sample_std<T: Scalar>(values: &[T]) -> Result<MeanStd<T>, EvalError> {
    if values.len() < 2 {
        return Err(EvalError::TooFewFolds { got: values.len() });
    }
    let n = T::lit(values.len() as f64);
    let mean = values.iter().copied().sum::<T>() / n;
    let ss = values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>();
    Ok(MeanStd {
        mean,
        std: (ss / (n - T::one())).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldStatistics<T> {
    pub folds: usize,
    pub precision: MeanStd<T>,
    pub recall: MeanStd<T>,
    pub f1: MeanStd<T>,
}

/// Mean and sample standard deviation of each score across folds.
pub fn fold_statistics<T: Scalar>(per_fold: &[Scores<T>]) -> Result<FoldStatistics<T>, EvalError> {
    let column = |f: fn(&Scores<T>) -> T| -> Vec<T> { per_fold.iter().map(f).collect() };
    Ok(FoldStatistics {
        folds: per_fold.len(),
        precision: mean_and_sample_std(&column(|s| s.precision))?,
        recall: mean_and_sample_std(&column(|s| s.recall))?,
        f1: mean_and_sample_std(&column(|s| s.f1))?,
    })
}
