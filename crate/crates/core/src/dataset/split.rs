//! Seeded page-level splits.
//!
//! Inputs are sorted before shuffling, so the result depends only on the
//! set of pages and the seed, never on the order they were listed in.

use std::fmt::Debug;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::raster::RandomSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitKind {
    HalfHalf,
    KFold { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    #[serde(flatten)]
    pub kind: SplitKind,
    pub seed: RandomSeed,
}

impl SplitSpec {
    pub fn new(kind: SplitKind, seed: RandomSeed) -> Result<Self, DatasetError> {
        if let SplitKind::KFold { k } = kind {
            if k < 2 {
                return Err(DatasetError::FoldCountTooSmall { k });
            }
        }
        Ok(Self { kind, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HalfSplit<P> {
    pub validation: Vec<P>,
    pub test: Vec<P>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Fold<P> {
    pub index: usize,
    pub train: Vec<P>,
    pub held_out: Vec<P>,
}

fn shuffled<P: Ord + Clone + Debug>(pages: &[P], seed: RandomSeed) -> Result<Vec<P>, DatasetError> {
    let mut v = pages.to_vec();
    v.sort();
    if let Some(i) = v.windows(2).position(|w| w[0] == w[1]) {
        return Err(DatasetError::DuplicatePage {
            page: format!("{:?}", v[i]),
        });
    }
    v.shuffle(&mut seed.rng());
    Ok(v)
}

/// Shuffles, then sends the first `ceil(n / 2)` pages to validation and
/// the rest to test.
pub fn split_half<P: Ord + Clone + Debug>(
    pages: &[P],
    seed: RandomSeed,
) -> Result<HalfSplit<P>, DatasetError> {
    if pages.len() < 2 {
        return Err(DatasetError::TooFewPages {
            got: pages.len(),
            need: 2,
        });
    }
    let mut v = shuffled(pages, seed)?;
    let test = v.split_off(pages.len().div_ceil(2));
    Ok(HalfSplit {
        validation: v,
        test,
    })
}

/// Shuffles, then cuts the sequence into `k` contiguous held-out folds.
/// The first `n mod k` folds get one extra page.
pub fn k_fold<P: Ord + Clone + Debug>(
    pages: &[P],
    k: usize,
    seed: RandomSeed,
) -> Result<Vec<Fold<P>>, DatasetError> {
    let n = pages.len();
    if k < 2 || k > n {
        return Err(DatasetError::InvalidFoldCount { k, pages: n });
    }
    let v = shuffled(pages, seed)?;
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for index in 0..k {
        let end = start + base + usize::from(index < extra);
        let train = v[..start].iter().chain(&v[end..]).cloned().collect();
        folds.push(Fold {
            index,
            train,
            held_out: v[start..end].to_vec(),
        });
        start = end;
    }
    Ok(folds)
}
