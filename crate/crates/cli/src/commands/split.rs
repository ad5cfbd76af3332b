use std::path::Path;

use figscan_core::dataset::{k_fold, split_half, Fold};
use figscan_core::raster::RandomSeed;
use serde::Serialize;

use super::{write_json, PageSource};
use crate::args::SplitMode;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::run_manifest::Outcome;

pub const HALF_FILE: &str = "split.json";
pub const FOLDS_FILE: &str = "folds.json";

#[derive(Serialize)]
struct HalfFile<'a> {
    kind: &'static str,
    seed: RandomSeed,
    validation: &'a [String],
    test: &'a [String],
}

#[derive(Serialize)]
struct FoldsFile<'a> {
    kind: &'static str,
    k: usize,
    seed: RandomSeed,
    folds: &'a [Fold<String>],
}

pub fn run(
    manifest: &Path,
    mode: SplitMode,
    k: Option<usize>,
    cfg: &RunConfig,
    out: &Path,
    o: &mut Outcome,
) -> Result<(), CliError> {
    o.inputs.push(manifest.display().to_string());
    let pages = PageSource::load(manifest)?.page_ids();
    let seed = cfg.split.seed;
    o.seeds.insert("split".into(), seed.0);
    o.counts.processed = pages.len();
    match mode {
        SplitMode::Half => {
            let s = split_half(&pages, seed).map_err(CliError::bad_input)?;
            write_json(
                &out.join(HALF_FILE),
                &HalfFile {
                    kind: "half_half",
                    seed,
                    validation: &s.validation,
                    test: &s.test,
                },
            )?;
            o.summary = Some(format!(
                "validation {} / test {}",
                s.validation.len(),
                s.test.len()
            ));
        }
        SplitMode::Kfold => {
            let k = k.or(cfg.split.k).ok_or_else(|| {
                CliError::bad_input(anyhow::anyhow!("--kind kfold needs --k or [split] k"))
            })?;
            let folds = k_fold(&pages, k, seed).map_err(CliError::bad_input)?;
            write_json(
                &out.join(FOLDS_FILE),
                &FoldsFile {
                    kind: "k_fold",
                    k,
                    seed,
                    folds: &folds,
                },
            )?;
            let sizes: Vec<String> = folds.iter().map(|f| f.held_out.len().to_string()).collect();
            o.summary = Some(format!("{k} folds, held-out sizes {}", sizes.join(",")));
        }
    }
    o.counts.succeeded = pages.len();
    Ok(())
}
