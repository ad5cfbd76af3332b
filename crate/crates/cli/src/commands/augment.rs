use std::path::Path;

use figscan_core::augment::{
    apply_pipeline, transform_latex_source, AnnotatedPage, AppliedStep, Transform,
    IMAGE_PIPELINE_ORDER,
};
use figscan_core::dataset::{emit_via, parse_via, AnnotationMap};
use figscan_core::raster::{PageImage, RandomSeed};
use figscan_core::BoxF64;
use rayon::prelude::*;
use serde::Serialize;

use super::{file_name, has_extension, read_input, sorted_entries, write};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::run_manifest::Outcome;

pub const ANNOTATIONS_FILE: &str = "annotations.json";

#[derive(Serialize)]
struct Sidecar<'a> {
    page_id: &'a str,
    seed: RandomSeed,
    steps: &'a [AppliedStep],
    boxes_in: usize,
    boxes_out: usize,
}

struct Augmented {
    png: Vec<u8>,
    boxes: Vec<BoxF64>,
    sidecar: String,
}

pub fn run(input: &Path, cfg: &RunConfig, out: &Path, o: &mut Outcome) -> Result<(), CliError> {
    let aug = &cfg.augment;
    aug.validate().map_err(CliError::bad_input)?;
    o.inputs.push(input.display().to_string());
    let entries = sorted_entries(input)?;
    let pages: Vec<_> = entries
        .iter()
        .filter(|p| p.is_file() && has_extension(p, "png"))
        .collect();
    let sources: Vec<_> = entries
        .iter()
        .filter(|p| p.is_file() && has_extension(p, "tex"))
        .collect();

    let ann_path = input.join(ANNOTATIONS_FILE);
    let annotations = if ann_path.is_file() {
        parse_via(&read_input(&ann_path)?)
            .map_err(|e| CliError::bad_input(anyhow::anyhow!("{}: {e}", ann_path.display())))?
    } else {
        AnnotationMap::new()
    };
    let names: Vec<String> = pages.iter().map(|p| file_name(p)).collect();
    for key in annotations.keys().filter(|k| !names.contains(k)) {
        log::warn!("annotations.json lists {key} but no such page image exists");
    }

    o.seeds.insert("base".into(), aug.seed.0);
    o.transform_order = Some(
        IMAGE_PIPELINE_ORDER
            .iter()
            .chain(Transform::ALL.iter().filter(|t| t.is_latex()))
            .filter(|&&t| aug.is_enabled(t))
            .map(|t| t.key().to_string())
            .collect(),
    );

    let results: Vec<Result<Augmented, String>> = pages
        .par_iter()
        .enumerate()
        .map(|(index, path)| {
            let page_id = file_name(path);
            let image = PageImage::load_png(path).map_err(|e| e.to_string())?;
            let boxes = annotations.get(&page_id).cloned().unwrap_or_default();
            let page_cfg = aug.for_page(index as u64);
            let page = AnnotatedPage {
                page_id: page_id.clone(),
                image,
                boxes,
            };
            let done = apply_pipeline(&page, &page_cfg).map_err(|e| e.to_string())?;
            let sidecar = Sidecar {
                page_id: &page_id,
                seed: page_cfg.seed,
                steps: &done.steps,
                boxes_in: page.boxes.len(),
                boxes_out: done.page.boxes.len(),
            };
            Ok(Augmented {
                png: done.page.image.encode_png().map_err(|e| e.to_string())?,
                boxes: done.page.boxes,
                sidecar: serde_json::to_string_pretty(&sidecar).map_err(|e| e.to_string())? + "\n",
            })
        })
        .collect();

    let mut out_ann = AnnotationMap::new();
    for (index, (name, result)) in names.iter().zip(results).enumerate() {
        o.counts.processed += 1;
        o.seeds
            .insert(format!("page:{name}"), aug.seed.derive(index as u64).0);
        match result {
            Ok(a) => {
                write(&out.join(name), &a.png)?;
                write(&out.join(sidecar_name(name)), &a.sidecar)?;
                out_ann.insert(name.clone(), a.boxes);
                o.counts.succeeded += 1;
            }
            Err(reason) => o.fail(name.clone(), reason),
        }
    }

    for path in sources {
        let name = file_name(path);
        o.counts.processed += 1;
        let result = read_input(path)
            .map_err(|e| e.to_string())
            .and_then(|src| transform_latex_source(&src, aug).map_err(|e| e.to_string()));
        match result {
            Ok(text) => {
                write(&out.join(&name), text)?;
                o.counts.succeeded += 1;
            }
            Err(reason) => o.fail(name, reason),
        }
    }

    write(&out.join(ANNOTATIONS_FILE), emit_via(&out_ann))?;
    o.summary = Some(format!(
        "augmented {} of {} inputs ({} failed)",
        o.counts.succeeded, o.counts.processed, o.counts.failed
    ));
    Ok(())
}

fn sidecar_name(page: &str) -> String {
    let stem = page
        .strip_suffix(".png")
        .or_else(|| page.strip_suffix(".PNG"))
        .unwrap_or(page);
    format!("{stem}.augment.json")
}
