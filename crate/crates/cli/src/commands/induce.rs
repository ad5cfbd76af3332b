use std::path::{Path, PathBuf};

use figscan_core::dataset::{emit_via, AnnotationMap};
use figscan_core::induce::{
    induce_from_source, induce_rendered, CommandRenderer, DocumentStatus, InduceError,
    InducedDocument, InductionReport, PreRenderedPages, Renderer, Variant,
};
use rayon::prelude::*;

use super::augment::ANNOTATIONS_FILE;
use super::{file_name, has_extension, sorted_entries, write, write_json};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::run_manifest::Outcome;

pub const REPORT_FILE: &str = "induction_report.json";

enum Doc {
    Source { doc_id: String, path: PathBuf },
    PreRendered { doc_id: String },
}

impl Doc {
    fn id(&self) -> &str {
        match self {
            Doc::Source { doc_id, .. } | Doc::PreRendered { doc_id } => doc_id,
        }
    }
}

fn discover(sources: &Path) -> Result<Vec<Doc>, CliError> {
    let mut docs = Vec::new();
    for path in sorted_entries(sources)? {
        if path.is_file() && has_extension(&path, "tex") {
            let doc_id = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            docs.push(Doc::Source { doc_id, path });
        } else if path.is_dir() && PreRenderedPages::is_document_dir(&path) {
            docs.push(Doc::PreRendered {
                doc_id: file_name(&path),
            });
        }
    }
    docs.sort_by(|a, b| a.id().cmp(b.id()));
    if let Some(w) = docs.windows(2).find(|w| w[0].id() == w[1].id()) {
        return Err(CliError::bad_input(anyhow::anyhow!(
            "document {} is both a .tex source and a pre-rendered directory",
            w[0].id()
        )));
    }
    Ok(docs)
}

fn induce_one(
    doc: &Doc,
    command: Option<&CommandRenderer>,
    pre: &PreRenderedPages,
    cfg: &RunConfig,
) -> Result<InducedDocument, InduceError> {
    match doc {
        Doc::Source { doc_id, path } => {
            let source = std::fs::read_to_string(path)?;
            let renderer = command.expect("command renderer exists when sources are present");
            induce_from_source(doc_id, &source, renderer, &cfg.induce)
        }
        Doc::PreRendered { doc_id } => {
            let plain = pre.render(doc_id, "", Variant::Plain, cfg.induce.dpi)?;
            let marked = pre.render(doc_id, "", Variant::Marked, cfg.induce.dpi)?;
            induce_rendered(plain, &marked, &cfg.induce)
        }
    }
}

/// Writes the plain page images and returns the document's labels.
fn save_pages(doc: &InducedDocument, out: &Path) -> Result<AnnotationMap, InduceError> {
    for page in &doc.pages {
        page.image
            .save_png(out.join(format!("{}.png", page.page_id)))?;
    }
    Ok(doc.annotations())
}

pub fn run(sources: &Path, cfg: &RunConfig, out: &Path, o: &mut Outcome) -> Result<(), CliError> {
    cfg.induce.validate().map_err(CliError::bad_input)?;
    o.inputs.push(sources.display().to_string());
    let docs = discover(sources)?;

    let work = tempfile::tempdir().map_err(CliError::internal)?;
    let command = docs
        .iter()
        .any(|d| matches!(d, Doc::Source { .. }))
        .then(|| {
            let template = CommandRenderer::resolve_template(cfg.induce.render_command.as_deref());
            log::info!("render command: {template}");
            CommandRenderer::new(template, work.path(), cfg.induce.max_render_processes)
        });
    let pre = PreRenderedPages::new(sources);

    let results: Vec<(Result<InducedDocument, InduceError>, Option<AnnotationMap>)> = docs
        .par_iter()
        .map(|doc| {
            let result = induce_one(doc, command.as_ref(), &pre, cfg);
            match result {
                Ok(d) => match save_pages(&d, out) {
                    Ok(ann) => (Ok(d), Some(ann)),
                    Err(e) => (Err(e), None),
                },
                Err(e) => (Err(e), None),
            }
        })
        .collect();

    let mut report = InductionReport::default();
    let mut annotations = AnnotationMap::new();
    let mut unavailable = None;
    for (doc, (result, ann)) in docs.iter().zip(results) {
        if let Err(InduceError::RendererUnavailable(msg)) = &result {
            unavailable.get_or_insert_with(|| msg.clone());
        }
        report.record(doc.id(), &result);
        annotations.extend(ann.unwrap_or_default());
    }

    o.counts.processed = docs.len();
    o.counts.succeeded = report.succeeded;
    o.counts.skipped = report.skipped;
    for d in &report.documents {
        if let DocumentStatus::Failed { reason } = &d.status {
            o.fail(d.doc_id.clone(), reason);
        }
    }
    write(&out.join(ANNOTATIONS_FILE), emit_via(&annotations))?;
    write_json(&out.join(REPORT_FILE), &report)?;
    let labels: usize = annotations.values().map(Vec::len).sum();
    o.summary = Some(format!(
        "induced {labels} labels on {} pages: {} documents succeeded, {} skipped, {} failed",
        annotations.len(),
        report.succeeded,
        report.skipped,
        report.failed
    ));
    if let Some(msg) = unavailable {
        return Err(CliError::renderer_missing(anyhow::anyhow!(
            "{msg}; set [induce] render_command or {}",
            figscan_core::induce::RENDER_COMMAND_ENV
        )));
    }
    Ok(())
}
