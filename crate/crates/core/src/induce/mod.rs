//! Figure-label induction by render differencing: compile a LaTeX source
//! as-is and with every float framed, diff the page images, and read the
//! frames back as boxes.

mod diff;
mod markup;
mod render;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::AnnotationMap;
use crate::geometry::BoundingBox;
use crate::raster::{PageImage, RasterError};

pub use diff::{diff_pages, regions_to_labels, DiffRegion};
pub use markup::{frame_stroke_px, inject_box_markup, FRAME_RULE_PT, MARKUP_BEGIN, MARKUP_END};
pub use render::{
    load_page_dir, CommandRenderer, PreRenderedPages, RenderedDocument, Renderer, Variant,
    DEFAULT_RENDER_COMMAND, RENDER_COMMAND_ENV,
};

#[derive(Debug, Error)]
pub enum InduceError {
    #[error("LaTeX preamble not found: {0}")]
    Preamble(String),
    #[error("renderer unavailable: {0}")]
    RendererUnavailable(String),
    #[error("rendering {doc_id} failed: {diagnostic}")]
    RenderFailed { doc_id: String, diagnostic: String },
    #[error("{doc_id}: markup changed pagination ({plain} plain pages, {marked} marked pages)")]
    PaginationMismatch {
        doc_id: String,
        plain: usize,
        marked: usize,
    },
    #[error(
        "page images differ in shape: plain {plain:?}, marked {marked:?} (width, height, channels)"
    )]
    DimensionMismatch {
        plain: (u32, u32, usize),
        marked: (u32, u32, usize),
    },
    #[error("invalid induction config: {field} {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InduceConfig {
    pub dpi: u32,
    /// Per-channel absolute difference a pixel must exceed to count.
    pub diff_threshold: u8,
    pub min_region_px: usize,
    /// Frame stroke to strip from each envelope; derived from `dpi` when unset.
    pub stroke_px: Option<u32>,
    /// Fraction of the smaller envelope two envelopes must share to merge.
    pub merge_overlap: f64,
    pub render_command: Option<String>,
    pub max_render_processes: usize,
}

impl Default for InduceConfig {
    fn default() -> Self {
        Self {
            dpi: 100,
            diff_threshold: 20,
            min_region_px: 25,
            stroke_px: None,
            merge_overlap: 0.5,
            render_command: None,
            max_render_processes: 2,
        }
    }
}

impl InduceConfig {
    pub fn validate(&self) -> Result<(), InduceError> {
        let bad = |field, reason: &str| {
            Err(InduceError::InvalidConfig {
                field,
                reason: reason.to_string(),
            })
        };
        if self.dpi == 0 {
            return bad("dpi", "must be positive");
        }
        if !(self.merge_overlap > 0.0 && self.merge_overlap <= 1.0) {
            return bad("merge_overlap", "must lie in (0, 1]");
        }
        if self.max_render_processes == 0 {
            return bad("max_render_processes", "must be positive");
        }
        Ok(())
    }

    pub fn effective_stroke_px(&self) -> u32 {
        self.stroke_px.unwrap_or_else(|| frame_stroke_px(self.dpi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InducedPage {
    /// `<doc_id>_<zero-based page index>`.
    pub page_id: String,
    pub image: PageImage,
    pub labels: Vec<BoundingBox<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InducedDocument {
    pub doc_id: String,
    pub dpi: u32,
    pub pages: Vec<InducedPage>,
}

impl InducedDocument {
    pub fn label_count(&self) -> usize {
        self.pages.iter().map(|p| p.labels.len()).sum()
    }

    /// Labels keyed by `<page_id>.png`, matching the file names the page
    /// images are saved under.
    pub fn annotations(&self) -> AnnotationMap {
        self.pages
            .iter()
            .map(|p| (format!("{}.png", p.page_id), p.labels.clone()))
            .collect()
    }
}

/// Labels from an already rendered pair. A page-count mismatch aborts the
/// document with [`InduceError::PaginationMismatch`].
pub fn induce_rendered(
    plain: RenderedDocument,
    marked: &RenderedDocument,
    cfg: &InduceConfig,
) -> Result<InducedDocument, InduceError> {
    if plain.pages.len() != marked.pages.len() {
        return Err(InduceError::PaginationMismatch {
            doc_id: plain.doc_id,
            plain: plain.pages.len(),
            marked: marked.pages.len(),
        });
    }
    let stroke = cfg.effective_stroke_px();
    let mut pages = Vec::with_capacity(plain.pages.len());
    for (index, (p, m)) in plain.pages.into_iter().zip(&marked.pages).enumerate() {
        let regions = diff_pages(&p, m, cfg.diff_threshold, cfg.min_region_px)?;
        let labels = regions_to_labels(&regions, stroke, cfg.merge_overlap);
        pages.push(InducedPage {
            page_id: crate::dataset::page_id(&plain.doc_id, index),
            image: p,
            labels,
        });
    }
    Ok(InducedDocument {
        doc_id: plain.doc_id,
        dpi: plain.dpi,
        pages,
    })
}

/// Renders `source` plain and framed through `renderer`, then induces.
pub fn induce_from_source(
    doc_id: &str,
    source: &str,
    renderer: &dyn Renderer,
    cfg: &InduceConfig,
) -> Result<InducedDocument, InduceError> {
    let marked_source = inject_box_markup(source)?;
    let plain = renderer.render(doc_id, source, Variant::Plain, cfg.dpi)?;
    let marked = renderer.render(doc_id, &marked_source, Variant::Marked, cfg.dpi)?;
    induce_rendered(plain, &marked, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum DocumentStatus {
    Succeeded { pages: usize, labels: usize },
    Skipped { reason: String },
    Failed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DocumentOutcome {
    pub doc_id: String,
    #[serde(flatten)]
    pub status: DocumentStatus,
}

/// Per-run tally. Pagination mismatches are skips; every other error is a
/// failure.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InductionReport {
    pub succeeded: usize,
    pub skipped: usize,
    pub failed: usize,
    pub documents: Vec<DocumentOutcome>,
}

impl InductionReport {
    pub fn record(&mut self, doc_id: &str, result: &Result<InducedDocument, InduceError>) {
        let status = match result {
            Ok(doc) => {
                self.succeeded += 1;
                DocumentStatus::Succeeded {
                    pages: doc.pages.len(),
                    labels: doc.label_count(),
                }
            }
            Err(e @ InduceError::PaginationMismatch { .. }) => {
                self.skipped += 1;
                DocumentStatus::Skipped {
                    reason: e.to_string(),
                }
            }
            Err(e) => {
                self.failed += 1;
                DocumentStatus::Failed {
                    reason: e.to_string(),
                }
            }
        };
        self.documents.push(DocumentOutcome {
            doc_id: doc_id.to_string(),
            status,
        });
    }
}
