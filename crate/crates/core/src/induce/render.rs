use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::{Condvar, Mutex};

use serde::Serialize;

use super::InduceError;
use crate::raster::PageImage;

/// Environment variable that overrides the configured command template.
pub const RENDER_COMMAND_ENV: &str = "FIGSCAN_RENDER_COMMAND";

/// Compiles `{input}` into `{outdir}` and rasterizes every page there as PNG.
pub const DEFAULT_RENDER_COMMAND: &str = "pdflatex -interaction=nonstopmode -halt-on-error \
     -output-directory {outdir} {input} >/dev/null && \
     pdftoppm -r {dpi} -png {outdir}/document.pdf {outdir}/page";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plain,
    Marked,
}

impl Variant {
    pub fn dir_name(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::Marked => "marked",
        }
    }
}

/// Pages of one compiled document, all at `dpi`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedDocument {
    pub doc_id: String,
    pub dpi: u32,
    pub pages: Vec<PageImage>,
}

impl RenderedDocument {
    pub fn new(
        doc_id: impl Into<String>,
        dpi: u32,
        pages: Vec<PageImage>,
    ) -> Result<Self, InduceError> {
        let doc_id = doc_id.into();
        if pages.is_empty() {
            return Err(InduceError::RenderFailed {
                doc_id,
                diagnostic: "renderer produced no pages".into(),
            });
        }
        Ok(Self { doc_id, dpi, pages })
    }
}

pub trait Renderer: Send + Sync {
    fn render(
        &self,
        doc_id: &str,
        source: &str,
        variant: Variant,
        dpi: u32,
    ) -> Result<RenderedDocument, InduceError>;
}

/// Runs a shell command template per compile.
///
/// Placeholders: `{input}` (the `.tex` file), `{outdir}` (where PNG pages
/// must appear) and `{dpi}`. Paths are single-quoted before substitution.
/// Exit status 127 or a missing shell means the renderer is unavailable;
/// any other failure carries the command's stderr and the tail of the
/// LaTeX log.
pub struct CommandRenderer {
    template: String,
    work_dir: PathBuf,
    slots: Semaphore,
}

impl CommandRenderer {
    pub fn new(
        template: impl Into<String>,
        work_dir: impl Into<PathBuf>,
        max_processes: usize,
    ) -> Self {
        Self {
            template: template.into(),
            work_dir: work_dir.into(),
            slots: Semaphore::new(max_processes.max(1)),
        }
    }

    /// Template from `FIGSCAN_RENDER_COMMAND`, else `configured`, else the default.
    pub fn resolve_template(configured: Option<&str>) -> String {
        std::env::var(RENDER_COMMAND_ENV)
            .ok()
            .filter(|s| !s.trim().is_empty())
            .or_else(|| configured.map(str::to_string))
            .unwrap_or_else(|| DEFAULT_RENDER_COMMAND.to_string())
    }

    pub fn template(&self) -> &str {
        &self.template
    }

    fn command_line(&self, input: &Path, outdir: &Path, dpi: u32) -> String {
        self.template
            .replace("{input}", &shell_quote(input))
            .replace("{outdir}", &shell_quote(outdir))
            .replace("{dpi}", &dpi.to_string())
    }
}

impl Renderer for CommandRenderer {
    fn render(
        &self,
        doc_id: &str,
        source: &str,
        variant: Variant,
        dpi: u32,
    ) -> Result<RenderedDocument, InduceError> {
        let dir = self.work_dir.join(doc_id).join(variant.dir_name());
        if dir.exists() {
            fs::remove_dir_all(&dir)?;
        }
        fs::create_dir_all(&dir)?;
        let input = dir.join("document.tex");
        fs::write(&input, source)?;

        let cmd = self.command_line(&input, &dir, dpi);
        log::debug!("rendering {doc_id} ({}): {cmd}", variant.dir_name());
        let output = {
            let _slot = self.slots.acquire();
            Command::new("sh")
                .arg("-c")
                .arg(&cmd)
                .current_dir(&dir)
                .output()
        };
        let output =
            output.map_err(|e| InduceError::RendererUnavailable(format!("cannot run sh: {e}")))?;
        if !output.status.success() {
            let stderr = String::from_utf8_lossy(&output.stderr).into_owned();
            if output.status.code() == Some(127) {
                return Err(InduceError::RendererUnavailable(stderr.trim().to_string()));
            }
            let log_tail = fs::read_to_string(dir.join("document.log"))
                .map(|log| tail_lines(&log, 30))
                .unwrap_or_default();
            return Err(InduceError::RenderFailed {
                doc_id: doc_id.to_string(),
                diagnostic: format!("{}\n{}", stderr.trim(), log_tail)
                    .trim()
                    .to_string(),
            });
        }
        RenderedDocument::new(doc_id, dpi, load_page_dir(&dir)?)
    }
}

/// Serves page images rendered ahead of time from
/// `<root>/<doc_id>/plain/*.png` and `<root>/<doc_id>/marked/*.png`.
pub struct PreRenderedPages {
    root: PathBuf,
}

impl PreRenderedPages {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// Whether `dir` has the `plain/` and `marked/` layout.
    pub fn is_document_dir(dir: &Path) -> bool {
        dir.join(Variant::Plain.dir_name()).is_dir()
            && dir.join(Variant::Marked.dir_name()).is_dir()
    }
}

impl Renderer for PreRenderedPages {
    fn render(
        &self,
        doc_id: &str,
        _source: &str,
        variant: Variant,
        dpi: u32,
    ) -> Result<RenderedDocument, InduceError> {
        let dir = self.root.join(doc_id).join(variant.dir_name());
        if !dir.is_dir() {
            return Err(InduceError::RenderFailed {
                doc_id: doc_id.to_string(),
                diagnostic: format!("missing page directory {}", dir.display()),
            });
        }
        RenderedDocument::new(doc_id, dpi, load_page_dir(&dir)?)
    }
}

/// Loads every `*.png` in `dir`, in natural filename order.
pub fn load_page_dir(dir: &Path) -> Result<Vec<PageImage>, InduceError> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("png")))
        .collect();
    files.sort_by_cached_key(|p| natural_key(&p.file_name().unwrap_or_default().to_string_lossy()));
    files
        .iter()
        .map(|p| PageImage::load_png(p).map_err(InduceError::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Chunk {
    Num(u128, usize),
    Text(String),
}

/// `page-2` sorts before `page-10`.
fn natural_key(name: &str) -> Vec<Chunk> {
    let mut out = Vec::new();
    let mut rest = name;
    while !rest.is_empty() {
        let digits = rest.bytes().take_while(u8::is_ascii_digit).count();
        if digits > 0 {
            let (d, r) = rest.split_at(digits);
            out.push(Chunk::Num(d.parse().unwrap_or(u128::MAX), d.len()));
            rest = r;
        } else {
            let text = rest.bytes().take_while(|b| !b.is_ascii_digit()).count();
            let (t, r) = rest.split_at(text);
            out.push(Chunk::Text(t.to_string()));
            rest = r;
        }
    }
    out
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.to_string_lossy().replace('\'', r"'\''"))
}

fn tail_lines(text: &str, n: usize) -> String {
    let lines: Vec<&str> = text.lines().collect();
    lines[lines.len().saturating_sub(n)..].join("\n")
}

struct Semaphore {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}
