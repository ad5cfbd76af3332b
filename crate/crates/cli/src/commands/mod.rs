pub mod ablate;
pub mod augment;
pub mod evaluate;
pub mod induce;
pub mod report;
pub mod split;

use std::path::{Path, PathBuf};

use figscan_core::dataset::{parse_via, AnnotationMap, ScanBankManifest};

use crate::error::CliError;

pub(crate) fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    std::fs::write(path, contents)
        .map_err(|e| CliError::internal(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}

pub(crate) fn read_input(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::bad_input(anyhow::anyhow!("cannot read {}: {e}", path.display())))
}

pub(crate) fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::internal)?;
    text.push('\n');
    write(path, text)
}

/// Directory entries sorted by file name.
pub(crate) fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let rd = std::fs::read_dir(dir).map_err(|e| {
        CliError::bad_input(anyhow::anyhow!(
            "cannot read directory {}: {e}",
            dir.display()
        ))
    })?;
    let mut paths: Vec<PathBuf> = rd
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::bad_input(anyhow::anyhow!("cannot list {}: {e}", dir.display())))?;
    paths.sort();
    Ok(paths)
}

pub(crate) fn has_extension(path: &Path, ext: &str) -> bool {
    path.extension()
        .is_some_and(|x| x.eq_ignore_ascii_case(ext))
}

pub(crate) fn file_name(path: &Path) -> String {
    path.file_name()
        .unwrap_or_default()
        .to_string_lossy()
        .into_owned()
}

pub(crate) enum PageSource {
    Manifest(ScanBankManifest),
    Via(AnnotationMap),
}

impl PageSource {
    /// A ScanBank manifest when the JSON has a `documents` key, VIA otherwise.
    pub(crate) fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_input(path)?;
        let context = |e| CliError::bad_input(anyhow::anyhow!("{}: {e}", path.display()));
        let is_manifest = serde_json::from_str::<serde_json::Value>(&text)
            .map(|v| v.get("documents").is_some())
            .unwrap_or(false);
        if is_manifest {
            ScanBankManifest::parse(&text)
                .map(PageSource::Manifest)
                .map_err(context)
        } else {
            parse_via(&text).map(PageSource::Via).map_err(context)
        }
    }

    pub(crate) fn page_ids(&self) -> Vec<String> {
        match self {
            PageSource::Manifest(m) => m.page_ids(),
            PageSource::Via(v) => v.keys().cloned().collect(),
        }
    }

    /// Ground truth per page. Manifest pages without annotations count as
    /// pages with no figures.
    pub(crate) fn annotations(self) -> AnnotationMap {
        match self {
            PageSource::Manifest(m) => {
                let mut all: AnnotationMap =
                    m.page_ids().into_iter().map(|p| (p, Vec::new())).collect();
                all.extend(m.annotations().clone());
                all
            }
            PageSource::Via(v) => v,
        }
    }
}
