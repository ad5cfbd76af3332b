//! ScanBank-style dataset manifest.
//!
//! ```json
//! {
//!   "documents": [{"etd_url": "https://...", "doc_id": "etd42", "page_count": 120}],
//!   "annotations": {"etd42_7": [{"x": 10, "y": 20, "width": 300, "height": 200}]}
//! }
//! ```
//!
//! Page ids are `<doc_id>_<page_index>` with a zero-based index.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{AnnotationMap, DatasetError};
use crate::geometry::BoundingBox;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestDocument {
    pub etd_url: String,
    pub doc_id: String,
    pub page_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct RawBox {
    x: f64,
    y: f64,
    width: f64,
    height: f64,
}

#[derive(Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct RawManifest {
    documents: Vec<ManifestDocument>,
    #[serde(default)]
    annotations: BTreeMap<String, Vec<RawBox>>,
}

/// A validated manifest: every annotated page belongs to a listed
/// document, and every box has non-negative coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanBankManifest {
    documents: Vec<ManifestDocument>,
    annotations: AnnotationMap,
}

impl ScanBankManifest {
    pub fn new(
        documents: Vec<ManifestDocument>,
        annotations: AnnotationMap,
    ) -> Result<Self, DatasetError> {
        let mut counts = HashMap::new();
        for d in &documents {
            if counts.insert(d.doc_id.as_str(), d.page_count).is_some() {
                return Err(DatasetError::DuplicateDocument {
                    doc_id: d.doc_id.clone(),
                });
            }
        }
        for (page_id, boxes) in &annotations {
            let (doc_id, index) = split_page_id(page_id)?;
            let Some(&page_count) = counts.get(doc_id) else {
                return Err(DatasetError::UnknownDocument {
                    page_id: page_id.clone(),
                    doc_id: doc_id.to_string(),
                });
            };
            if index >= page_count {
                return Err(DatasetError::PageOutOfRange {
                    page_id: page_id.clone(),
                    index,
                    page_count,
                });
            }
            if let Some(b) = boxes.iter().find(|b| b.x1() < 0.0 || b.y1() < 0.0) {
                return Err(DatasetError::InvalidRegion {
                    page: page_id.clone(),
                    reason: format!("negative coordinate in box at ({}, {})", b.x1(), b.y1()),
                });
            }
        }
        Ok(Self {
            documents,
            annotations,
        })
    }

    pub fn parse(text: &str) -> Result<Self, DatasetError> {
        let raw: RawManifest =
            serde_json::from_str(text).map_err(|e| DatasetError::from_json(text, e))?;
        let mut annotations = AnnotationMap::new();
        for (page_id, boxes) in raw.annotations {
            let converted = boxes
                .iter()
                .map(|r| {
                    if !(r.width > 0.0 && r.height > 0.0) {
                        return Err(DatasetError::InvalidRegion {
                            page: page_id.clone(),
                            reason: format!(
                                "width {} and height {} must both be positive",
                                r.width, r.height
                            ),
                        });
                    }
                    BoundingBox::from_xywh(r.x, r.y, r.width, r.height).map_err(|e| {
                        DatasetError::InvalidRegion {
                            page: page_id.clone(),
                            reason: e.to_string(),
                        }
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            annotations.insert(page_id, converted);
        }
        Self::new(raw.documents, annotations)
    }

    pub fn to_json(&self) -> String {
        let raw = RawManifest {
            documents: self.documents.clone(),
            annotations: self
                .annotations
                .iter()
                .map(|(k, v)| {
                    let boxes = v
                        .iter()
                        .map(|b| RawBox {
                            x: b.x1(),
                            y: b.y1(),
                            width: b.width(),
                            height: b.height(),
                        })
                        .collect();
                    (k.clone(), boxes)
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("manifest always serializes")
    }

    pub fn documents(&self) -> &[ManifestDocument] {
        &self.documents
    }

    pub fn annotations(&self) -> &AnnotationMap {
        &self.annotations
    }

    /// Every page of every document, in document then page order.
    pub fn page_ids(&self) -> Vec<String> {
        self.documents
            .iter()
            .flat_map(|d| (0..d.page_count).map(move |i| page_id(&d.doc_id, i)))
            .collect()
    }

    pub fn page_count(&self) -> usize {
        self.documents.iter().map(|d| d.page_count).sum()
    }
}

pub fn page_id(doc_id: &str, index: usize) -> String {
    format!("{doc_id}_{index}")
}

fn split_page_id(page_id: &str) -> Result<(&str, usize), DatasetError> {
    let malformed = || DatasetError::MalformedPageId {
        page_id: page_id.to_string(),
    };
    let (doc, index) = page_id.rsplit_once('_').ok_or_else(malformed)?;
    if doc.is_empty() || index.is_empty() || !index.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    Ok((doc, index.parse().map_err(|_| malformed())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "documents": [
            {"etd_url": "https://example.org/a.pdf", "doc_id": "etd_a", "page_count": 3},
            {"etd_url": "https://example.org/b.pdf", "doc_id": "b", "page_count": 1}
        ],
        "annotations": {
            "etd_a_2": [{"x": 10, "y": 20, "width": 30, "height": 40}],
            "b_0": []
        }
    }"#;

    #[test]
    fn parses_and_enumerates_pages() {
        let m = ScanBankManifest::parse(SAMPLE).unwrap();
        assert_eq!(m.page_ids(), vec!["etd_a_0", "etd_a_1", "etd_a_2", "b_0"]);
        assert_eq!(m.page_count(), 4);
        assert_eq!(
            m.annotations()["etd_a_2"],
            vec![BoundingBox::new(10., 20., 40., 60.).unwrap()]
        );
        let again = ScanBankManifest::parse(&m.to_json()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn rejects_out_of_range_and_unknown_pages() {
        let bad = SAMPLE.replace("etd_a_2", "etd_a_3");
        assert!(matches!(
            ScanBankManifest::parse(&bad),
            Err(DatasetError::PageOutOfRange {
                index: 3,
                page_count: 3,
                ..
            })
        ));
        let unknown = SAMPLE.replace("b_0", "c_0");
        assert!(matches!(
            ScanBankManifest::parse(&unknown),
            Err(DatasetError::UnknownDocument { .. })
        ));
        let malformed = SAMPLE.replace("b_0", "b-0");
        assert!(matches!(
            ScanBankManifest::parse(&malformed),
            Err(DatasetError::MalformedPageId { .. })
        ));
    }

    #[test]
    fn rejects_negative_coordinates() {
        let neg = SAMPLE.replace("\"x\": 10", "\"x\": -1");
        assert!(matches!(
            ScanBankManifest::parse(&neg),
            Err(DatasetError::InvalidRegion { .. })
        ));
    }
}
