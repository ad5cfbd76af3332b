//! VGG Image Annotator JSON.
//!
//! Accepted inputs are a full project save (`{"_via_img_metadata": {...}}`)
//! or a bare annotation export (`{"<filename><size>": {...}}`). Regions may
//! be an array or an object keyed by index. Pages are keyed by `filename`.

use serde_json::{json, Map, Number, Value};

use super::{AnnotationMap, DatasetError};
use crate::geometry::BoundingBox;

const PROJECT_METADATA_KEY: &str = "_via_img_metadata";

pub fn parse_via(text: &str) -> Result<AnnotationMap, DatasetError> {
    let root: Value = serde_json::from_str(text).map_err(|e| DatasetError::from_json(text, e))?;
    let Value::Object(root) = root else {
        return Err(schema("<root>", "top level must be a JSON object"));
    };
    let entries = match root.get(PROJECT_METADATA_KEY) {
        Some(Value::Object(meta)) => meta,
        Some(_) => return Err(schema(PROJECT_METADATA_KEY, "must be an object")),
        None => &root,
    };

    let mut out = AnnotationMap::new();
    for (key, entry) in entries {
        if key.starts_with("_via_") {
            continue;
        }
        let Value::Object(entry) = entry else {
            return Err(schema(key, "image entry must be an object"));
        };
        let page = match entry.get("filename") {
            Some(Value::String(s)) => s.clone(),
            _ => return Err(schema(key, "missing string field \"filename\"")),
        };
        let boxes = parse_regions(&page, entry.get("regions"))?;
        if out.insert(page.clone(), boxes).is_some() {
            return Err(DatasetError::DuplicatePage { page });
        }
    }
    Ok(out)
}

fn parse_regions(
    page: &str,
    regions: Option<&Value>,
) -> Result<Vec<BoundingBox<f64>>, DatasetError> {
    let list: Vec<&Value> = match regions {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(a)) => a.iter().collect(),
        Some(Value::Object(m)) => {
            let mut keyed: Vec<(&String, &Value)> = m.iter().collect();
            keyed.sort_by_key(|(k, _)| (k.parse::<u64>().unwrap_or(u64::MAX), k.as_str()));
            keyed.into_iter().map(|(_, v)| v).collect()
        }
        Some(_) => return Err(schema(page, "\"regions\" must be an array or object")),
    };
    list.into_iter().map(|r| parse_region(page, r)).collect()
}

fn parse_region(page: &str, region: &Value) -> Result<BoundingBox<f64>, DatasetError> {
    let Some(Value::Object(shape)) = region.get("shape_attributes") else {
        return Err(schema(page, "region without \"shape_attributes\" object"));
    };
    let name = shape.get("name").and_then(Value::as_str).unwrap_or("");
    if name != "rect" {
        return Err(DatasetError::UnsupportedShape {
            page: page.to_string(),
            shape: name.to_string(),
        });
    }
    let field = |k: &str| -> Result<f64, DatasetError> {
        shape
            .get(k)
            .and_then(Value::as_f64)
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                schema(
                    page,
                    &format!("rect field \"{k}\" missing or not a finite number"),
                )
            })
    };
    let (x, y, w, h) = (field("x")?, field("y")?, field("width")?, field("height")?);
    if w <= 0.0 || h <= 0.0 {
        return Err(DatasetError::InvalidRegion {
            page: page.to_string(),
            reason: format!("width {w} and height {h} must both be positive"),
        });
    }
    BoundingBox::new(x, y, x + w, y + h).map_err(|e| DatasetError::InvalidRegion {
        page: page.to_string(),
        reason: e.to_string(),
    })
}

fn schema(page: &str, message: &str) -> DatasetError {
    DatasetError::Schema {
        page: page.to_string(),
        message: message.to_string(),
    }
}

/// Writes a bare VIA annotation export. Keys are `<filename>-1` (size is
/// unknown and recorded as -1). Integral coordinates are written as JSON
/// integers; others use the shortest representation that reads back to the
/// same `f64`.
pub fn emit_via(annotations: &AnnotationMap) -> String {
    let mut root = Map::new();
    for (page, boxes) in annotations {
        let regions: Vec<Value> = boxes
            .iter()
            .map(|b| {
                json!({
                    "shape_attributes": {
                        "name": "rect",
                        "x": number(b.x1()),
                        "y": number(b.y1()),
                        "width": number(exact_extent(b.x1(), b.x2())),
                        "height": number(exact_extent(b.y1(), b.y2())),
                    },
                    "region_attributes": {},
                })
            })
            .collect();
        root.insert(
            format!("{page}-1"),
            json!({
                "filename": page,
                "size": -1,
                "regions": regions,
                "file_attributes": {},
            }),
        );
    }
    let mut text =
        serde_json::to_string_pretty(&Value::Object(root)).expect("JSON values always serialize");
    text.push('\n');
    text
}

/// Extent `w` with `origin + w == end` in `f64` arithmetic, so that parsing
/// the emitted rectangle reproduces `end` exactly. Falls back to the plain
/// difference when no such value is within a few ulps (only possible for
/// negative origins far larger in magnitude than `end`).
fn exact_extent(origin: f64, end: f64) -> f64 {
    let mut w = end - origin;
    for _ in 0..8 {
        let s = origin + w;
        if s == end {
            return w;
        }
        w = if s < end { w.next_up() } else { w.next_down() };
    }
    end - origin
}

fn number(v: f64) -> Value {
    const EXACT_INT: f64 = 9_007_199_254_740_992.0;
    if v.fract() == 0.0 && v.abs() < EXACT_INT {
        Value::Number(Number::from(v as i64))
    } else {
        Number::from_f64(v)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }
}
