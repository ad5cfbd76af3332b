use serde::Serialize;

use super::InduceError;
use crate::geometry::BoundingBox;
use crate::raster::PageImage;

/// An 8-connected set of differing pixels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffRegion {
    /// `(x, y)` pixel indices in discovery order.
    pub pixels: Vec<(u32, u32)>,
    envelope: BoundingBox<f64>,
}

impl DiffRegion {
    fn from_pixels(pixels: Vec<(u32, u32)>) -> Self {
        let (mut x1, mut y1, mut x2, mut y2) = (u32::MAX, u32::MAX, 0, 0);
        for &(x, y) in &pixels {
            x1 = x1.min(x);
            y1 = y1.min(y);
            x2 = x2.max(x);
            y2 = y2.max(y);
        }
        let envelope = BoundingBox::new(x1 as f64, y1 as f64, x2 as f64 + 1.0, y2 as f64 + 1.0)
            .expect("non-empty pixel set has an ordered envelope");
        Self { pixels, envelope }
    }

    /// Smallest box covering every pixel square of the region.
    pub fn envelope(&self) -> BoundingBox<f64> {
        self.envelope
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// Connected regions where `plain` and `marked` differ by more than
/// `threshold` on any channel. Regions with fewer than `min_region_px`
/// pixels are dropped. Output is ordered by each region's first pixel in
/// row-major order.
pub fn diff_pages(
    plain: &PageImage,
    marked: &PageImage,
    threshold: u8,
    min_region_px: usize,
) -> Result<Vec<DiffRegion>, InduceError> {
    if plain.width() != marked.width()
        || plain.height() != marked.height()
        || plain.channels() != marked.channels()
    {
        return Err(InduceError::DimensionMismatch {
            plain: (plain.width(), plain.height(), plain.channels().count()),
            marked: (marked.width(), marked.height(), marked.channels().count()),
        });
    }
    let (w, h) = (plain.width() as usize, plain.height() as usize);
    let ch = plain.channels().count();
    let mut mask: Vec<bool> = plain
        .data()
        .chunks_exact(ch)
        .zip(marked.data().chunks_exact(ch))
        .map(|(a, b)| a.iter().zip(b).any(|(&p, &q)| p.abs_diff(q) > threshold))
        .collect();

    let mut regions = Vec::new();
    let mut stack = Vec::new();
    for start in 0..mask.len() {
        if !mask[start] {
            continue;
        }
        mask[start] = false;
        stack.push(start);
        let mut pixels = Vec::new();
        while let Some(i) = stack.pop() {
            let (x, y) = (i % w, i / w);
            pixels.push((x as u32, y as u32));
            for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    let j = ny * w + nx;
                    if mask[j] {
                        mask[j] = false;
                        stack.push(j);
                    }
                }
            }
        }
        if pixels.len() >= min_region_px {
            regions.push(DiffRegion::from_pixels(pixels));
        }
    }
    Ok(regions)
}

/// Turns one page's regions into figure labels.
///
/// Envelopes whose intersection exceeds `merge_overlap` of the smaller
/// envelope's area are replaced by their union until no such pair is left.
/// Each remaining envelope is shrunk by `stroke_px` per edge; envelopes too
/// thin to survive the inset are dropped. Labels are sorted top to bottom,
/// then left to right.
pub fn regions_to_labels(
    regions: &[DiffRegion],
    stroke_px: u32,
    merge_overlap: f64,
) -> Vec<BoundingBox<f64>> {
    let mut boxes: Vec<BoundingBox<f64>> = regions.iter().map(DiffRegion::envelope).collect();
    'outer: loop {
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                let (a, b) = (boxes[i], boxes[j]);
                if a.intersection_area(&b) > merge_overlap * a.area().min(b.area()) {
                    boxes[i] = a.union_envelope(&b);
                    boxes.swap_remove(j);
                    continue 'outer;
                }
            }
        }
        break;
    }
    let s = stroke_px as f64;
    let mut labels: Vec<BoundingBox<f64>> = boxes
        .into_iter()
        .filter(|b| b.width() > 2.0 * s && b.height() > 2.0 * s)
        .map(|b| b.inset(s))
        .collect();
    labels.sort_by(|a, b| {
        (a.y1(), a.x1(), a.y2(), a.x2())
            .partial_cmp(&(b.y1(), b.x1(), b.y2(), b.x2()))
            .expect("labels are finite")
    });
    labels
}
