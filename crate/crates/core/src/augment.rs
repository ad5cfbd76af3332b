//! Scan-simulation pipeline: composes the raster transforms, carries the
//! figure boxes through the geometric ones, rewrites LaTeX sources and
//! enumerates leave-one-out ablation configurations.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{transform_box, BoundingBox, GeometryError, PointTransform};
use crate::latex;
use crate::raster::{self, PageImage, RandomSeed, RasterError};

/// Boxes whose clipped area drops below this many square pixels are removed.
pub const MIN_BOX_AREA: f64 = 1.0;

pub const TYPEWRITER_DIRECTIVES: [&str; 2] = [
    r"\renewcommand\ttdefault{cmvtt}",
    r"\renewcommand{\familydefault}{\ttdefault}",
];
pub const LINE_SPACING_DIRECTIVE: &str = r"\linespread{1.5}";
const DOCUMENT_CLASS: &str = r"\documentclass";
const FONT_SIZE_OPTION: &str = "12pt";

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("invalid augmentation config: {field} {reason}")]
    InvalidConfig { field: &'static str, reason: String },
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("no \\documentclass declaration found")]
    MissingDocumentClass,
    #[error("found {count} \\documentclass declarations, expected exactly one")]
    AmbiguousDocumentClass { count: usize },
    #[error("malformed \\documentclass declaration at byte {offset}")]
    MalformedDocumentClass { offset: usize },
    #[error("no \\begin{{document}} found")]
    MissingBeginDocument,
    #[error("leave-one-out base must enable every transform; disabled: {disabled:?}")]
    NotAllEnabled { disabled: Vec<Transform> },
}

/// The nine toggleable augmentations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    AffineRotation,
    GaussianNoise,
    SaltPepper,
    GaussianBlur,
    LinearContrast,
    Perspective,
    FontSize12pt,
    TypewriterFont,
    LineSpacing15,
}

impl Transform {
    pub const ALL: [Transform; 9] = [
        Transform::AffineRotation,
        Transform::GaussianNoise,
        Transform::SaltPepper,
        Transform::GaussianBlur,
        Transform::LinearContrast,
        Transform::Perspective,
        Transform::FontSize12pt,
        Transform::TypewriterFont,
        Transform::LineSpacing15,
    ];

    /// Config-file key of the enable flag.
    pub fn key(self) -> &'static str {
        match self {
            Transform::AffineRotation => "affine_rotation",
            Transform::GaussianNoise => "gaussian_noise",
            Transform::SaltPepper => "salt_pepper",
            Transform::GaussianBlur => "gaussian_blur",
            Transform::LinearContrast => "linear_contrast",
            Transform::Perspective => "perspective",
            Transform::FontSize12pt => "font_size_12pt",
            Transform::TypewriterFont => "typewriter_font",
            Transform::LineSpacing15 => "line_spacing_1_5",
        }
    }

    pub fn is_geometric(self) -> bool {
        matches!(self, Transform::AffineRotation | Transform::Perspective)
    }

    pub fn is_latex(self) -> bool {
        matches!(
            self,
            Transform::FontSize12pt | Transform::TypewriterFont | Transform::LineSpacing15
        )
    }

    fn stream(self) -> u64 {
        Transform::ALL.iter().position(|&t| t == self).unwrap() as u64
    }
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Order in which enabled image transforms run: geometry first, then
/// photometric effects.
pub const IMAGE_PIPELINE_ORDER: [Transform; 6] = [
    Transform::AffineRotation,
    Transform::Perspective,
    Transform::GaussianBlur,
    Transform::GaussianNoise,
    Transform::SaltPepper,
    Transform::LinearContrast,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentationConfig {
    pub seed: RandomSeed,

    pub affine_rotation: bool,
    pub gaussian_noise: bool,
    pub salt_pepper: bool,
    pub gaussian_blur: bool,
    pub linear_contrast: bool,
    pub perspective: bool,
    pub font_size_12pt: bool,
    pub typewriter_font: bool,
    pub line_spacing_1_5: bool,

    /// Rotation angle is drawn uniformly from `[-rotation_range, rotation_range]` degrees.
    pub rotation_range: f64,
    pub noise_mean: f64,
    pub noise_stddev: f64,
    pub sp_probability: f64,
    pub blur_sigma: f64,
    pub contrast_alpha: f64,
    pub perspective_jitter_fraction: f64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            seed: RandomSeed(0),
            affine_rotation: true,
            gaussian_noise: true,
            salt_pepper: true,
            gaussian_blur: true,
            linear_contrast: true,
            perspective: true,
            font_size_12pt: true,
            typewriter_font: true,
            line_spacing_1_5: true,
            rotation_range: 1.0,
            noise_mean: 0.0,
            noise_stddev: 10.0,
            sp_probability: 0.1,
            blur_sigma: 0.5,
            contrast_alpha: 1.0,
            perspective_jitter_fraction: 0.05,
        }
    }
}

impl AugmentationConfig {
    pub fn all_disabled() -> Self {
        let mut cfg = Self::default();
        for t in Transform::ALL {
            cfg.set_enabled(t, false);
        }
        cfg
    }

    /// Default parameters with only `transforms` switched on.
    pub fn only(transforms: &[Transform]) -> Self {
        let mut cfg = Self::all_disabled();
        for &t in transforms {
            cfg.set_enabled(t, true);
        }
        cfg
    }

    pub fn is_enabled(&self, t: Transform) -> bool {
        match t {
            Transform::AffineRotation => self.affine_rotation,
            Transform::GaussianNoise => self.gaussian_noise,
            Transform::SaltPepper => self.salt_pepper,
            Transform::GaussianBlur => self.gaussian_blur,
            Transform::LinearContrast => self.linear_contrast,
            Transform::Perspective => self.perspective,
            Transform::FontSize12pt => self.font_size_12pt,
            Transform::TypewriterFont => self.typewriter_font,
            Transform::LineSpacing15 => self.line_spacing_1_5,
        }
    }

    pub fn set_enabled(&mut self, t: Transform, on: bool) {
        let flag = match t {
            Transform::AffineRotation => &mut self.affine_rotation,
            Transform::GaussianNoise => &mut self.gaussian_noise,
            Transform::SaltPepper => &mut self.salt_pepper,
            Transform::GaussianBlur => &mut self.gaussian_blur,
            Transform::LinearContrast => &mut self.linear_contrast,
            Transform::Perspective => &mut self.perspective,
            Transform::FontSize12pt => &mut self.font_size_12pt,
            Transform::TypewriterFont => &mut self.typewriter_font,
            Transform::LineSpacing15 => &mut self.line_spacing_1_5,
        };
        *flag = on;
    }

    pub fn enabled(&self) -> Vec<Transform> {
        Transform::ALL
            .into_iter()
            .filter(|&t| self.is_enabled(t))
            .collect()
    }

    /// Same config with the seed for page `page_index` of a run.
    pub fn for_page(&self, page_index: u64) -> Self {
        Self {
            seed: self.seed.derive(page_index),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        let bad = |field, reason: &str| {
            Err(AugmentError::InvalidConfig {
                field,
                reason: reason.to_string(),
            })
        };
        if !(self.rotation_range.is_finite() && self.rotation_range >= 0.0) {
            return bad("rotation_range", "must be finite and >= 0");
        }
        if !self.noise_mean.is_finite() {
            return bad("noise_mean", "must be finite");
        }
        if !(self.noise_stddev.is_finite() && self.noise_stddev >= 0.0) {
            return bad("noise_stddev", "must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.sp_probability) {
            return bad("sp_probability", "must lie in [0, 1]");
        }
        if !(self.blur_sigma.is_finite() && self.blur_sigma >= 0.0) {
            return bad("blur_sigma", "must be finite and >= 0");
        }
        if !(self.contrast_alpha.is_finite() && self.contrast_alpha >= 0.0) {
            return bad("contrast_alpha", "must be finite and >= 0");
        }
        if !(0.0..=0.25).contains(&self.perspective_jitter_fraction) {
            return bad("perspective_jitter_fraction", "must lie in [0, 0.25]");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedPage {
    pub page_id: String,
    pub image: PageImage,
    pub boxes: Vec<BoundingBox<f64>>,
}

/// One executed pipeline step with the concrete parameters it used.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "transform", rename_all = "snake_case")]
pub enum AppliedStep {
    AffineRotation {
        degrees: f64,
    },
    Perspective {
        target: [[f64; 2]; 4],
    },
    GaussianBlur {
        sigma: f64,
    },
    GaussianNoise {
        mean: f64,
        stddev: f64,
        seed: RandomSeed,
    },
    SaltPepper {
        probability: f64,
        seed: RandomSeed,
    },
    LinearContrast {
        alpha: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedPage {
    pub page: AnnotatedPage,
    pub steps: Vec<AppliedStep>,
}

fn carry_boxes<Tr: PointTransform<f64>>(
    t: &Tr,
    boxes: &[BoundingBox<f64>],
    width: u32,
    height: u32,
) -> Result<Vec<BoundingBox<f64>>, GeometryError> {
    let mut out = Vec::with_capacity(boxes.len());
    for b in boxes {
        let moved = transform_box(t, b)?;
        if let Some(clipped) = moved.clip(width as f64, height as f64) {
            if clipped.area() >= MIN_BOX_AREA {
                out.push(clipped);
            }
        }
    }
    Ok(out)
}

/// Runs the enabled image transforms over one page in
/// [`IMAGE_PIPELINE_ORDER`]. Geometric steps move the boxes with the pixels;
/// moved boxes are clipped to the frame and dropped below [`MIN_BOX_AREA`].
pub fn apply_pipeline(
    page: &AnnotatedPage,
    cfg: &AugmentationConfig,
) -> Result<AugmentedPage, AugmentError> {
    cfg.validate()?;
    let mut image = page.image.clone();
    let mut boxes = page.boxes.clone();
    let mut steps = Vec::new();
    let (w, h) = (image.width(), image.height());

    for t in IMAGE_PIPELINE_ORDER
        .into_iter()
        .filter(|&t| cfg.is_enabled(t))
    {
        let seed = cfg.seed.derive(t.stream());
        match t {
            Transform::AffineRotation => {
                let degrees = if cfg.rotation_range > 0.0 {
                    seed.rng()
                        .random_range(-cfg.rotation_range..=cfg.rotation_range)
                } else {
                    0.0
                };
                let (out, forward) = raster::rotate_affine(&image, degrees)?;
                boxes = carry_boxes(&forward, &boxes, w, h)?;
                image = out;
                steps.push(AppliedStep::AffineRotation { degrees });
            }
            Transform::Perspective => {
                let quad = raster::jittered_quad(w, h, cfg.perspective_jitter_fraction, seed)?;
                let (out, forward) = raster::perspective_warp(&image, &quad)?;
                boxes = carry_boxes(&forward, &boxes, w, h)?;
                image = out;
                steps.push(AppliedStep::Perspective {
                    target: quad.map(|p| [p.x, p.y]),
                });
            }
            Transform::GaussianBlur => {
                image = raster::gaussian_blur(&image, cfg.blur_sigma)?;
                steps.push(AppliedStep::GaussianBlur {
                    sigma: cfg.blur_sigma,
                });
            }
            Transform::GaussianNoise => {
                image = raster::additive_gaussian_noise(
                    &image,
                    cfg.noise_mean,
                    cfg.noise_stddev,
                    seed,
                )?;
                steps.push(AppliedStep::GaussianNoise {
                    mean: cfg.noise_mean,
                    stddev: cfg.noise_stddev,
                    seed,
                });
            }
            Transform::SaltPepper => {
                image = raster::salt_and_pepper(&image, cfg.sp_probability, seed)?;
                steps.push(AppliedStep::SaltPepper {
                    probability: cfg.sp_probability,
                    seed,
                });
            }
            Transform::LinearContrast => {
                image = raster::linear_contrast(&image, cfg.contrast_alpha)?;
                steps.push(AppliedStep::LinearContrast {
                    alpha: cfg.contrast_alpha,
                });
            }
            _ => unreachable!("only image transforms are in the pipeline order"),
        }
    }

    Ok(AugmentedPage {
        page: AnnotatedPage {
            page_id: page.page_id.clone(),
            image,
            boxes,
        },
        steps,
    })
}

/// Applies the enabled LaTeX-level transforms: the `12pt` class option and
/// the typewriter-font / 1.5 line-spread preamble directives.
pub fn transform_latex_source(
    source: &str,
    cfg: &AugmentationConfig,
) -> Result<String, AugmentError> {
    if !(cfg.font_size_12pt || cfg.typewriter_font || cfg.line_spacing_1_5) {
        return Ok(source.to_string());
    }
    let decls = latex::find_uncommented(source, DOCUMENT_CLASS);
    let decl = match decls.as_slice() {
        [] => return Err(AugmentError::MissingDocumentClass),
        [one] => *one,
        many => return Err(AugmentError::AmbiguousDocumentClass { count: many.len() }),
    };

    let mut out = source.to_string();
    let mut directives: Vec<&str> = Vec::new();
    if cfg.typewriter_font {
        directives.extend(TYPEWRITER_DIRECTIVES);
    }
    if cfg.line_spacing_1_5 {
        directives.push(LINE_SPACING_DIRECTIVE);
    }
    directives.retain(|d| !latex::preamble_contains(source, d));
    if !directives.is_empty() {
        let at = latex::begin_document_offset(source).ok_or(AugmentError::MissingBeginDocument)?;
        let block: String = directives.iter().map(|d| format!("{d}\n")).collect();
        out.insert_str(at, &block);
    }
    // the class declaration precedes \begin{document}, so its offset is unchanged
    if cfg.font_size_12pt {
        out = with_font_size_option(&out, decl)?;
    }
    Ok(out)
}

fn is_size_option(opt: &str) -> bool {
    opt.strip_suffix("pt")
        .is_some_and(|n| !n.is_empty() && n.chars().all(|c| c.is_ascii_digit() || c == '.'))
}

fn with_font_size_option(source: &str, decl: usize) -> Result<String, AugmentError> {
    let malformed = AugmentError::MalformedDocumentClass { offset: decl };
    let after = decl + DOCUMENT_CLASS.len();
    let rest = &source[after..];
    let trimmed = rest.trim_start();
    let ws = rest.len() - trimmed.len();
    if !trimmed.starts_with('[') {
        if !trimmed.starts_with('{') {
            return Err(malformed);
        }
        let mut out = source.to_string();
        out.insert_str(after, &format!("[{FONT_SIZE_OPTION}]"));
        return Ok(out);
    }
    let open = after + ws;
    let close = open + source[open..].find(']').ok_or(malformed)?;
    let options = &source[open + 1..close];
    let tokens: Vec<&str> = options.split(',').collect();
    let new_options = if tokens.iter().any(|t| is_size_option(t.trim())) {
        tokens
            .iter()
            .map(|t| {
                if is_size_option(t.trim()) {
                    let lead = &t[..t.len() - t.trim_start().len()];
                    let trail = &t[t.trim_end().len()..];
                    format!("{lead}{FONT_SIZE_OPTION}{trail}")
                } else {
                    t.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    } else if options.trim().is_empty() {
        FONT_SIZE_OPTION.to_string()
    } else {
        format!("{options},{FONT_SIZE_OPTION}")
    };
    Ok(format!(
        "{}[{}]{}",
        &source[..open],
        new_options,
        &source[close + 1..]
    ))
}

/// Nine configs, the i-th equal to `base` with only transform i disabled.
pub fn leave_one_out_configs(
    base: &AugmentationConfig,
) -> Result<Vec<AugmentationConfig>, AugmentError> {
    let disabled: Vec<Transform> = Transform::ALL
        .into_iter()
        .filter(|&t| !base.is_enabled(t))
        .collect();
    if !disabled.is_empty() {
        return Err(AugmentError::NotAllEnabled { disabled });
    }
    Ok(Transform::ALL
        .into_iter()
        .map(|t| {
            let mut cfg = base.clone();
            cfg.set_enabled(t, false);
            cfg
        })
        .collect())
}
