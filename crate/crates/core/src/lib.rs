//! Scanned-document figure tooling: label induction from LaTeX renders,
//! scan-style augmentation with box co-transformation, and detection
//! scoring with assignment-based matching.
//!
//! Geometry and scoring are generic over [`scalar::Scalar`] (`f32` or
//! `f64`); the aliases below fix the precision.

pub mod augment;
pub mod dataset;
pub mod evaluator;
pub mod geometry;
pub mod induce;
mod latex;
pub mod raster;
pub mod scalar;

pub type Point2F64 = geometry::Point2<f64>;
pub type Point2F32 = geometry::Point2<f32>;
pub type BoxF64 = geometry::BoundingBox<f64>;
pub type BoxF32 = geometry::BoundingBox<f32>;
pub type AffineF64 = geometry::Affine2<f64>;
pub type AffineF32 = geometry::Affine2<f32>;
pub type ProjectiveF64 = geometry::Projective2<f64>;
pub type ProjectiveF32 = geometry::Projective2<f32>;
pub type PredictionF64 = evaluator::Prediction<f64>;
pub type PredictionF32 = evaluator::Prediction<f32>;
pub type MatchConfigF64 = evaluator::MatchConfig<f64>;
pub type MatchConfigF32 = evaluator::MatchConfig<f32>;
pub type PageEvalF64 = evaluator::PageEval<f64>;
pub type PageEvalF32 = evaluator::PageEval<f32>;
pub type CorpusMetricsF64 = evaluator::CorpusMetrics<f64>;
pub type CorpusMetricsF32 = evaluator::CorpusMetrics<f32>;
