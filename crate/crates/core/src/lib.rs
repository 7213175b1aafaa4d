//! Rhyme-signal timelines, cv-based window clustering and poetry/prose
//! classification.
//!
//! The numeric core is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar to `f64`, which is what the CLI uses.

// `!(x > 0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod features;
pub mod learning;
pub mod phonetics;
pub mod scalar;
pub mod simgraph;
pub mod timeline;
pub mod windowing;

pub use error::{Error, Result};

pub type WindowingParams = windowing::WindowingParams<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type StandardizationModel = features::StandardizationModel<f64>;
pub type WeibullFit = corpus::stats::WeibullFit<f64>;
pub type Dataset = learning::Dataset<f64>;
pub type Model = learning::Model<f64>;
pub type SimilarityGraph = simgraph::SimilarityGraph<f64>;
pub type Layout = simgraph::Layout<f64>;
