//! Feature ranking, the five classifiers and leave-one-out evaluation.
//!
//! Class indices follow [`Label::class_index`]: 0 is poetry, 1 is prose.

mod dataset;
mod eval;
mod models;
mod nmi;

pub use dataset::{read_feature_csv, write_feature_csv, Dataset};
pub use eval::{
    fit_fold, loocv, loocv_predictions, sweep_nf, BestRow, EvalReport, EvalRow, FittedPipeline, LoocvPlan,
    NF_RANGE,
};
pub use models::{train, ClassifierConfig, Model, Tree};
pub use nmi::{nmi, rank_features, SelectionRanking, DEFAULT_BINS};

use crate::corpus::Label;

/// Number of classes handled by every model.
pub const N_CLASSES: usize = 2;

pub(crate) fn class_name(class: usize) -> &'static str {
    Label::CLASSES[class].as_str()
}
