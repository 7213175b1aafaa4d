use std::io::Write;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::models::{train, ClassifierConfig, Model};
use super::nmi::{rank_features, SelectionRanking};
use super::{Dataset, N_CLASSES};
use crate::error::{Error, Result};
use crate::features::{fit_standardizer, StandardizationModel};
use crate::scalar::Real;

/// Default range of feature counts to sweep.
pub const NF_RANGE: RangeInclusive<usize> = 3..=50;

/// Standardizer, ranking and model fitted on one training fold.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline<T> {
    pub standardizer: StandardizationModel<T>,
    pub ranking: SelectionRanking,
    pub selected: Vec<usize>,
    pub model: Model<T>,
}

impl<T: Real> FittedPipeline<T> {
    pub fn predict(&self, row: &[T]) -> usize {
        let z = self.standardizer.transform_row(row);
        let x: Vec<T> = self.selected.iter().map(|&c| z[c]).collect();
        self.model.predict(&x)
    }
}

/// The classifier-independent part of a fold: standardizer and ranking.
struct PreparedFold<T> {
    standardizer: StandardizationModel<T>,
    train_z: Vec<Vec<T>>,
    train_labels: Vec<usize>,
    ranking: SelectionRanking,
}

impl<T: Real> PreparedFold<T> {
    fn new(train_set: &Dataset<T>, bins: usize) -> Result<Self> {
        let standardizer = fit_standardizer(&train_set.matrix);
        let train_z = standardizer.transform_rows(&train_set.matrix);
        let ranking = rank_features(&train_z, &train_set.labels, bins)?;
        Ok(PreparedFold {
            standardizer,
            train_z,
            train_labels: train_set.labels.clone(),
            ranking,
        })
    }

    fn fit(&self, config: &ClassifierConfig, n_f: usize) -> Result<FittedPipeline<T>> {
        let selected = self.ranking.top(n_f).to_vec();
        let x: Vec<Vec<T>> = self
            .train_z
            .iter()
            .map(|r| selected.iter().map(|&c| r[c]).collect())
            .collect();
        let model = train(config, &x, &self.train_labels)?;
        Ok(FittedPipeline {
            standardizer: self.standardizer.clone(),
            ranking: self.ranking.clone(),
            selected,
            model,
        })
    }
}

fn check_nf(n_f: usize, n_features: usize) -> Result<()> {
    if n_f == 0 || n_f > n_features {
        return Err(Error::Config(format!(
            "n_f = {n_f} is outside 1..={n_features} available features"
        )));
    }
    Ok(())
}

/// Fits the full pipeline on a training set.
pub fn fit_fold<T: Real>(
    train_set: &Dataset<T>,
    config: &ClassifierConfig,
    bins: usize,
    n_f: usize,
) -> Result<FittedPipeline<T>> {
    check_nf(n_f, train_set.n_features())?;
    train_set.require_both_classes()?;
    PreparedFold::new(train_set, bins)?.fit(config, n_f)
}

/// Leave-one-out folds with their standardizers and rankings precomputed, so
/// that many (classifier, n_f) cells can share them.
pub struct LoocvPlan<'a, T> {
    dataset: &'a Dataset<T>,
    folds: Vec<PreparedFold<T>>,
}

impl<'a, T: Real> LoocvPlan<'a, T> {
    pub fn new(dataset: &'a Dataset<T>, bins: usize) -> Result<Self> {
        if dataset.n_rows() < 4 {
            return Err(Error::Config(format!(
                "leave-one-out needs at least 4 documents, got {}",
                dataset.n_rows()
            )));
        }
        dataset.require_both_classes()?;
        let folds = (0..dataset.n_rows())
            .into_par_iter()
            .map(|i| PreparedFold::new(&dataset.without_row(i), bins))
            .collect::<Result<Vec<_>>>()?;
        Ok(LoocvPlan { dataset, folds })
    }

    /// Pipeline of fold `i`, i.e. fitted without row `i`.
    pub fn fold_pipeline(&self, i: usize, config: &ClassifierConfig, n_f: usize) -> Result<FittedPipeline<T>> {
        check_nf(n_f, self.dataset.n_features())?;
        self.folds[i].fit(config, n_f)
    }

    pub fn predictions(&self, config: &ClassifierConfig, n_f: usize) -> Result<Vec<usize>> {
        check_nf(n_f, self.dataset.n_features())?;
        self.folds
            .par_iter()
            .enumerate()
            .map(|(i, fold)| Ok(fold.fit(config, n_f)?.predict(&self.dataset.matrix[i])))
            .collect()
    }

    pub fn evaluate(&self, config: &ClassifierConfig, n_f: usize) -> Result<EvalRow> {
        let predicted = self.predictions(config, n_f)?;
        Ok(EvalRow::from_predictions(config.name(), n_f, &self.dataset.labels, &predicted))
    }
}

pub fn loocv_predictions<T: Real>(
    dataset: &Dataset<T>,
    config: &ClassifierConfig,
    bins: usize,
    n_f: usize,
) -> Result<Vec<usize>> {
    check_nf(n_f, dataset.n_features())?;
    LoocvPlan::new(dataset, bins)?.predictions(config, n_f)
}

pub fn loocv<T: Real>(dataset: &Dataset<T>, config: &ClassifierConfig, bins: usize, n_f: usize) -> Result<EvalRow> {
    check_nf(n_f, dataset.n_features())?;
    LoocvPlan::new(dataset, bins)?.evaluate(config, n_f)
}

/// One (classifier, n_f) cell of a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub classifier: String,
    pub n_f: usize,
    pub precision_poetry: f64,
    pub precision_prose: f64,
    pub recall_poetry: f64,
    pub recall_prose: f64,
    pub accuracy: f64,
}

impl EvalRow {
    /// Precision of a class never predicted is reported as 0.
    pub fn from_predictions(classifier: &str, n_f: usize, truth: &[usize], predicted: &[usize]) -> Self {
        let mut confusion = [[0usize; N_CLASSES]; N_CLASSES];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[t][p] += 1;
        }
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = |c: usize| ratio(confusion[c][c], (0..N_CLASSES).map(|t| confusion[t][c]).sum());
        let recall = |c: usize| ratio(confusion[c][c], confusion[c].iter().sum());
        let correct: usize = (0..N_CLASSES).map(|c| confusion[c][c]).sum();
        EvalRow {
            classifier: classifier.to_string(),
            n_f,
            precision_poetry: precision(0),
            precision_prose: precision(1),
            recall_poetry: recall(0),
            recall_prose: recall(1),
            accuracy: ratio(correct, truth.len()),
        }
    }
}

/// Best row of one classifier with metrics rounded to two decimals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestRow {
    pub classifier: String,
    pub n_f: usize,
    pub precision_poetry: String,
    pub precision_prose: String,
    pub recall_poetry: String,
    pub recall_prose: String,
    pub accuracy: String,
}

impl From<&EvalRow> for BestRow {
    fn from(r: &EvalRow) -> Self {
        let f = |v: f64| format!("{v:.2}");
        BestRow {
            classifier: r.classifier.clone(),
            n_f: r.n_f,
            precision_poetry: f(r.precision_poetry),
            precision_prose: f(r.precision_prose),
            recall_poetry: f(r.recall_poetry),
            recall_prose: f(r.recall_prose),
            accuracy: f(r.accuracy),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// Highest accuracy per classifier, smallest n_f among equals, in first-seen order.
    pub fn best(&self) -> Vec<&EvalRow> {
        let mut best: Vec<&EvalRow> = Vec::new();
        for row in &self.rows {
            match best.iter_mut().find(|b| b.classifier == row.classifier) {
                Some(b) => {
                    if row.accuracy > b.accuracy || (row.accuracy == b.accuracy && row.n_f < b.n_f) {
                        *b = row;
                    }
                }
                None => best.push(row),
            }
        }
        best
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row).map_err(|e| Error::format("eval report", e))?;
        }
        w.flush().map_err(|e| Error::format("eval report", e))
    }

    pub fn summary_json(&self) -> String {
        let best: Vec<BestRow> = self.best().into_iter().map(BestRow::from).collect();
        serde_json::to_string_pretty(&best).expect("summary serializes") + "\n"
    }
}

/// LOOCV for every classifier at every n_f in `nf_values`, rows ordered by
/// classifier then n_f.
pub fn sweep_nf<T: Real>(
    dataset: &Dataset<T>,
    configs: &[ClassifierConfig],
    nf_values: &[usize],
    bins: usize,
) -> Result<EvalReport> {
    for &n_f in nf_values {
        check_nf(n_f, dataset.n_features())?;
    }
    let plan = LoocvPlan::new(dataset, bins)?;
    let mut rows = Vec::with_capacity(configs.len() * nf_values.len());
    for config in configs {
        for &n_f in nf_values {
            rows.push(plan.evaluate(config, n_f)?);
        }
    }
    Ok(EvalReport { rows })
}
