use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scalar::Real;

/// Feature matrix with one class index per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    pub matrix: Vec<Vec<T>>,
    pub labels: Vec<usize>,
    pub feature_names: Vec<String>,
    pub doc_ids: Vec<String>,
}

impl<T: Real> Dataset<T> {
    pub fn new(
        matrix: Vec<Vec<T>>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        doc_ids: Vec<String>,
    ) -> Result<Self> {
        if matrix.len() != labels.len() || matrix.len() != doc_ids.len() {
            return Err(Error::Config(format!(
                "dataset has {} rows, {} labels and {} ids",
                matrix.len(),
                labels.len(),
                doc_ids.len()
            )));
        }
        if let Some(bad) = matrix.iter().position(|r| r.len() != feature_names.len()) {
            return Err(Error::Config(format!(
                "row {bad} has {} values, expected {}",
                matrix[bad].len(),
                feature_names.len()
            )));
        }
        if matrix.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Config("dataset contains non-finite values".into()));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= super::N_CLASSES) {
            return Err(Error::Config(format!("class index {l} out of range")));
        }
        Ok(Dataset {
            matrix,
            labels,
            feature_names,
            doc_ids,
        })
    }

    /// Builds a dataset from labelled feature vectors; unlabeled rows are an error.
    pub fn from_features(vectors: &[FeatureVector<T>], feature_names: Vec<String>) -> Result<Self> {
        let mut labels = Vec::with_capacity(vectors.len());
        for v in vectors {
            let class = v
                .label
                .class_index()
                .ok_or_else(|| Error::Config(format!("document `{}` has no class label", v.doc_id)))?;
            labels.push(class);
        }
        Dataset::new(
            vectors.iter().map(|v| v.values.clone()).collect(),
            labels,
            feature_names,
            vectors.iter().map(|v| v.doc_id.clone()).collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.matrix.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn class_counts(&self) -> [usize; super::N_CLASSES] {
        let mut counts = [0; super::N_CLASSES];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Fails with a message naming each absent class.
    pub fn require_both_classes(&self) -> Result<()> {
        let counts = self.class_counts();
        let missing: Vec<&str> = (0..super::N_CLASSES)
            .filter(|&c| counts[c] == 0)
            .map(super::class_name)
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::Train(format!("no documents of class {}", missing.join(", "))))
        }
    }

    pub fn without_row(&self, row: usize) -> Self {
        let keep = |i: &usize| *i != row;
        Dataset {
            matrix: (0..self.n_rows()).filter(keep).map(|i| self.matrix[i].clone()).collect(),
            labels: (0..self.n_rows()).filter(keep).map(|i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            doc_ids: (0..self.n_rows()).filter(keep).map(|i| self.doc_ids[i].clone()).collect(),
        }
    }

    /// Keeps the given columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Self {
        Dataset {
            matrix: self
                .matrix
                .iter()
                .map(|r| columns.iter().map(|&c| r[c]).collect())
                .collect(),
            labels: self.labels.clone(),
            feature_names: columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
            doc_ids: self.doc_ids.clone(),
        }
    }

    pub fn column(&self, c: usize) -> Vec<T> {
        self.matrix.iter().map(|r| r[c]).collect()
    }

    /// Same rows with the labels permuted by a seeded shuffle.
    pub fn with_permuted_labels(&self, seed: u64) -> Self {
        let mut labels = self.labels.clone();
        labels.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Dataset {
            labels,
            ..self.clone()
        }
    }

    pub fn to_feature_vectors(&self) -> Vec<FeatureVector<T>> {
        self.matrix
            .iter()
            .zip(&self.labels)
            .zip(&self.doc_ids)
            .map(|((row, &l), id)| FeatureVector {
                doc_id: id.clone(),
                label: Label::CLASSES[l],
                values: row.clone(),
            })
            .collect()
    }
}

/// Writes `doc_id,label,<feature names...>` followed by one row per vector.
pub fn write_feature_csv<T: Real, W: Write>(
    out: W,
    feature_names: &[String],
    vectors: &[FeatureVector<T>],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let ctx = "feature csv";
    let mut header = vec!["doc_id".to_string(), "label".to_string()];
    header.extend(feature_names.iter().cloned());
    w.write_record(&header).map_err(|e| Error::format(ctx, e))?;
    for v in vectors {
        let mut rec = vec![v.doc_id.clone(), v.label.to_string()];
        rec.extend(v.values.iter().map(|x| x.as_f64().to_string()));
        w.write_record(&rec).map_err(|e| Error::format(ctx, e))?;
    }
    w.flush().map_err(|e| Error::format(ctx, e))
}

/// Inverse of [`write_feature_csv`]; returns the feature names and vectors.
pub fn read_feature_csv<T: Real, R: Read>(input: R) -> Result<(Vec<String>, Vec<FeatureVector<T>>)> {
    let ctx = "feature csv";
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers().map_err(|e| Error::format(ctx, e))?.clone();
    if header.len() < 2 || &header[0] != "doc_id" || &header[1] != "label" {
        return Err(Error::format(ctx, "header must start with doc_id,label"));
    }
    let names: Vec<String> = header.iter().skip(2).map(str::to_string).collect();
    let mut vectors = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::format(ctx, e))?;
        let label: Label = rec[1].parse()?;
        let values = rec
            .iter()
            .skip(2)
            .map(|s| {
                s.parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| Error::format(ctx, format!("row {}: `{s}`: {e}", line + 1)))
            })
            .collect::<Result<Vec<T>>>()?;
        if values.len() != names.len() {
            return Err(Error::format(ctx, format!("row {} has {} values", line + 1, values.len())));
        }
        vectors.push(FeatureVector {
            doc_id: rec[0].to_string(),
            label,
            values,
        });
    }
    Ok((names, vectors))
}
