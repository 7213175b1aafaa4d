use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub const DEFAULT_BINS: usize = 10;

/// Bin index per sample under equal-frequency binning.
///
/// Cut points are the sample quantiles at `i/bins`; repeated cut values merge,
/// so ties never straddle a bin edge and a constant column lands in one bin.
fn equal_frequency_bins<T: Real>(values: &[T], bins: usize) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(Ordering::Equal));
    let n = sorted.len();
    let mut cuts: Vec<T> = (1..bins).map(|i| sorted[i * n / bins]).collect();
    cuts.dedup();
    // A cut at the minimum would leave its lower bin empty.
    cuts.retain(|&c| c > sorted[0]);
    values
        .iter()
        .map(|&v| cuts.partition_point(|&c| c <= v))
        .collect()
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information between a binned feature and the labels.
pub fn nmi<T: Real>(feature: &[T], labels: &[usize], bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(Error::Config(format!("nmi needs at least 2 bins, got {bins}")));
    }
    if feature.len() != labels.len() {
        return Err(Error::Domain(format!(
            "{} feature values but {} labels",
            feature.len(),
            labels.len()
        )));
    }
    if feature.len() < 2 {
        return Ok(0.0);
    }
    let binned = equal_frequency_bins(feature, bins);
    let n_bins = binned.iter().max().map_or(0, |&b| b + 1);
    let n_labels = labels.iter().max().map_or(0, |&l| l + 1);
    let mut joint = vec![0usize; n_bins * n_labels];
    for (&b, &l) in binned.iter().zip(labels) {
        joint[b * n_labels + l] += 1;
    }
    let n = feature.len() as f64;
    let h_bin = entropy(
        (0..n_bins).map(|b| joint[b * n_labels..(b + 1) * n_labels].iter().sum()),
        n,
    );
    let h_label = entropy((0..n_labels).map(|l| (0..n_bins).map(|b| joint[b * n_labels + l]).sum()), n);
    if h_bin <= 0.0 || h_label <= 0.0 {
        return Ok(0.0);
    }
    let h_joint = entropy(joint.iter().copied(), n);
    let mi = (h_bin + h_label - h_joint).max(0.0);
    Ok((mi / (h_bin * h_label).sqrt()).min(1.0))
}

/// Feature indices ordered by descending NMI, ties by ascending index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRanking {
    pub order: Vec<usize>,
    /// Score of `order[i]` at position `i`.
    pub scores: Vec<f64>,
}

impl SelectionRanking {
    pub fn top(&self, n: usize) -> &[usize] {
        &self.order[..n.min(self.order.len())]
    }
}

pub fn rank_features<T: Real, R: AsRef<[T]>>(
    rows: &[R],
    labels: &[usize],
    bins: usize,
) -> Result<SelectionRanking> {
    let n_features = rows.first().map_or(0, |r| r.as_ref().len());
    let mut column = vec![T::zero(); rows.len()];
    let mut scored = Vec::with_capacity(n_features);
    for c in 0..n_features {
        for (slot, r) in column.iter_mut().zip(rows) {
            *slot = r.as_ref()[c];
        }
        scored.push((c, nmi(&column, labels, bins)?));
    }
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    Ok(SelectionRanking {
        order: scored.iter().map(|s| s.0).collect(),
        scores: scored.iter().map(|s| s.1).collect(),
    })
}
