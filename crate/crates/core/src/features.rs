//! Window measures, per-document feature vectors and z-score standardization.

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::scalar::{mean, population_std, Real};
use crate::timeline::SignalSequence;
use crate::windowing::{cv, detect_windows, Window, WindowSet, WindowingParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowMeasures<T> {
    /// Window span in time units.
    pub l: T,
    pub mu_d: T,
    pub sigma_d: T,
}

pub fn window_measures<T: Real>(window: &Window) -> WindowMeasures<T> {
    let diffs: Vec<T> = window.time_diffs.iter().map(|&d| T::lit(d as f64)).collect();
    WindowMeasures {
        l: T::lit(window.span() as f64),
        mu_d: mean(&diffs),
        sigma_d: population_std(&diffs),
    }
}

/// Names of the seven aggregates computed per grid point, in vector order.
pub const AGGREGATE_NAMES: [&str; 7] = [
    "mu_l",
    "cv_l",
    "mu_l_x_cv_l",
    "mean_mu_d",
    "std_mu_d",
    "mean_sigma_d",
    "std_sigma_d",
];

pub const AGGREGATES_PER_POINT: usize = AGGREGATE_NAMES.len();

/// Seven aggregates over a window set; all zero when there are no windows.
pub fn aggregate_windows<T: Real>(windows: &WindowSet) -> [T; AGGREGATES_PER_POINT] {
    if windows.is_empty() {
        return [T::zero(); AGGREGATES_PER_POINT];
    }
    let measures: Vec<WindowMeasures<T>> = windows.windows.iter().map(window_measures).collect();
    let ls: Vec<T> = measures.iter().map(|m| m.l).collect();
    let mu_ds: Vec<T> = measures.iter().map(|m| m.mu_d).collect();
    let sigma_ds: Vec<T> = measures.iter().map(|m| m.sigma_d).collect();
    let mu_l = mean(&ls);
    let cv_l = cv(&ls).expect("window spans are positive");
    [
        mu_l,
        cv_l,
        mu_l * cv_l,
        mean(&mu_ds),
        population_std(&mu_ds),
        mean(&sigma_ds),
        population_std(&sigma_ds),
    ]
}

/// Column names for a grid: `f_<L0>_<delta>_<aggregate>`.
pub fn feature_names<T: Real>(grid: &[WindowingParams<T>]) -> Vec<String> {
    grid.iter()
        .flat_map(|p| {
            let label = p.label();
            AGGREGATE_NAMES.iter().map(move |name| format!("f_{label}_{name}"))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector<T> {
    pub doc_id: String,
    pub label: Label,
    pub values: Vec<T>,
}

impl<T: Real> FeatureVector<T> {
    /// The seven aggregates belonging to grid point `point`.
    pub fn block(&self, point: usize) -> &[T] {
        &self.values[point * AGGREGATES_PER_POINT..(point + 1) * AGGREGATES_PER_POINT]
    }
}

/// Concatenated aggregates for every grid point.
pub fn feature_values<T: Real>(signals: &SignalSequence, grid: &[WindowingParams<T>]) -> Vec<T> {
    grid.iter()
        .flat_map(|p| aggregate_windows::<T>(&detect_windows(signals, p)))
        .collect()
}

pub fn document_features<T: Real>(
    doc_id: &str,
    label: Label,
    signals: &SignalSequence,
    grid: &[WindowingParams<T>],
) -> FeatureVector<T> {
    FeatureVector {
        doc_id: doc_id.to_string(),
        label,
        values: feature_values(signals, grid),
    }
}

/// Per-column training mean and population standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationModel<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

pub fn fit_standardizer<T: Real, R: AsRef<[T]>>(rows: &[R]) -> StandardizationModel<T> {
    assert!(!rows.is_empty(), "standardizer needs at least one row");
    let cols = rows[0].as_ref().len();
    let n = T::from_count(rows.len());
    let mut mu = vec![T::zero(); cols];
    for row in rows {
        for (m, &v) in mu.iter_mut().zip(row.as_ref()) {
            *m += v;
        }
    }
    for m in &mut mu {
        *m /= n;
    }
    let mut var = vec![T::zero(); cols];
    for row in rows {
        for ((s, &v), &m) in var.iter_mut().zip(row.as_ref()).zip(&mu) {
            *s += (v - m) * (v - m);
        }
    }
    let std = var.into_iter().map(|s| (s / n).sqrt()).collect();
    StandardizationModel { mean: mu, std }
}

impl<T: Real> StandardizationModel<T> {
    pub fn transform_row(&self, row: &[T]) -> Vec<T> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&v, (&m, &s))| if s > T::zero() { (v - m) / s } else { T::zero() })
            .collect()
    }

    pub fn transform_rows<R: AsRef<[T]>>(&self, rows: &[R]) -> Vec<Vec<T>> {
        rows.iter().map(|r| self.transform_row(r.as_ref())).collect()
    }
}

/// Free-function form of [`StandardizationModel::transform_rows`].
pub fn apply_standardizer<T: Real, R: AsRef<[T]>>(
    model: &StandardizationModel<T>,
    rows: &[R],
) -> Vec<Vec<T>> {
    model.transform_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(times: (u64, u64), diffs: &[u64]) -> Window {
        Window {
            start_signal: 0,
            end_signal: 1,
            start_time: times.0,
            end_time: times.1,
            time_diffs: diffs.to_vec(),
        }
    }

    #[test]
    fn measures_examples() {
        let m: WindowMeasures<f64> = window_measures(&window((0, 20), &[10, 10]));
        assert_eq!((m.l, m.mu_d, m.sigma_d), (20.0, 10.0, 0.0));

        let m: WindowMeasures<f64> = window_measures(&window((0, 100), &[10, 10, 80]));
        assert_eq!(m.l, 100.0);
        assert!((m.mu_d - 100.0 / 3.0).abs() < 1e-9);
        assert!((m.sigma_d - (9800.0_f64 / 9.0).sqrt()).abs() < 1e-9);

        let m: WindowMeasures<f64> = window_measures(&window((0, 5), &[5]));
        assert_eq!((m.mu_d, m.sigma_d), (5.0, 0.0));
    }

    #[test]
    fn single_window_aggregation() {
        let set = WindowSet {
            windows: vec![window((0, 20), &[10, 10])],
        };
        assert_eq!(aggregate_windows::<f64>(&set), [20.0, 0.0, 0.0, 10.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_signals_give_zero_vector() {
        let grid = WindowingParams::<f64>::standard_grid();
        let fv = document_features("d", Label::Prose, &SignalSequence::default(), &grid);
        assert_eq!(fv.values.len(), 175);
        assert!(fv.values.iter().all(|&v| v == 0.0));
        assert_eq!(feature_names(&grid).len(), 175);
        assert_eq!(feature_names(&grid)[0], "f_2_0.01_mu_l");
        assert_eq!(feature_names(&grid)[174], "f_20_0.20_std_sigma_d");
    }

    #[test]
    fn standardizer_examples() {
        let rows = vec![vec![1.0_f64, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]];
        let model = fit_standardizer(&rows);
        let z = apply_standardizer(&model, &rows);
        let expected = 1.224744871391589;
        assert!((z[0][0] + expected).abs() < 1e-9);
        assert!(z[1][0].abs() < 1e-12);
        assert!((z[2][0] - expected).abs() < 1e-9);
        assert!(z.iter().all(|r| r[1] == 0.0));
    }

    #[test]
    fn refit_on_standardized_output_is_identity() {
        let rows = vec![vec![1.0_f64, -3.0], vec![4.0, 0.5], vec![2.5, 9.0], vec![0.0, 1.0]];
        let z = fit_standardizer(&rows).transform_rows(&rows);
        let again = fit_standardizer(&z);
        for (m, s) in again.mean.iter().zip(&again.std) {
            assert!(m.abs() < 1e-12);
            assert!((s - 1.0).abs() < 1e-12);
        }
        let z2 = again.transform_rows(&z);
        for (a, b) in z.iter().flatten().zip(z2.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
