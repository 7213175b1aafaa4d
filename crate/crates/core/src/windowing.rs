//! Coefficient-of-variation window clustering over a rhyme-signal sequence.
//!
//! A window starts at a signal and grows rightwards until it holds `l0`
//! consecutive same-class signal pairs. It then keeps absorbing signals up to
//! the next one that completes a new same-class pair. When adding that pair
//! moves the coefficient of variation of the window's pair time differences by
//! more than `delta`, the window (without the new pair) is stored and a fresh
//! window starts at its last signal. A window still open when the signals run
//! out is dropped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean, population_std, Real};
use crate::timeline::SignalSequence;

/// Initial pair count and cv-jump threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowingParams<T> {
    pub l0: usize,
    pub delta: T,
}

pub const STANDARD_L0: [usize; 5] = [2, 5, 10, 15, 20];
pub const STANDARD_DELTA: [f64; 5] = [0.01, 0.05, 0.10, 0.15, 0.20];

impl<T: Real> WindowingParams<T> {
    pub fn new(l0: usize, delta: T) -> Result<Self> {
        if l0 == 0 {
            return Err(Error::Config("l0 must be at least 1".into()));
        }
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::Config(format!("delta must be positive, got {delta}")));
        }
        Ok(WindowingParams { l0, delta })
    }

    /// Cartesian product of `l0s` × `deltas`, `l0` varying slowest.
    pub fn grid(l0s: &[usize], deltas: &[T]) -> Result<Vec<Self>> {
        let mut grid = Vec::with_capacity(l0s.len() * deltas.len());
        for &l0 in l0s {
            for &delta in deltas {
                grid.push(Self::new(l0, delta)?);
            }
        }
        Ok(grid)
    }

    /// The 5 × 5 grid used throughout the analysis.
    pub fn standard_grid() -> Vec<Self> {
        let deltas: Vec<T> = STANDARD_DELTA.iter().map(|&d| T::lit(d)).collect();
        Self::grid(&STANDARD_L0, &deltas).expect("standard grid is valid")
    }

    /// `<l0>_<delta>` with delta rendered to two decimals.
    pub fn label(&self) -> String {
        format!("{}_{:.2}", self.l0, self.delta.as_f64())
    }
}

/// Population standard deviation over mean.
pub fn cv<T: Real>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::Domain("cv of an empty list".into()));
    }
    let mu = mean(values);
    if mu <= T::zero() {
        return Err(Error::Domain(format!("cv needs a positive mean, got {mu}")));
    }
    Ok(population_std(values) / mu)
}

/// cv of integer time differences; callers guarantee a non-empty positive list.
pub(crate) fn cv_of_diffs<T: Real>(diffs: &[u64]) -> T {
    let values: Vec<T> = diffs.iter().map(|&d| T::lit(d as f64)).collect();
    cv(&values).expect("time differences are positive and non-empty")
}

/// A consecutive same-class pair of signals `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairDiff {
    pub i: usize,
    pub j: usize,
    pub dt: u64,
}

/// Consecutive same-class pairs with both members in `from..=to`, ordered by `j`.
pub fn same_type_pairs(signals: &SignalSequence, from: usize, to: usize) -> Vec<PairDiff> {
    let s = &signals.signals;
    if s.is_empty() || from > to {
        return Vec::new();
    }
    let to = to.min(s.len() - 1);
    let mut last_seen = std::collections::HashMap::new();
    let mut pairs = Vec::new();
    for j in from..=to {
        if let Some(i) = last_seen.insert(s[j].rhyme_class, j) {
            pairs.push(PairDiff {
                i,
                j,
                dt: s[j].time - s[i].time,
            });
        }
    }
    pairs
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start_signal: usize,
    pub end_signal: usize,
    pub start_time: u64,
    pub end_time: u64,
    /// Same-class consecutive pair differences inside the window.
    pub time_diffs: Vec<u64>,
}

impl Window {
    /// Time between the first and last signal.
    pub fn span(&self) -> u64 {
        self.end_time - self.start_time
    }

    pub fn cv<T: Real>(&self) -> T {
        cv_of_diffs(&self.time_diffs)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSet {
    pub windows: Vec<Window>,
}

impl WindowSet {
    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    /// `(start_signal, end_signal)` of every stored window.
    pub fn ranges(&self) -> Vec<(usize, usize)> {
        self.windows.iter().map(|w| (w.start_signal, w.end_signal)).collect()
    }
}

fn make_window(signals: &SignalSequence, start: usize, end: usize, diffs: Vec<u64>) -> Window {
    Window {
        start_signal: start,
        end_signal: end,
        start_time: signals.signals[start].time,
        end_time: signals.signals[end].time,
        time_diffs: diffs,
    }
}

/// Runs the window-clustering loop over `signals`.
pub fn detect_windows<T: Real>(signals: &SignalSequence, params: &WindowingParams<T>) -> WindowSet {
    let s = &signals.signals;
    let n = s.len();

    // Index of the previous signal of the same class, if any.
    let mut previous = vec![None; n];
    let mut last_seen = std::collections::HashMap::new();
    for (j, sig) in s.iter().enumerate() {
        previous[j] = last_seen.insert(sig.rhyme_class, j);
    }
    let pair_from = |j: usize, start: usize| -> Option<u64> {
        previous[j]
            .filter(|&i| i >= start)
            .map(|i| s[j].time - s[i].time)
    };

    let mut windows = Vec::new();
    let mut start = 0;
    'restart: loop {
        let mut diffs = Vec::with_capacity(params.l0 + 4);
        let mut end = start;
        let mut j = start + 1;
        while diffs.len() < params.l0 {
            if j >= n {
                break 'restart;
            }
            if let Some(dt) = pair_from(j, start) {
                diffs.push(dt);
            }
            end = j;
            j += 1;
        }
        let mut current: T = cv_of_diffs(&diffs);

        loop {
            let Some((next, dt)) = (end + 1..n).find_map(|k| pair_from(k, start).map(|dt| (k, dt)))
            else {
                break 'restart;
            };
            diffs.push(dt);
            let candidate: T = cv_of_diffs(&diffs);
            if (current - candidate).abs() > params.delta {
                diffs.pop();
                windows.push(make_window(signals, start, end, diffs));
                start = end;
                continue 'restart;
            }
            end = next;
            current = candidate;
        }
    }
    WindowSet { windows }
}

/// Straightforward re-implementation of [`detect_windows`] that recomputes
/// every pair list from scratch. Quadratic or worse; meant as a test oracle.
pub mod reference {
    use super::*;

    fn pairs_in(signals: &SignalSequence, a: usize, b: usize) -> Vec<u64> {
        let s = &signals.signals;
        let mut out = Vec::new();
        for j in a..=b {
            for i in (a..j).rev() {
                if s[i].rhyme_class == s[j].rhyme_class {
                    out.push(s[j].time - s[i].time);
                    break;
                }
            }
        }
        out
    }

    fn homogeneity<T: Real>(diffs: &[u64]) -> T {
        let values: Vec<f64> = diffs.iter().map(|&d| d as f64).collect();
        let as_t: Vec<T> = values.into_iter().map(T::lit).collect();
        cv(&as_t).unwrap()
    }

    pub fn detect_windows_bruteforce<T: Real>(
        signals: &SignalSequence,
        params: &WindowingParams<T>,
    ) -> WindowSet {
        let n = signals.signals.len();
        let mut out = WindowSet::default();
        let mut a = 0;
        while a < n {
            let Some(mut b) = (a..n).find(|&b| pairs_in(signals, a, b).len() == params.l0) else {
                break;
            };
            let closed = loop {
                let have = pairs_in(signals, a, b).len();
                let Some(b2) = (b + 1..n).find(|&b2| pairs_in(signals, a, b2).len() > have) else {
                    break None;
                };
                let before: T = homogeneity(&pairs_in(signals, a, b));
                let after: T = homogeneity(&pairs_in(signals, a, b2));
                if (before - after).abs() > params.delta {
                    break Some(b);
                }
                b = b2;
            };
            match closed {
                Some(b) => {
                    out.windows.push(make_window(signals, a, b, pairs_in(signals, a, b)));
                    a = b;
                }
                None => break,
            }
        }
        out
    }
}

/// Per-grid-point window dump entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WindowDump {
    pub start_time: u64,
    pub end_time: u64,
    pub l: u64,
    #[serde(rename = "T_w")]
    pub time_diffs: Vec<u64>,
    pub cv: f64,
}

impl From<&Window> for WindowDump {
    fn from(w: &Window) -> Self {
        WindowDump {
            start_time: w.start_time,
            end_time: w.end_time,
            l: w.span(),
            time_diffs: w.time_diffs.clone(),
            cv: w.cv::<f64>(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timeline::SignalSequence;

    fn one_class(times: &[u64]) -> SignalSequence {
        SignalSequence::from_pairs(&times.iter().map(|&t| (t, 0)).collect::<Vec<_>>())
    }

    #[test]
    fn cv_examples() {
        assert_eq!(cv(&[4.0_f64, 4.0, 4.0]).unwrap(), 0.0);
        assert!((cv(&[2.0_f64, 4.0]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(cv(&[10.0_f64]).unwrap(), 0.0);
        assert!(matches!(cv::<f64>(&[]), Err(Error::Domain(_))));
        assert!(matches!(cv(&[0.0_f64, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn same_type_pair_examples() {
        let s = one_class(&[0, 10, 20]);
        assert_eq!(
            same_type_pairs(&s, 0, 2),
            vec![PairDiff { i: 0, j: 1, dt: 10 }, PairDiff { i: 1, j: 2, dt: 10 }]
        );
        let s = SignalSequence::from_pairs(&[(0, 0), (5, 1), (12, 0)]);
        assert_eq!(same_type_pairs(&s, 0, 2), vec![PairDiff { i: 0, j: 2, dt: 12 }]);
        assert!(same_type_pairs(&one_class(&[3]), 0, 0).is_empty());
    }

    #[test]
    fn regular_chain_never_closes() {
        let p = WindowingParams::new(2, 0.1).unwrap();
        assert!(detect_windows(&one_class(&[0, 10, 20, 30]), &p).is_empty());
    }

    #[test]
    fn jump_closes_first_window() {
        let p = WindowingParams::new(2, 0.2).unwrap();
        let w = detect_windows(&one_class(&[0, 10, 20, 100]), &p);
        assert_eq!(w.ranges(), vec![(0, 2)]);
        assert_eq!(w.windows[0].span(), 20);
        assert_eq!(w.windows[0].time_diffs, vec![10, 10]);
    }

    #[test]
    fn too_few_signals() {
        let p = WindowingParams::new(2, 0.2).unwrap();
        assert!(detect_windows(&one_class(&[0, 10]), &p).is_empty());
        assert!(detect_windows(&SignalSequence::default(), &p).is_empty());
    }

    #[test]
    fn pairless_signals_are_swallowed() {
        // Class 1 at index 2 completes no pair and is absorbed without a cv test.
        let s = SignalSequence::from_pairs(&[(0, 0), (10, 0), (15, 1), (20, 0), (90, 0)]);
        let p = WindowingParams::new(2, 0.2).unwrap();
        let w = detect_windows(&s, &p);
        assert_eq!(w.ranges(), vec![(0, 3)]);
        assert_eq!(w, reference::detect_windows_bruteforce(&s, &p));
    }

    #[test]
    fn params_validation() {
        assert!(WindowingParams::new(0, 0.1).is_err());
        assert!(WindowingParams::new(2, 0.0).is_err());
        assert_eq!(WindowingParams::<f64>::standard_grid().len(), 25);
        assert_eq!(WindowingParams::new(5, 0.1_f64).unwrap().label(), "5_0.10");
    }

    #[test]
    fn works_in_single_precision() {
        let p = WindowingParams::new(2, 0.2_f32).unwrap();
        let w = detect_windows(&one_class(&[0, 10, 20, 100]), &p);
        assert_eq!(w.ranges(), vec![(0, 2)]);
    }
}
