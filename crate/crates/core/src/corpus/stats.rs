//! Basic per-document statistics, histograms and Weibull fits.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{Corpus, Document, Label};
use crate::error::{Error, Result};
use crate::phonetics::PronDict;
use crate::scalar::Real;
use crate::timeline::{build_timeline, find_rhyme_signals, tokenize, DurationTable, RhythmPunctSet, TokenKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentStats {
    pub doc_id: String,
    pub label: Label,
    /// Unknown words contribute no phones.
    pub phone_count: usize,
    pub char_count: usize,
    pub rhythm_punct_count: usize,
    /// Mean character distance between consecutive rhythm punctuation marks.
    pub punct_gap: Option<f64>,
    pub distinct_rhymes: usize,
    pub mean_rhyme_repetitions: Option<f64>,
}

pub fn document_stats(doc: &Document, dict: &PronDict, punct: &RhythmPunctSet) -> DocumentStats {
    let tokens = tokenize(&doc.text);
    let phone_count = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Word)
        .filter_map(|t| dict.phones_for(&t.surface))
        .map(<[_]>::len)
        .sum();
    let offsets: Vec<usize> = tokens.iter().filter(|t| punct.contains(t)).map(|t| t.offset).collect();
    let punct_gap = (offsets.len() >= 2).then(|| {
        let total: usize = offsets.windows(2).map(|w| w[1] - w[0]).sum();
        total as f64 / (offsets.len() - 1) as f64
    });
    let timeline = build_timeline(&tokens, dict, &DurationTable::default());
    let signals = find_rhyme_signals(&tokens, &timeline, dict, punct);
    let distinct_rhymes = signals.class_count();
    let mean_rhyme_repetitions =
        (distinct_rhymes > 0).then(|| signals.len() as f64 / distinct_rhymes as f64);
    DocumentStats {
        doc_id: doc.id.clone(),
        label: doc.label,
        phone_count,
        char_count: doc.text.chars().count(),
        rhythm_punct_count: offsets.len(),
        punct_gap,
        distinct_rhymes,
        mean_rhyme_repetitions,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// `counts.len() + 1` bin edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub const MIN_BINS: usize = 5;
const MAX_BINS: usize = 1000;

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

impl Histogram {
    /// Freedman–Diaconis bin width with at least [`MIN_BINS`] bins.
    pub fn freedman_diaconis(samples: &[f64]) -> Histogram {
        if samples.is_empty() {
            return Histogram {
                edges: Vec::new(),
                counts: Vec::new(),
            };
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
        let (lo, hi) = if max > min { (min, max) } else { (min - 0.5, min + 0.5) };
        let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
        let width = 2.0 * iqr / (sorted.len() as f64).cbrt();
        let bins = if width > 0.0 {
            (((hi - lo) / width).ceil() as usize).clamp(MIN_BINS, MAX_BINS)
        } else {
            MIN_BINS
        };
        let step = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + step * i as f64).collect();
        let mut counts = vec![0; bins];
        for &x in &sorted {
            let idx = (((x - lo) / step).floor() as usize).min(bins - 1);
            counts[idx] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullFit<T> {
    pub shape: T,
    pub scale: T,
}

const WEIBULL_MAX_ITER: usize = 200;
const WEIBULL_RTOL: f64 = 1e-9;

/// Two-parameter Weibull maximum-likelihood fit.
///
/// The shape solves `Σ x^k ln x / Σ x^k − 1/k − mean(ln x) = 0` by damped
/// Newton iteration; the scale follows as `(Σ x^k / n)^(1/k)`. Samples are
/// divided by their maximum first, which leaves the shape unchanged and keeps
/// `x^k` bounded.
pub fn fit_weibull<T: Real>(samples: &[T]) -> Result<WeibullFit<T>> {
    if let Some(bad) = samples.iter().find(|&&x| !(x > T::zero()) || !x.is_finite()) {
        return Err(Error::Domain(format!("Weibull samples must be positive, got {bad}")));
    }
    if samples.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 samples, got {}", samples.len())));
    }
    let max = samples.iter().copied().fold(T::zero(), T::max);
    let logs: Vec<T> = samples.iter().map(|&x| (x / max).ln()).collect();
    let n = T::from_count(logs.len());
    let mean_log = logs.iter().copied().sum::<T>() / n;
    let var_log = logs.iter().map(|&l| (l - mean_log) * (l - mean_log)).sum::<T>() / n;
    if !(var_log > T::zero()) {
        return Err(Error::Fit("all samples are equal".into()));
    }

    // g(k) and g'(k); g is strictly increasing with a single root.
    let eval = |k: T| -> (T, T) {
        let (mut s0, mut s1, mut s2) = (T::zero(), T::zero(), T::zero());
        for &l in &logs {
            let w = (k * l).exp();
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        let g = s1 / s0 - k.recip() - mean_log;
        let dg = (s2 * s0 - s1 * s1) / (s0 * s0) + (k * k).recip();
        (g, dg)
    };

    let pi = T::lit(std::f64::consts::PI);
    let mut k = pi / (T::lit(6.0).sqrt() * var_log.sqrt());
    let rtol = T::lit(WEIBULL_RTOL).max(T::epsilon() * T::lit(4.0));
    let mut converged = false;
    for _ in 0..WEIBULL_MAX_ITER {
        let (g, dg) = eval(k);
        let mut step = g / dg;
        let mut next = k - step;
        let mut tries = 0;
        while (!(next > T::zero()) || eval(next).0.abs() > g.abs()) && tries < 60 {
            step *= T::lit(0.5);
            next = k - step;
            tries += 1;
        }
        let done = (next - k).abs() <= rtol * k;
        k = next;
        if done {
            converged = true;
            break;
        }
    }
    if !converged || !k.is_finite() {
        return Err(Error::Fit(format!("shape iteration did not converge in {WEIBULL_MAX_ITER} steps")));
    }
    let mean_pow = logs.iter().map(|&l| (k * l).exp()).sum::<T>() / n;
    let scale = mean_pow.powf(k.recip()) * max;
    Ok(WeibullFit { shape: k, scale })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub per_document: Vec<DocumentStats>,
    pub phone_count_hist: Histogram,
    pub char_count_hist: Histogram,
    pub rhythm_punct_count_hist: Histogram,
    pub punct_gap_hist: Histogram,
    pub distinct_rhymes_hist: Histogram,
    pub mean_rhyme_repetitions_hist: Histogram,
    /// Keyed by metric (`distinct_rhymes`, `mean_rhyme_repetitions`), and by
    /// `metric/label` for each class; failed fits are left out.
    pub weibull_fits: BTreeMap<String, WeibullFit<f64>>,
}

type Metric = dyn Fn(&DocumentStats) -> Option<f64>;

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

pub fn corpus_stats(corpus: &Corpus, dict: &PronDict, punct: &RhythmPunctSet) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::Config("corpus is empty".into()));
    }
    let per_document: Vec<DocumentStats> = corpus
        .documents
        .iter()
        .map(|d| document_stats(d, dict, punct))
        .collect();
    let column = |f: &dyn Fn(&DocumentStats) -> Option<f64>| -> Vec<f64> {
        sorted(per_document.iter().filter_map(f).collect())
    };
    let hist = |f: &dyn Fn(&DocumentStats) -> Option<f64>| Histogram::freedman_diaconis(&column(f));

    let mut weibull_fits = BTreeMap::new();
    let metrics: [(&str, &Metric); 2] = [
        ("distinct_rhymes", &|s| Some(s.distinct_rhymes as f64)),
        ("mean_rhyme_repetitions", &|s| s.mean_rhyme_repetitions),
    ];
    for (name, metric) in metrics {
        let mut groups: Vec<(String, Option<Label>)> = vec![(name.to_string(), None)];
        for label in [Label::Poetry, Label::Prose, Label::Unlabeled] {
            if corpus.count(label) > 0 {
                groups.push((format!("{name}/{label}"), Some(label)));
            }
        }
        for (key, label) in groups {
            // Weibull support is (0, ∞): zero counts are left out of the fit.
            let samples = sorted(
                per_document
                    .iter()
                    .filter(|s| label.is_none_or(|l| s.label == l))
                    .filter_map(metric)
                    .filter(|&x| x > 0.0)
                    .collect(),
            );
            match fit_weibull(&samples) {
                Ok(fit) => {
                    weibull_fits.insert(key, fit);
                }
                Err(e) => log::info!("Weibull fit for {key} skipped: {e}"),
            }
        }
    }

    Ok(CorpusStats {
        phone_count_hist: hist(&|s| Some(s.phone_count as f64)),
        char_count_hist: hist(&|s| Some(s.char_count as f64)),
        rhythm_punct_count_hist: hist(&|s| Some(s.rhythm_punct_count as f64)),
        punct_gap_hist: hist(&|s| s.punct_gap),
        distinct_rhymes_hist: hist(&|s| Some(s.distinct_rhymes as f64)),
        mean_rhyme_repetitions_hist: hist(&|s| s.mean_rhyme_repetitions),
        per_document,
        weibull_fits,
    })
}

impl CorpusStats {
    /// One row per document; absent values are empty fields.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let fail = |e: csv::Error| Error::format("stats csv", e);
        w.write_record([
            "doc_id",
            "label",
            "phone_count",
            "char_count",
            "rhythm_punct_count",
            "punct_gap",
            "distinct_rhymes",
            "mean_rhyme_repetitions",
        ])
        .map_err(fail)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for s in &self.per_document {
            w.write_record([
                s.doc_id.clone(),
                s.label.to_string(),
                s.phone_count.to_string(),
                s.char_count.to_string(),
                s.rhythm_punct_count.to_string(),
                opt(s.punct_gap),
                s.distinct_rhymes.to_string(),
                opt(s.mean_rhyme_repetitions),
            ])
            .map_err(fail)?;
        }
        w.flush().map_err(|e| Error::format("stats csv", e))
    }

    /// Histograms and Weibull fits as pretty JSON.
    pub fn histogram_json(&self) -> String {
        #[derive(Serialize)]
        struct Dump<'a> {
            phone_count: &'a Histogram,
            char_count: &'a Histogram,
            rhythm_punct_count: &'a Histogram,
            punct_gap: &'a Histogram,
            distinct_rhymes: &'a Histogram,
            mean_rhyme_repetitions: &'a Histogram,
            weibull_fits: &'a BTreeMap<String, WeibullFit<f64>>,
        }
        serde_json::to_string_pretty(&Dump {
            phone_count: &self.phone_count_hist,
            char_count: &self.char_count_hist,
            rhythm_punct_count: &self.rhythm_punct_count_hist,
            punct_gap: &self.punct_gap_hist,
            distinct_rhymes: &self.distinct_rhymes_hist,
            mean_rhyme_repetitions: &self.mean_rhyme_repetitions_hist,
            weibull_fits: &self.weibull_fits,
        })
        .expect("stats serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::load_document;

    #[test]
    fn hi_document_counts() {
        let dict = PronDict::parse_str("HI  HH AY1\n").unwrap();
        let doc = load_document("Hi.", "d", Label::Poetry).unwrap();
        let s = document_stats(&doc, &dict, &RhythmPunctSet::default());
        assert_eq!(s.phone_count, 2);
        assert_eq!(s.rhythm_punct_count, 1);
        assert_eq!(s.char_count, 3);
        assert_eq!(s.punct_gap, None);
        assert_eq!(s.distinct_rhymes, 1);
        assert_eq!(s.mean_rhyme_repetitions, Some(1.0));
    }

    #[test]
    fn punct_gap_is_mean_char_distance() {
        let dict = PronDict::fixture();
        let doc = load_document("ab. c! defg?", "d", Label::Prose).unwrap();
        let s = document_stats(&doc, &dict, &RhythmPunctSet::default());
        // '.' at 2, '!' at 5, '?' at 11.
        assert_eq!(s.punct_gap, Some(4.5));
        let doc = load_document("no rhythm here", "d", Label::Prose).unwrap();
        assert_eq!(document_stats(&doc, &dict, &RhythmPunctSet::default()).punct_gap, None);
    }

    #[test]
    fn histogram_counts_every_sample() {
        let samples: Vec<f64> = (0..57).map(|i| (i * i % 23) as f64).collect();
        let h = Histogram::freedman_diaconis(&samples);
        assert_eq!(h.total(), 57);
        assert!(h.counts.len() >= MIN_BINS);
        assert_eq!(h.edges.len(), h.counts.len() + 1);
        let h = Histogram::freedman_diaconis(&[3.0, 3.0]);
        assert_eq!((h.total(), h.counts.len()), (2, MIN_BINS));
    }

    #[test]
    fn weibull_rejects_degenerate_input() {
        assert!(matches!(fit_weibull(&[1.0_f64, 1.0, 1.0]), Err(Error::Fit(_))));
        assert!(matches!(fit_weibull(&[1.0_f64, 2.0]), Err(Error::Fit(_))));
        assert!(matches!(fit_weibull(&[1.0_f64, -2.0, 3.0]), Err(Error::Domain(_))));
        assert!(matches!(fit_weibull(&[1.0_f64, 0.0, 3.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn weibull_stationary_point() {
        let xs = [0.3_f64, 1.1, 2.7, 0.9, 1.8, 4.2, 0.5];
        let fit = fit_weibull(&xs).unwrap();
        // Score equations of the log-likelihood vanish at the estimate.
        let k = fit.shape;
        let n = xs.len() as f64;
        let s0: f64 = xs.iter().map(|x| x.powf(k)).sum();
        let s1: f64 = xs.iter().map(|x| x.powf(k) * x.ln()).sum();
        let ml: f64 = xs.iter().map(|x| x.ln()).sum::<f64>() / n;
        assert!((s1 / s0 - 1.0 / k - ml).abs() < 1e-9);
        assert!((fit.scale - (s0 / n).powf(1.0 / k)).abs() < 1e-9);
    }
}
