use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::N_CLASSES;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Classifier kind plus hyperparameters; the defaults are the reference settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ClassifierConfig {
    #[serde(rename = "LDA")]
    Lda {
        #[serde(default = "defaults::ridge")]
        ridge: f64,
    },
    #[serde(rename = "RF")]
    RandomForest {
        #[serde(default = "defaults::n_trees")]
        n_trees: usize,
        #[serde(default = "defaults::max_depth")]
        max_depth: usize,
        #[serde(default)]
        seed: u64,
    },
    #[serde(rename = "KNN")]
    Knn {
        #[serde(default = "defaults::k")]
        k: usize,
    },
    #[serde(rename = "SVM")]
    Svm {
        #[serde(default = "defaults::lambda")]
        lambda: f64,
        #[serde(default = "defaults::svm_iterations")]
        iterations: usize,
        #[serde(default)]
        seed: u64,
    },
    #[serde(rename = "MLP")]
    Mlp {
        #[serde(default = "defaults::hidden")]
        hidden: usize,
        #[serde(default = "defaults::learning_rate")]
        learning_rate: f64,
        #[serde(default = "defaults::max_iterations")]
        max_iterations: usize,
        #[serde(default = "defaults::tolerance")]
        tolerance: f64,
        #[serde(default)]
        seed: u64,
    },
}

mod defaults {
    pub fn ridge() -> f64 {
        1e-6
    }
    pub fn n_trees() -> usize {
        100
    }
    pub fn max_depth() -> usize {
        2
    }
    pub fn k() -> usize {
        5
    }
    pub fn lambda() -> f64 {
        1e-2
    }
    pub fn svm_iterations() -> usize {
        100_000
    }
    pub fn hidden() -> usize {
        40
    }
    pub fn learning_rate() -> f64 {
        0.01
    }
    pub fn max_iterations() -> usize {
        10_000
    }
    pub fn tolerance() -> f64 {
        1e-6
    }
}

impl ClassifierConfig {
    pub fn lda() -> Self {
        ClassifierConfig::Lda { ridge: defaults::ridge() }
    }

    pub fn random_forest() -> Self {
        ClassifierConfig::RandomForest {
            n_trees: defaults::n_trees(),
            max_depth: defaults::max_depth(),
            seed: 0,
        }
    }

    pub fn knn() -> Self {
        ClassifierConfig::Knn { k: defaults::k() }
    }

    pub fn svm() -> Self {
        ClassifierConfig::Svm {
            lambda: defaults::lambda(),
            iterations: defaults::svm_iterations(),
            seed: 0,
        }
    }

    pub fn mlp() -> Self {
        ClassifierConfig::Mlp {
            hidden: defaults::hidden(),
            learning_rate: defaults::learning_rate(),
            max_iterations: defaults::max_iterations(),
            tolerance: defaults::tolerance(),
            seed: 0,
        }
    }

    /// LDA, RF, KNN, SVM and MLP with default settings, in report order.
    pub fn all_defaults() -> Vec<Self> {
        vec![Self::lda(), Self::random_forest(), Self::knn(), Self::svm(), Self::mlp()]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ClassifierConfig::Lda { .. } => "LDA",
            ClassifierConfig::RandomForest { .. } => "RF",
            ClassifierConfig::Knn { .. } => "KNN",
            ClassifierConfig::Svm { .. } => "SVM",
            ClassifierConfig::Mlp { .. } => "MLP",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = match *self {
            ClassifierConfig::Lda { ridge } => !(ridge >= 0.0),
            ClassifierConfig::RandomForest { n_trees, max_depth, .. } => n_trees == 0 || max_depth == 0,
            ClassifierConfig::Knn { k } => k == 0,
            ClassifierConfig::Svm { lambda, iterations, .. } => !(lambda > 0.0) || iterations == 0,
            ClassifierConfig::Mlp {
                hidden,
                learning_rate,
                max_iterations,
                ..
            } => hidden == 0 || !(learning_rate > 0.0) || max_iterations == 0,
        };
        if bad {
            Err(Error::Config(format!("invalid {} hyperparameters: {self:?}", self.name())))
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Tree<T> {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: T,
        left: Box<Tree<T>>,
        right: Box<Tree<T>>,
    },
}

impl<T: Real> Tree<T> {
    fn predict(&self, row: &[T]) -> usize {
        match self {
            Tree::Leaf(c) => *c,
            Tree::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if row[*feature] <= *threshold {
                    left.predict(row)
                } else {
                    right.predict(row)
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Split { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }
}

/// A trained, immutable classifier.
#[derive(Debug, Clone, PartialEq)]
pub enum Model<T> {
    /// Positive decision value means class 1.
    Lda { weights: Vec<T>, bias: T },
    Forest { trees: Vec<Tree<T>> },
    Knn { rows: Vec<Vec<T>>, labels: Vec<usize>, k: usize },
    /// The last weight multiplies a constant 1 feature.
    Svm { weights: Vec<T> },
    Mlp {
        /// `hidden × n_features`, row-major.
        w1: Vec<T>,
        b1: Vec<T>,
        w2: Vec<T>,
        b2: T,
    },
}

fn majority(counts: &[usize; N_CLASSES]) -> usize {
    // Ties go to the lower class index.
    let mut best = 0;
    for c in 1..N_CLASSES {
        if counts[c] > counts[best] {
            best = c;
        }
    }
    best
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

impl<T: Real> Model<T> {
    pub fn predict(&self, row: &[T]) -> usize {
        match self {
            Model::Lda { weights, bias } => usize::from(dot(weights, row) + *bias > T::zero()),
            Model::Forest { trees } => {
                let mut votes = [0; N_CLASSES];
                for t in trees {
                    votes[t.predict(row)] += 1;
                }
                majority(&votes)
            }
            Model::Knn { rows, labels, k } => knn_predict(rows, labels, *k, row),
            Model::Svm { weights } => {
                let (w, b) = weights.split_at(weights.len() - 1);
                usize::from(dot(w, row) + b[0] > T::zero())
            }
            Model::Mlp { w1, b1, w2, b2 } => {
                let f = row.len();
                let mut z = *b2;
                for (h, (&bh, &vh)) in b1.iter().zip(w2).enumerate() {
                    z += vh * (dot(&w1[h * f..(h + 1) * f], row) + bh).tanh();
                }
                usize::from(sigmoid(z) >= T::lit(0.5))
            }
        }
    }
}

/// Trains `config` on rows `x` with class indices `y`.
pub fn train<T: Real>(config: &ClassifierConfig, x: &[Vec<T>], y: &[usize]) -> Result<Model<T>> {
    config.validate()?;
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::Train(format!("{} rows and {} labels", x.len(), y.len())));
    }
    let mut counts = [0usize; N_CLASSES];
    for &l in y {
        counts[l] += 1;
    }
    if let Some(c) = counts.iter().position(|&n| n == 0) {
        return Err(Error::Train(format!(
            "training set has no documents of class {}",
            super::class_name(c)
        )));
    }
    Ok(match *config {
        ClassifierConfig::Lda { ridge } => train_lda(x, y, T::lit(ridge))?,
        ClassifierConfig::RandomForest { n_trees, max_depth, seed } => Model::Forest {
            trees: train_forest(x, y, n_trees, max_depth, seed),
        },
        ClassifierConfig::Knn { k } => Model::Knn {
            rows: x.to_vec(),
            labels: y.to_vec(),
            k,
        },
        ClassifierConfig::Svm { lambda, iterations, seed } => train_svm(x, y, lambda, iterations, seed),
        ClassifierConfig::Mlp {
            hidden,
            learning_rate,
            max_iterations,
            tolerance,
            seed,
        } => train_mlp(x, y, hidden, learning_rate, max_iterations, tolerance, seed),
    })
}

fn train_lda<T: Real>(x: &[Vec<T>], y: &[usize], ridge: T) -> Result<Model<T>> {
    let f = x[0].len();
    let mut means = vec![vec![T::zero(); f]; N_CLASSES];
    let mut counts = [0usize; N_CLASSES];
    for (row, &l) in x.iter().zip(y) {
        counts[l] += 1;
        for (m, &v) in means[l].iter_mut().zip(row) {
            *m += v;
        }
    }
    for (m, &n) in means.iter_mut().zip(&counts) {
        for v in m.iter_mut() {
            *v /= T::from_count(n);
        }
    }
    let mut cov = vec![T::zero(); f * f];
    for (row, &l) in x.iter().zip(y) {
        let d: Vec<T> = row.iter().zip(&means[l]).map(|(&v, &m)| v - m).collect();
        for i in 0..f {
            for j in 0..=i {
                cov[i * f + j] += d[i] * d[j];
            }
        }
    }
    let dof = T::from_count(x.len().saturating_sub(N_CLASSES).max(1));
    for i in 0..f {
        for j in 0..=i {
            cov[i * f + j] /= dof;
            cov[j * f + i] = cov[i * f + j];
        }
        cov[i * f + i] += ridge;
    }
    let diff: Vec<T> = means[1].iter().zip(&means[0]).map(|(&a, &b)| a - b).collect();
    let weights = cholesky_solve(&cov, f, &diff)
        .ok_or_else(|| Error::Train("pooled covariance is not positive definite".into()))?;
    let midpoint: Vec<T> = means[0].iter().zip(&means[1]).map(|(&a, &b)| (a + b) / T::lit(2.0)).collect();
    let prior_shift = (T::from_count(counts[1]) / T::from_count(counts[0])).ln();
    let bias = prior_shift - dot(&weights, &midpoint);
    Ok(Model::Lda { weights, bias })
}

/// Solves `a x = b` for symmetric positive definite `a` (row-major `n × n`).
fn cholesky_solve<T: Real>(a: &[T], n: usize, b: &[T]) -> Option<Vec<T>> {
    let mut l = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let s: T = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            if i == j {
                let d = a[i * n + i] - s;
                if !(d > T::zero()) {
                    return None;
                }
                l[i * n + i] = d.sqrt();
            } else {
                l[i * n + j] = (a[i * n + j] - s) / l[j * n + j];
            }
        }
    }
    let mut z = vec![T::zero(); n];
    for i in 0..n {
        let s: T = (0..i).map(|k| l[i * n + k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i * n + i];
    }
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s: T = (i + 1..n).map(|k| l[k * n + i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i * n + i];
    }
    Some(x)
}

fn gini(counts: &[usize; N_CLASSES]) -> f64 {
    let n: usize = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|&c| (c as f64 / n as f64).powi(2)).sum::<f64>()
}

fn grow_tree<T: Real>(
    x: &[Vec<T>],
    y: &[usize],
    idx: &[usize],
    depth: usize,
    max_depth: usize,
    n_candidates: usize,
    rng: &mut ChaCha8Rng,
) -> Tree<T> {
    let mut counts = [0; N_CLASSES];
    for &i in idx {
        counts[y[i]] += 1;
    }
    let leaf = Tree::Leaf(majority(&counts));
    if depth == max_depth || counts.iter().filter(|&&c| c > 0).count() < 2 {
        return leaf;
    }
    let n_features = x[0].len();
    let parent = gini(&counts);
    // (weighted impurity, feature, threshold)
    let mut best: Option<(f64, usize, T)> = None;
    let mut sorted: Vec<usize> = idx.to_vec();
    for feature in sample(rng, n_features, n_candidates).into_vec() {
        sorted.sort_by(|&a, &b| x[a][feature].partial_cmp(&x[b][feature]).unwrap().then(a.cmp(&b)));
        let mut left = [0; N_CLASSES];
        for pos in 0..sorted.len() - 1 {
            left[y[sorted[pos]]] += 1;
            let (lo, hi) = (x[sorted[pos]][feature], x[sorted[pos + 1]][feature]);
            if lo == hi {
                continue;
            }
            let mut right = counts;
            for c in 0..N_CLASSES {
                right[c] -= left[c];
            }
            let nl = (pos + 1) as f64;
            let nr = (sorted.len() - pos - 1) as f64;
            let score = (nl * gini(&left) + nr * gini(&right)) / sorted.len() as f64;
            if best.is_none_or(|b| score < b.0) {
                best = Some((score, feature, (lo + hi) / T::lit(2.0)));
            }
        }
    }
    match best {
        Some((score, feature, threshold)) if score < parent => {
            let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| x[i][feature] <= threshold);
            Tree::Split {
                feature,
                threshold,
                left: Box::new(grow_tree(x, y, &l, depth + 1, max_depth, n_candidates, rng)),
                right: Box::new(grow_tree(x, y, &r, depth + 1, max_depth, n_candidates, rng)),
            }
        }
        _ => leaf,
    }
}

fn train_forest<T: Real>(x: &[Vec<T>], y: &[usize], n_trees: usize, max_depth: usize, seed: u64) -> Vec<Tree<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let n_features = x[0].len();
    let n_candidates = ((n_features as f64).sqrt() as usize).clamp(1, n_features.max(1));
    (0..n_trees)
        .map(|_| {
            let boot: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            grow_tree(x, y, &boot, 0, max_depth, n_candidates, &mut rng)
        })
        .collect()
}

fn knn_predict<T: Real>(rows: &[Vec<T>], labels: &[usize], k: usize, query: &[T]) -> usize {
    let mut dist: Vec<(T, usize)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.iter().zip(query).map(|(&a, &b)| (a - b) * (a - b)).sum(), i))
        .collect();
    dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes = [0; N_CLASSES];
    for &(_, i) in dist.iter().take(k) {
        votes[labels[i]] += 1;
    }
    let top = *votes.iter().max().unwrap();
    if votes.iter().filter(|&&v| v == top).count() > 1 {
        labels[dist[0].1]
    } else {
        majority(&votes)
    }
}

/// Pegasos with a constant feature appended for the bias.
fn train_svm<T: Real>(x: &[Vec<T>], y: &[usize], lambda: f64, iterations: usize, seed: u64) -> Model<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = x[0].len() + 1;
    let lambda = T::lit(lambda);
    let radius = T::one() / lambda.sqrt();
    let mut w = vec![T::zero(); f];
    for t in 1..=iterations {
        let i = rng.random_range(0..x.len());
        let yi = if y[i] == 1 { T::one() } else { -T::one() };
        let eta = T::one() / (lambda * T::from_count(t));
        let margin = yi * (dot(&w[..f - 1], &x[i]) + w[f - 1]);
        let shrink = T::one() - eta * lambda;
        for v in w.iter_mut() {
            *v *= shrink;
        }
        if margin < T::one() {
            for (v, &xi) in w.iter_mut().zip(x[i].iter().chain(std::iter::once(&T::one()))) {
                *v += eta * yi * xi;
            }
        }
        let norm = dot(&w, &w).sqrt();
        if norm > radius {
            for v in w.iter_mut() {
                *v *= radius / norm;
            }
        }
    }
    Model::Svm { weights: w }
}

#[allow(clippy::too_many_arguments)]
fn train_mlp<T: Real>(
    x: &[Vec<T>],
    y: &[usize],
    hidden: usize,
    learning_rate: f64,
    max_iterations: usize,
    tolerance: f64,
    seed: u64,
) -> Model<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = x.len();
    let f = x[0].len();
    let mut init = |len: usize| -> Vec<T> { (0..len).map(|_| T::lit(rng.random_range(-0.5..0.5))).collect() };
    let mut w1 = init(hidden * f);
    let mut b1 = init(hidden);
    let mut w2 = init(hidden);
    let mut b2 = init(1)[0];
    let lr = T::lit(learning_rate);
    let tol = T::lit(tolerance);
    let eps = T::lit(1e-12);
    let inv_n = T::one() / T::from_count(n);
    let targets: Vec<T> = y.iter().map(|&l| T::from_count(l)).collect();

    let mut act = vec![T::zero(); n * hidden];
    let mut g_w1 = vec![T::zero(); hidden * f];
    let mut g_b1 = vec![T::zero(); hidden];
    let mut g_w2 = vec![T::zero(); hidden];
    let mut prev_loss: Option<T> = None;
    for _ in 0..max_iterations {
        g_w1.fill(T::zero());
        g_b1.fill(T::zero());
        g_w2.fill(T::zero());
        let mut g_b2 = T::zero();
        let mut loss = T::zero();
        for (s, row) in x.iter().enumerate() {
            let a = &mut act[s * hidden..(s + 1) * hidden];
            let mut z = b2;
            for h in 0..hidden {
                a[h] = (dot(&w1[h * f..(h + 1) * f], row) + b1[h]).tanh();
                z += w2[h] * a[h];
            }
            let p = sigmoid(z);
            let t = targets[s];
            loss -= t * (p + eps).ln() + (T::one() - t) * (T::one() - p + eps).ln();
            // Gradient of mean cross-entropy w.r.t. the output logit.
            let dz = (p - t) * inv_n;
            g_b2 += dz;
            for h in 0..hidden {
                g_w2[h] += dz * a[h];
                let dh = dz * w2[h] * (T::one() - a[h] * a[h]);
                g_b1[h] += dh;
                for (g, &v) in g_w1[h * f..(h + 1) * f].iter_mut().zip(row) {
                    *g += dh * v;
                }
            }
        }
        loss *= inv_n;
        if prev_loss.is_some_and(|prev| prev - loss < tol) {
            break;
        }
        prev_loss = Some(loss);
        for (w, g) in w1.iter_mut().zip(&g_w1) {
            *w -= lr * *g;
        }
        for (w, g) in b1.iter_mut().zip(&g_b1) {
            *w -= lr * *g;
        }
        for (w, g) in w2.iter_mut().zip(&g_w2) {
            *w -= lr * *g;
        }
        b2 -= lr * g_b2;
    }
    Model::Mlp { w1, b1, w2, b2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lda_one_dimensional_boundary() {
        let x = vec![vec![-1.0_f64], vec![-2.0], vec![1.0], vec![2.0]];
        let y = vec![0, 0, 1, 1];
        let m = train(&ClassifierConfig::lda(), &x, &y).unwrap();
        let Model::Lda { weights, bias } = &m else { unreachable!() };
        assert!((-bias / weights[0]).abs() < 1e-9, "boundary at 0");
        assert_eq!(m.predict(&[0.5]), 1);
        assert_eq!(m.predict(&[-0.5]), 0);
    }

    #[test]
    fn knn_unanimous() {
        let x = vec![vec![1.0_f64, 1.0]; 5];
        let m: Model<f64> = Model::Knn { rows: x, labels: vec![0; 5], k: 5 };
        assert_eq!(m.predict(&[100.0, -3.0]), 0);
    }

    #[test]
    fn knn_vote_tie_goes_to_nearest() {
        let x = vec![vec![0.0_f64], vec![1.0], vec![2.0], vec![3.0]];
        let m: Model<f64> = Model::Knn { rows: x, labels: vec![1, 0, 0, 1], k: 4 };
        assert_eq!(m.predict(&[-0.1]), 1);
        assert_eq!(m.predict(&[1.1]), 0);
    }

    #[test]
    fn single_class_is_train_error() {
        let x = vec![vec![0.0_f64], vec![1.0]];
        for cfg in ClassifierConfig::all_defaults() {
            assert!(matches!(train(&cfg, &x, &[0, 0]), Err(Error::Train(_))));
        }
    }

    #[test]
    fn forest_depth_is_bounded() {
        let x: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * 7 % 11) as f64, (i % 3) as f64]).collect();
        let y: Vec<usize> = (0..30).map(|i| usize::from(i % 4 == 0 || i > 20)).collect();
        let Model::Forest { trees } = train(&ClassifierConfig::random_forest(), &x, &y).unwrap() else {
            unreachable!()
        };
        assert_eq!(trees.len(), 100);
        assert!(trees.iter().all(|t| t.depth() <= 2));
    }

    #[test]
    fn cholesky_solves_spd_system() {
        let a = [4.0_f64, 2.0, 2.0, 3.0];
        let x = cholesky_solve(&a, 2, &[2.0, 1.0]).unwrap();
        assert!((4.0 * x[0] + 2.0 * x[1] - 2.0).abs() < 1e-12);
        assert!((2.0 * x[0] + 3.0 * x[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn config_serde_round_trip_with_defaults() {
        let cfg: ClassifierConfig = toml::from_str("kind = \"RF\"").unwrap();
        assert_eq!(cfg, ClassifierConfig::random_forest());
        for cfg in ClassifierConfig::all_defaults() {
            let s = serde_json::to_string(&cfg).unwrap();
            assert_eq!(serde_json::from_str::<ClassifierConfig>(&s).unwrap(), cfg);
        }
    }
}
