use prosodex::learning::{fit_fold, loocv_predictions, train, ClassifierConfig, LoocvPlan};
use prosodex::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn clouds(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut matrix = Vec::new();
    let mut labels = Vec::new();
    for class in 0..2 {
        let centre = if class == 0 { 0.0 } else { 10.0 };
        for _ in 0..20 {
            matrix.push(vec![
                centre + rng.random_range(-1.0..1.0),
                centre + rng.random_range(-1.0..1.0),
            ]);
            labels.push(class);
        }
    }
    let ids = (0..40).map(|i| format!("d{i}")).collect();
    Dataset::new(matrix, labels, vec!["x".into(), "y".into()], ids).unwrap()
}

#[test]
fn every_classifier_separates_two_clouds() {
    let ds = clouds(1);
    for cfg in ClassifierConfig::all_defaults() {
        let model = train(&cfg, &ds.matrix, &ds.labels).unwrap();
        assert_eq!(model.predict(&[0.0, 1.0]), 0, "{}", cfg.name());
        assert_eq!(model.predict(&[10.0, 9.0]), 1, "{}", cfg.name());
    }
}

#[test]
fn fold_pipeline_depends_only_on_training_rows() {
    let ds = clouds(2);
    let plan = LoocvPlan::new(&ds, 10).unwrap();
    for cfg in [ClassifierConfig::lda(), ClassifierConfig::random_forest(), ClassifierConfig::knn()] {
        for i in [0, 17, 39] {
            let inside = plan.fold_pipeline(i, &cfg, 2).unwrap();
            let outside = fit_fold(&ds.without_row(i), &cfg, 10, 2).unwrap();
            assert_eq!(inside, outside);
        }
    }
}

#[test]
fn evaluation_is_deterministic() {
    let ds = clouds(3).with_permuted_labels(5);
    for cfg in [ClassifierConfig::random_forest(), ClassifierConfig::svm()] {
        assert_eq!(
            loocv_predictions(&ds, &cfg, 10, 2).unwrap(),
            loocv_predictions(&ds, &cfg, 10, 2).unwrap()
        );
    }
}

#[test]
fn zero_column_is_inert() {
    let ds = clouds(4).with_permuted_labels(9);
    let mut widened = ds.clone();
    for row in &mut widened.matrix {
        row.push(0.0);
    }
    widened.feature_names.push("zero".into());
    for cfg in [ClassifierConfig::lda(), ClassifierConfig::knn(), ClassifierConfig::random_forest()] {
        for n_f in [1, 2] {
            assert_eq!(
                loocv_predictions(&ds, &cfg, 10, n_f).unwrap(),
                loocv_predictions(&widened, &cfg, 10, n_f).unwrap(),
                "{} n_f={n_f}",
                cfg.name()
            );
        }
    }
}

#[test]
fn accuracy_matches_weighted_recall() {
    let ds = clouds(5).with_permuted_labels(1);
    let plan = LoocvPlan::new(&ds, 10).unwrap();
    let row = plan.evaluate(&ClassifierConfig::knn(), 2).unwrap();
    let [n0, n1] = ds.class_counts();
    let weighted = (row.recall_poetry * n0 as f64 + row.recall_prose * n1 as f64) / ds.n_rows() as f64;
    assert!((row.accuracy - weighted).abs() < 1e-12);
}

#[test]
fn knn_is_invariant_to_consistent_affine_maps() {
    let ds = clouds(6).with_permuted_labels(3);
    let mapped = Dataset {
        matrix: ds.matrix.iter().map(|r| vec![3.0 * r[0] - 7.0, 0.5 * r[1] + 2.0]).collect(),
        ..ds.clone()
    };
    let cfg = ClassifierConfig::knn();
    assert_eq!(
        loocv_predictions(&ds, &cfg, 10, 2).unwrap(),
        loocv_predictions(&mapped, &cfg, 10, 2).unwrap()
    );
}
