use prosodex::corpus::stats::fit_weibull;
use prosodex::corpus::{load_document, shuffle_document, Label};
use prosodex::features::fit_standardizer;
use prosodex::phonetics::{rhyming_part, PronDict};
use prosodex::simgraph::{build_graph, cosine_similarity};
use prosodex::timeline::{build_timeline, tokenize, DurationTable, TokenKind};
use prosodex::FeatureVector;
use proptest::prelude::*;

#[test]
fn fixture_round_trips_through_cmudict_text() {
    let dict = PronDict::fixture();
    let again = PronDict::parse_str(&dict.to_cmudict_string()).unwrap();
    assert_eq!(dict.words(), again.words());
    for w in dict.words() {
        assert_eq!(dict.variants(w), again.variants(w));
    }
}

#[test]
fn rhyming_part_is_a_suffix_over_fixture() {
    let dict = PronDict::fixture();
    for w in dict.words() {
        for pron in dict.variants(w).unwrap() {
            let part = rhyming_part(pron);
            assert!(pron.ends_with(&part.phones), "{w}");
            assert!(!part.phones.is_empty());
        }
    }
}

fn text() -> impl Strategy<Value = String> {
    let pieces = prop::sample::select(vec![
        "cat", "hat", "the", "dog", "runs", "orange", "hmm", "zzyzx", "42", ",", ".", "!", "?", ";", ":", "--",
        "-", "(", "\n", "\n\n", " ", "don't",
    ]);
    proptest::collection::vec(pieces, 0..60).prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn load_is_idempotent(raw in text()) {
        if let Ok(doc) = load_document(&raw, "d", Label::Prose) {
            prop_assert_eq!(&load_document(&doc.text, "d", Label::Prose).unwrap().text, &doc.text);
        }
    }

    #[test]
    fn total_duration_is_sum_plus_gaps(raw in text()) {
        let dict = PronDict::fixture();
        let table = DurationTable::default();
        let tokens = tokenize(&raw);
        let tl = build_timeline(&tokens, &dict, &table);
        let sum: u64 = tokens.iter().map(|t| table.duration(t, &dict)).sum();
        let gaps = tokens.len().saturating_sub(1) as u64 * table.gap;
        prop_assert_eq!(tl.total_duration, sum + gaps);
        for (s, t) in tl.spans.iter().zip(&tokens) {
            prop_assert_eq!(s.end + 1 - s.start, table.duration(t, &dict));
        }
    }

    #[test]
    fn shuffle_keeps_punctuation_and_multiset(raw in text(), seed in any::<u64>()) {
        if let Ok(doc) = load_document(&raw, "d", Label::Poetry) {
            let before = tokenize(&doc.text);
            let after = tokenize(&shuffle_document(&doc, seed).text);
            prop_assert_eq!(before.len(), after.len());
            let movable = |k: TokenKind| matches!(k, TokenKind::Word | TokenKind::Number);
            for (a, b) in before.iter().zip(&after) {
                prop_assert_eq!(movable(a.kind), movable(b.kind));
                if !movable(a.kind) {
                    prop_assert_eq!(&a.surface, &b.surface);
                }
            }
            let mut x: Vec<_> = before.iter().map(|t| t.surface.clone()).collect();
            let mut y: Vec<_> = after.iter().map(|t| t.surface.clone()).collect();
            x.sort();
            y.sort();
            prop_assert_eq!(x, y);
        }
    }

    #[test]
    fn weibull_scale_equivariance(xs in proptest::collection::vec(0.1f64..50.0, 5..40), c in 0.1f64..20.0) {
        let distinct = xs.iter().any(|&x| x != xs[0]);
        prop_assume!(distinct);
        let a = fit_weibull(&xs).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|&x| x * c).collect();
        let b = fit_weibull(&scaled).unwrap();
        prop_assert!((a.shape - b.shape).abs() <= 1e-6 * a.shape);
        prop_assert!((a.scale * c - b.scale).abs() <= 1e-6 * b.scale);
    }

    #[test]
    fn weibull_ignores_sample_order(mut xs in proptest::collection::vec(0.1f64..50.0, 5..40)) {
        prop_assume!(xs.iter().any(|&x| x != xs[0]));
        let a = fit_weibull(&xs).unwrap();
        xs.reverse();
        let b = fit_weibull(&xs).unwrap();
        prop_assert!((a.shape - b.shape).abs() <= 1e-9 * a.shape);
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_std(
        rows in proptest::collection::vec(proptest::collection::vec(-1e3f64..1e3, 4), 2..30)
    ) {
        let z = fit_standardizer(&rows).transform_rows(&rows);
        let m = fit_standardizer(&z);
        for (mu, s) in m.mean.iter().zip(&m.std) {
            prop_assert!(mu.abs() < 1e-9);
            prop_assert!(s.abs() < 1e-9 || (s - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn cosine_is_scale_invariant(a in proptest::collection::vec(-10f64..10.0, 1..10), c in 0.01f64..100.0) {
        prop_assume!(a.iter().any(|&x| x != 0.0));
        let b: Vec<f64> = a.iter().map(|&x| x * c).collect();
        prop_assert!((cosine_similarity(&a, &b).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lowering_tau_never_removes_edges(
        rows in proptest::collection::vec(proptest::collection::vec(-5f64..5.0, 3), 2..12),
        t1 in -1f64..1.0,
        t2 in -1f64..1.0,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let fvs: Vec<FeatureVector> = rows.iter().enumerate().map(|(i, r)| FeatureVector {
            doc_id: format!("d{i}"),
            label: if i % 2 == 0 { Label::Poetry } else { Label::Prose },
            values: r.clone(),
        }).collect();
        let high = build_graph(&fvs, &[0, 1, 2], hi).unwrap();
        let low = build_graph(&fvs, &[0, 1, 2], lo).unwrap();
        for e in &high.edges {
            prop_assert!(low.edges.iter().any(|f| f.source == e.source && f.target == e.target));
        }
    }

    #[test]
    fn graph_is_invariant_to_document_order(
        rows in proptest::collection::vec(proptest::collection::vec(-5f64..5.0, 3), 2..10),
    ) {
        let fvs: Vec<FeatureVector> = rows.iter().enumerate().map(|(i, r)| FeatureVector {
            doc_id: format!("d{i}"),
            label: Label::Prose,
            values: r.clone(),
        }).collect();
        let mut reversed = fvs.clone();
        reversed.reverse();
        let edge_ids = |fv: &[FeatureVector]| {
            let g = build_graph(fv, &[0, 1, 2], 0.3).unwrap();
            let mut ids: Vec<(String, String)> = g.edges.iter().map(|e| {
                let (a, b) = (g.nodes[e.source].id.clone(), g.nodes[e.target].id.clone());
                if a < b { (a, b) } else { (b, a) }
            }).collect();
            ids.sort();
            ids
        };
        prop_assert_eq!(edge_ids(&fvs), edge_ids(&reversed));
    }
}
