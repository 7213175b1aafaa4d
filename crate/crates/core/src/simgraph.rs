//! Document similarity network, Fruchterman–Reingold layout and figure export.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::features::{fit_standardizer, FeatureVector};
use crate::learning::{rank_features, SelectionRanking};
use crate::scalar::Real;

/// Cosine similarity; 0 when either vector is all zeros.
pub fn cosine_similarity<T: Real>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::Domain(format!(
            "cosine similarity of vectors with lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (mut ab, mut aa, mut bb) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in a.iter().zip(b) {
        ab += x * y;
        aa += x * x;
        bb += y * y;
    }
    if aa == T::zero() || bb == T::zero() {
        return Ok(T::zero());
    }
    // Rounding can push |cos| a hair past 1.
    Ok((ab / (aa.sqrt() * bb.sqrt())).max(-T::one()).min(T::one()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub label: Label,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge<T> {
    pub source: usize,
    pub target: usize,
    pub weight: T,
}

/// Undirected graph whose edges all have weight ≥ `tau`; `source < target`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph<T> {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge<T>>,
    pub tau: T,
}

impl<T: Real> SimilarityGraph<T> {
    /// Fraction of possible pairs between classes `a` and `b` that are edges.
    pub fn edge_density(&self, a: Label, b: Label) -> f64 {
        let na = self.nodes.iter().filter(|n| n.label == a).count();
        let nb = self.nodes.iter().filter(|n| n.label == b).count();
        let possible = if a == b { na * na.saturating_sub(1) / 2 } else { na * nb };
        if possible == 0 {
            return 0.0;
        }
        let present = self
            .edges
            .iter()
            .filter(|e| {
                let (la, lb) = (self.nodes[e.source].label, self.nodes[e.target].label);
                (la == a && lb == b) || (la == b && lb == a)
            })
            .count();
        present as f64 / possible as f64
    }
}

/// Standardizes every column over all documents, then links pairs whose cosine
/// similarity on the `selected` columns is at least `tau`.
pub fn build_graph<T: Real>(features: &[FeatureVector<T>], selected: &[usize], tau: T) -> Result<SimilarityGraph<T>> {
    if features.len() < 2 {
        return Err(Error::Domain(format!(
            "a similarity graph needs at least 2 documents, got {}",
            features.len()
        )));
    }
    let width = features[0].values.len();
    if let Some(&bad) = selected.iter().find(|&&c| c >= width) {
        return Err(Error::Config(format!("feature index {bad} out of range (have {width})")));
    }
    let rows: Vec<&[T]> = features.iter().map(|f| f.values.as_slice()).collect();
    let model = fit_standardizer(&rows);
    let sub: Vec<Vec<T>> = rows
        .iter()
        .map(|r| {
            let z = model.transform_row(r);
            selected.iter().map(|&c| z[c]).collect()
        })
        .collect();
    let n = sub.len();
    let edges = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Vec<Edge<T>>> {
            let mut out = Vec::new();
            for j in i + 1..n {
                let weight = cosine_similarity(&sub[i], &sub[j])?;
                if weight >= tau {
                    out.push(Edge { source: i, target: j, weight });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok(SimilarityGraph {
        nodes: features
            .iter()
            .map(|f| Node {
                id: f.doc_id.clone(),
                label: f.label,
            })
            .collect(),
        edges,
        tau,
    })
}

/// NMI ranking of the corpus-standardized features against the class labels.
pub fn rank_for_graph<T: Real>(features: &[FeatureVector<T>], bins: usize) -> Result<SelectionRanking> {
    let labels = features
        .iter()
        .map(|f| {
            f.label
                .class_index()
                .ok_or_else(|| Error::Config(format!("document `{}` has no class label", f.doc_id)))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<&[T]> = features.iter().map(|f| f.values.as_slice()).collect();
    let z = fit_standardizer(&rows).transform_rows(&rows);
    rank_features(&z, &labels, bins)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayoutParams {
    pub iterations: usize,
    pub width: f64,
    pub height: f64,
    pub seed: u64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        LayoutParams {
            iterations: 500,
            width: 1000.0,
            height: 1000.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layout<T> {
    pub positions: Vec<(T, T)>,
    pub width: T,
    pub height: T,
}

/// Fruchterman–Reingold with attraction scaled by (non-negative) edge weight.
pub fn layout_fr<T: Real>(graph: &SimilarityGraph<T>, params: &LayoutParams) -> Layout<T> {
    let n = graph.nodes.len();
    let (w, h) = (T::lit(params.width), T::lit(params.height));
    let two = T::lit(2.0);
    if n <= 1 {
        return Layout {
            positions: vec![(w / two, h / two); n],
            width: w,
            height: h,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut pos: Vec<(T, T)> = (0..n)
        .map(|_| (T::lit(rng.random::<f64>()) * w, T::lit(rng.random::<f64>()) * h))
        .collect();
    let area = w * h;
    let k = (area / T::from_count(n)).sqrt();
    let t0 = T::lit(0.1) * area.sqrt();
    let min_d = T::lit(1e-9);
    let mut disp = vec![(T::zero(), T::zero()); n];
    for iter in 0..params.iterations {
        let temp = t0 * (T::one() - T::from_count(iter) / T::from_count(params.iterations));
        disp.fill((T::zero(), T::zero()));
        for i in 0..n {
            for j in i + 1..n {
                let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
                let d = (dx * dx + dy * dy).sqrt().max(min_d);
                let f = k * k / d;
                let (fx, fy) = (dx / d * f, dy / d * f);
                disp[i].0 += fx;
                disp[i].1 += fy;
                disp[j].0 -= fx;
                disp[j].1 -= fy;
            }
        }
        for e in &graph.edges {
            let (i, j) = (e.source, e.target);
            let (dx, dy) = (pos[i].0 - pos[j].0, pos[i].1 - pos[j].1);
            let d = (dx * dx + dy * dy).sqrt().max(min_d);
            let f = d * d / k * e.weight.max(T::zero());
            let (fx, fy) = (dx / d * f, dy / d * f);
            disp[i].0 -= fx;
            disp[i].1 -= fy;
            disp[j].0 += fx;
            disp[j].1 += fy;
        }
        for (p, &(dx, dy)) in pos.iter_mut().zip(&disp) {
            let len = (dx * dx + dy * dy).sqrt();
            if len > T::zero() {
                let step = len.min(temp) / len;
                p.0 = (p.0 + dx * step).max(T::zero()).min(w);
                p.1 = (p.1 + dy * step).max(T::zero()).min(h);
            }
        }
    }
    Layout {
        positions: pos,
        width: w,
        height: h,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Dot,
    Svg,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(ExportFormat::Json),
            "dot" | "gv" => Ok(ExportFormat::Dot),
            "svg" => Ok(ExportFormat::Svg),
            other => Err(Error::Config(format!("unknown graph format `{other}`"))),
        }
    }
}

impl ExportFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        path.extension()
            .and_then(|e| e.to_str())
            .ok_or_else(|| Error::Config(format!("{} has no file extension", path.display())))?
            .parse()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonNode {
    id: String,
    label: Label,
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonEdge {
    source: String,
    target: String,
    weight: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonGraph {
    tau: f64,
    width: f64,
    height: f64,
    nodes: Vec<JsonNode>,
    edges: Vec<JsonEdge>,
}

fn node_color(label: Label) -> &'static str {
    match label {
        Label::Poetry => "#1f77b4",
        Label::Prose => "#ff7f0e",
        Label::Unlabeled => "#7f7f7f",
    }
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn export_graph<T: Real>(graph: &SimilarityGraph<T>, layout: &Layout<T>, format: ExportFormat) -> String {
    match format {
        ExportFormat::Json => export_json(graph, layout),
        ExportFormat::Dot => export_dot(graph, layout),
        ExportFormat::Svg => export_svg(graph, layout),
    }
}

fn export_json<T: Real>(graph: &SimilarityGraph<T>, layout: &Layout<T>) -> String {
    let doc = JsonGraph {
        tau: graph.tau.as_f64(),
        width: layout.width.as_f64(),
        height: layout.height.as_f64(),
        nodes: graph
            .nodes
            .iter()
            .zip(&layout.positions)
            .map(|(n, &(x, y))| JsonNode {
                id: n.id.clone(),
                label: n.label,
                x: x.as_f64(),
                y: y.as_f64(),
            })
            .collect(),
        edges: graph
            .edges
            .iter()
            .map(|e| JsonEdge {
                source: graph.nodes[e.source].id.clone(),
                target: graph.nodes[e.target].id.clone(),
                weight: e.weight.as_f64(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("graph serializes") + "\n"
}

/// Parses the JSON export back into a graph and its layout.
pub fn parse_graph_json<T: Real>(text: &str) -> Result<(SimilarityGraph<T>, Layout<T>)> {
    let doc: JsonGraph = serde_json::from_str(text).map_err(|e| Error::format("graph json", e))?;
    let index: HashMap<&str, usize> = doc.nodes.iter().enumerate().map(|(i, n)| (n.id.as_str(), i)).collect();
    let lookup = |id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::format("graph json", format!("edge references unknown node `{id}`")))
    };
    let edges = doc
        .edges
        .iter()
        .map(|e| {
            Ok(Edge {
                source: lookup(&e.source)?,
                target: lookup(&e.target)?,
                weight: T::lit(e.weight),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let graph = SimilarityGraph {
        nodes: doc
            .nodes
            .iter()
            .map(|n| Node {
                id: n.id.clone(),
                label: n.label,
            })
            .collect(),
        edges,
        tau: T::lit(doc.tau),
    };
    let layout = Layout {
        positions: doc.nodes.iter().map(|n| (T::lit(n.x), T::lit(n.y))).collect(),
        width: T::lit(doc.width),
        height: T::lit(doc.height),
    };
    Ok((graph, layout))
}

fn export_dot<T: Real>(graph: &SimilarityGraph<T>, layout: &Layout<T>) -> String {
    let mut out = String::from("graph similarity {\n  node [shape=circle, style=filled, label=\"\"];\n");
    for (n, &(x, y)) in graph.nodes.iter().zip(&layout.positions) {
        let _ = writeln!(
            out,
            "  \"{}\" [class=\"{}\", fillcolor=\"{}\", pos=\"{:.2},{:.2}\"];",
            n.id.replace('"', "\\\""),
            n.label,
            node_color(n.label),
            x.as_f64(),
            y.as_f64()
        );
    }
    for e in &graph.edges {
        let _ = writeln!(
            out,
            "  \"{}\" -- \"{}\" [weight={:.6}];",
            graph.nodes[e.source].id.replace('"', "\\\""),
            graph.nodes[e.target].id.replace('"', "\\\""),
            e.weight.as_f64()
        );
    }
    out.push_str("}\n");
    out
}

fn export_svg<T: Real>(graph: &SimilarityGraph<T>, layout: &Layout<T>) -> String {
    const MARGIN: f64 = 20.0;
    const RADIUS: f64 = 6.0;
    let (w, h) = (layout.width.as_f64() + 2.0 * MARGIN, layout.height.as_f64() + 2.0 * MARGIN);
    let at = |i: usize| {
        let (x, y) = layout.positions[i];
        (x.as_f64() + MARGIN, y.as_f64() + MARGIN)
    };
    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">"
    );
    let _ = writeln!(out, "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>");
    out.push_str("<g stroke=\"#999999\" stroke-opacity=\"0.4\">\n");
    for e in &graph.edges {
        let ((x1, y1), (x2, y2)) = (at(e.source), at(e.target));
        let _ = writeln!(
            out,
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke-width=\"{:.2}\"/>",
            e.weight.as_f64().max(0.0) * 1.5
        );
    }
    out.push_str("</g>\n<g stroke=\"white\" stroke-width=\"1\">\n");
    for (i, n) in graph.nodes.iter().enumerate() {
        let (x, y) = at(i);
        let _ = writeln!(
            out,
            "<circle class=\"{}\" cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{RADIUS}\" fill=\"{}\"><title>{}</title></circle>",
            n.label,
            node_color(n.label),
            escape_xml(&n.id)
        );
    }
    out.push_str("</g>\n</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fv(id: &str, label: Label, values: Vec<f64>) -> FeatureVector<f64> {
        FeatureVector {
            doc_id: id.into(),
            label,
            values,
        }
    }

    #[test]
    fn cosine_examples() {
        assert!((cosine_similarity(&[3.0_f64, 4.0], &[3.0, 4.0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[1.0_f64, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let c = cosine_similarity(&[1.0_f64, 1.0], &[1.0, 0.0]).unwrap();
        assert!((c - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine_similarity(&[0.0_f64, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(cosine_similarity(&[1.0_f64], &[1.0, 2.0]), Err(Error::Domain(_))));
    }

    fn three_docs() -> Vec<FeatureVector<f64>> {
        vec![
            fv("a", Label::Poetry, vec![1.0, 2.0, 0.0]),
            fv("b", Label::Poetry, vec![1.0, 2.0, 0.0]),
            fv("c", Label::Prose, vec![5.0, -1.0, 0.0]),
        ]
    }

    #[test]
    fn identical_documents_keep_their_edge() {
        let g = build_graph(&three_docs(), &[0, 1, 2], 1.0).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!((g.edges[0].source, g.edges[0].target), (0, 1));
        assert!((g.edges[0].weight - 1.0).abs() < 1e-12);
        let none = build_graph(&three_docs(), &[0, 1, 2], 1.0 + 1e-9).unwrap();
        assert!(none.edges.is_empty());
    }

    #[test]
    fn single_node_is_centered() {
        let g = SimilarityGraph::<f64> {
            nodes: vec![Node { id: "x".into(), label: Label::Prose }],
            edges: vec![],
            tau: 0.5,
        };
        let l = layout_fr(&g, &LayoutParams::default());
        assert_eq!(l.positions, vec![(500.0, 500.0)]);
    }

    #[test]
    fn two_linked_nodes_settle_near_ideal_distance() {
        let g = SimilarityGraph::<f64> {
            nodes: vec![
                Node { id: "a".into(), label: Label::Poetry },
                Node { id: "b".into(), label: Label::Prose },
            ],
            edges: vec![Edge { source: 0, target: 1, weight: 1.0 }],
            tau: 0.5,
        };
        let p = LayoutParams::default();
        let k = (p.width * p.height / 2.0).sqrt();
        for seed in 0..10 {
            let l = layout_fr(&g, &LayoutParams { seed, ..p });
            let (a, b) = (l.positions[0], l.positions[1]);
            let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            assert!(d >= 0.5 * k && d <= 2.0 * k, "seed {seed}: d={d}, k={k}");
            assert_eq!(l, layout_fr(&g, &LayoutParams { seed, ..p }));
        }
    }

    #[test]
    fn json_round_trip() {
        let g = build_graph(&three_docs(), &[0, 1], -1.0).unwrap();
        let l = layout_fr(&g, &LayoutParams::default());
        let text = export_graph(&g, &l, ExportFormat::Json);
        let (g2, l2) = parse_graph_json::<f64>(&text).unwrap();
        assert_eq!(g2, g);
        assert_eq!(l2, l);
    }

    #[test]
    fn svg_draws_edges_before_nodes() {
        let g = build_graph(&three_docs(), &[0, 1], 0.5).unwrap();
        let l = layout_fr(&g, &LayoutParams::default());
        let svg = export_graph(&g, &l, ExportFormat::Svg);
        assert!(svg.find("<line").unwrap() < svg.find("<circle").unwrap());
        assert_eq!(svg.matches("<circle").count(), 3);
        let empty = build_graph(&three_docs(), &[0, 1], 2.0).unwrap();
        let svg = export_graph(&empty, &l, ExportFormat::Svg);
        assert!(!svg.contains("<line"));
    }

    #[test]
    fn unknown_format_is_config_error() {
        assert!(matches!("png".parse::<ExportFormat>(), Err(Error::Config(_))));
        assert_eq!(ExportFormat::from_path(Path::new("fig.DOT")).unwrap(), ExportFormat::Dot);
    }
}
