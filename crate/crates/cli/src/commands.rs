//! Command implementations; each writes its artifacts under the output directory.

use std::fs;
use std::path::{Path, PathBuf};

use prosodex::corpus::stats::corpus_stats;
use prosodex::corpus::synth::generate_synthetic_corpus;
use prosodex::corpus::{load_document, Corpus, Label};
use prosodex::features::{document_features, feature_names, FeatureVector};
use prosodex::learning::{read_feature_csv, sweep_nf, write_feature_csv, Dataset};
use prosodex::phonetics::PronDict;
use prosodex::simgraph::{build_graph, export_graph, layout_fr, rank_for_graph, ExportFormat, LayoutParams};
use prosodex::timeline::{build_timeline, find_rhyme_signals, tokenize, TimelineDump};
use prosodex::windowing::{detect_windows, WindowDump};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::Config;
use crate::{
    ClassifyArgs, CliError, Command, CorpusArg, ExtractArgs, GraphArgs, ShuffleArgs, SynthArgs, TopK,
};

pub fn dispatch(command: &Command, cfg: Config) -> Result<(), CliError> {
    match command {
        Command::Stats(a) => stats(a, &cfg),
        Command::Extract(a) => extract(a, cfg),
        Command::Classify(a) => classify(a, cfg),
        Command::Shuffle(a) => shuffle(a, &cfg),
        Command::Graph(a) => graph(a, cfg),
        Command::Synth(a) => synth(a, &cfg),
    }
}

fn load_lexicon(cfg: &Config) -> Result<PronDict, CliError> {
    match &cfg.lexicon_path {
        None => Ok(PronDict::fixture()),
        Some(p) if !p.is_file() => Err(CliError::Data(format!("lexicon not found: {}", p.display()))),
        Some(p) => {
            let dict = PronDict::from_path(p).map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
            if dict.duplicate_warnings() > 0 {
                log::warn!("{}: {} duplicate entries (last one kept)", p.display(), dict.duplicate_warnings());
            }
            Ok(dict)
        }
    }
}

fn corpus_path(flag: &Option<PathBuf>, cfg: &Config) -> Result<PathBuf, CliError> {
    flag.clone()
        .or_else(|| cfg.corpus_dir.clone())
        .ok_or_else(|| CliError::Usage("no corpus directory given (use --corpus or corpus_dir)".into()))
}

fn load_corpus(dir: &Path) -> Result<Corpus, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Data(format!("corpus directory not found: {}", dir.display())));
    }
    Ok(Corpus::load_dir(dir)?)
}

fn ensure_parent(path: &Path) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Data(format!("{}: {e}", parent.display())))?;
    }
    Ok(())
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    ensure_parent(path)?;
    fs::write(path, contents).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("artifact serializes") + "\n"
}

fn stats(args: &CorpusArg, cfg: &Config) -> Result<(), CliError> {
    let dict = load_lexicon(cfg)?;
    let corpus = load_corpus(&corpus_path(&args.corpus, cfg)?)?;
    let stats = corpus_stats(&corpus, &dict, &cfg.rhythm_punct())?;
    let csv_path = cfg.out_dir.join("stats.csv");
    let mut buf = Vec::new();
    stats.write_csv(&mut buf)?;
    write_file(&csv_path, buf)?;
    let json_path = cfg.out_dir.join("stats.json");
    write_file(&json_path, stats.histogram_json() + "\n")?;
    println!("wrote {} and {} ({} documents)", csv_path.display(), json_path.display(), corpus.len());
    Ok(())
}

#[derive(Serialize)]
struct GridWindows {
    l0: usize,
    delta: f64,
    windows: Vec<WindowDump>,
}

fn extract(args: &ExtractArgs, mut cfg: Config) -> Result<(), CliError> {
    if !args.l0.is_empty() {
        cfg.l0 = args.l0.clone();
    }
    if !args.delta.is_empty() {
        cfg.delta = args.delta.clone();
    }
    let grid = cfg.grid()?;
    let durations = cfg.durations()?;
    let punct = cfg.rhythm_punct();
    let dict = load_lexicon(&cfg)?;
    let corpus = match &args.input {
        Some(path) => {
            let raw = fs::read_to_string(path)
                .map_err(|e| CliError::Data(format!("cannot read input {}: {e}", path.display())))?;
            let id = path.file_stem().unwrap_or_default().to_string_lossy().to_string();
            Corpus::new(vec![load_document(&raw, &id, Label::Unlabeled)?])?
        }
        None => load_corpus(&corpus_path(&args.corpus, &cfg)?)?,
    };

    let results: Vec<(FeatureVector<f64>, Option<String>, Option<String>)> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            let tokens = tokenize(&doc.text);
            let timeline = build_timeline(&tokens, &dict, &durations);
            let signals = find_rhyme_signals(&tokens, &timeline, &dict, &punct);
            let fv = document_features(&doc.id, doc.label, &signals, &grid);
            let tl = args
                .dump_timeline
                .then(|| to_json(&TimelineDump::new(&tokens, &timeline, &signals)));
            let wd = args.dump_windows.then(|| {
                let per_point: Vec<GridWindows> = grid
                    .iter()
                    .map(|p| GridWindows {
                        l0: p.l0,
                        delta: p.delta,
                        windows: detect_windows(&signals, p).windows.iter().map(WindowDump::from).collect(),
                    })
                    .collect();
                to_json(&per_point)
            });
            (fv, tl, wd)
        })
        .collect();

    let out = args.out.clone().unwrap_or_else(|| cfg.out_dir.join("features.csv"));
    let names = feature_names(&grid);
    let vectors: Vec<FeatureVector<f64>> = results.iter().map(|r| r.0.clone()).collect();
    let mut buf = Vec::new();
    write_feature_csv(&mut buf, &names, &vectors)?;
    write_file(&out, buf)?;
    for (fv, tl, wd) in &results {
        if let Some(tl) = tl {
            write_file(&cfg.out_dir.join("timelines").join(format!("{}.json", fv.doc_id)), tl)?;
        }
        if let Some(wd) = wd {
            write_file(&cfg.out_dir.join("windows").join(format!("{}.json", fv.doc_id)), wd)?;
        }
    }
    println!("wrote {} ({} documents, {} features)", out.display(), vectors.len(), names.len());
    Ok(())
}

fn read_features(path: &Path) -> Result<(Vec<String>, Vec<FeatureVector<f64>>), CliError> {
    let file = fs::File::open(path)
        .map_err(|e| CliError::Data(format!("cannot open features {}: {e}", path.display())))?;
    read_feature_csv(file).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn classify(args: &ClassifyArgs, mut cfg: Config) -> Result<(), CliError> {
    if let Some(n) = args.nf_min {
        cfg.nf_min = n;
    }
    if let Some(n) = args.nf_max {
        cfg.nf_max = n;
    }
    let path = args.features.clone().unwrap_or_else(|| cfg.out_dir.join("features.csv"));
    let (names, vectors) = read_features(&path)?;
    let dataset = Dataset::from_features(&vectors, names)?;
    dataset.require_both_classes()?;
    let mut nf = cfg.nf_values()?;
    if cfg.nf_min > dataset.n_features() {
        return Err(CliError::Usage(format!(
            "nf_min = {} exceeds the {} available features",
            cfg.nf_min,
            dataset.n_features()
        )));
    }
    nf.retain(|&n| n <= dataset.n_features());
    let report = sweep_nf(&dataset, &cfg.classifiers, &nf, cfg.nmi_bins)?;
    let csv_path = cfg.out_dir.join("eval_report.csv");
    let mut buf = Vec::new();
    report.write_csv(&mut buf)?;
    write_file(&csv_path, buf)?;
    let json_path = cfg.out_dir.join("eval_summary.json");
    write_file(&json_path, report.summary_json())?;
    for best in report.best() {
        println!("{:<4} n_f={:<3} accuracy={:.2}", best.classifier, best.n_f, best.accuracy);
    }
    println!("wrote {} and {}", csv_path.display(), json_path.display());
    Ok(())
}

fn shuffle(args: &ShuffleArgs, cfg: &Config) -> Result<(), CliError> {
    let corpus = load_corpus(&corpus_path(&args.corpus, cfg)?)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.out_dir.join("shuffled"));
    corpus.shuffled(cfg.seed).write_dir(&out)?;
    println!("wrote {} ({} documents, seed {})", out.display(), corpus.len(), cfg.seed);
    Ok(())
}

fn graph(args: &GraphArgs, mut cfg: Config) -> Result<(), CliError> {
    if let Some(tau) = args.tau {
        cfg.tau = tau;
        cfg.validate()?;
    }
    let out = args.out.clone().unwrap_or_else(|| cfg.out_dir.join("graph.svg"));
    let format = ExportFormat::from_path(&out).map_err(|e| CliError::Usage(e.to_string()))?;
    let path = args.features.clone().unwrap_or_else(|| cfg.out_dir.join("features.csv"));
    let (names, vectors) = read_features(&path)?;
    let selected: Vec<usize> = match args.top_k {
        TopK::All => (0..names.len()).collect(),
        TopK::Count(k) if k > names.len() => {
            return Err(CliError::Usage(format!("--top-k {k} exceeds the {} features", names.len())));
        }
        TopK::Count(k) => rank_for_graph(&vectors, cfg.nmi_bins)?.top(k).to_vec(),
    };
    let graph = build_graph(&vectors, &selected, cfg.tau)?;
    let params = LayoutParams {
        iterations: cfg.layout_iterations,
        seed: cfg.seed,
        ..LayoutParams::default()
    };
    let layout = layout_fr(&graph, &params);
    write_file(&out, export_graph(&graph, &layout, format))?;
    println!(
        "wrote {} ({} nodes, {} edges, tau {})",
        out.display(),
        graph.nodes.len(),
        graph.edges.len(),
        cfg.tau
    );
    Ok(())
}

fn synth(args: &SynthArgs, cfg: &Config) -> Result<(), CliError> {
    let dict = load_lexicon(cfg)?;
    let synth_cfg = cfg.synth.clone().unwrap_or_default();
    let n = args.n.unwrap_or(cfg.synth_per_class);
    let corpus = generate_synthetic_corpus(n, cfg.seed, &dict, &synth_cfg)?;
    let out = args.out.clone().unwrap_or_else(|| cfg.out_dir.join("corpus"));
    corpus.write_dir(&out)?;
    println!("wrote {} ({n} poetry + {n} prose documents, seed {})", out.display(), cfg.seed);
    Ok(())
}

