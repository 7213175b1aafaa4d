//! Documents, corpora on disk and the shuffled null model.
//!
//! A corpus directory holds `poetry/*.txt` and `prose/*.txt`. An optional
//! `manifest.json` (array of `{id, label, path}`, paths relative to the corpus
//! directory) takes precedence over the directory scan.

pub mod stats;
pub mod synth;

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timeline::{detokenize, tokenize, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Poetry,
    Prose,
    Unlabeled,
}

impl Label {
    pub const CLASSES: [Label; 2] = [Label::Poetry, Label::Prose];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Poetry => "poetry",
            Label::Prose => "prose",
            Label::Unlabeled => "unlabeled",
        }
    }

    /// 0 for poetry, 1 for prose.
    pub fn class_index(self) -> Option<usize> {
        match self {
            Label::Poetry => Some(0),
            Label::Prose => Some(1),
            Label::Unlabeled => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poetry" => Ok(Label::Poetry),
            "prose" => Ok(Label::Prose),
            "unlabeled" | "" => Ok(Label::Unlabeled),
            other => Err(Error::Config(format!("unknown label `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub label: Label,
    pub text: String,
    pub source_path: Option<String>,
}

/// Replaces every run of two or more `\n` with a single `\n`.
pub fn collapse_line_breaks(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut prev_break = false;
    for c in raw.chars() {
        if c == '\n' {
            if !prev_break {
                out.push(c);
            }
            prev_break = true;
        } else {
            out.push(c);
            prev_break = false;
        }
    }
    out
}

pub fn load_document(raw_text: &str, id: &str, label: Label) -> Result<Document> {
    let text = collapse_line_breaks(raw_text);
    if text.is_empty() {
        return Err(Error::EmptyDocument(id.to_string()));
    }
    Ok(Document {
        id: id.to_string(),
        label,
        text,
        source_path: None,
    })
}

/// Permutes word and number tokens with a seeded Fisher–Yates shuffle while
/// punctuation and line breaks keep their token indices.
pub fn shuffle_document(doc: &Document, seed: u64) -> Document {
    let tokens = tokenize(&doc.text);
    let slots: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t.kind, TokenKind::Word | TokenKind::Number))
        .map(|(i, _)| i)
        .collect();
    if slots.is_empty() {
        return doc.clone();
    }
    let mut movable: Vec<usize> = slots.clone();
    movable.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let mut order: Vec<usize> = (0..tokens.len()).collect();
    for (&slot, &src) in slots.iter().zip(&movable) {
        order[slot] = src;
    }
    let text = detokenize(order.iter().map(|&i| (tokens[i].kind, tokens[i].surface.as_str())));
    Document {
        text,
        ..doc.clone()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub label: Label,
    pub path: String,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::new();
        for d in &documents {
            if !seen.insert(d.id.as_str()) {
                return Err(Error::Config(format!("duplicate document id `{}`", d.id)));
            }
        }
        Ok(Corpus { documents })
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.documents.iter().filter(|d| d.label == label).count()
    }

    /// Reads a corpus directory; see the module docs for the layout.
    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "corpus directory not found"),
            ));
        }
        let manifest_path = dir.join("manifest.json");
        let entries: Vec<ManifestEntry> = if manifest_path.is_file() {
            let raw = std::fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
            serde_json::from_str(&raw).map_err(|e| Error::format(manifest_path.display().to_string(), e))?
        } else {
            scan_label_dirs(dir)?
        };
        let mut docs = Vec::with_capacity(entries.len());
        for entry in entries {
            let path = dir.join(&entry.path);
            let raw = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let mut doc = load_document(&raw, &entry.id, entry.label)?;
            doc.source_path = Some(entry.path);
            docs.push(doc);
        }
        if docs.is_empty() {
            return Err(Error::Config(format!("no documents found in {}", dir.display())));
        }
        Corpus::new(docs)
    }

    /// Writes `<label>/<id>.txt` files plus `manifest.json`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        let mut manifest = Vec::with_capacity(self.len());
        for doc in &self.documents {
            let rel = PathBuf::from(doc.label.as_str()).join(format!("{}.txt", doc.id));
            let path = dir.join(&rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
            std::fs::write(&path, &doc.text).map_err(|e| Error::io(&path, e))?;
            manifest.push(ManifestEntry {
                id: doc.id.clone(),
                label: doc.label,
                path: rel.to_string_lossy().replace('\\', "/"),
            });
        }
        let manifest_path = dir.join("manifest.json");
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(&manifest_path, json + "\n").map_err(|e| Error::io(&manifest_path, e))
    }

    /// Shuffles every document, seeding document `i` with `seed + i`.
    pub fn shuffled(&self, seed: u64) -> Corpus {
        Corpus {
            documents: self
                .documents
                .iter()
                .enumerate()
                .map(|(i, d)| shuffle_document(d, seed.wrapping_add(i as u64)))
                .collect(),
        }
    }
}

fn scan_label_dirs(dir: &Path) -> Result<Vec<ManifestEntry>> {
    let mut entries = Vec::new();
    for label in Label::CLASSES {
        let sub = dir.join(label.as_str());
        if !sub.is_dir() {
            continue;
        }
        let mut files: Vec<PathBuf> = std::fs::read_dir(&sub)
            .map_err(|e| Error::io(&sub, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        files.sort();
        for f in files {
            let stem = f.file_stem().unwrap_or_default().to_string_lossy().to_string();
            entries.push(ManifestEntry {
                id: stem,
                label,
                path: format!("{}/{}", label.as_str(), f.file_name().unwrap_or_default().to_string_lossy()),
            });
        }
    }
    // Same stem in both class folders: qualify ids with the label.
    let mut seen = HashSet::new();
    let clash = entries.iter().any(|e| !seen.insert(e.id.clone()));
    if clash {
        for e in &mut entries {
            e.id = format!("{}-{}", e.label, e.id);
        }
    }
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collapses_runs() {
        assert_eq!(load_document("a\n\n\nb", "d", Label::Poetry).unwrap().text, "a\nb");
        assert_eq!(load_document("a\nb", "d", Label::Poetry).unwrap().text, "a\nb");
        assert_eq!(load_document("x\n\ny\n\n\nz", "d", Label::Prose).unwrap().text, "x\ny\nz");
        assert_eq!(collapse_line_breaks("\n\n"), "\n");
    }

    #[test]
    fn empty_document_is_rejected() {
        assert!(matches!(load_document("", "d", Label::Prose), Err(Error::EmptyDocument(_))));
    }

    #[test]
    fn shuffle_keeps_punctuation_indices() {
        let doc = load_document("a b. c d.", "d", Label::Prose).unwrap();
        for seed in 0..20 {
            let out = tokenize(&shuffle_document(&doc, seed).text);
            assert_eq!(out[2].surface, ".");
            assert_eq!(out[5].surface, ".");
            let mut words: Vec<_> = out.iter().filter(|t| t.kind == TokenKind::Word).map(|t| t.surface.clone()).collect();
            words.sort();
            assert_eq!(words, ["a", "b", "c", "d"]);
        }
    }

    #[test]
    fn shuffle_without_words_is_identity() {
        let doc = load_document("...", "d", Label::Prose).unwrap();
        assert_eq!(shuffle_document(&doc, 3).text, "...");
    }

    #[test]
    fn shuffle_is_seed_deterministic() {
        let doc = load_document("a b c.", "d", Label::Poetry).unwrap();
        assert_eq!(shuffle_document(&doc, 1), shuffle_document(&doc, 1));
        let distinct: HashSet<String> = (0..30).map(|s| shuffle_document(&doc, s).text).collect();
        assert!(distinct.len() > 1);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let d = load_document("x", "same", Label::Poetry).unwrap();
        assert!(Corpus::new(vec![d.clone(), d]).is_err());
    }

    #[test]
    fn label_parsing() {
        assert_eq!("poetry".parse::<Label>().unwrap(), Label::Poetry);
        assert!("verse".parse::<Label>().is_err());
    }
}
