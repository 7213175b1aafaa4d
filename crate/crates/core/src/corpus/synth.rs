//! Seeded generator of poetry-like and prose-like documents.
//!
//! Parameters live in `data/synth.toml`; [`SynthConfig::default`] loads that
//! file and callers may deserialize their own copy.

use std::collections::{BTreeMap, HashSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{load_document, Corpus, Document, Label};
use crate::error::{Error, Result};
use crate::phonetics::{PronDict, RhymeKey};
use crate::timeline::{signals_for_text, DurationTable, RhythmPunctSet};

pub const DEFAULT_SYNTH_TOML: &str = include_str!("../../data/synth.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoetryParams {
    pub words_per_line: [usize; 2],
    pub lines_per_stanza: usize,
    pub lines_per_sentence: [usize; 2],
    pub schemes: Vec<String>,
    pub line_comma_probability: f64,
    pub sentence_endings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProseParams {
    pub words_per_sentence: [usize; 2],
    pub sentences_per_paragraph: [usize; 2],
    pub comma_probability: f64,
    pub rhyme_leak: f64,
    pub anchor_classes: usize,
    pub sentence_endings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub min_phones: usize,
    pub max_phones: usize,
    pub min_class_size: usize,
    pub min_lexicon_words: usize,
    pub min_rhyme_classes: usize,
    pub min_recurring_classes: usize,
    pub poetry: PoetryParams,
    pub prose: ProseParams,
}

impl Default for SynthConfig {
    fn default() -> Self {
        toml::from_str(DEFAULT_SYNTH_TOML).expect("bundled synth.toml is valid")
    }
}

fn check_range(name: &str, r: [usize; 2]) -> Result<()> {
    if r[0] == 0 || r[0] > r[1] {
        return Err(Error::Config(format!("{name} must be a non-empty range, got {r:?}")));
    }
    Ok(())
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        check_range("poetry.words_per_line", self.poetry.words_per_line)?;
        check_range("poetry.lines_per_sentence", self.poetry.lines_per_sentence)?;
        check_range("prose.words_per_sentence", self.prose.words_per_sentence)?;
        check_range("prose.sentences_per_paragraph", self.prose.sentences_per_paragraph)?;
        if self.min_phones == 0 || self.min_phones > self.max_phones {
            return Err(Error::Config("min_phones must be in 1..=max_phones".into()));
        }
        if self.poetry.lines_per_sentence[1] > self.poetry.lines_per_stanza {
            return Err(Error::Config(
                "a sentence may not span more lines than a stanza".into(),
            ));
        }
        for scheme in &self.poetry.schemes {
            if scheme.len() != self.poetry.lines_per_stanza
                || !scheme.chars().all(|c| c.is_ascii_uppercase())
            {
                return Err(Error::Config(format!("bad rhyme scheme `{scheme}`")));
            }
        }
        if self.poetry.schemes.is_empty()
            || self.poetry.sentence_endings.is_empty()
            || self.prose.sentence_endings.is_empty()
        {
            return Err(Error::Config("schemes and sentence endings must be non-empty".into()));
        }
        let punct = RhythmPunctSet::default();
        let all_rhythmic = self
            .poetry
            .sentence_endings
            .iter()
            .chain(&self.prose.sentence_endings)
            .all(|e| punct.symbols.contains(e));
        if !all_rhythmic {
            return Err(Error::Config("sentence endings must be rhythm punctuation".into()));
        }
        for p in [
            self.poetry.line_comma_probability,
            self.prose.comma_probability,
            self.prose.rhyme_leak,
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("probability out of range: {p}")));
            }
        }
        Ok(())
    }
}

/// Lexicon words grouped for generation.
struct Vocabulary<'a> {
    dict: &'a PronDict,
    words: Vec<&'a str>,
    /// Rhyme classes with enough members, in key order.
    classes: Vec<(RhymeKey, Vec<&'a str>)>,
}

impl<'a> Vocabulary<'a> {
    fn new(dict: &'a PronDict, config: &SynthConfig) -> Result<Self> {
        let words: Vec<&str> = dict
            .words()
            .into_iter()
            .filter(|w| w.chars().all(char::is_alphabetic))
            .collect();
        let mut groups: BTreeMap<RhymeKey, Vec<&str>> = BTreeMap::new();
        for &w in &words {
            if let Some(key) = dict.rhyme_key(w) {
                groups.entry(key).or_default().push(w);
            }
        }
        let classes: Vec<_> = groups
            .into_iter()
            .filter(|(_, ws)| ws.len() >= config.min_class_size)
            .collect();
        if words.len() < config.min_lexicon_words || classes.len() < config.min_rhyme_classes {
            return Err(Error::Config(format!(
                "lexicon too small for synthesis: {} words in {} rhyme classes of size >= {} \
                 (need {} words, {} classes)",
                words.len(),
                classes.len(),
                config.min_class_size,
                config.min_lexicon_words,
                config.min_rhyme_classes
            )));
        }
        Ok(Vocabulary { dict, words, classes })
    }

    fn phones(&self, word: &str) -> usize {
        self.dict.phones_for(word).map_or(0, <[_]>::len)
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn pick_in(rng: &mut ChaCha8Rng, range: [usize; 2]) -> usize {
    rng.random_range(range[0]..=range[1])
}

/// Cycles through a shuffled list of class indices, reshuffling when exhausted.
struct ClassDeck {
    order: Vec<usize>,
    pos: usize,
}

impl ClassDeck {
    fn new(n: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        ClassDeck { order, pos: 0 }
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) -> usize {
        if self.pos == self.order.len() {
            self.order.shuffle(rng);
            self.pos = 0;
        }
        self.pos += 1;
        self.order[self.pos - 1]
    }
}

fn poetry_text(vocab: &Vocabulary, config: &SynthConfig, rng: &mut ChaCha8Rng) -> String {
    let p = &config.poetry;
    let mut deck = ClassDeck::new(vocab.classes.len(), rng);
    let mut lines: Vec<String> = Vec::new();
    let mut phones = 0;
    let mut until_stop = pick_in(rng, p.lines_per_sentence);

    while phones < config.min_phones {
        let scheme = p.schemes.choose(rng).expect("schemes non-empty");
        let mut letters: BTreeMap<char, (usize, Vec<&str>)> = BTreeMap::new();
        for c in scheme.chars() {
            letters.entry(c).or_insert_with(|| (deck.draw(rng), Vec::new()));
        }
        let mut stanza = Vec::with_capacity(scheme.len());
        let mut stanza_phones = 0;
        let mut countdown = until_stop;
        for c in scheme.chars() {
            let (class, used) = letters.get_mut(&c).expect("letter registered");
            let members = &vocab.classes[*class].1;
            let fresh: Vec<&str> = members.iter().copied().filter(|w| !used.contains(w)).collect();
            let end_word = *fresh.choose(rng).unwrap_or(&members[0]);
            used.push(end_word);

            let n_words = pick_in(rng, p.words_per_line);
            let mut words: Vec<&str> = (1..n_words)
                .map(|_| *vocab.words.choose(rng).expect("lexicon non-empty"))
                .collect();
            words.push(end_word);
            stanza_phones += words.iter().map(|w| vocab.phones(w)).sum::<usize>();

            let mut line = capitalize(words[0]);
            for w in &words[1..] {
                line.push(' ');
                line.push_str(w);
            }
            countdown -= 1;
            if countdown == 0 {
                line.push_str(p.sentence_endings.choose(rng).expect("endings non-empty"));
                countdown = pick_in(rng, p.lines_per_sentence);
            } else if rng.random_bool(p.line_comma_probability) {
                line.push(',');
            }
            stanza.push(line);
        }
        // Stanza sizes are small next to the phone budget; an overshoot is rare
        // and simply retried.
        if phones + stanza_phones > config.max_phones {
            continue;
        }
        phones += stanza_phones;
        until_stop = countdown;
        lines.extend(stanza);
    }
    if let Some(last) = lines.last_mut() {
        if last.ends_with(',') {
            last.pop();
        }
        let punct = RhythmPunctSet::default();
        if !punct.symbols.iter().any(|s| last.ends_with(s.as_str())) {
            last.push('.');
        }
    }
    lines.join("\n")
}

fn prose_text(vocab: &Vocabulary, config: &SynthConfig, rng: &mut ChaCha8Rng) -> String {
    let p = &config.prose;
    let mut order: Vec<usize> = (0..vocab.classes.len()).collect();
    order.shuffle(rng);
    order.truncate(p.anchor_classes.clamp(1, vocab.classes.len()));
    let reserved: HashSet<&RhymeKey> = order.iter().map(|&c| &vocab.classes[c].0).collect();
    let filler: Vec<&str> = vocab
        .words
        .iter()
        .copied()
        .filter(|w| vocab.dict.rhyme_key(w).is_none_or(|k| !reserved.contains(&k)))
        .collect();

    let mut paragraphs: Vec<String> = Vec::new();
    let mut paragraph: Vec<String> = Vec::new();
    let mut paragraph_len = pick_in(rng, p.sentences_per_paragraph);
    let mut phones = 0;
    let mut sentence_no = 0;
    while phones < config.min_phones {
        let class = order[sentence_no % order.len()];
        let anchor = *vocab.classes[class].1.choose(rng).expect("class non-empty");
        let n_words = pick_in(rng, p.words_per_sentence);
        let mut words: Vec<&str> = (1..n_words)
            .map(|_| {
                let pool = if rng.random_bool(p.rhyme_leak) { &vocab.words } else { &filler };
                *pool.choose(rng).expect("pool non-empty")
            })
            .collect();
        words.push(anchor);
        let sentence_phones: usize = words.iter().map(|w| vocab.phones(w)).sum();
        if phones + sentence_phones > config.max_phones {
            continue;
        }
        phones += sentence_phones;
        sentence_no += 1;

        let mut sentence = capitalize(words[0]);
        for (i, w) in words.iter().enumerate().skip(1) {
            if i + 1 < words.len() && i > 1 && rng.random_bool(p.comma_probability) {
                sentence.push(',');
            }
            sentence.push(' ');
            sentence.push_str(w);
        }
        sentence.push_str(p.sentence_endings.choose(rng).expect("endings non-empty"));
        paragraph.push(sentence);
        if paragraph.len() == paragraph_len {
            paragraphs.push(paragraph.join(" "));
            paragraph.clear();
            paragraph_len = pick_in(rng, p.sentences_per_paragraph);
        }
    }
    if !paragraph.is_empty() {
        paragraphs.push(paragraph.join(" "));
    }
    paragraphs.join("\n")
}

fn recurring_classes(text: &str, dict: &PronDict) -> usize {
    let signals = signals_for_text(text, dict, &DurationTable::default(), &RhythmPunctSet::default());
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &signals.signals {
        *counts.entry(s.rhyme_class).or_default() += 1;
    }
    counts.values().filter(|&&c| c >= 2).count()
}

fn doc_rng(seed: u64, label: Label, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let class_bit = match label {
        Label::Poetry => 0,
        _ => 1u64 << 32,
    };
    rng.set_stream(class_bit | index as u64);
    rng
}

/// `n_per_class` poetry-like documents followed by `n_per_class` prose-like ones.
pub fn generate_synthetic_corpus(
    n_per_class: usize,
    seed: u64,
    lexicon: &PronDict,
    config: &SynthConfig,
) -> Result<Corpus> {
    config.validate()?;
    let vocab = Vocabulary::new(lexicon, config)?;
    let mut docs: Vec<Document> = Vec::with_capacity(2 * n_per_class);
    for i in 0..n_per_class {
        let mut rng = doc_rng(seed, Label::Poetry, i);
        let mut attempts = 0;
        let text = loop {
            let text = poetry_text(&vocab, config, &mut rng);
            attempts += 1;
            if recurring_classes(&text, lexicon) >= config.min_recurring_classes {
                break text;
            }
            if attempts == 100 {
                return Err(Error::Config(
                    "could not generate poetry with enough recurring rhyme classes".into(),
                ));
            }
        };
        docs.push(load_document(&text, &format!("poetry_{i:03}"), Label::Poetry)?);
    }
    for i in 0..n_per_class {
        let mut rng = doc_rng(seed, Label::Prose, i);
        let text = prose_text(&vocab, config, &mut rng);
        docs.push(load_document(&text, &format!("prose_{i:03}"), Label::Prose)?);
    }
    Corpus::new(docs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::stats::document_stats;
    use crate::timeline::{tokenize, TokenKind};

    #[test]
    fn default_config_is_valid() {
        SynthConfig::default().validate().unwrap();
    }

    #[test]
    fn deterministic_in_seed() {
        let dict = PronDict::fixture();
        let cfg = SynthConfig::default();
        let a = generate_synthetic_corpus(4, 7, &dict, &cfg).unwrap();
        let b = generate_synthetic_corpus(4, 7, &dict, &cfg).unwrap();
        assert_eq!(a, b);
        let c = generate_synthetic_corpus(4, 8, &dict, &cfg).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn documents_respect_phone_budget_and_shape() {
        let dict = PronDict::fixture();
        let cfg = SynthConfig::default();
        let corpus = generate_synthetic_corpus(10, 3, &dict, &cfg).unwrap();
        assert_eq!(corpus.count(Label::Poetry), 10);
        assert_eq!(corpus.count(Label::Prose), 10);
        for doc in &corpus.documents {
            let stats = document_stats(doc, &dict, &RhythmPunctSet::default());
            assert!((800..=1200).contains(&stats.phone_count), "{}: {}", doc.id, stats.phone_count);
            match doc.label {
                Label::Poetry => assert!(recurring_classes(&doc.text, &dict) >= 5),
                _ => {
                    // Line breaks only between paragraphs, i.e. right after a sentence end.
                    let toks = tokenize(&doc.text);
                    for (i, t) in toks.iter().enumerate() {
                        if t.kind == TokenKind::LineBreak {
                            assert!(RhythmPunctSet::default().contains(&toks[i - 1]));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn small_lexicon_is_a_config_error() {
        let dict = PronDict::parse_str("CAT  K AE1 T\nHAT  HH AE1 T\n").unwrap();
        assert!(matches!(
            generate_synthetic_corpus(2, 1, &dict, &SynthConfig::default()),
            Err(Error::Config(_))
        ));
    }
}
