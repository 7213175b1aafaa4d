//! Tokenization, time-unit layout and rhyme-signal extraction.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::phonetics::{rhyming_part, PronDict, RhymeKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TokenKind {
    Word,
    Punctuation,
    LineBreak,
    Number,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub kind: TokenKind,
    pub surface: String,
    /// Position in the token stream.
    pub index: usize,
    /// Character (not byte) offset of the token in the source text.
    pub offset: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c == '\'' || c == '\u{2019}'
}

/// Splits text into words, numbers, punctuation marks and line breaks.
///
/// Runs of letters and apostrophes form words, runs of ASCII digits form
/// numbers, `--` is a single token and every other non-space character is a
/// one-character punctuation token. Whitespace other than `\n` is dropped.
pub fn tokenize(text: &str) -> Vec<Token> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    let push = |tokens: &mut Vec<Token>, kind, surface: String, offset| {
        let index = tokens.len();
        tokens.push(Token {
            kind,
            surface,
            index,
            offset,
        });
    };
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            push(&mut tokens, TokenKind::LineBreak, "\n".into(), i);
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else if is_word_char(c) {
            let start = i;
            while i < chars.len() && is_word_char(chars[i]) {
                i += 1;
            }
            push(&mut tokens, TokenKind::Word, chars[start..i].iter().collect(), start);
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            push(&mut tokens, TokenKind::Number, chars[start..i].iter().collect(), start);
        } else if c == '-' && chars.get(i + 1) == Some(&'-') {
            push(&mut tokens, TokenKind::Punctuation, "--".into(), i);
            i += 2;
        } else {
            push(&mut tokens, TokenKind::Punctuation, c.to_string(), i);
            i += 1;
        }
    }
    tokens
}

/// Inverse of [`tokenize`] up to whitespace: word-like tokens are separated by
/// one space, punctuation attaches to the preceding token and line breaks are
/// emitted verbatim.
///
/// Two adjacent hyphen tokens get a space between them, otherwise `-` `-`
/// would re-tokenize as `--`.
pub fn detokenize<'a, I>(surfaces: I) -> String
where
    I: IntoIterator<Item = (TokenKind, &'a str)>,
{
    let mut out = String::new();
    let mut prev: Option<(TokenKind, &str)> = None;
    for (kind, surface) in surfaces {
        let space = match (prev, kind) {
            (None, _) | (_, TokenKind::LineBreak) | (Some((TokenKind::LineBreak, _)), _) => false,
            (Some((_, p)), TokenKind::Punctuation) => p.ends_with('-') && surface.starts_with('-'),
            (Some(_), _) => true,
        };
        if space {
            out.push(' ');
        }
        out.push_str(surface);
        prev = Some((kind, surface));
    }
    out
}

/// Time units per token kind and punctuation symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationTable {
    pub symbols: BTreeMap<String, u64>,
    pub line_break: u64,
    pub unknown_word: u64,
    pub gap: u64,
    /// Punctuation not listed in `symbols`.
    pub other_punctuation: u64,
}

impl Default for DurationTable {
    fn default() -> Self {
        let symbols = [
            (",", 3),
            (".", 4),
            (";", 4),
            (":", 4),
            ("!", 5),
            ("?", 5),
            ("-", 5),
            ("--", 5),
        ]
        .into_iter()
        .map(|(s, d)| (s.to_string(), d))
        .collect();
        DurationTable {
            symbols,
            line_break: 1,
            unknown_word: 1,
            gap: 1,
            other_punctuation: 1,
        }
    }
}

impl DurationTable {
    pub fn validate(&self) -> crate::Result<()> {
        let all_positive = self.symbols.values().all(|&d| d >= 1)
            && self.line_break >= 1
            && self.unknown_word >= 1
            && self.gap >= 1
            && self.other_punctuation >= 1;
        if all_positive {
            Ok(())
        } else {
            Err(crate::Error::Config("all durations must be at least 1 time unit".into()))
        }
    }

    /// Duration of a single token; known words take one unit per phone.
    pub fn duration(&self, token: &Token, dict: &PronDict) -> u64 {
        match token.kind {
            TokenKind::Word => dict
                .phones_for(&token.surface)
                .map_or(self.unknown_word, |p| p.len() as u64),
            TokenKind::Number => self.unknown_word,
            TokenKind::LineBreak => self.line_break,
            TokenKind::Punctuation => self
                .symbols
                .get(&token.surface)
                .copied()
                .unwrap_or(self.other_punctuation),
        }
    }
}

/// Punctuation symbols whose preceding word anchors rhyme detection.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhythmPunctSet {
    pub symbols: BTreeSet<String>,
}

impl Default for RhythmPunctSet {
    fn default() -> Self {
        RhythmPunctSet {
            symbols: [".", ":", ";", "!", "?"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl RhythmPunctSet {
    pub fn contains(&self, token: &Token) -> bool {
        token.kind == TokenKind::Punctuation && self.symbols.contains(&token.surface)
    }
}

/// Inclusive time span occupied by a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: u64,
    pub end: u64,
}

/// Absolute time layout of a token stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Timeline {
    pub spans: Vec<Span>,
    /// Word token index → time unit of its final phone.
    pub last_phone_time: BTreeMap<usize, u64>,
    pub total_duration: u64,
}

/// Lays tokens out left to right with one gap between consecutive tokens.
pub fn build_timeline(tokens: &[Token], dict: &PronDict, durations: &DurationTable) -> Timeline {
    let mut spans = Vec::with_capacity(tokens.len());
    let mut last_phone_time = BTreeMap::new();
    let mut t = 0u64;
    for (i, token) in tokens.iter().enumerate() {
        if i > 0 {
            t += durations.gap;
        }
        let d = durations.duration(token, dict);
        let span = Span {
            start: t,
            end: t + d - 1,
        };
        if token.kind == TokenKind::Word {
            last_phone_time.insert(token.index, span.end);
        }
        spans.push(span);
        t += d;
    }
    Timeline {
        spans,
        last_phone_time,
        total_duration: t,
    }
}

/// A rhyme event at the last phone of a rhyme word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signal {
    pub time: u64,
    #[serde(rename = "class")]
    pub rhyme_class: usize,
    pub token_index: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignalSequence {
    pub signals: Vec<Signal>,
    pub total_duration: u64,
}

impl SignalSequence {
    pub fn len(&self) -> usize {
        self.signals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signals.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.signals.iter().map(|s| s.rhyme_class).collect::<HashSet<_>>().len()
    }

    /// Builds a sequence directly from `(time, class)` pairs, used by tests and
    /// synthetic inputs. Token indices are the positions in the input.
    pub fn from_pairs(pairs: &[(u64, usize)]) -> Self {
        let signals = pairs
            .iter()
            .enumerate()
            .map(|(i, &(time, rhyme_class))| Signal {
                time,
                rhyme_class,
                token_index: i,
            })
            .collect::<Vec<_>>();
        let total_duration = signals.last().map_or(0, |s| s.time + 1);
        SignalSequence {
            signals,
            total_duration,
        }
    }
}

/// Word tokens whose next non-line-break token is rhythm punctuation.
pub fn anchor_indices(tokens: &[Token], punct: &RhythmPunctSet) -> Vec<usize> {
    let mut anchors = Vec::new();
    for (i, token) in tokens.iter().enumerate() {
        if token.kind != TokenKind::Word {
            continue;
        }
        let next = tokens[i + 1..].iter().find(|t| t.kind != TokenKind::LineBreak);
        if next.is_some_and(|t| punct.contains(t)) {
            anchors.push(i);
        }
    }
    anchors
}

/// Emits one signal per rhyme word, classed by rhyming part.
///
/// Anchors are the words right before rhythm punctuation. Every word in the
/// document that shares an anchor's rhyming part is a rhyme word; classes are
/// numbered by first occurrence.
pub fn find_rhyme_signals(
    tokens: &[Token],
    timeline: &Timeline,
    dict: &PronDict,
    punct: &RhythmPunctSet,
) -> SignalSequence {
    let keys: Vec<Option<RhymeKey>> = tokens
        .iter()
        .map(|t| match t.kind {
            TokenKind::Word => dict.phones_for(&t.surface).map(|p| rhyming_part(p).key()),
            _ => None,
        })
        .collect();
    let anchor_keys: HashSet<&RhymeKey> = anchor_indices(tokens, punct)
        .into_iter()
        .filter_map(|i| keys[i].as_ref())
        .collect();

    let mut class_ids: HashMap<&RhymeKey, usize> = HashMap::new();
    let mut signals = Vec::new();
    for (i, key) in keys.iter().enumerate() {
        let Some(key) = key.as_ref().filter(|k| anchor_keys.contains(k)) else {
            continue;
        };
        let next_id = class_ids.len();
        let rhyme_class = *class_ids.entry(key).or_insert(next_id);
        signals.push(Signal {
            time: timeline.last_phone_time[&tokens[i].index],
            rhyme_class,
            token_index: tokens[i].index,
        });
    }
    SignalSequence {
        signals,
        total_duration: timeline.total_duration,
    }
}

/// Tokenize, lay out and extract signals in one step.
pub fn signals_for_text(
    text: &str,
    dict: &PronDict,
    durations: &DurationTable,
    punct: &RhythmPunctSet,
) -> SignalSequence {
    let tokens = tokenize(text);
    let timeline = build_timeline(&tokens, dict, durations);
    find_rhyme_signals(&tokens, &timeline, dict, punct)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TokenDump {
    pub index: usize,
    pub kind: TokenKind,
    pub surface: String,
    pub start: u64,
    pub end: u64,
}

/// Debug view of one document's timeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimelineDump {
    pub tokens: Vec<TokenDump>,
    pub signals: Vec<Signal>,
    pub total_duration: u64,
}

impl TimelineDump {
    pub fn new(tokens: &[Token], timeline: &Timeline, signals: &SignalSequence) -> Self {
        TimelineDump {
            tokens: tokens
                .iter()
                .zip(&timeline.spans)
                .map(|(t, s)| TokenDump {
                    index: t.index,
                    kind: t.kind,
                    surface: t.surface.clone(),
                    start: s.start,
                    end: s.end,
                })
                .collect(),
            signals: signals.signals.clone(),
            total_duration: timeline.total_duration,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(tokens: &[Token]) -> Vec<(TokenKind, &str)> {
        tokens.iter().map(|t| (t.kind, t.surface.as_str())).collect()
    }

    #[test]
    fn tokenizes_words_and_punctuation() {
        use TokenKind::*;
        let toks = tokenize("Hi, there.");
        assert_eq!(
            kinds(&toks),
            vec![(Word, "Hi"), (Punctuation, ","), (Word, "there"), (Punctuation, ".")]
        );
        assert_eq!(kinds(&tokenize("a--b")), vec![(Word, "a"), (Punctuation, "--"), (Word, "b")]);
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn tokenizes_numbers_breaks_and_apostrophes() {
        use TokenKind::*;
        let toks = tokenize("Don't  stop\n42 ---x");
        assert_eq!(
            kinds(&toks),
            vec![
                (Word, "Don't"),
                (Word, "stop"),
                (LineBreak, "\n"),
                (Number, "42"),
                (Punctuation, "--"),
                (Punctuation, "-"),
                (Word, "x"),
            ]
        );
        assert_eq!(toks[3].offset, 12);
        assert!(toks.windows(2).all(|w| w[0].index < w[1].index));
    }

    #[test]
    fn detokenize_round_trips_tokens() {
        for text in ["a b. c d.", "Hi, there!\nYes -- no", "x - - y", "1 2 3;a", "...", "- --"] {
            let toks = tokenize(text);
            let back = detokenize(toks.iter().map(|t| (t.kind, t.surface.as_str())));
            assert_eq!(kinds(&tokenize(&back)), kinds(&toks), "{text:?} -> {back:?}");
        }
    }

    #[test]
    fn hi_timeline_trace() {
        let dict = PronDict::parse_str("HI  HH AY1\n").unwrap();
        let toks = tokenize("Hi.");
        let tl = build_timeline(&toks, &dict, &DurationTable::default());
        assert_eq!(tl.spans[0], Span { start: 0, end: 1 });
        assert_eq!(tl.spans[1], Span { start: 3, end: 6 });
        assert_eq!(tl.last_phone_time[&0], 1);
        assert_eq!(tl.total_duration, 7);

        let toks = tokenize("Hi.\nHi.");
        let tl = build_timeline(&toks, &dict, &DurationTable::default());
        assert_eq!(tl.spans[2], Span { start: 8, end: 8 });
        assert_eq!(tl.last_phone_time.values().copied().collect::<Vec<_>>(), vec![1, 11]);
        assert_eq!(tl.total_duration, 17);
    }

    #[test]
    fn unknown_word_takes_one_unit() {
        let dict = PronDict::fixture();
        let toks = tokenize("zzxqy");
        let tl = build_timeline(&toks, &dict, &DurationTable::default());
        assert_eq!(tl.last_phone_time[&0], 0);
        assert_eq!(tl.total_duration, 1);
    }

    #[test]
    fn cat_sat_hat_signals() {
        let dict = PronDict::fixture();
        let s = signals_for_text(
            "The cat sat. The hat.",
            &dict,
            &DurationTable::default(),
            &RhythmPunctSet::default(),
        );
        assert_eq!(s.len(), 3);
        assert_eq!(s.class_count(), 1);
        assert_eq!(
            s.signals.iter().map(|x| x.token_index).collect::<Vec<_>>(),
            vec![1, 2, 5]
        );
    }

    #[test]
    fn dog_runs_dog_sleeps() {
        let dict = PronDict::fixture();
        let s = signals_for_text(
            "Dog runs. Dog sleeps.",
            &dict,
            &DurationTable::default(),
            &RhythmPunctSet::default(),
        );
        assert_eq!(s.len(), 2);
        assert_eq!(s.signals[0].rhyme_class, 0);
        assert_eq!(s.signals[1].rhyme_class, 1);
    }

    #[test]
    fn no_rhythm_punctuation_no_signals() {
        let dict = PronDict::fixture();
        let s = signals_for_text(
            "the cat, the hat, the bat",
            &dict,
            &DurationTable::default(),
            &RhythmPunctSet::default(),
        );
        assert!(s.is_empty());
    }

    #[test]
    fn anchors_skip_line_breaks() {
        let toks = tokenize("night\n\n.");
        assert_eq!(anchor_indices(&toks, &RhythmPunctSet::default()), vec![0]);
        let toks = tokenize("night, day.");
        assert_eq!(anchor_indices(&toks, &RhythmPunctSet::default()), vec![2]);
    }
}
