//! ARPAbet phones, the CMU-format pronunciation lexicon and rhyme equivalence.
//!
//! A lexicon file is line oriented. Lines starting with `;;;` are comments, entry
//! lines are `WORD  PH PH ...` and alternative pronunciations are written
//! `WORD(1)`, `WORD(2)` and so on:
//!
//! ```text
//! ;;; comment
//! READ  R EH1 D
//! READ(1)  R IY1 D
//! ```
//!
//! Vowels always carry a stress digit (`0` unstressed, `1` primary, `2`
//! secondary) and consonants never do. The vowel set is the 15 standard codes
//! `AA AE AH AO AW AY EH ER EY IH IY OW OY UH UW`.
//!
//! Two words rhyme when the stress-stripped rhyming parts of their first
//! pronunciations are equal. The rhyming part runs from the last primary or
//! secondary stressed vowel to the end of the word.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

macro_rules! arpabet {
    ($( $sym:ident => $vowel:expr ),+ $(,)?) => {
        /// One of the 39 base ARPAbet phone codes.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum Arpabet { $($sym),+ }

        impl Arpabet {
            pub const ALL: [Arpabet; 39] = [$(Arpabet::$sym),+];

            pub fn is_vowel(self) -> bool {
                match self { $(Arpabet::$sym => $vowel),+ }
            }

            pub fn as_str(self) -> &'static str {
                match self { $(Arpabet::$sym => stringify!($sym)),+ }
            }
        }

        impl FromStr for Arpabet {
            type Err = ();
            fn from_str(s: &str) -> std::result::Result<Self, ()> {
                match s {
                    $(stringify!($sym) => Ok(Arpabet::$sym),)+
                    _ => Err(()),
                }
            }
        }
    };
}

arpabet! {
    AA => true, AE => true, AH => true, AO => true, AW => true, AY => true,
    EH => true, ER => true, EY => true, IH => true, IY => true, OW => true,
    OY => true, UH => true, UW => true,
    B => false, CH => false, D => false, DH => false, F => false, G => false,
    HH => false, JH => false, K => false, L => false, M => false, N => false,
    NG => false, P => false, R => false, S => false, SH => false, T => false,
    TH => false, V => false, W => false, Y => false, Z => false, ZH => false,
}

impl fmt::Display for Arpabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Vowel stress marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stress {
    Unstressed,
    Primary,
    Secondary,
}

impl Stress {
    fn digit(self) -> char {
        match self {
            Stress::Unstressed => '0',
            Stress::Primary => '1',
            Stress::Secondary => '2',
        }
    }
}

/// A phone: symbol plus stress, where stress is present iff the symbol is a vowel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Phone {
    symbol: Arpabet,
    stress: Option<Stress>,
}

impl Phone {
    pub fn consonant(symbol: Arpabet) -> Option<Self> {
        (!symbol.is_vowel()).then_some(Phone { symbol, stress: None })
    }

    pub fn vowel(symbol: Arpabet, stress: Stress) -> Option<Self> {
        symbol.is_vowel().then_some(Phone {
            symbol,
            stress: Some(stress),
        })
    }

    pub fn symbol(self) -> Arpabet {
        self.symbol
    }

    pub fn stress(self) -> Option<Stress> {
        self.stress
    }

    pub fn is_vowel(self) -> bool {
        self.symbol.is_vowel()
    }

    fn is_stressed_vowel(self) -> bool {
        matches!(self.stress, Some(Stress::Primary | Stress::Secondary))
    }
}

impl FromStr for Phone {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (code, stress) = match s.as_bytes().last() {
            Some(b'0') => (&s[..s.len() - 1], Some(Stress::Unstressed)),
            Some(b'1') => (&s[..s.len() - 1], Some(Stress::Primary)),
            Some(b'2') => (&s[..s.len() - 1], Some(Stress::Secondary)),
            _ => (s, None),
        };
        let symbol: Arpabet = code
            .parse()
            .map_err(|_| format!("unknown ARPAbet symbol `{s}`"))?;
        match (symbol.is_vowel(), stress) {
            (true, Some(stress)) => Ok(Phone {
                symbol,
                stress: Some(stress),
            }),
            (true, None) => Err(format!("vowel `{s}` is missing its stress digit")),
            (false, None) => Ok(Phone { symbol, stress: None }),
            (false, Some(_)) => Err(format!("consonant `{s}` cannot carry stress")),
        }
    }
}

impl fmt::Display for Phone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol.as_str())?;
        if let Some(stress) = self.stress {
            write!(f, "{}", stress.digit())?;
        }
        Ok(())
    }
}

/// Suffix of a pronunciation that decides rhyme.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RhymingPart {
    pub phones: Vec<Phone>,
}

impl RhymingPart {
    /// Stress-insensitive comparison key.
    pub fn key(&self) -> RhymeKey {
        RhymeKey(self.phones.iter().map(|p| p.symbol).collect())
    }
}

/// Stress-stripped rhyming part; equal keys rhyme.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RhymeKey(pub Vec<Arpabet>);

impl fmt::Display for RhymeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(p.as_str())?;
        }
        Ok(())
    }
}

/// Suffix from the last stressed vowel; falls back to the last vowel of any
/// stress, then to the whole pronunciation when it has no vowel.
pub fn rhyming_part(pron: &[Phone]) -> RhymingPart {
    let start = pron
        .iter()
        .rposition(|p| p.is_stressed_vowel())
        .or_else(|| pron.iter().rposition(|p| p.is_vowel()))
        .unwrap_or(0);
    RhymingPart {
        phones: pron[start..].to_vec(),
    }
}

/// Word → pronunciation variants, parsed from a CMU-format lexicon.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PronDict {
    entries: HashMap<String, Vec<Vec<Phone>>>,
    duplicate_warnings: usize,
}

fn normalize_word(token: &str) -> String {
    token.to_lowercase().replace('\u{2019}', "'")
}

/// Splits `WORD(3)` into (`WORD`, 3). A bare word is variant 0.
fn split_variant(raw: &str) -> std::result::Result<(&str, u32), String> {
    match raw.find('(') {
        Some(open) if raw.ends_with(')') && open > 0 => {
            let n = raw[open + 1..raw.len() - 1]
                .parse::<u32>()
                .map_err(|_| format!("bad variant suffix in `{raw}`"))?;
            Ok((&raw[..open], n))
        }
        Some(_) => Err(format!("bad variant suffix in `{raw}`")),
        None => Ok((raw, 0)),
    }
}

impl PronDict {
    /// Parses a lexicon from any buffered reader.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut staged: BTreeMap<String, BTreeMap<u32, Vec<Phone>>> = BTreeMap::new();
        let mut duplicate_warnings = 0;

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if line.starts_with(";;;") {
                continue;
            }
            // Newer cmudict releases append `# comment` to some entries.
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut fields = content.split_whitespace();
            let raw_word = fields.next().unwrap_or_default();
            let (word, variant) = split_variant(raw_word).map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;
            let phones = fields
                .map(|f| f.parse::<Phone>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|message| Error::Parse {
                    line: line_no,
                    message,
                })?;
            if phones.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("entry `{raw_word}` has no phones"),
                });
            }
            let slot = staged.entry(normalize_word(word)).or_default();
            if slot.insert(variant, phones).is_some() {
                duplicate_warnings += 1;
                log::warn!("line {line_no}: duplicate entry `{raw_word}` replaces the earlier one");
            }
        }

        if staged.is_empty() {
            return Err(Error::Parse {
                line: 0,
                message: "dictionary contains no entries".into(),
            });
        }
        let entries = staged
            .into_iter()
            .map(|(word, variants)| (word, variants.into_values().collect()))
            .collect();
        Ok(PronDict {
            entries,
            duplicate_warnings,
        })
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        Self::parse(text.as_bytes())
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(std::io::BufReader::new(file))
    }

    /// The small lexicon bundled with the crate.
    pub fn fixture() -> Self {
        Self::parse_str(FIXTURE_LEXICON).expect("bundled fixture lexicon parses")
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of entries that overwrote an earlier entry with the same name.
    pub fn duplicate_warnings(&self) -> usize {
        self.duplicate_warnings
    }

    pub fn variants(&self, word: &str) -> Option<&[Vec<Phone>]> {
        self.entries.get(&normalize_word(word)).map(Vec::as_slice)
    }

    /// Words in lexicographic order.
    pub fn words(&self) -> Vec<&str> {
        let mut words: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        words.sort_unstable();
        words
    }

    /// First pronunciation of the case-folded token.
    pub fn phones_for(&self, token: &str) -> Option<&[Phone]> {
        self.entries
            .get(&normalize_word(token))
            .and_then(|v| v.first())
            .map(Vec::as_slice)
    }

    pub fn rhyme_key(&self, word: &str) -> Option<RhymeKey> {
        self.phones_for(word).map(|p| rhyming_part(p).key())
    }

    pub fn rhymes(&self, a: &str, b: &str) -> bool {
        match (self.rhyme_key(a), self.rhyme_key(b)) {
            (Some(ka), Some(kb)) => ka == kb,
            _ => false,
        }
    }

    /// Serializes back to CMU format, words sorted, variants in order.
    pub fn to_cmudict_string(&self) -> String {
        let mut out = String::new();
        for word in self.words() {
            for (i, variant) in self.entries[word].iter().enumerate() {
                out.push_str(&word.to_uppercase());
                if i > 0 {
                    out.push_str(&format!("({i})"));
                }
                out.push(' ');
                for phone in variant {
                    out.push(' ');
                    out.push_str(&phone.to_string());
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Free-function form of [`PronDict::phones_for`].
pub fn phones_for<'a>(dict: &'a PronDict, token: &str) -> Option<&'a [Phone]> {
    dict.phones_for(token)
}

/// Free-function form of [`PronDict::rhymes`].
pub fn rhymes(dict: &PronDict, a: &str, b: &str) -> bool {
    dict.rhymes(a, b)
}

pub const FIXTURE_LEXICON: &str = include_str!("../data/fixture.dict");

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Vec<Phone> {
        s.split_whitespace().map(|x| x.parse().unwrap()).collect()
    }

    #[test]
    fn parses_single_entry() {
        let d = PronDict::parse_str("CAT  K AE1 T\n").unwrap();
        assert_eq!(d.variants("cat").unwrap(), &[p("K AE1 T")]);
    }

    #[test]
    fn variants_keep_numeric_order() {
        let d = PronDict::parse_str("READ(1)  R IY1 D\nREAD  R EH1 D\n").unwrap();
        assert_eq!(d.variants("read").unwrap(), &[p("R EH1 D"), p("R IY1 D")]);
        let d = PronDict::parse_str("READ  R EH1 D\nREAD(1)  R IY1 D\n").unwrap();
        assert_eq!(d.variants("READ").unwrap().len(), 2);
    }

    #[test]
    fn comments_only_is_an_error() {
        assert!(matches!(
            PronDict::parse_str(";;; comment\n"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn bad_phone_reports_line() {
        let err = PronDict::parse_str(";;; x\nCAT  K AE1 T\nDOG  D QQ1 G\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stress_must_match_vowelness() {
        assert!("AE".parse::<Phone>().is_err());
        assert!("K1".parse::<Phone>().is_err());
        assert!("AE1".parse::<Phone>().is_ok());
    }

    #[test]
    fn duplicate_base_entry_last_wins() {
        let d = PronDict::parse_str("CAT  K AE1 T\nCAT  K AA1 T\n").unwrap();
        assert_eq!(d.phones_for("cat").unwrap(), p("K AA1 T").as_slice());
        assert_eq!(d.duplicate_warnings(), 1);
    }

    #[test]
    fn trailing_hash_comment_is_ignored() {
        let d = PronDict::parse_str("ABBE  AE1 B IY0 # place, name\n").unwrap();
        assert_eq!(d.phones_for("abbe").unwrap().len(), 3);
    }

    #[test]
    fn lookup_is_case_insensitive() {
        let d = PronDict::fixture();
        assert_eq!(d.phones_for("Cat").unwrap(), p("K AE1 T").as_slice());
        assert!(d.phones_for(".").is_none());
        assert!(d.phones_for("zzxqy").is_none());
    }

    #[test]
    fn rhyming_part_rules() {
        assert_eq!(rhyming_part(&p("K AE1 T")).phones, p("AE1 T"));
        assert_eq!(rhyming_part(&p("AO1 R AH0 N JH")).phones, p("AO1 R AH0 N JH"));
        assert_eq!(rhyming_part(&p("HH M")).phones, p("HH M"));
        // Only unstressed vowels: falls back to the last vowel.
        assert_eq!(rhyming_part(&p("DH AH0")).phones, p("AH0"));
        assert_eq!(rhyming_part(&p("P R OW1 G R AE2 M")).phones, p("AE2 M"));
    }

    #[test]
    fn rhyme_examples() {
        let d = PronDict::fixture();
        assert!(d.rhymes("cat", "hat"));
        assert!(!d.rhymes("cat", "dog"));
        assert!(!d.rhymes("cat", "zzxqy"));
        assert!(d.rhymes("cat", "cat"));
        // "read" rhymes on its first variant only.
        assert!(d.rhymes("read", "red"));
        assert!(!d.rhymes("read", "deep"));
    }

    #[test]
    fn fixture_has_expected_size() {
        let d = PronDict::fixture();
        assert!(d.len() >= 300, "{}", d.len());
        assert_eq!(d.duplicate_warnings(), 0);
    }
}
