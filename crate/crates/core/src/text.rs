//! Transcription comparison and recognition confidence.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A decoded word, one `char` per alphabet symbol.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Transcription(Vec<char>);

impl Transcription {
    pub fn new(chars: Vec<char>) -> Self {
        Self(chars)
    }

    pub fn chars(&self) -> &[char] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True when nothing but whitespace remains.
    pub fn is_void(&self) -> bool {
        self.0.iter().all(|c| c.is_whitespace())
    }

    pub fn to_uppercase(&self) -> Transcription {
        Transcription(self.0.iter().flat_map(|c| c.to_uppercase()).collect())
    }
}

impl From<&str> for Transcription {
    fn from(s: &str) -> Self {
        Self(s.chars().collect())
    }
}

impl fmt::Display for Transcription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|c| write!(f, "{c}"))
    }
}

impl Serialize for Transcription {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Transcription {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(Transcription::from(s.as_str()))
    }
}

/// Per-character recognition confidences, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CharConfidences(Vec<f64>);

impl CharConfidences {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(&p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::ConfidenceRange(p));
        }
        Ok(Self(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Unit-cost edit distance (insert, delete, substitute).
pub fn levenshtein(a: &Transcription, b: &Transcription) -> usize {
    let (a, b) = (a.chars(), b.chars());
    let (short, long) = if a.len() < b.len() { (a, b) } else { (b, a) };
    let mut row: Vec<usize> = (0..=short.len()).collect();
    for (i, &lc) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &sc) in short.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if lc == sc {
                diag
            } else {
                1 + diag.min(above).min(row[j])
            };
            diag = above;
        }
    }
    row[short.len()]
}

/// Edit distance normalized by the longer word; two empty words give 0.
pub fn text_disparity(a: &Transcription, b: &Transcription) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    levenshtein(a, b) as f64 / longest as f64
}

/// `1 − text_disparity`.
pub fn text_similarity(a: &Transcription, b: &Transcription) -> f64 {
    1.0 - text_disparity(a, b)
}

/// Mean of the per-character confidences.
pub fn instance_confidence(cc: &CharConfidences) -> Result<f64> {
    if cc.is_empty() {
        return Err(Error::EmptyConfidence);
    }
    Ok(cc.probs().iter().sum::<f64>() / cc.len() as f64)
}

/// Symbol set of the recognizer. The padding class sits after the last symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct Alphabet {
    symbols: Vec<char>,
    index: HashMap<char, usize>,
}

/// Symbol that receives characters outside the alphabet.
pub const UNKNOWN_SYMBOL: char = '\u{FFFD}';

impl Alphabet {
    pub fn new(symbols: Vec<char>) -> Result<Self> {
        let mut index = HashMap::with_capacity(symbols.len());
        for (i, &c) in symbols.iter().enumerate() {
            if index.insert(c, i).is_some() {
                return Err(Error::Config(format!("duplicate alphabet symbol {c:?}")));
            }
        }
        if symbols.is_empty() {
            return Err(Error::Config("empty alphabet".into()));
        }
        Ok(Self { symbols, index })
    }

    /// Printable ASCII (space through `~`) plus the unknown symbol: 96 symbols.
    pub fn latin() -> Self {
        let mut symbols: Vec<char> = (0x20u8..=0x7e).map(char::from).collect();
        symbols.push(UNKNOWN_SYMBOL);
        Self::new(symbols).expect("builtin alphabet is valid")
    }

    /// One symbol per line; only the line terminator is stripped.
    pub fn from_reader(reader: impl BufRead) -> Result<Self> {
        let mut symbols = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Config(e.to_string()))?;
            let line = line.strip_suffix('\r').unwrap_or(&line);
            let mut chars = line.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => symbols.push(c),
                (None, _) => continue,
                _ => {
                    return Err(Error::Config(format!(
                        "alphabet line {} holds more than one symbol",
                        n + 1
                    )))
                }
            }
        }
        Self::new(symbols)
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Width of a distribution row: symbols plus padding.
    pub fn classes(&self) -> usize {
        self.symbols.len() + 1
    }

    pub fn pad_index(&self) -> usize {
        self.symbols.len()
    }

    /// Class index of `c`; unmapped characters fold to the unknown symbol when present.
    pub fn index_of(&self, c: char) -> Option<usize> {
        self.index
            .get(&c)
            .or_else(|| self.index.get(&UNKNOWN_SYMBOL))
            .copied()
    }

    pub fn symbol(&self, index: usize) -> Option<char> {
        self.symbols.get(index).copied()
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::latin()
    }
}
