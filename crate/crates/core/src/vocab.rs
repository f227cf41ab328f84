//! Dictionary ingestion and the closed vocabulary.
//!
//! Every base word gets a [`DefinitionEntry`]: its first dictionary definition,
//! tokenized, stopword-filtered, cut to [`MAX_DEFINITION_TERMS`] terms and
//! padded with [`PAD`]. The vocabulary is the base words plus every real term
//! that shows up in those definitions (one level deep; the terms themselves are
//! represented by images, not by further definitions).

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use indexmap::{IndexMap, IndexSet};

use crate::error::{Error, Result};
use crate::MAX_DEFINITION_TERMS;

/// Sentinel filling definitions shorter than [`MAX_DEFINITION_TERMS`].
pub const PAD: &str = "<PAD>";

/// Copulas, articles and prepositions dropped by default. Conjunctions,
/// question words, emphatics and punctuation are deliberately absent.
pub const DEFAULT_STOPWORDS: &[&str] = &[
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "being", "also", "of", "to", "in",
    "on", "at", "by", "for", "with", "as", "it", "its", "this", "that", "or",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dictionary {
    entries: IndexMap<String, Vec<String>>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one definition for `headword` (lowercased), after any existing ones.
    pub fn insert(&mut self, headword: &str, definition: &str) -> Result<()> {
        let headword = headword.to_lowercase();
        if headword.is_empty() || headword.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("bad headword {headword:?}")));
        }
        if definition.trim().is_empty() {
            return Err(Error::InvalidArgument(format!(
                "empty definition for {headword:?}"
            )));
        }
        if headword == PAD.to_lowercase() || definition.contains(PAD) {
            return Err(Error::ReservedToken("dictionary".into()));
        }
        self.entries
            .entry(headword)
            .or_default()
            .push(definition.trim().to_string());
        Ok(())
    }

    pub fn definitions(&self, headword: &str) -> Option<&[String]> {
        self.entries.get(headword).map(Vec::as_slice)
    }

    pub fn contains(&self, headword: &str) -> bool {
        self.entries.contains_key(headword)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    /// Parses `headword<TAB>definition` lines. `#` lines and blank lines are
    /// skipped; CRLF endings are accepted. `origin` only labels errors.
    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let mut dict = Dictionary::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (head, def) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(origin, line_no, "missing TAB"))?;
            let head = head.trim();
            if head.is_empty() {
                return Err(Error::parse(origin, line_no, "empty headword"));
            }
            if head.chars().any(char::is_whitespace) {
                return Err(Error::parse(origin, line_no, "whitespace in headword"));
            }
            if def.trim().is_empty() {
                return Err(Error::parse(origin, line_no, "empty definition"));
            }
            if head.to_lowercase() == PAD.to_lowercase() || def.contains(PAD) {
                return Err(Error::parse(origin, line_no, "reserved token <PAD>"));
            }
            dict.insert(head, def)?;
        }
        Ok(dict)
    }
}

pub fn load_dictionary(path: impl AsRef<Path>) -> Result<Dictionary> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Dictionary::parse(&text, path)
}

/// Reads a one-token-per-line file, lowercasing each token. Blank lines are
/// ignored and duplicates are kept in first-seen order only once.
pub fn load_word_list(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut seen = IndexSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let token = raw.trim();
        if token.is_empty() {
            continue;
        }
        if token.chars().any(char::is_whitespace) {
            return Err(Error::parse(path, idx + 1, "whitespace inside token"));
        }
        if token == PAD {
            return Err(Error::parse(path, idx + 1, "reserved token <PAD>"));
        }
        seen.insert(token.to_lowercase());
    }
    Ok(seen.into_iter().collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordPolicy {
    dropped: HashSet<String>,
}

impl Default for StopwordPolicy {
    fn default() -> Self {
        Self::new(DEFAULT_STOPWORDS.iter().copied())
    }
}

impl StopwordPolicy {
    pub fn new<I, S>(dropped: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            dropped: dropped
                .into_iter()
                .map(|s| s.as_ref().to_lowercase())
                .collect(),
        }
    }

    /// Keeps every token.
    pub fn keep_all() -> Self {
        Self {
            dropped: HashSet::new(),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Ok(Self::new(load_word_list(path)?))
    }

    pub fn drops(&self, token: &str) -> bool {
        self.dropped.contains(&token.to_lowercase())
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'
                | '\u{2019}'
                | '\u{201C}'
                | '\u{201D}'
                | '\u{2013}'
                | '\u{2014}'
                | '\u{2026}'
                | '\u{00AB}'
                | '\u{00BB}'
                | '\u{00BF}'
                | '\u{00A1}'
        )
}

/// Lowercases, splits on whitespace and splits every punctuation mark into its
/// own token, then removes the policy's stopwords.
pub fn tokenize_definition(text: &str, policy: &StopwordPolicy) -> Vec<String> {
    let lowered = text.to_lowercase();
    let mut tokens = Vec::new();
    for chunk in lowered.split_whitespace() {
        let mut word = String::new();
        for c in chunk.chars() {
            if is_punctuation(c) {
                if !word.is_empty() {
                    tokens.push(std::mem::take(&mut word));
                }
                tokens.push(c.to_string());
            } else {
                word.push(c);
            }
        }
        if !word.is_empty() {
            tokens.push(word);
        }
    }
    tokens.retain(|t| !policy.dropped.contains(t));
    tokens
}

/// One word's definition as exactly [`MAX_DEFINITION_TERMS`] terms, real terms
/// first and [`PAD`] after.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DefinitionEntry {
    word: String,
    terms: Vec<String>,
    real_term_count: usize,
}

impl DefinitionEntry {
    /// Truncates `real_terms` to the limit and pads the rest.
    pub fn new(word: impl Into<String>, real_terms: Vec<String>) -> Result<Self> {
        if real_terms.iter().any(|t| t == PAD) {
            return Err(Error::ReservedToken("definition terms".into()));
        }
        let mut terms = real_terms;
        terms.truncate(MAX_DEFINITION_TERMS);
        let real_term_count = terms.len();
        terms.resize(MAX_DEFINITION_TERMS, PAD.to_string());
        Ok(Self {
            word: word.into(),
            terms,
            real_term_count,
        })
    }

    pub fn word(&self) -> &str {
        &self.word
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn real_term_count(&self) -> usize {
        self.real_term_count
    }

    pub fn real_terms(&self) -> &[String] {
        &self.terms[..self.real_term_count]
    }

    pub fn is_pad(term: &str) -> bool {
        term == PAD
    }
}

/// Builds the entry from the word's first definition.
pub fn build_definition_entry(
    word: &str,
    dict: &Dictionary,
    policy: &StopwordPolicy,
) -> Result<DefinitionEntry> {
    let first = dict
        .definitions(word)
        .and_then(|defs| defs.first())
        .ok_or_else(|| Error::NoDefinition(word.to_string()))?;
    DefinitionEntry::new(word, tokenize_definition(first, policy))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    base_words: IndexSet<String>,
    all_words: IndexSet<String>,
    entries: IndexMap<String, DefinitionEntry>,
    skipped: Vec<String>,
}

impl Vocabulary {
    /// Base words that had a definition, in base-file order.
    pub fn base_words(&self) -> impl ExactSizeIterator<Item = &str> {
        self.base_words.iter().map(String::as_str)
    }

    /// Base words followed by new definition terms in first-encounter order.
    pub fn all_words(&self) -> impl ExactSizeIterator<Item = &str> {
        self.all_words.iter().map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.all_words.contains(word)
    }

    pub fn entry(&self, word: &str) -> Option<&DefinitionEntry> {
        self.entries.get(word)
    }

    /// Entries in base-word order.
    pub fn entries(&self) -> impl ExactSizeIterator<Item = &DefinitionEntry> {
        self.entries.values()
    }

    /// Base words dropped because the dictionary has no entry for them.
    pub fn skipped(&self) -> &[String] {
        &self.skipped
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `word<TAB>real_term_count<TAB>term1 ... term19`, one line per base word.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for entry in self.entries.values() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                entry.word,
                entry.real_term_count,
                entry.terms.join(" ")
            );
        }
        out
    }

    pub fn write_export(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.export()).map_err(|e| Error::io(path, e))
    }

    /// One skipped base word per line.
    pub fn write_skip_report<W: Write>(&self, mut out: W) -> io::Result<()> {
        for word in &self.skipped {
            writeln!(out, "{word}")?;
        }
        Ok(())
    }
}

pub fn build_vocabulary<S: AsRef<str>>(
    base: &[S],
    dict: &Dictionary,
    policy: &StopwordPolicy,
) -> Result<Vocabulary> {
    if base.is_empty() {
        return Err(Error::Empty("base vocabulary".into()));
    }
    let mut base_words = IndexSet::new();
    let mut entries = IndexMap::new();
    let mut skipped = Vec::new();
    for word in base {
        let word = word.as_ref().to_lowercase();
        if word == PAD.to_lowercase() {
            return Err(Error::ReservedToken("base vocabulary".into()));
        }
        if base_words.contains(&word) || skipped.contains(&word) {
            continue;
        }
        match build_definition_entry(&word, dict, policy) {
            Ok(entry) => {
                base_words.insert(word.clone());
                entries.insert(word, entry);
            }
            Err(Error::NoDefinition(w)) => {
                log::warn!("no definition for base word {w:?}; skipped");
                skipped.push(w);
            }
            Err(e) => return Err(e),
        }
    }
    let mut all_words = base_words.clone();
    for entry in entries.values() {
        for term in entry.real_terms() {
            if !all_words.contains(term) {
                all_words.insert(term.clone());
            }
        }
    }
    Ok(Vocabulary {
        base_words,
        all_words,
        entries,
        skipped,
    })
}
