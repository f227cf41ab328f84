//! Benchmark file readers. Words are lowercased to match the vocabulary.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityPair {
    pub w1: String,
    pub w2: String,
    pub human_score: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutlierInstance {
    pub cluster: Vec<String>,
    pub outliers: Vec<String>,
}

impl OutlierInstance {
    pub fn new(cluster: Vec<String>, outliers: Vec<String>) -> Result<Self> {
        if cluster.len() < 2 || outliers.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "outlier instance needs >= 2 cluster words and >= 1 outlier, got {} and {}",
                cluster.len(),
                outliers.len()
            )));
        }
        if let Some(w) = outliers.iter().find(|w| cluster.contains(w)) {
            return Err(Error::InvalidArgument(format!(
                "{w:?} is both a cluster member and an outlier"
            )));
        }
        Ok(Self { cluster, outliers })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategorizationDataset {
    pub items: Vec<(String, String)>,
}

impl CategorizationDataset {
    pub fn new(items: Vec<(String, String)>) -> Result<Self> {
        let ds = Self { items };
        if ds.k() < 2 {
            return Err(Error::InvalidArgument(
                "categorization needs at least two categories".into(),
            ));
        }
        Ok(ds)
    }

    /// Number of distinct gold categories.
    pub fn k(&self) -> usize {
        self.items
            .iter()
            .map(|(_, c)| c.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.strip_suffix('\r').unwrap_or(l);
        (!l.trim().is_empty() && !l.starts_with('#')).then_some((i + 1, l))
    })
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// `word1<TAB>word2<TAB>score` lines.
pub fn parse_similarity(text: &str, origin: &Path) -> Result<Vec<SimilarityPair>> {
    let mut pairs = Vec::new();
    for (line_no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [w1, w2, score] = fields.as_slice() else {
            return Err(Error::parse(origin, line_no, "expected word1<TAB>word2<TAB>score"));
        };
        let human_score: f64 = score
            .parse()
            .map_err(|_| Error::parse(origin, line_no, format!("bad score {score:?}")))?;
        if w1.is_empty() || w2.is_empty() {
            return Err(Error::parse(origin, line_no, "empty word"));
        }
        pairs.push(SimilarityPair {
            w1: w1.to_lowercase(),
            w2: w2.to_lowercase(),
            human_score,
        });
    }
    Ok(pairs)
}

/// Blank-line separated blocks of `C<TAB>word` and `O<TAB>word` lines.
pub fn parse_outliers(text: &str, origin: &Path) -> Result<Vec<OutlierInstance>> {
    let mut instances = Vec::new();
    let mut cluster = Vec::new();
    let mut outliers = Vec::new();
    let mut block_start = 0;
    let mut flush = |cluster: &mut Vec<String>, outliers: &mut Vec<String>, line: usize| {
        if cluster.is_empty() && outliers.is_empty() {
            return Ok(());
        }
        let inst = OutlierInstance::new(std::mem::take(cluster), std::mem::take(outliers))
            .map_err(|e| Error::parse(origin, line, e.to_string()))?;
        instances.push(inst);
        Ok::<_, Error>(())
    };
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.starts_with('#') {
            continue;
        }
        if line.trim().is_empty() {
            flush(&mut cluster, &mut outliers, block_start)?;
            continue;
        }
        if cluster.is_empty() && outliers.is_empty() {
            block_start = line_no;
        }
        let (tag, word) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(origin, line_no, "expected C<TAB>word or O<TAB>word"))?;
        let word = word.trim().to_lowercase();
        if word.is_empty() {
            return Err(Error::parse(origin, line_no, "empty word"));
        }
        match tag.trim() {
            "C" => cluster.push(word),
            "O" => outliers.push(word),
            other => {
                return Err(Error::parse(
                    origin,
                    line_no,
                    format!("unknown tag {other:?}"),
                ))
            }
        }
    }
    flush(&mut cluster, &mut outliers, block_start)?;
    Ok(instances)
}

/// `word<TAB>category` lines.
pub fn parse_categorization(text: &str, origin: &Path) -> Result<CategorizationDataset> {
    let mut items = Vec::new();
    for (line_no, line) in content_lines(text) {
        let (word, cat) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(origin, line_no, "expected word<TAB>category"))?;
        let (word, cat) = (word.trim(), cat.trim());
        if word.is_empty() || cat.is_empty() {
            return Err(Error::parse(origin, line_no, "empty field"));
        }
        items.push((word.to_lowercase(), cat.to_string()));
    }
    CategorizationDataset::new(items)
        .map_err(|e| Error::Malformed(format!("{}: {e}", origin.display())))
}

pub fn load_similarity(path: impl AsRef<Path>) -> Result<Vec<SimilarityPair>> {
    let path = path.as_ref();
    parse_similarity(&read(path)?, path)
}

pub fn load_outliers(path: impl AsRef<Path>) -> Result<Vec<OutlierInstance>> {
    let path = path.as_ref();
    parse_outliers(&read(path)?, path)
}

pub fn load_categorization(path: impl AsRef<Path>) -> Result<CategorizationDataset> {
    let path = path.as_ref();
    parse_categorization(&read(path)?, path)
}
