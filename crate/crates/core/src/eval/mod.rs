//! Benchmarks for an [`EmbeddingTable`]: word similarity (Spearman over
//! cosine scores), outlier detection (compactness argmin accuracy) and concept
//! categorization (k-means scored by v-measure).
//!
//! Items with a word missing from the table are skipped and reported through
//! [`EvalReport::coverage`]; they are never zero-filled.

mod categorize;
mod datasets;
mod outlier;
mod similarity;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use categorize::{eval_categorization, kmeans, v_measure, KMeansResult, VMeasure, DEFAULT_RESTARTS, MAX_ITERATIONS};
pub use datasets::{
    load_categorization, load_outliers, load_similarity, parse_categorization, parse_outliers,
    parse_similarity, CategorizationDataset, OutlierInstance, SimilarityPair,
};
pub use outlier::{eval_outliers, outlier_score, OutlierRanking};
pub use similarity::{eval_similarity, rank_average, spearman};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Similarity,
    Outlier,
    Categorization,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Similarity => "similarity",
            Task::Outlier => "outlier",
            Task::Categorization => "categorize",
        }
    }

    pub fn metric_name(self) -> &'static str {
        match self {
            Task::Similarity => "spearman",
            Task::Outlier => "accuracy",
            Task::Categorization => "v_measure",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "similarity" => Ok(Task::Similarity),
            "outlier" => Ok(Task::Outlier),
            "categorize" | "categorization" => Ok(Task::Categorization),
            other => Err(Error::InvalidArgument(format!(
                "unknown task {other:?} (expected similarity, outlier or categorize)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub task: Task,
    /// Spearman in [-1,1], accuracy in [0,100] or v-measure in [0,1].
    pub metric: f64,
    /// Resolvable fraction of the benchmark's items.
    pub coverage: f64,
    pub total: usize,
    pub skipped: usize,
    /// Items whose score involved a tie or zero vector.
    pub degenerate: usize,
    pub seed: Option<u64>,
}

impl EvalReport {
    pub(crate) fn new(task: Task, metric: f64, total: usize, skipped: usize) -> Self {
        let coverage = if total == 0 {
            0.0
        } else {
            (total - skipped) as f64 / total as f64
        };
        Self {
            task,
            metric,
            coverage,
            total,
            skipped,
            degenerate: 0,
            seed: None,
        }
    }

    pub fn to_human(&self) -> String {
        let mut s = format!(
            "task: {}\n{}: {:.6}\ncoverage: {:.4} ({} of {} items, {} skipped)\n",
            self.task,
            self.task.metric_name(),
            self.metric,
            self.coverage,
            self.total - self.skipped,
            self.total,
            self.skipped
        );
        if self.degenerate > 0 {
            s.push_str(&format!("degenerate items: {}\n", self.degenerate));
        }
        if let Some(seed) = self.seed {
            s.push_str(&format!("seed: {seed}\n"));
        }
        s
    }

    /// `key=value` lines.
    pub fn to_key_value(&self) -> String {
        let mut s = format!(
            "task={}\nmetric_name={}\nmetric={}\ncoverage={}\ntotal={}\nskipped={}\ndegenerate={}\n",
            self.task,
            self.task.metric_name(),
            self.metric,
            self.coverage,
            self.total,
            self.skipped,
            self.degenerate
        );
        if let Some(seed) = self.seed {
            s.push_str(&format!("seed={seed}\n"));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cosine {
    pub value: f64,
    /// One of the vectors was all zeros; `value` is then 0.
    pub degenerate: bool,
}

/// `u·v / (|u| |v|)` accumulated in `f64`, clamped to [-1,1].
pub fn cosine_similarity(u: &[f32], v: &[f32]) -> Result<Cosine> {
    if u.len() != v.len() {
        return Err(Error::Shape(format!(
            "cosine of {} and {} components",
            u.len(),
            v.len()
        )));
    }
    let (mut dot, mut nu, mut nv) = (0.0f64, 0.0f64, 0.0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (a as f64, b as f64);
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(Cosine {
            value: 0.0,
            degenerate: true,
        });
    }
    Ok(Cosine {
        value: (dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0),
        degenerate: false,
    })
}
