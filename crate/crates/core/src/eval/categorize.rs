use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};

use super::{datasets::CategorizationDataset, EvalReport, Task};

pub const DEFAULT_RESTARTS: usize = 10;
pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignment: Vec<usize>,
    /// Within-cluster sum of squared distances.
    pub wcss: f64,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Nearest centroid, ties to the lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(point, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn seed_plus_plus(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[chosen[0]])).collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave target just past the last positive weight
            pick.unwrap_or_else(|| d2.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            // every remaining point duplicates a centre
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

fn lloyd(points: &[Vec<f64>], mut centroids: Vec<Vec<f64>>) -> KMeansResult {
    let dim = points[0].len();
    let k = centroids.len();
    let mut assignment = vec![usize::MAX; points.len()];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let mut changed = false;
        for (p, a) in points.iter().zip(assignment.iter_mut()) {
            let (c, _) = nearest(p, &centroids);
            if *a != c {
                *a = c;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for (p, &a) in points.iter().zip(&assignment) {
            counts[a] += 1;
            sums[a].iter_mut().zip(p).for_each(|(s, x)| *s += x);
        }
        for ((c, s), &n) in centroids.iter_mut().zip(sums).zip(&counts) {
            // an emptied cluster keeps its previous centre
            if n > 0 {
                *c = s.into_iter().map(|v| v / n as f64).collect();
            }
        }
    }
    let wcss = points
        .iter()
        .zip(&assignment)
        .map(|(p, &a)| sq_dist(p, &centroids[a]))
        .sum();
    KMeansResult {
        assignment,
        wcss,
        iterations,
    }
}

/// k-means with k-means++ seeding. Runs `restarts` independent seedings from
/// one generator seeded with `seed` and keeps the lowest-WCSS result (the
/// first one on ties).
pub fn kmeans<V: AsRef<[f32]>>(vectors: &[V], k: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    let n = vectors.len();
    if k < 1 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} with {n} points"
        )));
    }
    let dim = vectors[0].as_ref().len();
    if vectors.iter().any(|v| v.as_ref().len() != dim) {
        return Err(Error::Shape("vectors of different dimensions".into()));
    }
    let points: Vec<Vec<f64>> = vectors
        .iter()
        .map(|v| v.as_ref().iter().map(|&x| x as f64).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(&points, seed_plus_plus(&points, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.wcss < b.wcss) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VMeasure {
    pub homogeneity: f64,
    pub completeness: f64,
    pub v: f64,
}

/// Entropy of the marginal and conditional entropy `H(A | B)` in nats.
fn entropies<A: Ord, B: Ord>(a: &[A], b: &[B]) -> (f64, f64) {
    let n = a.len() as f64;
    let mut count_a: BTreeMap<&A, usize> = BTreeMap::new();
    let mut count_b: BTreeMap<&B, usize> = BTreeMap::new();
    let mut joint: BTreeMap<(&A, &B), usize> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *count_a.entry(x).or_default() += 1;
        *count_b.entry(y).or_default() += 1;
        *joint.entry((x, y)).or_default() += 1;
    }
    let h_a = -count_a
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            p * p.ln()
        })
        .sum::<f64>();
    let h_a_given_b = -joint
        .iter()
        .map(|(&(_, y), &c)| (c as f64 / n) * (c as f64 / count_b[y] as f64).ln())
        .sum::<f64>();
    (h_a, h_a_given_b.max(0.0))
}

/// Harmonic mean of homogeneity and completeness; label values themselves
/// are irrelevant, only the partition they induce.
pub fn v_measure<G: Ord, P: Ord>(gold: &[G], predicted: &[P]) -> Result<VMeasure> {
    if gold.len() != predicted.len() || gold.is_empty() {
        return Err(Error::Shape(format!(
            "v-measure of {} gold and {} predicted labels",
            gold.len(),
            predicted.len()
        )));
    }
    let (h_gold, h_gold_given_pred) = entropies(gold, predicted);
    let (h_pred, h_pred_given_gold) = entropies(predicted, gold);
    let homogeneity = if h_gold == 0.0 {
        1.0
    } else {
        1.0 - h_gold_given_pred / h_gold
    };
    let completeness = if h_pred == 0.0 {
        1.0
    } else {
        1.0 - h_pred_given_gold / h_pred
    };
    let v = if homogeneity + completeness == 0.0 {
        0.0
    } else {
        2.0 * homogeneity * completeness / (homogeneity + completeness)
    };
    Ok(VMeasure {
        homogeneity,
        completeness,
        v,
    })
}

/// Clusters the resolvable words into `ds.k()` groups and scores the
/// partition against the gold categories.
pub fn eval_categorization(
    table: &EmbeddingTable,
    ds: &CategorizationDataset,
    seed: u64,
) -> Result<EvalReport> {
    let k = ds.k();
    let mut vectors = Vec::new();
    let mut gold = Vec::new();
    for (word, cat) in &ds.items {
        if let Some(v) = table.get(word) {
            vectors.push(v);
            gold.push(cat.as_str());
        }
    }
    if vectors.len() < k {
        return Err(Error::Empty(format!(
            "{} resolvable words for {k} categories",
            vectors.len()
        )));
    }
    let all_identical = vectors.windows(2).all(|w| w[0] == w[1]);
    let clusters = kmeans(&vectors, k, seed, DEFAULT_RESTARTS)?;
    let score = v_measure(&gold, &clusters.assignment)?;
    let mut report = EvalReport::new(
        Task::Categorization,
        score.v,
        ds.items.len(),
        ds.items.len() - vectors.len(),
    );
    report.seed = Some(seed);
    report.degenerate = all_identical as usize;
    Ok(report)
}
