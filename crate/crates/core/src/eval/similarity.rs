use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};

use super::{cosine_similarity, datasets::SimilarityPair, EvalReport, Task};

/// 1-based fractional ranks: tied values share the mean of their positions.
pub fn rank_average(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i + 1;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i..j (0-based) share rank mean((i+1)..=j)
        let rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            ranks[idx] = rank;
        }
        i = j;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman's rank correlation: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Shape(format!(
            "spearman of {} and {} values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::UndefinedCorrelation("fewer than two values".into()));
    }
    if xs.iter().chain(ys).any(|v| v.is_nan()) {
        return Err(Error::UndefinedCorrelation("NaN input".into()));
    }
    pearson(&rank_average(xs), &rank_average(ys))
}

/// Spearman correlation between cosine similarity and human scores over the
/// pairs whose words are both in the table.
pub fn eval_similarity(table: &EmbeddingTable, pairs: &[SimilarityPair]) -> Result<EvalReport> {
    let mut model_scores = Vec::new();
    let mut human = Vec::new();
    let mut degenerate = 0;
    for pair in pairs {
        let (Some(u), Some(v)) = (table.get(&pair.w1), table.get(&pair.w2)) else {
            continue;
        };
        let c = cosine_similarity(u, v)?;
        degenerate += c.degenerate as usize;
        model_scores.push(c.value);
        human.push(pair.human_score);
    }
    if model_scores.len() < 2 {
        return Err(Error::Empty(format!(
            "only {} of {} similarity pairs resolvable",
            model_scores.len(),
            pairs.len()
        )));
    }
    let rho = spearman(&model_scores, &human)?;
    let mut report = EvalReport::new(
        Task::Similarity,
        rho,
        pairs.len(),
        pairs.len() - model_scores.len(),
    );
    report.degenerate = degenerate;
    Ok(report)
}
