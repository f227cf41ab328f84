use crate::embedding::EmbeddingTable;
use crate::error::{Error, Result};

use super::{cosine_similarity, datasets::OutlierInstance, EvalReport, Task};

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierRanking {
    /// Mean cosine similarity of each word to the other words.
    pub compactness: Vec<f64>,
    /// Index of the least compact word; ties go to the earliest.
    pub predicted: usize,
    /// The minimum was tied or a zero vector was involved.
    pub degenerate: bool,
}

/// Scores each word by its mean similarity to the rest of the set and
/// predicts the least compact one as the outlier.
pub fn outlier_score<S: AsRef<str>>(words: &[S], table: &EmbeddingTable) -> Result<OutlierRanking> {
    if words.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "outlier scoring needs at least 3 words, got {}",
            words.len()
        )));
    }
    let vectors = words
        .iter()
        .map(|w| {
            table
                .get(w.as_ref())
                .ok_or_else(|| Error::OutOfVocabulary(w.as_ref().to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = vectors.len();
    let mut sims = vec![0.0; n * n];
    let mut degenerate = false;
    for i in 0..n {
        for j in i + 1..n {
            let c = cosine_similarity(vectors[i], vectors[j])?;
            degenerate |= c.degenerate;
            sims[i * n + j] = c.value;
            sims[j * n + i] = c.value;
        }
    }
    let compactness: Vec<f64> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| sims[i * n + j])
                .sum::<f64>()
                / (n - 1) as f64
        })
        .collect();
    let mut predicted = 0;
    for (i, &c) in compactness.iter().enumerate().skip(1) {
        if c < compactness[predicted] {
            predicted = i;
        }
    }
    let ties = compactness
        .iter()
        .filter(|&&c| c == compactness[predicted])
        .count();
    Ok(OutlierRanking {
        compactness,
        predicted,
        degenerate: degenerate || ties > 1,
    })
}

/// Accuracy (percent) over every (cluster, outlier candidate) combination
/// whose words all resolve.
pub fn eval_outliers(table: &EmbeddingTable, instances: &[OutlierInstance]) -> Result<EvalReport> {
    let mut total = 0;
    let mut attempted = 0;
    let mut hits = 0;
    let mut degenerate = 0;
    for inst in instances {
        for outlier in &inst.outliers {
            total += 1;
            let mut words: Vec<&str> = inst.cluster.iter().map(String::as_str).collect();
            words.push(outlier);
            let ranking = match outlier_score(&words, table) {
                Ok(r) => r,
                Err(Error::OutOfVocabulary(_)) => continue,
                Err(e) => return Err(e),
            };
            attempted += 1;
            degenerate += ranking.degenerate as usize;
            hits += (ranking.predicted == words.len() - 1) as usize;
        }
    }
    if attempted == 0 {
        return Err(Error::Empty("no resolvable outlier instance".into()));
    }
    let mut report = EvalReport::new(
        Task::Outlier,
        100.0 * hits as f64 / attempted as f64,
        total,
        total - attempted,
    );
    report.degenerate = degenerate;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::WordEmbedding;

    fn table(rows: &[(&str, Vec<f32>)]) -> EmbeddingTable {
        let mut t = EmbeddingTable::new(rows[0].1.len());
        for (w, v) in rows {
            t.push(WordEmbedding { word: w.to_string(), vector: v.clone() }).unwrap();
        }
        t
    }

    #[test]
    fn orthogonal_word_is_outlier() {
        let t = table(&[
            ("a", vec![1.0, 0.0]),
            ("b", vec![1.0, 0.0]),
            ("c", vec![0.0, 1.0]),
            ("d", vec![1.0, 0.0]),
        ]);
        let r = outlier_score(&["a", "b", "c", "d"], &t).unwrap();
        assert_eq!(r.predicted, 2);
        assert!(!r.degenerate);
    }

    #[test]
    fn identical_vectors_tie_to_first() {
        let t = table(&[("a", vec![1.0, 2.0]), ("b", vec![1.0, 2.0]), ("c", vec![1.0, 2.0])]);
        let r = outlier_score(&["b", "a", "c"], &t).unwrap();
        assert_eq!(r.predicted, 0);
        assert!(r.degenerate);
    }

    #[test]
    fn unresolvable_and_short() {
        let t = table(&[("a", vec![1.0]), ("b", vec![1.0]), ("c", vec![1.0])]);
        assert!(matches!(outlier_score(&["a", "b", "zz"], &t), Err(Error::OutOfVocabulary(_))));
        assert!(outlier_score(&["a", "b"], &t).is_err());
    }

    #[test]
    fn accuracy_over_combinations() {
        let t = table(&[
            ("red", vec![1.0, 0.1, 0.0]),
            ("blue", vec![0.9, 0.2, 0.0]),
            ("green", vec![1.0, 0.0, 0.1]),
            ("dog", vec![0.0, 0.0, 1.0]),
            ("car", vec![0.0, 1.0, 0.0]),
        ]);
        let inst = OutlierInstance::new(
            vec!["red".into(), "blue".into(), "green".into()],
            vec!["dog".into(), "car".into(), "unknown".into()],
        )
        .unwrap();
        let r = eval_outliers(&t, &[inst.clone()]).unwrap();
        assert_eq!(r.metric, 100.0);
        assert_eq!(r.total, 3);
        assert_eq!(r.skipped, 1);

        let single = OutlierInstance::new(inst.cluster.clone(), vec!["dog".into()]).unwrap();
        let r = eval_outliers(&t, &[single]).unwrap();
        assert_eq!((r.metric, r.coverage), (100.0, 1.0));

        let none = OutlierInstance::new(vec!["x".into(), "y".into()], vec!["z".into()]).unwrap();
        assert!(eval_outliers(&t, &[none]).is_err());
    }
}
