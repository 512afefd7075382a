use serde::{Deserialize, Serialize};

use super::Predictor;
use crate::encoding::FeatureMatrix;
use crate::error::{Error, Result};

/// Rank-based (Mann-Whitney) AUC; tied scores get half credit.
pub fn evaluate_auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::InvalidArgument("scores and labels differ in length".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // midrank of the tie group, 1-based
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            if labels[k] {
                rank_sum_pos += rank;
            }
        }
        i = j + 1;
    }
    let p = n_pos as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n_neg as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// `None` when the evaluated set holds a single class.
    pub auc: Option<f64>,
    pub accuracy: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
}

impl EvalReport {
    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.true_negatives + self.false_negatives
    }
}

/// AUC plus accuracy and confusion counts at probability threshold 0.5.
pub fn evaluate(model: &dyn Predictor, x: &FeatureMatrix) -> Result<EvalReport> {
    if x.n_rows() == 0 {
        return Err(Error::EmptyBucket);
    }
    if x.n_cols() != model.n_features() {
        return Err(Error::WidthMismatch {
            expected: model.n_features(),
            got: x.n_cols(),
        });
    }
    let scores: Vec<f64> = x.rows.iter().map(|r| model.margin(r)).collect();
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (&s, &y) in scores.iter().zip(&x.labels) {
        match (s >= 0.0, y) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, false) => tn += 1,
            (false, true) => fn_ += 1,
        }
    }
    Ok(EvalReport {
        auc: evaluate_auc(&scores, &x.labels).ok(),
        accuracy: (tp + tn) as f64 / x.n_rows() as f64,
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fn_,
    })
}
