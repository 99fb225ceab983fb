//! Binary classification metrics.

use serde::Serialize;

use crate::error::{Error, Result};

/// Area under the ROC curve via the Mann–Whitney statistic, tied scores
/// sharing their average rank.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::Validation("scores and labels differ in length".into()));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Validation("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::InsufficientData("AUC needs both classes".into()));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks are 1-based: i+1 ..= j+1
        let mid = (i + j) as f64 / 2.0 + 1.0;
        rank_sum += mid * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

pub fn accuracy(pred: &[bool], labels: &[bool]) -> f64 {
    let hits = pred.iter().zip(labels).filter(|(a, b)| a == b).count();
    hits as f64 / labels.len().max(1) as f64
}

/// Mean of the per-class F1 scores; a class with no predictions and no
/// instances scores 0.
pub fn f1_macro(pred: &[bool], labels: &[bool]) -> f64 {
    let f1 = |class: bool| {
        let tp = pred.iter().zip(labels).filter(|&(&p, &l)| p == class && l == class).count() as f64;
        let fp = pred.iter().zip(labels).filter(|&(&p, &l)| p == class && l != class).count() as f64;
        let fneg = pred.iter().zip(labels).filter(|&(&p, &l)| p != class && l == class).count() as f64;
        if tp == 0.0 {
            0.0
        } else {
            2.0 * tp / (2.0 * tp + fp + fneg)
        }
    };
    (f1(true) + f1(false)) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BinaryMetrics {
    pub auc: f64,
    pub acc: f64,
    pub f1_macro: f64,
}

/// Metrics of probabilities `p`, thresholded at 0.5 for accuracy and F1.
pub fn evaluate(p: &[f64], labels: &[bool]) -> Result<BinaryMetrics> {
    let pred: Vec<bool> = p.iter().map(|&v| v >= 0.5).collect();
    Ok(BinaryMetrics { auc: auc(p, labels)?, acc: accuracy(&pred, labels), f1_macro: f1_macro(&pred, labels) })
}
