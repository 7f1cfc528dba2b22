use crate::error::{Error, Result};

/// ROC AUC via the Mann-Whitney U statistic with mid-ranks, so tied scores
/// contribute one half. `labels[i]` is true for the positive class.
pub fn auc(labels: &[bool], scores: &[f64]) -> Result<f64> {
    if labels.len() != scores.len() {
        return Err(Error::Metric(format!("{} labels but {} scores", labels.len(), scores.len())));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::Metric("NaN score".into()));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Metric("AUC needs both classes".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut pos_rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // 1-based ranks i+1..=j+1 share their mean.
        let mid = (i + j) as f64 / 2.0 + 1.0;
        pos_rank_sum += mid * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let u = pos_rank_sum - (n_pos * (n_pos + 1)) as f64 / 2.0;
    Ok(u / (n_pos as f64 * n_neg as f64))
}

/// F1 of the positive class. Zero when there are no true positives.
pub fn f1_binary(labels: &[bool], predicted: &[bool]) -> Result<f64> {
    if labels.len() != predicted.len() {
        return Err(Error::Metric(format!("{} labels but {} predictions", labels.len(), predicted.len())));
    }
    if labels.iter().all(|&l| l) || labels.iter().all(|&l| !l) {
        return Err(Error::Metric("F1 needs both classes in the labels".into()));
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&l, &p) in labels.iter().zip(predicted) {
        match (l, p) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    if tp == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * tp as f64 / (2 * tp + fp + fn_) as f64)
}

/// Probabilities at or above 0.5 are predicted positive.
pub fn threshold(scores: &[f64]) -> Vec<bool> {
    scores.iter().map(|&p| p >= 0.5).collect()
}

/// Mean and sample (n-1) standard deviation; std is 0 for a single value.
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return Some((mean, 0.0));
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Some((mean, var.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pairwise_auc(labels: &[bool], scores: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for (i, &li) in labels.iter().enumerate() {
            for (j, &lj) in labels.iter().enumerate() {
                if li && !lj {
                    den += 1.0;
                    num += if scores[i] > scores[j] {
                        1.0
                    } else if scores[i] == scores[j] {
                        0.5
                    } else {
                        0.0
                    };
                }
            }
        }
        num / den
    }

    #[test]
    fn auc_examples() {
        assert_eq!(auc(&[false, false, true, true], &[0.1, 0.2, 0.8, 0.9]).unwrap(), 1.0);
        assert_eq!(auc(&[true, false], &[0.3, 0.3]).unwrap(), 0.5);
        assert!(auc(&[true, true], &[0.3, 0.4]).is_err());
        assert!(auc(&[true], &[0.3, 0.4]).is_err());
    }

    #[test]
    fn f1_examples() {
        let labels = [true, false, true];
        assert_eq!(f1_binary(&labels, &labels).unwrap(), 1.0);

        let labels: Vec<bool> = (0..100).map(|i| i < 90).collect();
        let f1 = f1_binary(&labels, &[true; 100]).unwrap();
        assert!((f1 - 2.0 * 0.9 / 1.9).abs() < 1e-12);
        assert!((f1 - 0.9474).abs() < 1e-4);

        assert_eq!(f1_binary(&[true, false], &[false, false]).unwrap(), 0.0);
        assert!(f1_binary(&[true, true], &[true, true]).is_err());
    }

    #[test]
    fn mean_std_examples() {
        assert_eq!(mean_std(&[0.7; 5]), Some((0.7, 0.0)));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(mean_std(&[]), None);
    }

    proptest! {
        #[test]
        fn auc_matches_pairwise(raw in proptest::collection::vec((any::<bool>(), 0u8..12), 2..200)) {
            let labels: Vec<bool> = raw.iter().map(|r| r.0).collect();
            prop_assume!(labels.iter().any(|&l| l) && labels.iter().any(|&l| !l));
            // Coarse scores force plenty of ties.
            let scores: Vec<f64> = raw.iter().map(|r| r.1 as f64 / 11.0).collect();
            prop_assert!((auc(&labels, &scores).unwrap() - pairwise_auc(&labels, &scores)).abs() < 1e-12);
        }
    }
}
