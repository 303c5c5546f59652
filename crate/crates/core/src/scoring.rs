//! Effectiveness metrics for scoring estimated answers against ground
//! truth: precision/recall/F-measure for deliverable lists, and normalized
//! Kendall tau distance for patch rankings.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("ground truth set is empty")]
    EmptyGroundTruth,
    #[error("rankings are not permutations of each other: {0}")]
    NotAPermutation(String),
    #[error("rankings need at least two entries")]
    TooShort,
}

/// Precision, recall, and their harmonic mean over an estimated vs. actual
/// impacted-deliverable set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ListScore {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub estimated_size: usize,
    pub actual_size: usize,
    pub intersection_size: usize,
    /// Precision is undefined for an empty estimate; it is reported as 0
    /// with this flag set.
    pub empty_estimate: bool,
}

/// precision = |E ∩ A| / |E|, recall = |E ∩ A| / |A|, F = 2PR / (P + R).
pub fn score_list(
    estimated: &BTreeSet<String>,
    actual: &BTreeSet<String>,
) -> Result<ListScore, ScoreError> {
    if actual.is_empty() {
        return Err(ScoreError::EmptyGroundTruth);
    }
    let intersection_size = estimated.intersection(actual).count();
    let empty_estimate = estimated.is_empty();
    let precision = if empty_estimate {
        0.0
    } else {
        intersection_size as f64 / estimated.len() as f64
    };
    let recall = intersection_size as f64 / actual.len() as f64;
    let f_measure = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ListScore {
        precision,
        recall,
        f_measure,
        estimated_size: estimated.len(),
        actual_size: actual.len(),
        intersection_size,
        empty_estimate,
    })
}

/// Normalized pairwise disagreement between two rankings, in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankScore {
    pub tau_distance: f64,
    pub discordant_pairs: u64,
    pub total_pairs: u64,
}

/// Kendall tau ranking distance: the fraction of unordered pairs the two
/// rankings order differently. 0 means identical order, 1 exact reversal.
/// `estimate` must be a permutation of `truth`; ties are not supported.
pub fn score_ranking(estimate: &[String], truth: &[String]) -> Result<RankScore, ScoreError> {
    if truth.len() < 2 {
        return Err(ScoreError::TooShort);
    }
    let truth_set: BTreeSet<&String> = truth.iter().collect();
    if truth_set.len() != truth.len() {
        return Err(ScoreError::NotAPermutation(
            "ground truth contains duplicates".to_string(),
        ));
    }
    let estimate_set: BTreeSet<&String> = estimate.iter().collect();
    if estimate_set.len() != estimate.len() {
        return Err(ScoreError::NotAPermutation(
            "estimate contains duplicates".to_string(),
        ));
    }
    if estimate.len() != truth.len() || estimate_set != truth_set {
        return Err(ScoreError::NotAPermutation(
            "rankings do not contain the same items".to_string(),
        ));
    }

    // Map the estimate into truth positions and count inversions.
    let position = |item: &String| truth.iter().position(|t| t == item).expect("checked");
    let sequence: Vec<usize> = estimate.iter().map(position).collect();
    let mut discordant_pairs = 0u64;
    for i in 0..sequence.len() {
        for j in i + 1..sequence.len() {
            if sequence[i] > sequence[j] {
                discordant_pairs += 1;
            }
        }
    }
    let n = truth.len() as u64;
    let total_pairs = n * (n - 1) / 2;
    Ok(RankScore {
        tau_distance: discordant_pairs as f64 / total_pairs as f64,
        discordant_pairs,
        total_pairs,
    })
}
