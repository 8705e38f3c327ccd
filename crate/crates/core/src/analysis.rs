//! Score-cutoff partitioning of a test set, subset accuracy against external
//! prediction files, chi-squared significance, and overlap-proportion curves.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use thiserror::Error;

use crate::retrieval::OverlapRecord;
use crate::schema::RawInstance;

/// Cutoffs reported by default: "any overlap", and the two stricter tiers.
pub const DEFAULT_CUTOFFS: [f64; 3] = [0.0, 25.0, 35.0];
pub const SIGNIFICANCE_ALPHA: f64 = 0.05;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("reading predictions: {0}")]
    Io(#[from] std::io::Error),
    #[error("prediction line {line}: {detail}")]
    BadLine { line: usize, detail: String },
    #[error("duplicate prediction for instance {id} (line {line})")]
    DuplicatePrediction { id: String, line: usize },
    #[error("model {model} has no prediction for {count} instance(s): {}", ids.join(", "), count = ids.len())]
    MissingPredictions { model: String, ids: Vec<String> },
    #[error("no score for {count} instance(s): {}", ids.join(", "), count = ids.len())]
    MissingScores { ids: Vec<String> },
    #[error("duplicate instance id {id}")]
    DuplicateInstance { id: String },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StatError {
    #[error("degenerate 2x2 table: a zero row or column marginal leaves nothing to test")]
    DegenerateTable,
}

/// Model predictions keyed by instance id; answers are 1 or 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionFile {
    pub model_name: String,
    pub entries: BTreeMap<String, u8>,
}

impl PredictionFile {
    /// Parse tab-separated `instance_id<TAB>answer` lines. Blank lines and
    /// `#` comments are skipped; duplicate ids and answers other than 1 or 2
    /// are rejected.
    pub fn parse(model_name: &str, text: &str) -> Result<Self, DataError> {
        let mut entries = BTreeMap::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw_line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut parts = trimmed.split('\t');
            let (Some(id), Some(answer), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(DataError::BadLine {
                    line,
                    detail: "expected exactly two tab-separated fields".to_string(),
                });
            };
            let id = id.trim();
            if id.is_empty() {
                return Err(DataError::BadLine {
                    line,
                    detail: "empty instance id".to_string(),
                });
            }
            let answer: u8 = answer.trim().parse().map_err(|_| DataError::BadLine {
                line,
                detail: format!("answer {:?} is not a number", answer.trim()),
            })?;
            if answer != 1 && answer != 2 {
                return Err(DataError::BadLine {
                    line,
                    detail: format!("answer must be 1 or 2, got {answer}"),
                });
            }
            if entries.insert(id.to_string(), answer).is_some() {
                return Err(DataError::DuplicatePrediction {
                    id: id.to_string(),
                    line,
                });
            }
        }
        Ok(PredictionFile {
            model_name: model_name.to_string(),
            entries,
        })
    }

    /// Read a prediction file; the model name is the file stem.
    pub fn load(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path)?;
        let model_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".to_string());
        Self::parse(&model_name, &text)
    }
}

/// One row of the cutoff analysis. Accuracy fields are absent when the
/// corresponding subset is empty; the test statistics are absent when the
/// contingency table has a zero marginal (nothing to test).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionReport {
    pub model_name: String,
    pub cutoff: f64,
    pub overlap_size: usize,
    pub nonoverlap_size: usize,
    pub overlap_acc: Option<f64>,
    pub nonoverlap_acc: Option<f64>,
    pub overall_acc: f64,
    pub perf_diff: Option<f64>,
    pub chi2: Option<f64>,
    pub p_value: Option<f64>,
    pub significant: Option<bool>,
}

/// Proportion of instances whose score strictly exceeds each grid cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapCurve {
    pub points: Vec<(f64, f64)>,
}

/// Split instance ids by `score > cutoff` (strict, so cutoff 0 means "any
/// positive score"). Both halves come back sorted by id.
pub fn partition(scores: &BTreeMap<String, f64>, cutoff: f64) -> (Vec<String>, Vec<String>) {
    assert!(!scores.is_empty(), "partition requires at least one score");
    let mut overlap = Vec::new();
    let mut nonoverlap = Vec::new();
    for (id, &score) in scores {
        if score > cutoff {
            overlap.push(id.clone());
        } else {
            nonoverlap.push(id.clone());
        }
    }
    (overlap, nonoverlap)
}

/// Fraction of `subset` where the model's answer matches gold. Empty subsets
/// have no accuracy and return `None`.
pub fn subset_accuracy(
    subset: &[String],
    predictions: &PredictionFile,
    gold: &BTreeMap<String, u8>,
) -> Result<Option<f64>, DataError> {
    if subset.is_empty() {
        return Ok(None);
    }
    let missing: Vec<String> = subset
        .iter()
        .filter(|id| !predictions.entries.contains_key(*id))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(DataError::MissingPredictions {
            model: predictions.model_name.clone(),
            ids: missing,
        });
    }
    let correct = subset
        .iter()
        .filter(|id| {
            let answer = gold
                .get(*id)
                .unwrap_or_else(|| panic!("instance {id} is not in the gold label set"));
            predictions.entries[*id] == *answer
        })
        .count();
    Ok(Some(correct as f64 / subset.len() as f64))
}

fn chi2_impl(table: [[u64; 2]; 2], yates: bool) -> Result<(f64, f64), StatError> {
    let a = table[0][0] as f64;
    let b = table[0][1] as f64;
    let c = table[1][0] as f64;
    let d = table[1][1] as f64;
    let n = a + b + c + d;
    let marginals = [a + b, c + d, a + c, b + d];
    if marginals.iter().any(|&m| m == 0.0) {
        return Err(StatError::DegenerateTable);
    }
    let mut diff = (a * d - b * c).abs();
    if yates {
        diff = (diff - n / 2.0).max(0.0);
    }
    let statistic = n * diff * diff / marginals.iter().product::<f64>();
    // Survival function of chi-squared with 1 df: P(X > s) = erfc(sqrt(s/2)).
    let p_value = erfc((statistic / 2.0).sqrt()).clamp(0.0, 1.0);
    Ok((statistic, p_value))
}

/// Pearson chi-squared test on a 2x2 contingency table, no continuity
/// correction; returns `(statistic, p_value)` at 1 degree of freedom.
pub fn chi_squared_2x2(table: [[u64; 2]; 2]) -> Result<(f64, f64), StatError> {
    chi2_impl(table, false)
}

/// Same test with the Yates continuity correction applied.
pub fn chi_squared_2x2_yates(table: [[u64; 2]; 2]) -> Result<(f64, f64), StatError> {
    chi2_impl(table, true)
}

fn correct_incorrect(
    ids: &[String],
    predictions: &PredictionFile,
    gold: &BTreeMap<String, u8>,
) -> [u64; 2] {
    let correct = ids
        .iter()
        .filter(|id| predictions.entries[*id] == gold[*id])
        .count() as u64;
    [correct, ids.len() as u64 - correct]
}

/// Produce one [`PartitionReport`] per cutoff: partition the test set by
/// score, measure subset accuracies, and test the correct/incorrect ×
/// overlap/nonoverlap contingency table for independence.
pub fn analyze(
    gold: &BTreeMap<String, u8>,
    scores: &BTreeMap<String, f64>,
    predictions: &PredictionFile,
    cutoffs: &[f64],
    yates: bool,
) -> Result<Vec<PartitionReport>, DataError> {
    assert!(!gold.is_empty(), "analyze requires a nonempty test set");
    let unscored: Vec<String> = gold
        .keys()
        .filter(|id| !scores.contains_key(*id))
        .cloned()
        .collect();
    if !unscored.is_empty() {
        return Err(DataError::MissingScores { ids: unscored });
    }
    // Scores may cover more instances than this test set; restrict to gold.
    let test_scores: BTreeMap<String, f64> =
        gold.keys().map(|id| (id.clone(), scores[id])).collect();
    let all_ids: Vec<String> = gold.keys().cloned().collect();
    let overall_acc = subset_accuracy(&all_ids, predictions, gold)?
        .expect("test set is nonempty, so overall accuracy exists");

    let mut reports = Vec::with_capacity(cutoffs.len());
    for &cutoff in cutoffs {
        let (overlap, nonoverlap) = partition(&test_scores, cutoff);
        let overlap_acc = subset_accuracy(&overlap, predictions, gold)?;
        let nonoverlap_acc = subset_accuracy(&nonoverlap, predictions, gold)?;
        let perf_diff = match (overlap_acc, nonoverlap_acc) {
            (Some(o), Some(n)) => Some(o - n),
            _ => None,
        };
        let table = [
            correct_incorrect(&overlap, predictions, gold),
            correct_incorrect(&nonoverlap, predictions, gold),
        ];
        let (chi2, p_value) = match chi2_impl(table, yates) {
            Ok((statistic, p)) => (Some(statistic), Some(p)),
            Err(StatError::DegenerateTable) => (None, None),
        };
        reports.push(PartitionReport {
            model_name: predictions.model_name.clone(),
            cutoff,
            overlap_size: overlap.len(),
            nonoverlap_size: nonoverlap.len(),
            overlap_acc,
            nonoverlap_acc,
            overall_acc,
            perf_diff,
            chi2,
            p_value,
            significant: p_value.map(|p| p < SIGNIFICANCE_ALPHA),
        });
    }
    Ok(reports)
}

/// Overlap proportion at every cutoff of an ascending grid.
pub fn overlap_curve(scores: &BTreeMap<String, f64>, cutoff_grid: &[f64]) -> OverlapCurve {
    assert!(
        !scores.is_empty(),
        "overlap_curve requires at least one score"
    );
    debug_assert!(
        cutoff_grid.windows(2).all(|w| w[0] <= w[1]),
        "cutoff grid must be ascending"
    );
    let n = scores.len() as f64;
    let points = cutoff_grid
        .iter()
        .map(|&t| (t, scores.values().filter(|&&s| s > t).count() as f64 / n))
        .collect();
    OverlapCurve { points }
}

/// Gold answers keyed by instance id, rejecting duplicate ids.
pub fn gold_answers(instances: &[RawInstance]) -> Result<BTreeMap<String, u8>, DataError> {
    let mut gold = BTreeMap::new();
    for instance in instances {
        if gold.insert(instance.id.clone(), instance.answer).is_some() {
            return Err(DataError::DuplicateInstance {
                id: instance.id.clone(),
            });
        }
    }
    Ok(gold)
}

/// Max scores keyed by instance id, rejecting duplicate ids.
pub fn score_map(records: &[OverlapRecord]) -> Result<BTreeMap<String, f64>, DataError> {
    let mut scores = BTreeMap::new();
    for record in records {
        if scores
            .insert(record.instance_id.clone(), record.max_score)
            .is_some()
        {
            return Err(DataError::DuplicateInstance {
                id: record.instance_id.clone(),
            });
        }
    }
    Ok(scores)
}
