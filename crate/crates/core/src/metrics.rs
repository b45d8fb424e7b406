//! Classification metrics, context-length buckets, significance testing,
//! and multi-rater agreement statistics.
//!
//! Macro scores average over the task's full label set; a class with no
//! predictions (or no gold instances) contributes 0 to the mean and is
//! flagged in the report. Percentages are rounded to two decimals with
//! round-half-even.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Label;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("predictions and golds differ in length ({predictions} vs {golds})")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("empty input")]
    Empty,
    #[error("paired samples must have equal length >= 2")]
    BadSampleShape,
    #[error("zero-variance differences: the paired t statistic is undefined")]
    DegenerateSample,
    #[error("expected agreement is 1 (a single category everywhere): kappa undefined")]
    UndefinedKappa,
    #[error("rating matrix is not rectangular or has fewer than 2 raters")]
    BadMatrix,
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Rounds a percentage to two decimals with ties to even.
pub fn round_pct(value: f64) -> f64 {
    (value * 100.0).round_ties_even() / 100.0
}

/// Per-class precision/recall/F1 and counts.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold instances of this class.
    pub support: usize,
    /// Predictions of this class.
    pub predicted: usize,
    pub correct: usize,
}

/// Evaluation report: macro scores in percent (two decimals), accuracy,
/// per-class breakdown, and optional per-context-length-bucket F1.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct MetricsReport {
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub per_class: BTreeMap<String, ClassMetrics>,
    /// Classes whose precision or recall hit the zero-division convention.
    pub zero_division_classes: Vec<String>,
    /// Macro-F1 per context-length bucket, when bucketing was requested.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bucket_f1: BTreeMap<String, f64>,
    /// Fraction of abstained predictions, when abstention is possible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abstain_rate: Option<f64>,
    pub instances: usize,
}

/// Raw (unrounded, fraction-valued) confusion tallies over a label set.
#[derive(Debug, Clone)]
pub struct Confusion {
    pub labels: Vec<Label>,
    /// counts[gold][pred]; the extra last column counts abstentions.
    pub counts: Vec<Vec<usize>>,
    pub total: usize,
}

impl Confusion {
    pub fn tally(
        predictions: &[Option<Label>],
        golds: &[Label],
        labels: &[Label],
    ) -> Result<Self, MetricsError> {
        if predictions.len() != golds.len() {
            return Err(MetricsError::LengthMismatch {
                predictions: predictions.len(),
                golds: golds.len(),
            });
        }
        if golds.is_empty() {
            return Err(MetricsError::Empty);
        }
        let index = |label: &Label| labels.iter().position(|l| l == label);
        let mut counts = vec![vec![0usize; labels.len() + 1]; labels.len()];
        for (pred, gold) in predictions.iter().zip(golds) {
            let g = index(gold).expect("gold label in label set");
            let p = match pred {
                Some(p) => index(p).expect("predicted label in label set"),
                None => labels.len(),
            };
            counts[g][p] += 1;
        }
        Ok(Self {
            labels: labels.to_vec(),
            counts,
            total: golds.len(),
        })
    }

    fn class_counts(&self, class: usize) -> (usize, usize, usize) {
        let support: usize = self.counts[class].iter().sum();
        let predicted: usize = self.counts.iter().map(|row| row[class]).sum();
        let correct = self.counts[class][class];
        (support, predicted, correct)
    }
}

/// Builds the full report from a confusion tally.
pub fn report_from_confusion(confusion: &Confusion, abstains: Option<usize>) -> MetricsReport {
    let mut per_class = BTreeMap::new();
    let mut zero_division = Vec::new();
    let mut sum_p = 0.0;
    let mut sum_r = 0.0;
    let mut sum_f = 0.0;
    let mut total_correct = 0usize;
    for (i, label) in confusion.labels.iter().enumerate() {
        let (support, predicted, correct) = confusion.class_counts(i);
        total_correct += correct;
        let mut undefined = false;
        let precision = if predicted == 0 {
            undefined = true;
            0.0
        } else {
            correct as f64 / predicted as f64
        };
        let recall = if support == 0 {
            undefined = true;
            0.0
        } else {
            correct as f64 / support as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        if undefined {
            zero_division.push(label.value().to_string());
        }
        sum_p += precision;
        sum_r += recall;
        sum_f += f1;
        per_class.insert(
            label.value().to_string(),
            ClassMetrics {
                precision: round_pct(precision * 100.0),
                recall: round_pct(recall * 100.0),
                f1: round_pct(f1 * 100.0),
                support,
                predicted,
                correct,
            },
        );
    }
    let k = confusion.labels.len() as f64;
    MetricsReport {
        macro_precision: round_pct(sum_p / k * 100.0),
        macro_recall: round_pct(sum_r / k * 100.0),
        macro_f1: round_pct(sum_f / k * 100.0),
        accuracy: round_pct(total_correct as f64 / confusion.total as f64 * 100.0),
        per_class,
        zero_division_classes: zero_division,
        bucket_f1: BTreeMap::new(),
        abstain_rate: abstains.map(|a| round_pct(a as f64 / confusion.total as f64 * 100.0)),
        instances: confusion.total,
    }
}

/// Macro precision/recall/F1 in percent, averaged over the full label set.
pub fn macro_prf(
    predictions: &[Label],
    golds: &[Label],
    labels: &[Label],
) -> Result<(f64, f64, f64), MetricsError> {
    let preds: Vec<Option<Label>> = predictions.iter().copied().map(Some).collect();
    let confusion = Confusion::tally(&preds, golds, labels)?;
    let report = report_from_confusion(&confusion, None);
    Ok((report.macro_precision, report.macro_recall, report.macro_f1))
}

/// Fraction of correct predictions, in percent.
pub fn accuracy(predictions: &[Label], golds: &[Label]) -> Result<f64, MetricsError> {
    if predictions.len() != golds.len() {
        return Err(MetricsError::LengthMismatch {
            predictions: predictions.len(),
            golds: golds.len(),
        });
    }
    if golds.is_empty() {
        return Err(MetricsError::Empty);
    }
    let correct = predictions
        .iter()
        .zip(golds)
        .filter(|(p, g)| p == g)
        .count();
    Ok(round_pct(correct as f64 / golds.len() as f64 * 100.0))
}

/// Builds the standard report, optionally with abstaining predictions.
pub fn evaluation_report(
    predictions: &[Option<Label>],
    golds: &[Label],
    labels: &[Label],
) -> Result<MetricsReport, MetricsError> {
    let abstains = predictions.iter().filter(|p| p.is_none()).count();
    let confusion = Confusion::tally(predictions, golds, labels)?;
    let track_abstains = abstains > 0 || predictions.iter().any(|p| p.is_none());
    Ok(report_from_confusion(
        &confusion,
        if track_abstains { Some(abstains) } else { None },
    ))
}

/// A per-instance result carrying the instance's context length.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceResult {
    pub instance_id: String,
    pub prediction: Option<Label>,
    pub gold: Label,
    pub context_len: usize,
}

/// Groups results by exact context length (lengths >= `cap` merge into one
/// final bucket) and computes macro-F1 per bucket. Empty buckets are absent.
pub fn bucket_by_context_length(
    records: &[InstanceResult],
    labels: &[Label],
    cap: usize,
) -> Result<BTreeMap<String, f64>, MetricsError> {
    let mut groups: BTreeMap<usize, Vec<&InstanceResult>> = BTreeMap::new();
    for record in records {
        let bucket = record.context_len.min(cap);
        groups.entry(bucket).or_default().push(record);
    }
    let mut out = BTreeMap::new();
    for (bucket, members) in groups {
        let preds: Vec<Option<Label>> = members.iter().map(|r| r.prediction).collect();
        let golds: Vec<Label> = members.iter().map(|r| r.gold).collect();
        let confusion = Confusion::tally(&preds, &golds, labels)?;
        let report = report_from_confusion(&confusion, None);
        let key = if bucket == cap {
            format!(">={cap}")
        } else {
            bucket.to_string()
        };
        out.insert(key, report.macro_f1);
    }
    Ok(out)
}

/// Paired two-sided Student's t-test.
///
/// Returns the t statistic (n-1 degrees of freedom) and the two-sided
/// p-value from the numerically integrated t distribution.
pub fn paired_t_test(sample_a: &[f64], sample_b: &[f64]) -> Result<(f64, f64), MetricsError> {
    if sample_a.len() != sample_b.len() || sample_a.len() < 2 {
        return Err(MetricsError::BadSampleShape);
    }
    let diffs: Vec<f64> = sample_a
        .iter()
        .zip(sample_b)
        .map(|(a, b)| a - b)
        .collect();
    let n = diffs.len() as f64;
    let mean = diffs.iter().sum::<f64>() / n;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Err(MetricsError::DegenerateSample);
    }
    let t = mean / (var.sqrt() / n.sqrt());
    let df = n - 1.0;
    let p = 2.0 * (1.0 - student_t_cdf(t.abs(), df));
    Ok((t, p.clamp(0.0, 1.0)))
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = COEFFS[0];
        for (i, c) in COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + 7.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

fn t_pdf(x: f64, df: f64) -> f64 {
    let norm = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (norm - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fb: f64, fm: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fm: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = (a + b) / 2.0;
    let lm = (a + m) / 2.0;
    let rm = (m + b) / 2.0;
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(f, a, m, fa, fm, flm);
    let right = simpson(f, m, b, fm, fb, frm);
    if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
        return left + right + (left + right - whole) / 15.0;
    }
    adaptive_simpson(f, a, m, fa, fm, flm, left, tol / 2.0, depth - 1)
        + adaptive_simpson(f, m, b, fm, fb, frm, right, tol / 2.0, depth - 1)
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let g: &dyn Fn(f64) -> f64 = &f;
    let fa = g(a);
    let fb = g(b);
    let fm = g((a + b) / 2.0);
    let whole = simpson(g, a, b, fa, fb, fm);
    adaptive_simpson(g, a, b, fa, fb, fm, whole, tol, 40)
}

/// CDF of the Student t distribution, integrated numerically
/// (absolute tolerance well below 1e-6).
pub fn student_t_cdf(x: f64, df: f64) -> f64 {
    let tail = integrate(|u| t_pdf(u, df), 0.0, x.abs(), 1e-10);
    if x >= 0.0 {
        (0.5 + tail).min(1.0)
    } else {
        (0.5 - tail).max(0.0)
    }
}

/// Items x annotators ratings over a fixed category set.
///
/// `ratings[item][annotator]` is a category index in `0..categories`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatingMatrix {
    pub ratings: Vec<Vec<usize>>,
    pub categories: usize,
}

impl RatingMatrix {
    pub fn new(ratings: Vec<Vec<usize>>, categories: usize) -> Result<Self, MetricsError> {
        if ratings.is_empty() {
            return Err(MetricsError::BadMatrix);
        }
        let raters = ratings[0].len();
        if raters < 2 || ratings.iter().any(|row| row.len() != raters) {
            return Err(MetricsError::BadMatrix);
        }
        if ratings.iter().flatten().any(|&c| c >= categories) {
            return Err(MetricsError::BadMatrix);
        }
        Ok(Self { ratings, categories })
    }

    pub fn raters(&self) -> usize {
        self.ratings[0].len()
    }

    fn category_counts(&self, item: usize) -> Vec<usize> {
        let mut counts = vec![0usize; self.categories];
        for &c in &self.ratings[item] {
            counts[c] += 1;
        }
        counts
    }
}

/// Fleiss's kappa over the rating matrix.
pub fn fleiss_kappa(matrix: &RatingMatrix) -> Result<f64, MetricsError> {
    let n = matrix.ratings.len() as f64;
    let r = matrix.raters() as f64;
    let mut p_bar = 0.0;
    let mut category_totals = vec![0.0f64; matrix.categories];
    for item in 0..matrix.ratings.len() {
        let counts = matrix.category_counts(item);
        let sum_sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
        p_bar += (sum_sq - r) / (r * (r - 1.0));
        for (j, &c) in counts.iter().enumerate() {
            category_totals[j] += c as f64;
        }
    }
    p_bar /= n;
    let p_e: f64 = category_totals
        .iter()
        .map(|&t| (t / (n * r)).powi(2))
        .sum();
    if (1.0 - p_e).abs() < 1e-12 {
        return Err(MetricsError::UndefinedKappa);
    }
    Ok((p_bar - p_e) / (1.0 - p_e))
}

/// Mean over items of (agreeing rater pairs / total rater pairs).
pub fn pairwise_agreement(matrix: &RatingMatrix) -> f64 {
    let r = matrix.raters();
    let pairs = (r * (r - 1) / 2) as f64;
    let mut total = 0.0;
    for item in 0..matrix.ratings.len() {
        let counts = matrix.category_counts(item);
        let agreeing: usize = counts.iter().map(|&c| c * (c - 1) / 2).sum();
        total += agreeing as f64 / pairs;
    }
    total / matrix.ratings.len() as f64
}

/// Modal category of one item's ratings, or `None` on a tie.
pub fn majority_vote(row: &[usize], categories: usize) -> Option<usize> {
    let mut counts = vec![0usize; categories];
    for &c in row {
        counts[c] += 1;
    }
    let best = *counts.iter().max()?;
    let mut winners = counts.iter().enumerate().filter(|(_, &c)| c == best);
    let winner = winners.next()?.0;
    if winners.next().is_some() {
        None
    } else {
        Some(winner)
    }
}

/// One row of the ratings CSV: item_id, annotator_id, aspect, score.
#[derive(Debug, Deserialize)]
struct RatingRow {
    item_id: String,
    annotator_id: String,
    aspect: String,
    score: usize,
}

/// Loads rating matrices from CSV, one matrix per aspect.
///
/// Every (item, annotator) pair must be rated within an aspect; categories
/// are the distinct scores across the whole file, in ascending order.
pub fn load_ratings_csv(
    path: &Path,
) -> Result<BTreeMap<String, (RatingMatrix, Vec<usize>)>, MetricsError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| MetricsError::Csv(e.to_string()))?;
    let mut rows = Vec::new();
    for row in reader.deserialize::<RatingRow>() {
        rows.push(row.map_err(|e| MetricsError::Csv(e.to_string()))?);
    }
    if rows.is_empty() {
        return Err(MetricsError::Empty);
    }
    let mut scores: Vec<usize> = rows.iter().map(|r| r.score).collect();
    scores.sort_unstable();
    scores.dedup();
    let category_of = |score: usize| scores.iter().position(|&s| s == score).unwrap();

    let mut by_aspect: BTreeMap<String, BTreeMap<String, BTreeMap<String, usize>>> =
        BTreeMap::new();
    for row in &rows {
        by_aspect
            .entry(row.aspect.clone())
            .or_default()
            .entry(row.item_id.clone())
            .or_default()
            .insert(row.annotator_id.clone(), row.score);
    }
    let mut out = BTreeMap::new();
    for (aspect, items) in by_aspect {
        let annotators: Vec<String> = {
            let mut set: Vec<String> = items
                .values()
                .flat_map(|m| m.keys().cloned())
                .collect();
            set.sort();
            set.dedup();
            set
        };
        let mut ratings = Vec::with_capacity(items.len());
        for (item, cells) in &items {
            let mut row = Vec::with_capacity(annotators.len());
            for annotator in &annotators {
                let score = cells.get(annotator).ok_or_else(|| {
                    MetricsError::Csv(format!(
                        "aspect {aspect}: item {item} missing a rating from {annotator}"
                    ))
                })?;
                row.push(category_of(*score));
            }
            ratings.push(row);
        }
        let matrix = RatingMatrix::new(ratings, scores.len())?;
        out.insert(aspect, (matrix, scores.clone()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const KIALO: &[Label] = &[Label::Impactful, Label::MediumImpact, Label::NotImpactful];

    /// Brute-force per-class P/R/F1 from an explicit confusion matrix,
    /// independent of the tally path above.
    fn brute_force_macro(preds: &[Label], golds: &[Label], labels: &[Label]) -> (f64, f64, f64) {
        let mut sum_p = 0.0;
        let mut sum_r = 0.0;
        let mut sum_f = 0.0;
        for label in labels {
            let tp = preds
                .iter()
                .zip(golds)
                .filter(|(p, g)| *p == label && *g == label)
                .count() as f64;
            let fp = preds
                .iter()
                .zip(golds)
                .filter(|(p, g)| *p == label && *g != label)
                .count() as f64;
            let fn_ = preds
                .iter()
                .zip(golds)
                .filter(|(p, g)| *p != label && *g == label)
                .count() as f64;
            let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let r = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
            sum_p += p;
            sum_r += r;
            sum_f += f;
        }
        let k = labels.len() as f64;
        (
            round_pct(sum_p / k * 100.0),
            round_pct(sum_r / k * 100.0),
            round_pct(sum_f / k * 100.0),
        )
    }

    fn majority_fixture() -> (Vec<Label>, Vec<Label>) {
        let mut golds = Vec::new();
        golds.extend(std::iter::repeat_n(Label::Impactful, 646));
        golds.extend(std::iter::repeat_n(Label::MediumImpact, 207));
        golds.extend(std::iter::repeat_n(Label::NotImpactful, 255));
        let preds = vec![Label::Impactful; golds.len()];
        (preds, golds)
    }

    #[test]
    fn majority_baseline_values() {
        let (preds, golds) = majority_fixture();
        let (p, r, f1) = macro_prf(&preds, &golds, KIALO).unwrap();
        assert_eq!(p, 19.43);
        assert_eq!(r, 33.33);
        assert_eq!(f1, 24.55);
    }

    #[test]
    fn perfect_predictions() {
        let golds = vec![Label::Impactful, Label::MediumImpact, Label::NotImpactful];
        let (p, r, f1) = macro_prf(&golds, &golds, KIALO).unwrap();
        assert_eq!((p, r, f1), (100.0, 100.0, 100.0));
    }

    #[test]
    fn four_instance_confusion_matches_bruteforce() {
        let golds = vec![
            Label::Impactful,
            Label::Impactful,
            Label::MediumImpact,
            Label::NotImpactful,
        ];
        let preds = vec![
            Label::Impactful,
            Label::MediumImpact,
            Label::MediumImpact,
            Label::NotImpactful,
        ];
        let got = macro_prf(&preds, &golds, KIALO).unwrap();
        let want = brute_force_macro(&preds, &golds, KIALO);
        assert_eq!(got, want);
    }

    #[test]
    fn accuracy_half() {
        let golds = vec![Label::Con, Label::Con, Label::Pro, Label::Pro];
        let preds = vec![Label::Con, Label::Pro, Label::Con, Label::Pro];
        assert_eq!(accuracy(&preds, &golds).unwrap(), 50.00);
    }

    #[test]
    fn accuracy_majority_share() {
        // A synthetic corpus matching the reported test distribution: the
        // majority predictor scores exactly the majority share.
        let mut golds = Vec::new();
        golds.extend(std::iter::repeat_n(Label::Con, 6262));
        golds.extend(std::iter::repeat_n(Label::Pro, 3738));
        let preds = vec![Label::Con; golds.len()];
        assert_eq!(accuracy(&preds, &golds).unwrap(), 62.62);
    }

    #[test]
    fn length_mismatch_is_error() {
        let e = accuracy(&[Label::Con], &[Label::Con, Label::Pro]).unwrap_err();
        assert!(matches!(e, MetricsError::LengthMismatch { .. }));
    }

    #[test]
    fn single_instance_zero_division_flagged() {
        let report =
            evaluation_report(&[Some(Label::Impactful)], &[Label::Impactful], KIALO).unwrap();
        assert_eq!(report.accuracy, 100.0);
        assert!(report
            .zero_division_classes
            .contains(&"Medium Impact".to_string()));
    }

    #[test]
    fn buckets_match_subset_metrics() {
        let records = vec![
            InstanceResult {
                instance_id: "a".into(),
                prediction: Some(Label::Impactful),
                gold: Label::Impactful,
                context_len: 0,
            },
            InstanceResult {
                instance_id: "b".into(),
                prediction: Some(Label::MediumImpact),
                gold: Label::Impactful,
                context_len: 1,
            },
        ];
        let buckets = bucket_by_context_length(&records, KIALO, 5).unwrap();
        assert_eq!(buckets.len(), 2);
        let (_, _, f_zero) =
            macro_prf(&[Label::Impactful], &[Label::Impactful], KIALO).unwrap();
        assert_eq!(buckets["0"], f_zero);
    }

    #[test]
    fn buckets_cap_merges() {
        let records = vec![InstanceResult {
            instance_id: "a".into(),
            prediction: Some(Label::Impactful),
            gold: Label::Impactful,
            context_len: 7,
        }];
        let buckets = bucket_by_context_length(&records, KIALO, 5).unwrap();
        assert!(buckets.contains_key(">=5"));
    }

    #[test]
    fn t_test_hand_case() {
        // differences (1, 2, 3): mean 2, sd 1, t = 2 / (1/sqrt(3)).
        let a = [2.0, 4.0, 6.0];
        let b = [1.0, 2.0, 3.0];
        let (t, p) = paired_t_test(&a, &b).unwrap();
        assert!((t - 3.4641).abs() < 1e-3, "t = {t}");
        assert!((p - 0.0742).abs() < 1e-3, "p = {p}");
    }

    #[test]
    fn t_test_antisymmetric() {
        let a = [2.0, 4.0, 7.0];
        let b = [1.0, 2.0, 3.0];
        let (t1, p1) = paired_t_test(&a, &b).unwrap();
        let (t2, p2) = paired_t_test(&b, &a).unwrap();
        assert!((t1 + t2).abs() < 1e-12);
        assert!((p1 - p2).abs() < 1e-12);
    }

    #[test]
    fn t_test_degenerate() {
        let a = [1.0, 2.0, 3.0];
        assert!(matches!(
            paired_t_test(&a, &a),
            Err(MetricsError::DegenerateSample)
        ));
    }

    #[test]
    fn t_cdf_known_values() {
        // df=1 is a Cauchy: CDF(1) = 3/4.
        assert!((student_t_cdf(1.0, 1.0) - 0.75).abs() < 1e-8);
        // Symmetry.
        let v = student_t_cdf(-1.3, 5.0) + student_t_cdf(1.3, 5.0);
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn kappa_perfect_agreement() {
        let matrix = RatingMatrix::new(vec![vec![0, 0, 0], vec![1, 1, 1]], 2).unwrap();
        assert!((fleiss_kappa(&matrix).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_hand_case() {
        // 2 items, 3 raters, counts (2,1) and (1,2): kappa = -1/3.
        let matrix = RatingMatrix::new(vec![vec![0, 0, 1], vec![0, 1, 1]], 2).unwrap();
        let kappa = fleiss_kappa(&matrix).unwrap();
        assert!((kappa + 1.0 / 3.0).abs() < 1e-12, "kappa = {kappa}");
    }

    #[test]
    fn kappa_undefined_single_category() {
        let matrix = RatingMatrix::new(vec![vec![0, 0], vec![0, 0]], 2).unwrap();
        assert!(matches!(
            fleiss_kappa(&matrix),
            Err(MetricsError::UndefinedKappa)
        ));
    }

    #[test]
    fn pairwise_split_two_one() {
        let matrix = RatingMatrix::new(vec![vec![0, 0, 1]], 2).unwrap();
        assert!((pairwise_agreement(&matrix) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_perfect() {
        let matrix = RatingMatrix::new(vec![vec![1, 1, 1, 1]], 2).unwrap();
        assert!((pairwise_agreement(&matrix) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn majority_vote_modal_and_tie() {
        assert_eq!(majority_vote(&[0, 0, 0, 1, 1], 2), Some(0));
        assert_eq!(majority_vote(&[0, 0, 1, 1], 2), None);
    }

    #[test]
    fn ratings_csv_round_trip() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        use std::io::Write;
        writeln!(file, "item_id,annotator_id,aspect,score").unwrap();
        for (item, ann, score) in [
            ("i1", "a1", 1),
            ("i1", "a2", 1),
            ("i2", "a1", 0),
            ("i2", "a2", 1),
        ] {
            writeln!(file, "{item},{ann},relevance,{score}").unwrap();
        }
        let matrices = load_ratings_csv(file.path()).unwrap();
        let (matrix, scores) = &matrices["relevance"];
        assert_eq!(scores, &vec![0, 1]);
        assert_eq!(matrix.raters(), 2);
        assert_eq!(matrix.ratings.len(), 2);
        let agreement = pairwise_agreement(matrix);
        assert!((agreement - 0.5).abs() < 1e-12);
    }

    fn label_strategy() -> impl Strategy<Value = Label> {
        prop::sample::select(KIALO.to_vec())
    }

    proptest! {
        #[test]
        fn macro_prf_permutation_invariant(
            pairs in proptest::collection::vec((label_strategy(), label_strategy()), 1..40),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let preds: Vec<Label> = pairs.iter().map(|(p, _)| *p).collect();
            let golds: Vec<Label> = pairs.iter().map(|(_, g)| *g).collect();
            let base = macro_prf(&preds, &golds, KIALO).unwrap();
            let mut shuffled = pairs.clone();
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(seed);
            shuffled.shuffle(&mut rng);
            let preds2: Vec<Label> = shuffled.iter().map(|(p, _)| *p).collect();
            let golds2: Vec<Label> = shuffled.iter().map(|(_, g)| *g).collect();
            prop_assert_eq!(base, macro_prf(&preds2, &golds2, KIALO).unwrap());
        }

        #[test]
        fn bucket_micro_counts_recombine(
            records in proptest::collection::vec(
                (label_strategy(), label_strategy(), 0usize..8),
                1..40,
            )
        ) {
            let results: Vec<InstanceResult> = records
                .iter()
                .enumerate()
                .map(|(i, (p, g, l))| InstanceResult {
                    instance_id: i.to_string(),
                    prediction: Some(*p),
                    gold: *g,
                    context_len: *l,
                })
                .collect();
            // Sum per-bucket confusion tallies and compare to the global one.
            let cap = 5;
            let mut groups: BTreeMap<usize, Vec<&InstanceResult>> = BTreeMap::new();
            for r in &results {
                groups.entry(r.context_len.min(cap)).or_default().push(r);
            }
            let mut summed = vec![vec![0usize; KIALO.len() + 1]; KIALO.len()];
            for members in groups.values() {
                let preds: Vec<Option<Label>> = members.iter().map(|r| r.prediction).collect();
                let golds: Vec<Label> = members.iter().map(|r| r.gold).collect();
                let c = Confusion::tally(&preds, &golds, KIALO).unwrap();
                for (i, row) in c.counts.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        summed[i][j] += v;
                    }
                }
            }
            let preds: Vec<Option<Label>> = results.iter().map(|r| r.prediction).collect();
            let golds: Vec<Label> = results.iter().map(|r| r.gold).collect();
            let global = Confusion::tally(&preds, &golds, KIALO).unwrap();
            prop_assert_eq!(summed, global.counts);
        }

        #[test]
        fn macro_prf_equals_bruteforce_exhaustive(
            preds in proptest::collection::vec(label_strategy(), 1..7),
            golds_seed in any::<u64>(),
        ) {
            use rand::Rng;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(golds_seed);
            let golds: Vec<Label> = preds
                .iter()
                .map(|_| KIALO[rng.gen_range(0..KIALO.len())])
                .collect();
            let got = macro_prf(&preds, &golds, KIALO).unwrap();
            let want = brute_force_macro(&preds, &golds, KIALO);
            prop_assert_eq!(got, want);
        }

        #[test]
        fn kappa_one_iff_unanimous(
            rows in proptest::collection::vec(
                proptest::collection::vec(0usize..3, 3),
                2..10,
            )
        ) {
            let matrix = RatingMatrix::new(rows.clone(), 3).unwrap();
            let unanimous = rows.iter().all(|r| r.iter().all(|&c| c == r[0]));
            match fleiss_kappa(&matrix) {
                Ok(kappa) => {
                    prop_assert!((-1.0..=1.0 + 1e-12).contains(&kappa));
                    prop_assert_eq!((kappa - 1.0).abs() < 1e-12, unanimous);
                }
                Err(MetricsError::UndefinedKappa) => {
                    // Single category everywhere: unanimity with P_e = 1.
                    prop_assert!(unanimous);
                }
                Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
            }
        }
    }
}
