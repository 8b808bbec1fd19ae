//! Grading free-text answers against gold durations, accuracy by
//! complexity bin, McNemar significance with Holm-Bonferroni correction,
//! and pairwise edge precision/recall/F1.

use std::collections::{BTreeMap, BTreeSet};

use statrs::function::erf::erfc;
use thiserror::Error;

use crate::duration::{parse_duration, sum_durations, CanonicalDuration, Duration, FormatStyle};
use crate::plan::Constraint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("p-value {0} is outside [0, 1]")]
    BadPValue(f64),
    #[error("alpha {0} must lie strictly between 0 and 1")]
    BadAlpha(f64),
    #[error("record sets do not cover the same instances; first missing: {0:?}")]
    Unpaired(String),
}

/// One graded completion.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(into = "EvalRecordRow")]
pub struct EvalRecord {
    pub id: String,
    pub instance_id: String,
    pub complexity: usize,
    pub gold: CanonicalDuration,
    pub completion: String,
    pub extracted: Option<CanonicalDuration>,
    pub correct: bool,
}

impl EvalRecord {
    /// Grades a completion: extract the answer, compare in canonical
    /// seconds. Missing or unparseable answers grade incorrect.
    pub fn grade(
        id: impl Into<String>,
        instance_id: impl Into<String>,
        complexity: usize,
        gold: CanonicalDuration,
        completion: impl Into<String>,
    ) -> EvalRecord {
        let completion = completion.into();
        let extracted = extract_answer(&completion);
        EvalRecord {
            id: id.into(),
            instance_id: instance_id.into(),
            complexity,
            gold,
            completion,
            extracted,
            correct: extracted == Some(gold),
        }
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct EvalRecordRow {
    id: String,
    instance_id: String,
    complexity: usize,
    gold: String,
    gold_seconds: f64,
    completion: String,
    extracted: Option<String>,
    extracted_seconds: Option<f64>,
    correct: bool,
}

impl From<EvalRecord> for EvalRecordRow {
    fn from(record: EvalRecord) -> EvalRecordRow {
        EvalRecordRow {
            id: record.id,
            instance_id: record.instance_id,
            complexity: record.complexity,
            gold: record.gold.format(FormatStyle::LargestUnit),
            gold_seconds: record.gold.as_f64(),
            completion: record.completion,
            extracted: record.extracted.map(|d| d.format(FormatStyle::LargestUnit)),
            extracted_seconds: record.extracted.map(|d| d.as_f64()),
            correct: record.correct,
        }
    }
}

impl<'de> serde::Deserialize<'de> for EvalRecord {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let row = EvalRecordRow::deserialize(deserializer)?;
        let gold = crate::duration::parse_canonical(&row.gold).map_err(serde::de::Error::custom)?;
        let extracted = row
            .extracted
            .as_deref()
            .map(crate::duration::parse_canonical)
            .transpose()
            .map_err(serde::de::Error::custom)?;
        Ok(EvalRecord {
            id: row.id,
            instance_id: row.instance_id,
            complexity: row.complexity,
            gold,
            completion: row.completion,
            extracted,
            correct: row.correct,
        })
    }
}

/// Scans double-quoted substrings right to left and returns the first
/// that parses as a (possibly compound) duration, in canonical seconds.
pub fn extract_answer(text: &str) -> Option<CanonicalDuration> {
    let segments: Vec<&str> = text.split('"').collect();
    // Odd positions sit between quote pairs.
    segments
        .iter()
        .enumerate()
        .rev()
        .filter(|(i, _)| i % 2 == 1)
        .find_map(|(_, quoted)| parse_duration(quoted.trim()).ok())
        .map(|components| sum_durations(&components))
}

/// Accuracy for one complexity bin.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BinStat {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Overall accuracy plus accuracy per `[2k, 2k+2)` complexity bin (keyed
/// by the bin's lower edge; empty bins are absent).
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GradeReport {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub by_bin: BTreeMap<usize, BinStat>,
}

pub fn grade(records: &[EvalRecord]) -> GradeReport {
    let mut by_bin: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut correct = 0;
    for record in records {
        let bin = record.complexity - record.complexity % 2;
        let entry = by_bin.entry(bin).or_insert((0, 0));
        entry.0 += 1;
        if record.correct {
            entry.1 += 1;
            correct += 1;
        }
    }
    let total = records.len();
    GradeReport {
        total,
        correct,
        accuracy: if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        },
        by_bin: by_bin
            .into_iter()
            .map(|(bin, (total, correct))| {
                (
                    bin,
                    BinStat {
                        total,
                        correct,
                        accuracy: correct as f64 / total as f64,
                    },
                )
            })
            .collect(),
    }
}

/// Paired correctness counts for two systems on identical instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct PairedOutcome {
    pub both_correct: usize,
    pub a_only: usize,
    pub b_only: usize,
    pub both_wrong: usize,
}

impl PairedOutcome {
    /// Joins two record sets on `instance_id`; both must cover exactly
    /// the same instances.
    pub fn from_records(a: &[EvalRecord], b: &[EvalRecord]) -> Result<PairedOutcome, StatsError> {
        let index_b: BTreeMap<&str, bool> = b
            .iter()
            .map(|r| (r.instance_id.as_str(), r.correct))
            .collect();
        if a.len() != b.len() {
            let ids_a: BTreeSet<&str> = a.iter().map(|r| r.instance_id.as_str()).collect();
            let missing = index_b
                .keys()
                .find(|id| !ids_a.contains(**id))
                .unwrap_or(&"<count mismatch>");
            return Err(StatsError::Unpaired(missing.to_string()));
        }
        let mut outcome = PairedOutcome {
            both_correct: 0,
            a_only: 0,
            b_only: 0,
            both_wrong: 0,
        };
        for record in a {
            let b_correct = index_b
                .get(record.instance_id.as_str())
                .copied()
                .ok_or_else(|| StatsError::Unpaired(record.instance_id.clone()))?;
            match (record.correct, b_correct) {
                (true, true) => outcome.both_correct += 1,
                (true, false) => outcome.a_only += 1,
                (false, true) => outcome.b_only += 1,
                (false, false) => outcome.both_wrong += 1,
            }
        }
        Ok(outcome)
    }

    pub fn total(&self) -> usize {
        self.both_correct + self.a_only + self.b_only + self.both_wrong
    }

    pub fn p_value(&self) -> f64 {
        mcnemar(self.a_only as u64, self.b_only as u64)
    }
}

/// McNemar's test on discordant counts: the exact two-sided binomial when
/// `a + b <= 25`, otherwise the chi-square approximation with continuity
/// correction. Returns a p-value in [0, 1].
pub fn mcnemar(a_only: u64, b_only: u64) -> f64 {
    let n = a_only + b_only;
    if n == 0 {
        return 1.0;
    }
    if n <= 25 {
        let k = a_only.min(b_only);
        // 2 * P(X <= k) for X ~ Binomial(n, 1/2), exact in u128.
        let mut sum: u128 = 0;
        let mut coefficient: u128 = 1;
        for i in 0..=k {
            sum += coefficient;
            coefficient = coefficient * (n - i) as u128 / (i + 1) as u128;
        }
        let p = 2.0 * sum as f64 / (1u128 << n) as f64;
        p.min(1.0)
    } else {
        let diff = a_only.abs_diff(b_only) as f64;
        let corrected = (diff - 1.0).max(0.0);
        let chi2 = corrected * corrected / n as f64;
        erfc((chi2 / 2.0).sqrt()).clamp(0.0, 1.0)
    }
}

/// One Holm-Bonferroni decision, in the order the p-values were given.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct HolmDecision {
    pub p: f64,
    pub adjusted: f64,
    pub reject: bool,
}

/// Step-down Holm-Bonferroni: sort ascending, compare `p_(i)` against
/// `alpha / (m - i + 1)`, stop at the first failure; adjusted values are
/// the running maxima of `min(1, (m - i + 1) * p_(i))`.
pub fn holm_bonferroni(p_values: &[f64], alpha: f64) -> Result<Vec<HolmDecision>, StatsError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::BadAlpha(alpha));
    }
    for &p in p_values {
        if !(0.0..=1.0).contains(&p) {
            return Err(StatsError::BadPValue(p));
        }
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));

    let mut decisions = vec![
        HolmDecision {
            p: 0.0,
            adjusted: 0.0,
            reject: false,
        };
        m
    ];
    let mut running_max = 0.0f64;
    let mut still_rejecting = true;
    for (rank, &original) in order.iter().enumerate() {
        let p = p_values[original];
        let factor = (m - rank) as f64;
        running_max = running_max.max((factor * p).min(1.0));
        if still_rejecting && p > alpha / factor {
            still_rejecting = false;
        }
        decisions[original] = HolmDecision {
            p,
            adjusted: running_max,
            reject: still_rejecting,
        };
    }
    Ok(decisions)
}

/// Edge precision/recall/F1. As defined for dependency-annotation
/// validation, precision divides by the gold set and recall by the
/// predictions; `conventional` swaps the denominators. Zero denominators
/// yield 0 and set `degenerate`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EdgePrf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub degenerate: bool,
}

pub fn edge_prf(
    gold: &BTreeSet<Constraint>,
    predicted: &BTreeSet<Constraint>,
    conventional: bool,
) -> EdgePrf {
    let hits = gold.intersection(predicted).count() as f64;
    let over_gold = safe_div(hits, gold.len() as f64);
    let over_predicted = safe_div(hits, predicted.len() as f64);
    let (precision, recall) = if conventional {
        (over_predicted, over_gold)
    } else {
        (over_gold, over_predicted)
    };
    let (precision, degenerate_p) = precision.map_or((0.0, true), |p| (p, false));
    let (recall, degenerate_r) = recall.map_or((0.0, true), |r| (r, false));
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    EdgePrf {
        precision,
        recall,
        f1,
        degenerate: degenerate_p || degenerate_r,
    }
}

fn safe_div(numerator: f64, denominator: f64) -> Option<f64> {
    (denominator > 0.0).then(|| numerator / denominator)
}

/// Mean time-unit distance per width-2 complexity bin.
pub fn unit_distance_report<'a, I>(items: I) -> BTreeMap<usize, f64>
where
    I: IntoIterator<Item = (usize, &'a [Duration])>,
{
    let mut bins: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for (complexity, durations) in items {
        if durations.is_empty() {
            continue;
        }
        let distance = crate::duration::unit_distance(durations)
            .expect("nonempty duration lists have a distance");
        let entry = bins.entry(complexity - complexity % 2).or_insert((0, 0));
        entry.0 += distance;
        entry.1 += 1;
    }
    bins.into_iter()
        .map(|(bin, (sum, count))| (bin, sum as f64 / count as f64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duration::TimeUnit;

    fn secs(n: u64) -> CanonicalDuration {
        CanonicalDuration::from_secs_u64(n)
    }

    #[test]
    fn extracts_the_calzones_answer() {
        let text = "The shortest possible time to Make Calzones is \"55 min\".";
        assert_eq!(extract_answer(text), Some(secs(3300)));
    }

    #[test]
    fn extraction_failures_are_none() {
        assert_eq!(extract_answer("\"not sure\""), None);
        assert_eq!(extract_answer("no quotes at all"), None);
        assert_eq!(extract_answer(""), None);
    }

    #[test]
    fn extracts_rightmost_parseable_quote() {
        let text = "first \"30 min\" then final \"1 hour and 5 min\"";
        assert_eq!(extract_answer(text), Some(secs(3900)));
        // An unparseable rightmost quote falls back leftward.
        let text = "answer \"45 min\" ... \"maybe\"";
        assert_eq!(extract_answer(text), Some(secs(2700)));
    }

    #[test]
    fn grading_compares_in_canonical_seconds() {
        let record = EvalRecord::grade("r1", "i1", 14, secs(5400), "so the answer is \"1.5 h\".");
        assert!(record.correct);
        let record = EvalRecord::grade("r2", "i1", 14, secs(5400), "the answer is \"90 min\".");
        assert!(record.correct, "90 min equals 1.5 h in seconds");
        let record = EvalRecord::grade("r3", "i1", 14, secs(5400), "it takes \"2 h\".");
        assert!(!record.correct);
        let record = EvalRecord::grade("r4", "i1", 14, secs(5400), "cannot answer");
        assert!(!record.correct);
        assert_eq!(record.extracted, None);
    }

    #[test]
    fn accuracy_and_bins() {
        let mk = |id: &str, complexity: usize, correct: bool| EvalRecord {
            id: id.to_string(),
            instance_id: id.to_string(),
            complexity,
            gold: secs(60),
            completion: String::new(),
            extracted: correct.then_some(secs(60)),
            correct,
        };
        let records = vec![
            mk("a", 10, true),
            mk("b", 11, true),
            mk("c", 11, false),
            mk("d", 14, true),
        ];
        let report = grade(&records);
        assert_eq!(report.accuracy, 0.75);
        // 10 and 11 share the [10, 12) bin.
        assert_eq!(report.by_bin[&10].total, 3);
        assert_eq!(report.by_bin[&10].correct, 2);
        assert_eq!(report.by_bin[&14].total, 1);
        assert!(!report.by_bin.contains_key(&12));
        // Bin-weighted accuracy equals overall accuracy.
        let weighted: f64 = report
            .by_bin
            .values()
            .map(|bin| bin.accuracy * bin.total as f64)
            .sum::<f64>()
            / report.total as f64;
        assert!((weighted - report.accuracy).abs() < 1e-12);
    }

    #[test]
    fn all_extraction_failures_grade_zero() {
        let records: Vec<EvalRecord> = (0..4)
            .map(|i| EvalRecord::grade(format!("r{i}"), format!("i{i}"), 10, secs(60), "nope"))
            .collect();
        assert_eq!(grade(&records).accuracy, 0.0);
    }

    #[test]
    fn mcnemar_exact_values() {
        assert_eq!(mcnemar(0, 0), 1.0);
        let expected = 158.0 / 4096.0;
        assert!((mcnemar(10, 2) - expected).abs() < 1e-9);
        assert_eq!(mcnemar(3, 3), 1.0);
        assert_eq!(mcnemar(7, 7), 1.0);
    }

    #[test]
    fn mcnemar_is_symmetric() {
        for (a, b) in [(10, 2), (0, 5), (13, 20), (40, 61)] {
            assert_eq!(mcnemar(a, b), mcnemar(b, a));
        }
    }

    #[test]
    fn mcnemar_large_sample_uses_chi_square() {
        // 40 vs 10: chi2 = (30-1)^2/50 = 16.82, p ~ 4.11e-5.
        let p = mcnemar(40, 10);
        assert!((p - 4.112e-5).abs() < 5e-7, "got {p}");
        // Equal discordant counts stay insignificant.
        assert!(mcnemar(30, 30) > 0.9);
    }

    #[test]
    fn holm_example_from_hand_computation() {
        let decisions = holm_bonferroni(&[0.01, 0.04, 0.03], 0.05).unwrap();
        assert!(decisions[0].reject);
        assert!(!decisions[1].reject);
        assert!(!decisions[2].reject);
        let adjusted: Vec<f64> = decisions.iter().map(|d| d.adjusted).collect();
        assert!((adjusted[0] - 0.03).abs() < 1e-12);
        assert!((adjusted[1] - 0.06).abs() < 1e-12);
        assert!((adjusted[2] - 0.06).abs() < 1e-12);
    }

    #[test]
    fn holm_edge_cases() {
        let single = holm_bonferroni(&[0.025], 0.05).unwrap();
        assert!(single[0].reject);
        let none = holm_bonferroni(&[1.0, 1.0, 1.0], 0.05).unwrap();
        assert!(none.iter().all(|d| !d.reject && d.adjusted == 1.0));
        assert!(holm_bonferroni(&[1.5], 0.05).is_err());
        assert!(holm_bonferroni(&[0.5], 0.0).is_err());
    }

    #[test]
    fn holm_rejects_everything_bonferroni_rejects() {
        let cases = vec![
            vec![0.001, 0.02, 0.04, 0.3],
            vec![0.012, 0.013, 0.014],
            vec![0.04, 0.04, 0.04],
        ];
        let alpha = 0.05;
        for ps in cases {
            let m = ps.len() as f64;
            let holm = holm_bonferroni(&ps, alpha).unwrap();
            for (i, &p) in ps.iter().enumerate() {
                if p < alpha / m {
                    assert!(holm[i].reject, "Bonferroni rejects p={p} but Holm does not");
                }
            }
        }
    }

    #[test]
    fn edge_prf_examples() {
        let set = |pairs: &[(u32, u32)]| -> BTreeSet<Constraint> {
            pairs.iter().map(|&(b, a)| Constraint::new(b, a)).collect()
        };
        let identical = edge_prf(&set(&[(1, 2), (2, 3)]), &set(&[(1, 2), (2, 3)]), false);
        assert_eq!(
            (identical.precision, identical.recall, identical.f1),
            (1.0, 1.0, 1.0)
        );

        let half = edge_prf(&set(&[(1, 2), (2, 3)]), &set(&[(1, 2), (1, 3)]), false);
        assert_eq!((half.precision, half.recall, half.f1), (0.5, 0.5, 0.5));

        let empty = edge_prf(&set(&[(1, 2)]), &set(&[]), false);
        assert_eq!((empty.precision, empty.recall, empty.f1), (0.0, 0.0, 0.0));
        assert!(empty.degenerate);

        // The conventional flag swaps the denominators.
        let skewed = edge_prf(&set(&[(1, 2), (2, 3), (3, 4)]), &set(&[(1, 2)]), false);
        let swapped = edge_prf(&set(&[(1, 2), (2, 3), (3, 4)]), &set(&[(1, 2)]), true);
        assert_eq!(skewed.precision, swapped.recall);
        assert_eq!(skewed.recall, swapped.precision);
    }

    #[test]
    fn paired_outcome_counts_sum() {
        let mk = |id: &str, correct: bool| EvalRecord {
            id: id.to_string(),
            instance_id: id.to_string(),
            complexity: 10,
            gold: secs(60),
            completion: String::new(),
            extracted: None,
            correct,
        };
        let a = vec![mk("x", true), mk("y", false), mk("z", true)];
        let b = vec![mk("x", false), mk("y", false), mk("z", true)];
        let outcome = PairedOutcome::from_records(&a, &b).unwrap();
        assert_eq!(outcome.total(), 3);
        assert_eq!(outcome.a_only, 1);
        assert_eq!(outcome.b_only, 0);
        assert_eq!(outcome.both_correct, 1);
        assert_eq!(outcome.both_wrong, 1);

        let mismatched = vec![mk("w", true)];
        assert!(PairedOutcome::from_records(&a, &mismatched).is_err());
    }

    #[test]
    fn unit_distance_report_bins_means() {
        let single = [
            Duration::from_int(15, TimeUnit::Hour),
            Duration::from_int(50, TimeUnit::Hour),
        ];
        let mixed = [
            Duration::from_int(5, TimeUnit::Sec),
            Duration::from_int(10, TimeUnit::Min),
        ];
        let report = unit_distance_report(vec![
            (10usize, &single[..]),
            (11usize, &mixed[..]),
            (14usize, &mixed[..]),
        ]);
        assert_eq!(report[&10], 0.5);
        assert_eq!(report[&14], 1.0);
    }

    #[test]
    fn record_rows_round_trip() {
        let record = EvalRecord::grade("r1", "i1", 12, secs(3300), "it is \"55 min\".");
        let json = serde_json::to_string(&record).unwrap();
        let back: EvalRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, record);
    }
}
