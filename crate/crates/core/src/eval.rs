//! Per-class precision/recall/F1 with abstention accounting, and the
//! condition comparison table.
//!
//! An abstention is a false negative for the instance's gold class and
//! never a false positive: precision is computed over predictions made,
//! recall over every gold instance of the class.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Label, Split};
use crate::error::{Error, Result};
use crate::knowledge::Condition;
use crate::rulemodel::{classify, RuleModel};
use crate::scalar::Scalar;

pub const TRIVIAL: &str = "trivial";

/// Anything that maps a text to a label or abstains.
pub trait Predictor {
    fn predict(&self, text: &str) -> Option<Label>;
}

impl Predictor for RuleModel {
    fn predict(&self, text: &str) -> Option<Label> {
        classify(self, text).label
    }
}

/// Constant-positive reference model.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlwaysPositive;

impl Predictor for AlwaysPositive {
    fn predict(&self, _text: &str) -> Option<Label> {
        Some(Label::Positive)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassConfusion {
    pub true_positives: usize,
    pub false_positives: usize,
    /// Includes abstentions on this class's gold instances.
    pub false_negatives: usize,
    pub abstained: usize,
    pub total: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionSummary {
    pub positive: ClassConfusion,
    pub negative: ClassConfusion,
}

impl ConfusionSummary {
    pub fn from_pairs<I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (Label, Option<Label>)>,
    {
        let mut s = ConfusionSummary::default();
        for (gold, predicted) in pairs {
            s.class_mut(gold).total += 1;
            match predicted {
                Some(p) if p == gold => s.class_mut(gold).true_positives += 1,
                Some(p) => {
                    s.class_mut(p).false_positives += 1;
                    s.class_mut(gold).false_negatives += 1;
                }
                None => {
                    let c = s.class_mut(gold);
                    c.false_negatives += 1;
                    c.abstained += 1;
                }
            }
        }
        s
    }

    pub fn class(&self, label: Label) -> &ClassConfusion {
        match label {
            Label::Positive => &self.positive,
            Label::Negative => &self.negative,
        }
    }

    fn class_mut(&mut self, label: Label) -> &mut ClassConfusion {
        match label {
            Label::Positive => &mut self.positive,
            Label::Negative => &mut self.negative,
        }
    }

    pub fn abstentions(&self) -> usize {
        self.positive.abstained + self.negative.abstained
    }

    pub fn total(&self) -> usize {
        self.positive.total + self.negative.total
    }

    /// What the constant-positive model would score on the same gold set.
    pub fn trivial(&self) -> ConfusionSummary {
        ConfusionSummary {
            positive: ClassConfusion {
                true_positives: self.positive.total,
                false_positives: self.negative.total,
                false_negatives: 0,
                abstained: 0,
                total: self.positive.total,
            },
            negative: ClassConfusion {
                true_positives: 0,
                false_positives: 0,
                false_negatives: self.negative.total,
                abstained: 0,
                total: self.negative.total,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
    /// The model never predicted this class; precision reported as 0.
    pub predicted_nothing: bool,
    /// No gold instances of this class; recall reported as 0.
    pub empty_class: bool,
}

fn ratio<T: Scalar>(num: usize, den: usize) -> T {
    if den == 0 {
        T::zero()
    } else {
        T::from_usize_lossy(num) / T::from_usize_lossy(den)
    }
}

/// Harmonic mean, 0 when both inputs are 0.
pub fn f1<T: Scalar>(precision: T, recall: T) -> T {
    let sum = precision + recall;
    if sum.is_zero() {
        T::zero()
    } else {
        T::from_f64_lossy(2.0) * precision * recall / sum
    }
}

impl<T: Scalar> ClassMetrics<T> {
    pub fn from_confusion(c: &ClassConfusion) -> Self {
        let predicted = c.true_positives + c.false_positives;
        let precision = ratio(c.true_positives, predicted);
        let recall = ratio(c.true_positives, c.total);
        ClassMetrics {
            precision,
            recall,
            f1: f1(precision, recall),
            predicted_nothing: predicted == 0,
            empty_class: c.total == 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Deltas<T> {
    pub precision: T,
    pub recall: T,
    pub f1: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<T> {
    /// Condition tag, or `"trivial"` for the constant-positive row.
    pub condition: String,
    pub test_size: usize,
    pub balanced: bool,
    pub abstentions: usize,
    pub positive: ClassMetrics<T>,
    pub negative: ClassMetrics<T>,
    pub delta: Deltas<T>,
    pub confusion: ConfusionSummary,
}

impl<T: Scalar> EvalReport<T> {
    pub fn from_confusion(condition: impl Into<String>, confusion: ConfusionSummary) -> Self {
        let positive = ClassMetrics::<T>::from_confusion(&confusion.positive);
        let negative = ClassMetrics::<T>::from_confusion(&confusion.negative);
        EvalReport {
            condition: condition.into(),
            test_size: confusion.total(),
            balanced: confusion.positive.total == confusion.negative.total,
            abstentions: confusion.abstentions(),
            delta: Deltas {
                precision: (positive.precision - negative.precision).abs(),
                recall: (positive.recall - negative.recall).abs(),
                f1: (positive.f1 - negative.f1).abs(),
            },
            positive,
            negative,
            confusion,
        }
    }

    pub fn class(&self, label: Label) -> &ClassMetrics<T> {
        match label {
            Label::Positive => &self.positive,
            Label::Negative => &self.negative,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.condition == TRIVIAL
    }

    pub fn display_name(&self) -> String {
        if self.is_trivial() {
            return "Trivial (Always Pos)".to_string();
        }
        self.condition
            .parse::<Condition>()
            .map(|c| c.display_name().to_string())
            .unwrap_or_else(|_| self.condition.clone())
    }
}

fn gold_and_predictions<P: Predictor + ?Sized>(
    predictor: &P,
    corpus: &Corpus,
    split: Split,
) -> Result<Vec<(Label, Option<Label>)>> {
    let pairs: Vec<_> = corpus
        .split(split)
        .map(|inst| (inst.label, predictor.predict(&inst.text)))
        .collect();
    if pairs.is_empty() {
        return Err(Error::EmptyCorpus(format!("split {split:?} has no instances")));
    }
    Ok(pairs)
}

pub fn evaluate_predictor<T: Scalar, P: Predictor + ?Sized>(
    predictor: &P,
    condition: impl Into<String>,
    corpus: &Corpus,
    split: Split,
) -> Result<EvalReport<T>> {
    let pairs = gold_and_predictions(predictor, corpus, split)?;
    Ok(EvalReport::from_confusion(condition, ConfusionSummary::from_pairs(pairs)))
}

pub fn evaluate<T: Scalar>(model: &RuleModel, corpus: &Corpus, split: Split) -> Result<EvalReport<T>> {
    evaluate_predictor(model, model.condition.as_str(), corpus, split)
}

pub fn trivial_baseline<T: Scalar>(corpus: &Corpus, split: Split) -> Result<EvalReport<T>> {
    evaluate_predictor(&AlwaysPositive, TRIVIAL, corpus, split)
}

/// Trivial row first (derived from the other rows' gold totals when
/// absent), then the remaining reports in their given order.
pub fn table_rows<T: Scalar>(reports: &[EvalReport<T>]) -> Vec<EvalReport<T>> {
    let mut rows: Vec<EvalReport<T>> = reports.iter().filter(|r| r.is_trivial()).cloned().collect();
    if rows.is_empty() {
        if let Some(first) = reports.first() {
            rows.push(EvalReport::from_confusion(TRIVIAL, first.confusion.trivial()));
        }
    }
    rows.extend(reports.iter().filter(|r| !r.is_trivial()).cloned());
    rows
}

/// Plain-text rendering in the column order P/R/F positive, P/R/F
/// negative, then the three absolute deltas.
pub fn report_table<T: Scalar>(reports: &[EvalReport<T>]) -> String {
    const NAME: usize = 22;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<NAME$} | {:^20} | {:^20} | {:^20}",
        "", "Positive Class", "Negative Class", "Delta Between Classes"
    );
    let _ = writeln!(
        out,
        "{:<NAME$} | {:>6} {:>6} {:>6} | {:>6} {:>6} {:>6} | {:>6} {:>6} {:>6}",
        "Condition", "P", "R", "F", "P", "R", "F", "P", "R", "F"
    );
    let _ = writeln!(out, "{}", "-".repeat(NAME + 3 * 23));
    for r in table_rows(reports) {
        let v = [
            r.positive.precision,
            r.positive.recall,
            r.positive.f1,
            r.negative.precision,
            r.negative.recall,
            r.negative.f1,
            r.delta.precision,
            r.delta.recall,
            r.delta.f1,
        ]
        .map(|x| format!("{:>6.3}", x.to_f64_lossy()));
        let _ = writeln!(
            out,
            "{:<NAME$} | {} {} {} | {} {} {} | {} {} {}",
            r.display_name(),
            v[0],
            v[1],
            v[2],
            v[3],
            v[4],
            v[5],
            v[6],
            v[7],
            v[8]
        );
    }
    out
}

/// Machine-readable form of the table: the same rows as [`report_table`].
pub fn reports_to_json<T: Scalar + Serialize>(reports: &[EvalReport<T>]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&table_rows(reports))?)
}

pub fn reports_from_json<T: Scalar + for<'de> Deserialize<'de>>(s: &str) -> Result<Vec<EvalReport<T>>> {
    Ok(serde_json::from_str(s)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use Label::{Negative, Positive};

    fn report(pairs: &[(Label, Option<Label>)]) -> EvalReport<f64> {
        EvalReport::from_confusion("bow", ConfusionSummary::from_pairs(pairs.iter().copied()))
    }

    #[test]
    fn always_positive_on_balanced() {
        let pairs: Vec<_> = (0..20).map(|i| (if i % 2 == 0 { Positive } else { Negative }, Some(Positive))).collect();
        let r = report(&pairs);
        assert_eq!(r.positive.precision, 0.5);
        assert_eq!(r.positive.recall, 1.0);
        assert!((r.positive.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!((r.negative.precision, r.negative.recall, r.negative.f1), (0.0, 0.0, 0.0));
        assert!(r.negative.predicted_nothing);
        assert_eq!(r.delta.precision, 0.5);
        assert_eq!(r.delta.recall, 1.0);
    }

    #[test]
    fn perfect_predictor() {
        let r = report(&[(Positive, Some(Positive)), (Negative, Some(Negative))]);
        for c in [r.positive, r.negative] {
            assert_eq!((c.precision, c.recall, c.f1), (1.0, 1.0, 1.0));
        }
        assert_eq!((r.delta.precision, r.delta.recall, r.delta.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn ten_predictions_two_abstentions() {
        // gold P P P P P N N N N N
        // pred P P P N - N N P - N
        let pairs = [
            (Positive, Some(Positive)),
            (Positive, Some(Positive)),
            (Positive, Some(Positive)),
            (Positive, Some(Negative)),
            (Positive, None),
            (Negative, Some(Negative)),
            (Negative, Some(Negative)),
            (Negative, Some(Positive)),
            (Negative, None),
            (Negative, Some(Negative)),
        ];
        let r = report(&pairs);
        // pos: TP 3, FP 1, FN 2 → P 3/4, R 3/5, F 2/3
        // neg: TP 3, FP 1, FN 2 → same
        assert_eq!(r.abstentions, 2);
        assert_eq!(r.confusion.positive.false_negatives, 2);
        assert_eq!(r.positive.precision, 0.75);
        assert_eq!(r.positive.recall, 0.6);
        assert!((r.positive.f1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.negative.precision, 0.75);
        assert_eq!(r.delta.f1, 0.0);
    }

    #[test]
    fn degenerate_splits() {
        let all_pos = report(&[(Positive, Some(Positive)); 4]);
        assert_eq!((all_pos.positive.precision, all_pos.positive.recall, all_pos.positive.f1), (1.0, 1.0, 1.0));
        let all_neg = report(&[(Negative, Some(Positive)); 4]);
        assert_eq!(all_neg.positive.precision, 0.0);
        assert_eq!(all_neg.positive.recall, 0.0);
        assert!(all_neg.positive.empty_class);
    }

    #[test]
    fn table_prepends_trivial() {
        let r = report(&[(Positive, Some(Positive)), (Negative, None)]);
        let table = report_table(&[r.clone(), r]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3 + 3);
        assert!(lines[3].starts_with("Trivial (Always Pos)"));
        assert!(lines[3].contains(" 0.500  1.000  0.667 |  0.000  0.000  0.000 |  0.500  1.000  0.667"));
        assert!(lines[4].starts_with("Bag of Words"));
    }

    #[test]
    fn json_round_trip() {
        let r = report(&[(Positive, Some(Positive)), (Negative, Some(Positive)), (Negative, None)]);
        let json = reports_to_json(std::slice::from_ref(&r)).unwrap();
        let back: Vec<EvalReport<f64>> = reports_from_json(&json).unwrap();
        assert_eq!(back, table_rows(&[r]));
    }
}
