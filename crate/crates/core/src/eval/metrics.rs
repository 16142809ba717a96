use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::dataset::map_label;
use super::EvalError;
use crate::model::{BinaryLabel, LabelScheme, SixLevelLabel};

const UNVERIFIED: &str = "unverified";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub label: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Gold records carrying this label.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n: usize,
    pub per_class: Vec<ClassScores>,
}

/// Harmonic mean of precision and recall; zero when both are zero.
/// Works on fractions or percentages alike.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

fn ratio(num: usize, den: usize) -> BigRational {
    if den == 0 {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(0.0)
}

fn scheme_labels(scheme: LabelScheme) -> Vec<&'static str> {
    match scheme {
        LabelScheme::Binary => vec![BinaryLabel::Real.as_str(), BinaryLabel::Fake.as_str()],
        LabelScheme::SixLevel => SixLevelLabel::ALL.iter().map(|l| l.as_str()).collect(),
    }
}

struct Counts {
    tp: usize,
    predicted: usize,
    gold: usize,
}

fn class_counts<'a>(pred: &[&'a str], gold: &[&'a str], labels: &[&'a str]) -> BTreeMap<&'a str, Counts> {
    let mut counts: BTreeMap<&str, Counts> = labels
        .iter()
        .map(|l| (*l, Counts { tp: 0, predicted: 0, gold: 0 }))
        .collect();
    for (p, g) in pred.iter().zip(gold) {
        if let Some(c) = counts.get_mut(p) {
            c.predicted += 1;
            if p == g {
                c.tp += 1;
            }
        }
        if let Some(c) = counts.get_mut(g) {
            c.gold += 1;
        }
    }
    counts
}

/// Accuracy, precision, recall and F1. Binary scores treat `fake` as the
/// positive class; six-level scores macro-average precision and recall over
/// the labels that occur in either list, and F1 is taken from those two
/// averages. An `unverified` prediction is always wrong.
pub fn classification_metrics<P: AsRef<str>, G: AsRef<str>>(
    pred: &[P],
    gold: &[G],
    scheme: LabelScheme,
) -> Result<MetricScores, EvalError> {
    if pred.len() != gold.len() {
        return Err(EvalError::LengthMismatch {
            pred: pred.len(),
            gold: gold.len(),
        });
    }
    let labels = scheme_labels(scheme);
    let canon = |raw: &str, allow_unverified: bool| -> Result<&'static str, EvalError> {
        if allow_unverified && raw == UNVERIFIED {
            return Ok(UNVERIFIED);
        }
        match map_label(raw, scheme) {
            Some(l) if labels.contains(&l) && l == raw => Ok(l),
            _ => Err(EvalError::OutOfScheme(raw.to_string())),
        }
    };
    let pred: Vec<&str> = pred.iter().map(|p| canon(p.as_ref(), true)).collect::<Result<_, _>>()?;
    let gold: Vec<&str> = gold.iter().map(|g| canon(g.as_ref(), false)).collect::<Result<_, _>>()?;

    let n = gold.len();
    let correct = pred.iter().zip(&gold).filter(|(p, g)| p == g).count();
    let counts = class_counts(&pred, &gold, &labels);
    let per_class: Vec<ClassScores> = labels
        .iter()
        .map(|l| {
            let c = &counts[l];
            let p = to_f64(&ratio(c.tp, c.predicted));
            let r = to_f64(&ratio(c.tp, c.gold));
            ClassScores {
                label: l.to_string(),
                precision: p,
                recall: r,
                f1: f1_score(p, r),
                support: c.gold,
            }
        })
        .collect();

    let (precision, recall) = match scheme {
        LabelScheme::Binary => {
            let c = &counts[BinaryLabel::Fake.as_str()];
            (ratio(c.tp, c.predicted), ratio(c.tp, c.gold))
        }
        LabelScheme::SixLevel => {
            let present: BTreeSet<&str> = gold
                .iter()
                .chain(pred.iter())
                .copied()
                .filter(|l| *l != UNVERIFIED)
                .collect();
            if present.is_empty() {
                (BigRational::zero(), BigRational::zero())
            } else {
                let k = BigInt::from(present.len());
                let sum_p: BigRational = present.iter().map(|l| ratio(counts[l].tp, counts[l].predicted)).sum();
                let sum_r: BigRational = present.iter().map(|l| ratio(counts[l].tp, counts[l].gold)).sum();
                (sum_p / k.clone(), sum_r / k)
            }
        }
    };
    let (precision, recall) = (to_f64(&precision), to_f64(&recall));
    Ok(MetricScores {
        accuracy: to_f64(&ratio(correct, n)),
        precision,
        recall,
        f1: f1_score(precision, recall),
        n,
        per_class,
    })
}

/// Relevance labels as exact halves: 1.0 -> 2, 0.5 -> 1, 0 -> 0.
fn relevance_halves(v: f64) -> Result<i64, EvalError> {
    match v {
        x if x == 1.0 => Ok(2),
        x if x == 0.5 => Ok(1),
        x if x == 0.0 => Ok(0),
        _ => Err(EvalError::OutOfSet { metric: "relevance", value: v }),
    }
}

fn consistency_unit(v: f64) -> Result<i64, EvalError> {
    match v {
        x if x == 1.0 => Ok(1),
        x if x == 0.0 => Ok(0),
        x if x == -1.0 => Ok(-1),
        _ => Err(EvalError::OutOfSet { metric: "consistency", value: v }),
    }
}

pub(crate) fn relevance_exact(labels: &[f64]) -> Result<Ratio<i64>, EvalError> {
    let mut sum = 0;
    for v in labels {
        sum += relevance_halves(*v)?;
    }
    if labels.is_empty() {
        return Ok(Ratio::zero());
    }
    Ok(Ratio::new(sum, 2 * labels.len() as i64))
}

pub(crate) fn consistency_mean_exact(labels: &[f64]) -> Result<Ratio<i64>, EvalError> {
    let mut sum = 0;
    for v in labels {
        sum += consistency_unit(*v)?;
    }
    if labels.is_empty() {
        return Ok(Ratio::zero());
    }
    Ok(Ratio::new(sum, labels.len() as i64))
}

pub(crate) fn diversity_exact(relevant_count: u64) -> Ratio<i64> {
    Ratio::new(relevant_count.min(5) as i64, 5)
}

pub(crate) fn ratio_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Mean of relevance labels drawn from {1.0, 0.5, 0}; 0 for no labels.
pub fn relevance_score(labels: &[f64]) -> Result<f64, EvalError> {
    relevance_exact(labels).map(ratio_f64)
}

/// Unclamped mean of consistency labels drawn from {1.0, 0, -1.0}.
pub fn consistency_mean(labels: &[f64]) -> Result<f64, EvalError> {
    consistency_mean_exact(labels).map(ratio_f64)
}

/// Mean consistency clamped below at 0.
pub fn consistency_score(labels: &[f64]) -> Result<f64, EvalError> {
    consistency_mean_exact(labels).map(|m| ratio_f64(m.max(Ratio::zero())))
}

/// 0.2 per relevant evidence item, capped at 1.
pub fn diversity_score(relevant_count: u64) -> f64 {
    ratio_f64(diversity_exact(relevant_count))
}

/// Percentage-point drop from `baseline` to `perturbed`, to one decimal.
pub fn accuracy_drop(baseline: f64, perturbed: f64) -> f64 {
    let d = ((baseline - perturbed) * 10.0).round() / 10.0;
    if d == 0.0 {
        0.0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn f1_examples() {
        assert!((f1_score(90.1, 88.5) - 89.3).abs() <= 0.05);
        assert!((f1_score(85.3, 84.1) - 84.7).abs() <= 0.05);
        assert_eq!(f1_score(0.0, 0.0), 0.0);
    }

    #[test]
    fn perfect_predictions() {
        let gold = ["real", "fake", "fake", "real", "fake", "real", "real", "fake", "fake", "real"];
        let m = classification_metrics(&gold, &gold, LabelScheme::Binary).unwrap();
        assert_eq!((m.accuracy, m.precision, m.recall, m.f1), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn unverified_is_a_miss() {
        let gold = ["fake", "fake", "real", "real"];
        let pred = ["fake", "unverified", "real", "unverified"];
        let m = classification_metrics(&pred, &gold, LabelScheme::Binary).unwrap();
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 0.5);
    }

    #[test]
    fn six_level_macro() {
        let gold = ["true", "false", "half_true", "true"];
        let pred = ["true", "half_true", "half_true", "false"];
        let m = classification_metrics(&pred, &gold, LabelScheme::SixLevel).unwrap();
        // classes present: true, false, half_true
        // P: true 1/1, false 0/1, half_true 1/2 -> 0.5 ; R: 1/2, 0/1, 1/1 -> 0.5
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.recall, 0.5);
        assert_eq!(m.accuracy, 0.5);
        assert_eq!(m.per_class.len(), 6);
    }

    #[test]
    fn length_and_scheme_errors() {
        assert!(matches!(
            classification_metrics(&["real"], &["real", "fake"], LabelScheme::Binary),
            Err(EvalError::LengthMismatch { .. })
        ));
        assert!(matches!(
            classification_metrics(&["true"], &["real"], LabelScheme::Binary),
            Err(EvalError::OutOfScheme(_))
        ));
        assert!(matches!(
            classification_metrics(&["real"], &["unverified"], LabelScheme::Binary),
            Err(EvalError::OutOfScheme(_))
        ));
    }

    #[test]
    fn quality_examples() {
        assert_eq!(relevance_score(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(relevance_score(&[1.0, 0.5, 0.0, 0.5]).unwrap(), 0.5);
        assert_eq!(relevance_score(&[]).unwrap(), 0.0);
        assert!(relevance_score(&[0.7]).is_err());
        assert_eq!(consistency_score(&[1.0; 4]).unwrap(), 1.0);
        assert_eq!(consistency_score(&[1.0, 1.0, 0.0, -1.0]).unwrap(), 0.25);
        assert_eq!(consistency_score(&[-1.0, -1.0]).unwrap(), 0.0);
        assert_eq!(consistency_mean(&[-1.0, -1.0]).unwrap(), -1.0);
        assert!(consistency_score(&[0.5]).is_err());
        assert_eq!(diversity_score(3), 0.6);
        assert_eq!(diversity_score(7), 1.0);
        assert_eq!(diversity_score(0), 0.0);
    }

    #[test]
    fn diversity_exhaustive() {
        let expected = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0];
        for (n, e) in expected.iter().enumerate() {
            assert_eq!(diversity_score(n as u64), *e);
        }
    }

    #[test]
    fn drops() {
        assert_eq!(accuracy_drop(89.7, 85.3), 4.4);
        assert_eq!(accuracy_drop(85.1, 65.7), 19.4);
        assert_eq!(accuracy_drop(80.0, 80.0), 0.0);
    }

    proptest! {
        #[test]
        fn fold_is_order_independent(
            pairs in proptest::collection::vec((0usize..3, 0usize..2), 1..40),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let labels = ["real", "fake", "unverified"];
            let pred: Vec<&str> = pairs.iter().map(|(p, _)| labels[*p]).collect();
            let gold: Vec<&str> = pairs.iter().map(|(_, g)| labels[*g]).collect();
            let a = classification_metrics(&pred, &gold, LabelScheme::Binary).unwrap();
            let mut idx: Vec<usize> = (0..pairs.len()).collect();
            idx.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let pred2: Vec<&str> = idx.iter().map(|i| pred[*i]).collect();
            let gold2: Vec<&str> = idx.iter().map(|i| gold[*i]).collect();
            let b = classification_metrics(&pred2, &gold2, LabelScheme::Binary).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn scores_stay_in_unit_range(
            rel in proptest::collection::vec(prop_oneof![Just(1.0), Just(0.5), Just(0.0)], 0..30),
            con in proptest::collection::vec(prop_oneof![Just(1.0), Just(0.0), Just(-1.0)], 0..30),
        ) {
            let r = relevance_score(&rel).unwrap();
            let c = consistency_score(&con).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
            prop_assert!((0.0..=1.0).contains(&c));
        }
    }
}
