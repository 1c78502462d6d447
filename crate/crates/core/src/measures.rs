//! Performance measures: losses on the 0–100 scale used during training and
//! score-based metrics in `[0, 1]` used for evaluation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::Label;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    #[serde(rename = "err")]
    ErrorRate,
    F1,
    Prbep,
    Auc,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::ErrorRate, Measure::F1, Measure::Prbep, Measure::Auc];

    pub fn name(self) -> &'static str {
        match self {
            Measure::ErrorRate => "err",
            Measure::F1 => "f1",
            Measure::Prbep => "prbep",
            Measure::Auc => "auc",
        }
    }

    /// Column heading for the evaluated metric (error rate is reported as
    /// accuracy).
    pub fn metric_name(self) -> &'static str {
        match self {
            Measure::ErrorRate => "Accuracy",
            Measure::F1 => "F1",
            Measure::Prbep => "PRBEP",
            Measure::Auc => "AUC",
        }
    }

    /// Whether the loss is a function of the contingency table.
    pub fn is_contingency(self) -> bool {
        self != Measure::Auc
    }

    /// F1, PRBEP and AUC need both classes present.
    pub fn check_defined(self, positives: usize, negatives: usize) -> Result<()> {
        if positives + negatives == 0 {
            return Err(Error::undefined(self, "no examples"));
        }
        if self != Measure::ErrorRate && (positives == 0 || negatives == 0) {
            return Err(Error::undefined(
                self,
                format!("needs both classes (p = {positives}, q = {negatives})"),
            ));
        }
        Ok(())
    }

    /// Loss `Δ` of a contingency table, in `[0, 100]`.
    pub fn loss(self, ct: &ContingencyTable) -> Result<f64> {
        let p = ct.positives();
        match self {
            Measure::ErrorRate if ct.total() == 0 => Err(Error::undefined(self, "no examples")),
            Measure::F1 | Measure::Prbep if p == 0 => Err(Error::undefined(self, "no positive examples")),
            Measure::Prbep if ct.true_pos + ct.false_pos != p => Err(Error::Admissibility {
                measure: self.to_string(),
                reason: format!(
                    "{} predicted positives, PRBEP requires exactly p = {p}",
                    ct.true_pos + ct.false_pos
                ),
            }),
            Measure::Auc => Err(Error::undefined(
                self,
                "AUC is defined on pairwise assignments, not a contingency table",
            )),
            _ => Ok(contingency_loss(self, ct.true_pos, ct.false_pos, p, ct.negatives())),
        }
    }
}

/// Loss from counts. Shared by [`Measure::loss`] and the inference grid so a
/// witness always recomputes to the bit-identical value. Callers guarantee
/// the measure is defined on these counts.
pub(crate) fn contingency_loss(measure: Measure, tp: usize, fp: usize, p: usize, q: usize) -> f64 {
    let fneg = p - tp;
    match measure {
        Measure::ErrorRate => 100.0 * (fp + fneg) as f64 / (p + q) as f64,
        Measure::F1 => {
            let denom = 2 * tp + fp + fneg;
            100.0 * (1.0 - (2 * tp) as f64 / denom as f64)
        }
        Measure::Prbep => 100.0 * (1.0 - tp as f64 / p as f64),
        Measure::Auc => unreachable!("AUC has no contingency loss"),
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "err" | "error" | "errorrate" => Ok(Measure::ErrorRate),
            "f1" => Ok(Measure::F1),
            "prbep" => Ok(Measure::Prbep),
            "auc" => Ok(Measure::Auc),
            other => Err(Error::Config(format!(
                "unknown measure `{other}` (expected err, f1, prbep or auc)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub true_pos: usize,
    pub false_pos: usize,
    pub false_neg: usize,
    pub true_neg: usize,
}

impl ContingencyTable {
    pub fn positives(&self) -> usize {
        self.true_pos + self.false_neg
    }

    pub fn negatives(&self) -> usize {
        self.false_pos + self.true_neg
    }

    pub fn total(&self) -> usize {
        self.positives() + self.negatives()
    }
}

pub fn contingency(truth: &[Label], predicted: &[Label]) -> Result<ContingencyTable> {
    if truth.len() != predicted.len() {
        return Err(Error::Shape(format!(
            "{} true labels vs {} predictions",
            truth.len(),
            predicted.len()
        )));
    }
    let mut ct = ContingencyTable::default();
    for (t, p) in truth.iter().zip(predicted) {
        match (t, p) {
            (Label::Pos, Label::Pos) => ct.true_pos += 1,
            (Label::Pos, Label::Neg) => ct.false_neg += 1,
            (Label::Neg, Label::Pos) => ct.false_pos += 1,
            (Label::Neg, Label::Neg) => ct.true_neg += 1,
        }
    }
    Ok(ct)
}

/// Swapped/unswapped assignment for every (positive, negative) pair.
///
/// Rows follow positives and columns follow negatives, each in ascending
/// example-index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairMask {
    positives: usize,
    negatives: usize,
    bits: Vec<u64>,
}

impl PairMask {
    pub fn new(positives: usize, negatives: usize) -> Self {
        let len = positives * negatives;
        Self {
            positives,
            negatives,
            bits: vec![0; len.div_ceil(64)],
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.positives, self.negatives)
    }

    fn slot(&self, pos: usize, neg: usize) -> (usize, u64) {
        assert!(pos < self.positives && neg < self.negatives, "pair out of range");
        let k = pos * self.negatives + neg;
        (k / 64, 1u64 << (k % 64))
    }

    pub fn is_swapped(&self, pos: usize, neg: usize) -> bool {
        let (word, bit) = self.slot(pos, neg);
        self.bits[word] & bit != 0
    }

    pub fn set(&mut self, pos: usize, neg: usize, swapped: bool) {
        let (word, bit) = self.slot(pos, neg);
        if swapped {
            self.bits[word] |= bit;
        } else {
            self.bits[word] &= !bit;
        }
    }

    pub fn swapped_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// AUC loss: percentage of (positive, negative) pairs marked swapped.
pub fn auc_loss(truth: &[Label], swapped: &PairMask) -> Result<f64> {
    let p = truth.iter().filter(|l| l.is_pos()).count();
    let q = truth.len() - p;
    Measure::Auc.check_defined(p, q)?;
    if swapped.shape() != (p, q) {
        return Err(Error::Shape(format!(
            "pair assignment is {:?}, labels give ({p}, {q})",
            swapped.shape()
        )));
    }
    Ok(100.0 * swapped.swapped_count() as f64 / (p * q) as f64)
}

/// Test-time metric in `[0, 1]` computed from real-valued scores.
///
/// Accuracy and F1 threshold at zero (`score >= 0` is positive). PRBEP
/// predicts the `p` highest-scoring examples positive, earlier index first on
/// ties, and returns the precision. AUC counts tied pairs as one half.
pub fn evaluate(measure: Measure, truth: &[Label], scores: &[f64]) -> Result<f64> {
    if truth.len() != scores.len() {
        return Err(Error::Shape(format!(
            "{} labels vs {} scores",
            truth.len(),
            scores.len()
        )));
    }
    let p = truth.iter().filter(|l| l.is_pos()).count();
    let q = truth.len() - p;
    measure.check_defined(p, q)?;
    match measure {
        Measure::ErrorRate => {
            let predicted: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
            let ct = contingency(truth, &predicted)?;
            Ok(1.0 - Measure::ErrorRate.loss(&ct)? / 100.0)
        }
        Measure::F1 => {
            let predicted: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
            let ct = contingency(truth, &predicted)?;
            let denom = 2 * ct.true_pos + ct.false_pos + ct.false_neg;
            Ok(2.0 * ct.true_pos as f64 / denom as f64)
        }
        Measure::Prbep => {
            let top = prbep_predictions(scores, p);
            let ct = contingency(truth, &top)?;
            Ok(ct.true_pos as f64 / p as f64)
        }
        Measure::Auc => Ok(auc(truth, scores, p, q)),
    }
}

/// Labels the `count` highest scores positive, lower index first on ties.
pub fn prbep_predictions(scores: &[f64], count: usize) -> Vec<Label> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let mut out = vec![Label::Neg; scores.len()];
    for &i in order.iter().take(count) {
        out[i] = Label::Pos;
    }
    out
}

fn auc(truth: &[Label], scores: &[f64], p: usize, q: usize) -> f64 {
    let mut neg: Vec<f64> = truth
        .iter()
        .zip(scores)
        .filter(|(l, _)| !l.is_pos())
        .map(|(_, &s)| s)
        .collect();
    neg.sort_by(f64::total_cmp);
    // twice the number of correctly ordered pairs plus tied pairs; exact in u64
    let mut doubled: u64 = 0;
    for (_, &s) in truth.iter().zip(scores).filter(|(l, _)| l.is_pos()) {
        let below = neg.partition_point(|&v| v < s);
        let upto = neg.partition_point(|&v| v <= s);
        doubled += 2 * below as u64 + (upto - below) as u64;
    }
    doubled as f64 / (2 * p * q) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Label::{Neg, Pos};

    fn table(tp: usize, fp: usize, fneg: usize, tn: usize) -> ContingencyTable {
        ContingencyTable {
            true_pos: tp,
            false_pos: fp,
            false_neg: fneg,
            true_neg: tn,
        }
    }

    #[test]
    fn contingency_counts() {
        let ct = contingency(&[Pos, Pos, Neg], &[Pos, Neg, Neg]).unwrap();
        assert_eq!(ct, table(1, 0, 1, 1));
        let truth = [Pos, Neg, Neg, Pos, Neg];
        assert_eq!(contingency(&truth, &truth).unwrap(), table(2, 0, 0, 3));
        let flipped: Vec<_> = truth.iter().map(|l| l.flipped()).collect();
        assert_eq!(contingency(&truth, &flipped).unwrap(), table(0, 3, 2, 0));
        assert!(matches!(contingency(&[Pos], &[Pos, Neg]), Err(Error::Shape(_))));
    }

    #[test]
    fn loss_values() {
        assert_eq!(Measure::F1.loss(&table(7, 0, 0, 3)).unwrap(), 0.0);
        assert_eq!(Measure::F1.loss(&table(25, 25, 25, 0)).unwrap(), 50.0);
        assert_eq!(Measure::ErrorRate.loss(&table(3, 1, 2, 4)).unwrap(), 30.0);
        assert_eq!(Measure::Prbep.loss(&table(3, 1, 1, 5)).unwrap(), 25.0);
    }

    #[test]
    fn prbep_requires_exactly_p_predicted_positives() {
        assert!(matches!(
            Measure::Prbep.loss(&table(3, 2, 1, 5)),
            Err(Error::Admissibility { .. })
        ));
        assert!(Measure::Auc.loss(&table(1, 0, 0, 1)).is_err());
    }

    #[test]
    fn measure_names_are_case_insensitive() {
        for m in Measure::ALL {
            assert_eq!(m.name().to_uppercase().parse::<Measure>().unwrap(), m);
        }
        assert!("precision".parse::<Measure>().is_err());
    }

    #[test]
    fn auc_loss_values() {
        let truth = [Pos, Pos, Neg];
        let mut mask = PairMask::new(2, 1);
        assert_eq!(auc_loss(&truth, &mask).unwrap(), 0.0);
        mask.set(1, 0, true);
        assert_eq!(auc_loss(&truth, &mask).unwrap(), 50.0);
        mask.set(0, 0, true);
        assert_eq!(auc_loss(&truth, &mask).unwrap(), 100.0);
        assert!(matches!(
            auc_loss(&[Pos, Pos], &PairMask::new(2, 0)),
            Err(Error::MeasureUndefined { .. })
        ));
    }

    #[test]
    fn evaluate_examples() {
        // positives score 2 and 0, negative scores 1
        let truth = [Pos, Pos, Neg];
        assert_eq!(evaluate(Measure::Auc, &truth, &[2.0, 0.0, 1.0]).unwrap(), 0.5);
        assert_eq!(evaluate(Measure::Auc, &truth, &[1.0, 1.0, 1.0]).unwrap(), 0.5);
        assert_eq!(evaluate(Measure::Prbep, &truth, &[3.0, 1.0, 2.0]).unwrap(), 0.5);
        assert!(evaluate(Measure::F1, &[Pos, Pos], &[1.0, 1.0]).is_err());
        assert!(evaluate(Measure::Auc, &truth, &[1.0]).is_err());
    }

    #[test]
    fn zero_score_counts_as_positive() {
        let acc = evaluate(Measure::ErrorRate, &[Pos, Neg], &[0.0, -0.0]).unwrap();
        // -0.0 >= 0.0, so both predicted positive
        assert_eq!(acc, 0.5);
    }

    fn labels_and_scores(max: usize) -> impl Strategy<Value = (Vec<Label>, Vec<f64>)> {
        (2..=max).prop_flat_map(|n| {
            (
                proptest::collection::vec(prop_oneof![Just(Pos), Just(Neg)], n),
                // coarse grid so ties occur
                proptest::collection::vec((-4i32..=4).prop_map(|v| v as f64 * 0.5), n),
            )
        })
    }

    proptest! {
        #[test]
        fn loss_is_zero_on_truth_and_bounded((truth, scores) in labels_and_scores(40)) {
            let p = truth.iter().filter(|l| l.is_pos()).count();
            prop_assume!(p > 0);
            let pred: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
            for m in [Measure::ErrorRate, Measure::F1] {
                prop_assert_eq!(m.loss(&contingency(&truth, &truth).unwrap()).unwrap(), 0.0);
                let l = m.loss(&contingency(&truth, &pred).unwrap()).unwrap();
                prop_assert!((0.0..=100.0).contains(&l));
            }
            let top = prbep_predictions(&scores, p);
            let l = Measure::Prbep.loss(&contingency(&truth, &top).unwrap()).unwrap();
            prop_assert!((0.0..=100.0).contains(&l));
            prop_assert_eq!(Measure::Prbep.loss(&contingency(&truth, &truth).unwrap()).unwrap(), 0.0);
        }

        #[test]
        fn accuracy_matches_error_loss((truth, scores) in labels_and_scores(40)) {
            let pred: Vec<Label> = scores.iter().map(|&s| Label::from_score(s)).collect();
            let loss = Measure::ErrorRate.loss(&contingency(&truth, &pred).unwrap()).unwrap();
            prop_assert_eq!(evaluate(Measure::ErrorRate, &truth, &scores).unwrap(), 1.0 - loss / 100.0);
        }

        #[test]
        fn auc_matches_pair_enumeration((truth, scores) in labels_and_scores(50)) {
            let p = truth.iter().filter(|l| l.is_pos()).count();
            let q = truth.len() - p;
            prop_assume!(p > 0 && q > 0);
            let mut credit = 0.0;
            for i in (0..truth.len()).filter(|&i| truth[i].is_pos()) {
                for j in (0..truth.len()).filter(|&j| !truth[j].is_pos()) {
                    credit += if scores[i] > scores[j] { 1.0 } else if scores[i] == scores[j] { 0.5 } else { 0.0 };
                }
            }
            let expected = credit / (p * q) as f64;
            let got = evaluate(Measure::Auc, &truth, &scores).unwrap();
            prop_assert!((got - expected).abs() <= 1e-12);
        }

        #[test]
        fn prbep_precision_equals_recall((truth, scores) in labels_and_scores(40)) {
            let p = truth.iter().filter(|l| l.is_pos()).count();
            prop_assume!(p > 0 && p < truth.len());
            let value = evaluate(Measure::Prbep, &truth, &scores).unwrap();
            let pred = prbep_predictions(&scores, p);
            let ct = contingency(&truth, &pred).unwrap();
            let precision = ct.true_pos as f64 / (ct.true_pos + ct.false_pos) as f64;
            let recall = ct.true_pos as f64 / (ct.true_pos + ct.false_neg) as f64;
            prop_assert_eq!(precision, recall);
            prop_assert_eq!(value, precision);
        }
    }
}
