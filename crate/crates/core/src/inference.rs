//! Most-violated-constraint search.
//!
//! For a weight vector `w` and scores `sᵢ = wᵀxᵢ`, each routine maximizes the
//! violation `Δ(ȳ, ȳ′) − wᵀ[Ψ(ȳ) − Ψ(ȳ′)]` over admissible `ȳ′`. This differs
//! from `Δ(ȳ, ȳ′) + wᵀΨ(ȳ′)` only by the constant `wᵀΨ(ȳ)`, so the argmax is
//! the same and the maximum is never negative (`ȳ′ = ȳ` scores zero).
//!
//! Contingency measures use `Ψ(ȳ′) = Σ y′ᵢ xᵢ`. AUC uses the pairwise map
//! `Ψ(ȳ′) = (1/pq) Σ y′ᵢⱼ (xᵢ − xⱼ)` over positive/negative pairs with loss
//! `100 · swapped / pq`, so a pair is worth swapping exactly when
//! `sᵢ − sⱼ < 50`.

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::measures::{auc_loss, contingency, contingency_loss, Measure, PairMask};
use crate::sparse::SparseVector;

/// Score gap below which a (positive, negative) pair is assigned "swapped".
pub const AUC_SWAP_GAP: f64 = 50.0;

/// Largest `n` (contingency) or `p·q` (AUC) accepted by the brute-force oracle.
pub const BRUTE_FORCE_LIMIT: usize = 16;

/// The label assignment behind a constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    /// One predicted label per example.
    Labels(Vec<Label>),
    /// Per-example sort keys: pair `(i, j)` is swapped iff `key[i] < key[j]`.
    PairKeys(Vec<f64>),
    /// Explicit per-pair assignment.
    Pairs(PairMask),
}

/// One cutting-plane constraint `wᵀ δΨ ≥ Δ − ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRecord {
    /// `Ψ(x̄, ȳ) − Ψ(x̄, ȳ′)`.
    pub feature_delta: SparseVector,
    /// `Δ(ȳ, ȳ′)` on the 0–100 scale.
    pub loss: f64,
    pub witness: Witness,
}

impl ConstraintRecord {
    /// Builds the record implied by `witness`.
    pub fn from_witness(data: &Dataset, measure: Measure, witness: Witness) -> Result<Self> {
        let (feature_delta, loss) = delta_and_loss(data, measure, &witness)?;
        Ok(Self {
            feature_delta,
            loss,
            witness,
        })
    }

    /// `wᵀ δΨ`.
    pub fn margin(&self, w: &[f64]) -> f64 {
        self.feature_delta.dot_dense(w)
    }

    /// `Δ − wᵀ δΨ`.
    pub fn violation(&self, w: &[f64]) -> f64 {
        self.loss - self.margin(w)
    }
}

/// Recomputes `(feature_delta, loss)` from a witness.
pub fn delta_and_loss(data: &Dataset, measure: Measure, witness: &Witness) -> Result<(SparseVector, f64)> {
    let truth = data.labels();
    match (measure.is_contingency(), witness) {
        (true, Witness::Labels(pred)) => {
            let ct = contingency(&truth, pred)?;
            let loss = measure.loss(&ct)?;
            let coef: Vec<f64> = truth.iter().zip(pred).map(|(y, yp)| y.value() - yp.value()).collect();
            Ok((combine(data, &coef), loss))
        }
        (false, Witness::PairKeys(keys)) => {
            if keys.len() != data.len() {
                return Err(Error::Shape(format!(
                    "{} pair keys for {} examples",
                    keys.len(),
                    data.len()
                )));
            }
            let (p, q) = (data.positives(), data.negatives());
            Measure::Auc.check_defined(p, q)?;
            let counts = pair_counts_from_keys(&truth, keys);
            Ok(pairwise_delta_and_loss(data, &counts, p, q))
        }
        (false, Witness::Pairs(mask)) => {
            let loss = auc_loss(&truth, mask)?;
            let (pos, neg) = split_by_label(&truth);
            let mut counts = vec![0usize; data.len()];
            for (a, &i) in pos.iter().enumerate() {
                for (b, &j) in neg.iter().enumerate() {
                    if mask.is_swapped(a, b) {
                        counts[i] += 1;
                        counts[j] += 1;
                    }
                }
            }
            let (delta, _) = pairwise_delta_and_loss(data, &counts, pos.len(), neg.len());
            Ok((delta, loss))
        }
        _ => Err(Error::Parameter(format!("witness kind does not fit measure {measure}"))),
    }
}

/// `Σ coef[i] · xᵢ`.
fn combine(data: &Dataset, coef: &[f64]) -> SparseVector {
    let mut dense = vec![0.0; data.dimension()];
    for (ex, &c) in data.examples().iter().zip(coef) {
        if c != 0.0 {
            ex.features.add_scaled_to(&mut dense, c);
        }
    }
    SparseVector::from_dense(&dense)
}

/// `counts[i]` is the number of swapped pairs example `i` takes part in.
fn pairwise_delta_and_loss(data: &Dataset, counts: &[usize], p: usize, q: usize) -> (SparseVector, f64) {
    let pairs = (p * q) as f64;
    let mut swapped = 0usize;
    let coef: Vec<f64> = data
        .examples()
        .iter()
        .zip(counts)
        .map(|(ex, &c)| {
            if ex.label.is_pos() {
                swapped += c;
                2.0 * c as f64 / pairs
            } else {
                -2.0 * c as f64 / pairs
            }
        })
        .collect();
    (combine(data, &coef), 100.0 * swapped as f64 / pairs)
}

fn split_by_label(truth: &[Label]) -> (Vec<usize>, Vec<usize>) {
    (0..truth.len()).partition(|&i| truth[i].is_pos())
}

/// Swapped-pair counts per example for the key rule, in `O(n log n)`.
fn pair_counts_from_keys(truth: &[Label], keys: &[f64]) -> Vec<usize> {
    let (pos, neg) = split_by_label(truth);
    let mut pos_keys: Vec<f64> = pos.iter().map(|&i| keys[i]).collect();
    let mut neg_keys: Vec<f64> = neg.iter().map(|&j| keys[j]).collect();
    pos_keys.sort_by(f64::total_cmp);
    neg_keys.sort_by(f64::total_cmp);
    let mut counts = vec![0usize; truth.len()];
    for &i in &pos {
        // negatives with key strictly above
        counts[i] = neg_keys.len() - neg_keys.partition_point(|&k| k <= keys[i]);
    }
    for &j in &neg {
        // positives with key strictly below
        counts[j] = pos_keys.partition_point(|&k| k < keys[j]);
    }
    counts
}

/// Dispatches to the contingency or AUC search.
pub fn most_violated(measure: Measure, w: &[f64], data: &Dataset, exec: Execution) -> Result<ConstraintRecord> {
    match measure {
        Measure::Auc => most_violated_auc(w, data, exec),
        _ => most_violated_contingency(measure, w, data, exec),
    }
}

/// Searches the `(a, b)` grid: the top-`a` positives and top-`b` negatives
/// (by score, earlier index first on ties) are predicted positive. Prefix
/// sums make each cell O(1); PRBEP only visits `a + b = p`.
///
/// For error rate and F1 the objective is concave in `b` at fixed `a`, so
/// each row is settled by binary search on its increments, `O(p log q)`
/// overall. [`most_violated_contingency_exhaustive`] scans every cell.
pub fn most_violated_contingency(
    measure: Measure,
    w: &[f64],
    data: &Dataset,
    exec: Execution,
) -> Result<ConstraintRecord> {
    contingency_search(measure, w, data, exec, false)
}

/// [`most_violated_contingency`] visiting all `(p+1)(q+1)` cells.
pub fn most_violated_contingency_exhaustive(
    measure: Measure,
    w: &[f64],
    data: &Dataset,
    exec: Execution,
) -> Result<ConstraintRecord> {
    contingency_search(measure, w, data, exec, true)
}

fn contingency_search(
    measure: Measure,
    w: &[f64],
    data: &Dataset,
    exec: Execution,
    exhaustive: bool,
) -> Result<ConstraintRecord> {
    if !measure.is_contingency() {
        return Err(Error::Parameter("AUC is not a contingency measure".into()));
    }
    let (p, q) = (data.positives(), data.negatives());
    measure.check_defined(p, q)?;
    let scores = data.scores(w, exec);
    let truth = data.labels();
    let (mut pos, mut neg) = split_by_label(&truth);
    let by_score_desc = |a: &usize, b: &usize| scores[*b].total_cmp(&scores[*a]).then(a.cmp(b));
    pos.sort_by(by_score_desc);
    neg.sort_by(by_score_desc);

    let prefix = |idx: &[usize]| {
        let mut acc = Vec::with_capacity(idx.len() + 1);
        acc.push(0.0);
        let mut sum = 0.0;
        for &i in idx {
            sum += scores[i];
            acc.push(sum);
        }
        acc
    };
    let pos_prefix = prefix(&pos);
    let neg_prefix = prefix(&neg);
    let pos_total = pos_prefix[p];

    // violation(a, b) = Δ(a, b) − 2(Σ_pos s − top-a pos sum) + 2·top-b neg sum
    let cell = |a: usize, b: usize| {
        contingency_loss(measure, a, b, p, q) - 2.0 * (pos_total - pos_prefix[a]) + 2.0 * neg_prefix[b]
    };
    let best_for_a = |a: usize| -> Option<(f64, usize, usize)> {
        let range = if measure == Measure::Prbep {
            if a + q < p {
                return None;
            }
            p - a..=p - a
        } else if exhaustive {
            0..=q
        } else {
            // first b whose increment is not positive
            let (mut lo, mut hi) = (0, q);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if cell(a, mid + 1) - cell(a, mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            lo..=lo
        };
        let mut best: Option<(f64, usize)> = None;
        for b in range {
            let v = cell(a, b);
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, b));
            }
        }
        best.map(|(v, b)| (v, a, b))
    };
    let better = |x: &Option<(f64, usize, usize)>, y: &Option<(f64, usize, usize)>| match (x, y) {
        (Some(x), Some(y)) => x.0 > y.0 || (x.0 == y.0 && (x.1, x.2) < (y.1, y.2)),
        (Some(_), None) => true,
        _ => false,
    };
    let (_, a, b) = exec
        .best_of(p + 1, best_for_a, better)
        .flatten()
        .expect("the grid always has an admissible cell");

    let mut pred = vec![Label::Neg; data.len()];
    for &i in pos.iter().take(a).chain(neg.iter().take(b)) {
        pred[i] = Label::Pos;
    }
    ConstraintRecord::from_witness(data, measure, Witness::Labels(pred))
}

/// AUC search in `O(n log n)`: shifting positive scores down and negative
/// scores up by half the swap gap turns the per-pair rule into a key
/// comparison, and sorted keys give each example's swap count directly.
pub fn most_violated_auc(w: &[f64], data: &Dataset, exec: Execution) -> Result<ConstraintRecord> {
    Measure::Auc.check_defined(data.positives(), data.negatives())?;
    let scores = data.scores(w, exec);
    let half = AUC_SWAP_GAP / 2.0;
    let keys = data
        .examples()
        .iter()
        .zip(&scores)
        .map(|(ex, &s)| if ex.label.is_pos() { s - half } else { s + half })
        .collect();
    ConstraintRecord::from_witness(data, Measure::Auc, Witness::PairKeys(keys))
}

/// The same AUC search through the explicit `O(p·q)` pair rule. Kept as a
/// cross-check for [`most_violated_auc`].
pub fn most_violated_auc_pairwise(w: &[f64], data: &Dataset) -> Result<ConstraintRecord> {
    let (p, q) = (data.positives(), data.negatives());
    Measure::Auc.check_defined(p, q)?;
    let scores = data.scores(w, Execution::Sequential);
    let (pos, neg) = split_by_label(&data.labels());
    let mut mask = PairMask::new(p, q);
    for (a, &i) in pos.iter().enumerate() {
        for (b, &j) in neg.iter().enumerate() {
            mask.set(a, b, scores[i] - scores[j] < AUC_SWAP_GAP);
        }
    }
    ConstraintRecord::from_witness(data, Measure::Auc, Witness::Pairs(mask))
}

/// Exhaustive search over the admissible set; the first maximum in
/// lexicographic witness order (`−1 < +1`, first element most significant)
/// wins. Limited to `n ≤ 16`, or `p·q ≤ 16` for AUC.
pub fn brute_force_most_violated(measure: Measure, w: &[f64], data: &Dataset) -> Result<ConstraintRecord> {
    let (p, q) = (data.positives(), data.negatives());
    measure.check_defined(p, q)?;
    let scores = data.scores(w, Execution::Sequential);
    let truth = data.labels();
    if measure == Measure::Auc {
        let pairs = p * q;
        if pairs > BRUTE_FORCE_LIMIT {
            return Err(Error::Capacity {
                size: pairs,
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        let (pos, neg) = split_by_label(&truth);
        let gaps: Vec<f64> = pos
            .iter()
            .flat_map(|&i| neg.iter().map(move |&j| (i, j)))
            .map(|(i, j)| scores[i] - scores[j])
            .collect();
        let mut best: Option<(f64, u32)> = None;
        for mask in 0u32..(1 << pairs) {
            let mut swapped = 0usize;
            let mut gap_sum = 0.0;
            for (k, gap) in gaps.iter().enumerate() {
                if mask >> (pairs - 1 - k) & 1 == 1 {
                    swapped += 1;
                    gap_sum += gap;
                }
            }
            let v = (100.0 * swapped as f64 - 2.0 * gap_sum) / pairs as f64;
            if best.is_none_or(|(bv, _)| v > bv) {
                best = Some((v, mask));
            }
        }
        let (_, bits) = best.expect("at least one assignment");
        let mut witness = PairMask::new(p, q);
        for k in 0..pairs {
            witness.set(k / q, k % q, bits >> (pairs - 1 - k) & 1 == 1);
        }
        return ConstraintRecord::from_witness(data, measure, Witness::Pairs(witness));
    }

    let n = data.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Capacity {
            size: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut best: Option<(f64, Vec<Label>)> = None;
    for mask in 0u32..(1 << n) {
        let pred: Vec<Label> = (0..n)
            .map(|i| {
                if mask >> (n - 1 - i) & 1 == 1 {
                    Label::Pos
                } else {
                    Label::Neg
                }
            })
            .collect();
        let ct = contingency(&truth, &pred)?;
        if measure == Measure::Prbep && ct.true_pos + ct.false_pos != p {
            continue;
        }
        let margin: f64 = (0..n).map(|i| (truth[i].value() - pred[i].value()) * scores[i]).sum();
        let v = measure.loss(&ct)? - margin;
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, pred));
        }
    }
    let (_, pred) = best.expect("the admissible set is never empty");
    ConstraintRecord::from_witness(data, measure, Witness::Labels(pred))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Example;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_data(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Dataset {
        loop {
            let examples: Vec<Example> = (0..n)
                .map(|_| Example {
                    features: SparseVector::from_dense(&(0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>()),
                    label: if rng.gen_bool(0.5) { Label::Pos } else { Label::Neg },
                })
                .collect();
            let d = Dataset::with_dimension(examples, dim).unwrap();
            if d.positives() > 0 && d.negatives() > 0 {
                return d;
            }
        }
    }

    fn tiny() -> Dataset {
        Dataset::from_svmlight_str("+1 1:1\n+1 1:2 2:1\n-1 2:1\n-1 1:-1\n+1 2:-1\n-1 1:0.5").unwrap()
    }

    #[test]
    fn zero_weights_error_rate_flips_everything() {
        let d = tiny();
        let rec = most_violated_contingency(Measure::ErrorRate, &[0.0; 2], &d, Execution::Sequential).unwrap();
        let flipped: Vec<Label> = d.labels().iter().map(|l| l.flipped()).collect();
        assert_eq!(rec.witness, Witness::Labels(flipped));
        assert_eq!(rec.loss, 100.0);
        assert_eq!(rec.violation(&[0.0; 2]), 100.0);
    }

    #[test]
    fn zero_weights_f1_predicts_all_negative() {
        let d = tiny();
        let rec = most_violated_contingency(Measure::F1, &[0.0; 2], &d, Execution::Sequential).unwrap();
        assert_eq!(rec.witness, Witness::Labels(vec![Label::Neg; 6]));
        assert_eq!(rec.loss, 100.0);
    }

    #[test]
    fn zero_weights_auc_swaps_every_pair() {
        let d = tiny();
        let rec = most_violated_auc(&[0.0; 2], &d, Execution::Sequential).unwrap();
        assert_eq!(rec.loss, 100.0);
    }

    #[test]
    fn separating_weights_give_no_swaps() {
        let d = Dataset::from_svmlight_str("+1 1:1\n+1 1:2\n-1 1:-1\n-1 1:-3").unwrap();
        let w = [100.0];
        let rec = most_violated_auc(&w, &d, Execution::Sequential).unwrap();
        assert_eq!(rec.loss, 0.0);
        assert!(rec.feature_delta.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn undefined_measures_are_rejected() {
        let d = Dataset::from_svmlight_str("+1 1:1\n+1 1:2").unwrap();
        for m in [Measure::F1, Measure::Prbep, Measure::Auc] {
            assert!(matches!(
                most_violated(m, &[0.0], &d, Execution::Sequential),
                Err(Error::MeasureUndefined { .. })
            ));
        }
        assert!(most_violated(Measure::ErrorRate, &[0.0], &d, Execution::Sequential).is_ok());
    }

    #[test]
    fn brute_force_single_positive() {
        let d = Dataset::from_svmlight_str("+1 1:1").unwrap();
        let rec = brute_force_most_violated(Measure::ErrorRate, &[0.0], &d).unwrap();
        assert_eq!(rec.witness, Witness::Labels(vec![Label::Neg]));
        assert_eq!(rec.loss, 100.0);
    }

    #[test]
    fn brute_force_enforces_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_data(&mut rng, 17, 2);
        assert!(matches!(
            brute_force_most_violated(Measure::F1, &[0.0; 2], &d),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn polynomial_matches_brute_force_n10() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let d = random_data(&mut rng, 10, 3);
            let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            for m in [Measure::ErrorRate, Measure::F1, Measure::Prbep] {
                let fast = most_violated(m, &w, &d, Execution::Sequential).unwrap();
                let slow = brute_force_most_violated(m, &w, &d).unwrap();
                assert!((fast.violation(&w) - slow.violation(&w)).abs() < 1e-9, "{m}");
            }
        }
    }

    #[test]
    fn auc_routes_agree_with_exhaustive_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut checked = 0;
        while checked < 10 {
            let d = random_data(&mut rng, 7, 3);
            if d.positives() != 3 {
                continue;
            }
            // scale so that gaps straddle the swap threshold
            let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-60.0..60.0)).collect();
            let keyed = most_violated_auc(&w, &d, Execution::Sequential).unwrap();
            let pairwise = most_violated_auc_pairwise(&w, &d).unwrap();
            let exhaustive = brute_force_most_violated(Measure::Auc, &w, &d).unwrap();
            assert_eq!(keyed.loss, pairwise.loss);
            assert!((keyed.violation(&w) - exhaustive.violation(&w)).abs() < 1e-9);
            for (a, b) in keyed
                .feature_delta
                .to_dense(3)
                .iter()
                .zip(pairwise.feature_delta.to_dense(3))
            {
                assert!((a - b).abs() < 1e-9);
            }
            checked += 1;
        }
    }

    #[test]
    fn parallel_and_sequential_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let d = random_data(&mut rng, 600, 4);
        let w = [0.3, -0.2, 0.1, 0.05];
        for m in Measure::ALL {
            let a = most_violated(m, &w, &d, Execution::Sequential).unwrap();
            let b = most_violated(m, &w, &d, Execution::Parallel).unwrap();
            assert_eq!(a, b, "{m}");
        }
    }

    #[test]
    fn row_search_matches_full_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for round in 0..60 {
            let n = rng.gen_range(2..120);
            let d = random_data(&mut rng, n, 3);
            // coarse integer weights produce many tied scores
            let w: Vec<f64> = if round % 2 == 0 {
                (0..3).map(|_| rng.gen_range(-3..=3) as f64).collect()
            } else {
                (0..3).map(|_| rng.gen_range(-40.0..40.0)).collect()
            };
            for m in [Measure::ErrorRate, Measure::F1, Measure::Prbep] {
                let fast = most_violated_contingency(m, &w, &d, Execution::Sequential).unwrap();
                let full = most_violated_contingency_exhaustive(m, &w, &d, Execution::Sequential).unwrap();
                assert!(
                    (fast.violation(&w) - full.violation(&w)).abs() <= 1e-9,
                    "{m} round {round}"
                );
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn records_are_consistent_with_their_witness(seed in any::<u64>(), n in 2usize..40, dim in 1usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let d = random_data(&mut rng, n, dim);
                let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                for m in Measure::ALL {
                    let rec = most_violated(m, &w, &d, Execution::Sequential).unwrap();
                    let (delta, loss) = delta_and_loss(&d, m, &rec.witness).unwrap();
                    prop_assert!((loss - rec.loss).abs() <= 1e-9);
                    for k in 0..dim {
                        prop_assert!((delta.get(k) - rec.feature_delta.get(k)).abs() <= 1e-9);
                    }
                    // ȳ′ = ȳ has violation 0, so the argmax can never be negative
                    prop_assert!(rec.violation(&w) >= -1e-9);
                }
            }

            #[test]
            fn prbep_witness_predicts_p_positives(seed in any::<u64>(), n in 2usize..40, dim in 1usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let d = random_data(&mut rng, n, dim);
                let w: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let rec = most_violated(Measure::Prbep, &w, &d, Execution::Sequential).unwrap();
                match rec.witness {
                    Witness::Labels(labels) => {
                        prop_assert_eq!(labels.iter().filter(|l| l.is_pos()).count(), d.positives());
                    }
                    other => prop_assert!(false, "unexpected witness {:?}", other),
                }
            }
        }
    }
}
