//! Weighted AUC: probability-weighted concordance between case and control
//! scores, ties counted as half.
//!
//! The estimator is sum_{i0, i1} w_{i0} w_{i1} [I(s_{i0} < s_{i1}) +
//! 0.5 I(s_{i0} = s_{i1})] / (W0 W1) over control units i0 and case units
//! i1. The implementation sorts once and accumulates cumulative control
//! weight in a single pass, so it costs O(n log n) instead of O(n0 n1).
//! Score ties mean exact floating-point equality.

use crate::error::{Error, Result};
use crate::frame::SurveyFrame;
use crate::logit::FittedModel;
use crate::num::{KahanSum, Real};

/// Borrowed inputs for one AUC evaluation.
#[derive(Clone, Copy, Debug)]
pub struct AucInput<'a, T: Real> {
    pub scores: &'a [T],
    pub outcomes: &'a [bool],
    pub weights: &'a [T],
}

impl<'a, T: Real> AucInput<'a, T> {
    /// Validates lengths, score finiteness, and weight non-negativity.
    pub fn new(scores: &'a [T], outcomes: &'a [bool], weights: &'a [T]) -> Result<Self> {
        if scores.len() != outcomes.len() {
            return Err(Error::DimensionMismatch {
                expected: scores.len(),
                actual: outcomes.len(),
            });
        }
        if scores.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: scores.len(),
                actual: weights.len(),
            });
        }
        if scores.is_empty() {
            return Err(Error::EmptyFrame);
        }
        for (i, &s) in scores.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::NonFiniteField {
                    column: "score".into(),
                    row: i + 1,
                });
            }
        }
        for (i, &w) in weights.iter().enumerate() {
            if !(w.is_finite() && w >= T::zero()) {
                return Err(Error::NonPositiveWeight(i + 1));
            }
        }
        Ok(AucInput {
            scores,
            outcomes,
            weights,
        })
    }
}

/// Ascending sort order of the scores, stable in the original positions.
pub fn score_order<T: Real>(scores: &[T]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..scores.len() as u32).collect();
    order.sort_by(|&a, &b| {
        scores[a as usize]
            .partial_cmp(&scores[b as usize])
            .expect("scores are finite")
            .then(a.cmp(&b))
    });
    order
}

/// Weighted AUC reusing a precomputed [`score_order`]. The hot path for
/// replicate evaluation: the order is sorted once, only weights change.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negations catch NaN
pub fn weighted_auc_ordered<T: Real>(
    order: &[u32],
    scores: &[T],
    outcomes: &[bool],
    weights: &[T],
) -> Result<T> {
    let half = T::from(0.5).unwrap();
    let mut numerator = KahanSum::new();
    let mut cum_w0 = KahanSum::new();
    let mut total_w0 = KahanSum::new();
    let mut total_w1 = KahanSum::new();
    let n = order.len();
    let mut i = 0;
    while i < n {
        let s = scores[order[i] as usize];
        let mut group_w0 = KahanSum::new();
        let mut group_w1 = KahanSum::new();
        let mut j = i;
        while j < n && scores[order[j] as usize] == s {
            let u = order[j] as usize;
            if outcomes[u] {
                group_w1.add(weights[u]);
            } else {
                group_w0.add(weights[u]);
            }
            j += 1;
        }
        let (g0, g1) = (group_w0.value(), group_w1.value());
        numerator.add(g1 * cum_w0.value());
        numerator.add(half * g0 * g1);
        cum_w0.add(g0);
        total_w0.add(g0);
        total_w1.add(g1);
        i = j;
    }
    let w0 = total_w0.value();
    let w1 = total_w1.value();
    if !(w0 > T::zero()) {
        return Err(Error::DegenerateAuc { class: "control" });
    }
    if !(w1 > T::zero()) {
        return Err(Error::DegenerateAuc { class: "case" });
    }
    let auc = numerator.value() / (w0 * w1);
    Ok(auc.max(T::zero()).min(T::one()))
}

/// Weighted AUC of validated inputs.
pub fn weighted_auc<T: Real>(input: &AucInput<'_, T>) -> Result<T> {
    let order = score_order(input.scores);
    weighted_auc_ordered(&order, input.scores, input.outcomes, input.weights)
}

/// AUC of a fitted model over a frame with every weight set to one; the
/// census version of the weighted estimator.
pub fn population_auc(frame: &SurveyFrame, model: &FittedModel) -> Result<f64> {
    if model.probs.len() != frame.n() {
        return Err(Error::DimensionMismatch {
            expected: frame.n(),
            actual: model.probs.len(),
        });
    }
    let unit = vec![1.0; frame.n()];
    let input = AucInput::new(&model.probs, frame.outcomes(), &unit)?;
    weighted_auc(&input)
}
