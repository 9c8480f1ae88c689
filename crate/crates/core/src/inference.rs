//! Variance estimation, confidence intervals, and hypothesis tests for
//! weighted AUC estimates.
//!
//! Replicate AUCs reuse the original fit's probabilities; models are never
//! refitted per replicate. A replicate whose positive-weight units are all
//! cases or all controls is recorded as missing: the jackknife requires a
//! complete set, the bootstrap drops missing replicates (with an error once
//! more than 1% are missing).

use rayon::prelude::*;
use serde::Serialize;

use crate::auc::{score_order, weighted_auc, weighted_auc_ordered, AucInput};
use crate::error::{Error, Result};
use crate::frame::SurveyFrame;
use crate::logit::FittedModel;
use crate::normal::{std_normal_quantile, std_normal_sf};
use crate::num::{pairwise_sum, Real};
use crate::replicate::{replicate_weights, Method, ReplicateWeightSet, ResampleRng};
use crate::Scalar;

/// Confidence interval construction rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CiKind {
    Normal,
    Percentile,
}

impl std::str::FromStr for CiKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(CiKind::Normal),
            "percentile" => Ok(CiKind::Percentile),
            other => Err(Error::InvalidSpec(format!("unknown ci kind `{other}`"))),
        }
    }
}

/// Point estimate with its replicate diagnostics.
#[derive(Clone, Debug)]
pub struct AucEstimate {
    pub point: Scalar,
    pub method: Method,
    pub variance: Scalar,
    /// One entry per replicate; `None` marks a degenerate replicate.
    pub replicate_aucs: Vec<Option<Scalar>>,
    pub n_used_replicates: usize,
    pub n_degenerate: usize,
}

impl AucEstimate {
    pub fn se(&self) -> Scalar {
        self.variance.sqrt()
    }
}

/// Two-sided confidence interval. Normal intervals are reported unclipped;
/// `outside_unit_interval` flags endpoints beyond [0, 1].
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConfidenceInterval {
    pub lower: Scalar,
    pub upper: Scalar,
    pub level: Scalar,
    pub construction: CiKind,
    pub outside_unit_interval: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pairing {
    Independent,
    Paired,
}

/// Z test outcome for an AUC difference.
#[derive(Clone, Debug, Serialize)]
pub struct TestResult {
    pub d_hat: Scalar,
    pub variance_d: Scalar,
    pub z: Scalar,
    pub p_value: Scalar,
    pub alpha: Scalar,
    pub reject: bool,
    pub pairing: Pairing,
    pub method: Method,
    pub n_used_replicates: usize,
    pub n_degenerate: usize,
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // negation catches NaN
fn check_alpha(alpha: Scalar) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidAlpha(alpha));
    }
    Ok(())
}

/// Evaluates the AUC under every replicate weight vector. Scores and
/// outcomes stay fixed; only weights change, so the score sort is shared.
pub fn replicate_aucs(
    scores: &[Scalar],
    outcomes: &[bool],
    set: &ReplicateWeightSet,
) -> Vec<Option<Scalar>> {
    let order = score_order(scores);
    (0..set.n_replicates())
        .into_par_iter()
        .map(|b| weighted_auc_ordered(&order, scores, outcomes, set.replicate(b)).ok())
        .collect()
}

fn degenerate_guard(set_method: Method, aucs: &[Option<Scalar>]) -> Result<(usize, usize)> {
    let total = aucs.len();
    let missing = aucs.iter().filter(|a| a.is_none()).count();
    if set_method == Method::Jkn {
        if let Some(b) = aucs.iter().position(|a| a.is_none()) {
            return Err(Error::MissingReplicate(b));
        }
    } else if missing as f64 > 0.01 * total as f64 {
        return Err(Error::TooManyDegenerateReplicates {
            degenerate: missing,
            total,
        });
    }
    Ok((total - missing, missing))
}

/// Point estimate plus replicate variance for given scores.
pub fn estimate_auc(
    scores: &[Scalar],
    outcomes: &[bool],
    base_weights: &[Scalar],
    set: &ReplicateWeightSet,
) -> Result<AucEstimate> {
    let point = weighted_auc(&AucInput::new(scores, outcomes, base_weights)?)?;
    let aucs = replicate_aucs(scores, outcomes, set);
    let (used, degenerate) = degenerate_guard(set.method, &aucs)?;
    let variance = match set.method {
        Method::Jkn => variance_jkn(point, set, &aucs)?,
        _ => variance_boot(&aucs)?,
    };
    Ok(AucEstimate {
        point,
        method: set.method,
        variance,
        replicate_aucs: aucs,
        n_used_replicates: used,
        n_degenerate: degenerate,
    })
}

/// Stratified jackknife variance: sum over replicates of
/// (a_h - 1)/a_h * (auc_b - point)^2, with the full-sample point as center.
pub fn variance_jkn(
    point: Scalar,
    set: &ReplicateWeightSet,
    aucs: &[Option<Scalar>],
) -> Result<Scalar> {
    if set.method != Method::Jkn {
        return Err(Error::SchemeMismatch {
            expected: Method::Jkn,
            actual: set.method,
        });
    }
    let factors = set
        .jkn_factors
        .as_ref()
        .expect("jkn sets always carry factors");
    if aucs.len() != factors.len() {
        return Err(Error::DimensionMismatch {
            expected: factors.len(),
            actual: aucs.len(),
        });
    }
    let mut terms = Vec::with_capacity(aucs.len());
    for (b, auc) in aucs.iter().enumerate() {
        let auc = auc.ok_or(Error::MissingReplicate(b))?;
        let dev = auc - point;
        terms.push(factors[b] * dev * dev);
    }
    Ok(pairwise_sum(&terms))
}

/// Bootstrap variance: sample variance of the usable replicate AUCs with
/// divisor B - 1, centered at the replicate mean.
pub fn variance_boot(aucs: &[Option<Scalar>]) -> Result<Scalar> {
    let usable: Vec<Scalar> = aucs.iter().flatten().copied().collect();
    if usable.len() < 2 {
        return Err(Error::TooFewUsableReplicates {
            usable: usable.len(),
        });
    }
    let mean = pairwise_sum(&usable) / usable.len() as Scalar;
    let devs: Vec<Scalar> = usable.iter().map(|a| (a - mean) * (a - mean)).collect();
    Ok(pairwise_sum(&devs) / (usable.len() as Scalar - 1.0))
}

/// Symmetric normal interval `point +/- z_{alpha/2} * se`, unclipped.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // negation catches NaN
pub fn ci_normal(point: Scalar, variance: Scalar, alpha: Scalar) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    if !(variance >= 0.0) {
        return Err(Error::NegativeVariance(variance));
    }
    let z: Scalar = std_normal_quantile(1.0 - alpha / 2.0)?;
    let half = z * variance.sqrt();
    let (lower, upper) = (point - half, point + half);
    Ok(ConfidenceInterval {
        lower,
        upper,
        level: 1.0 - alpha,
        construction: CiKind::Normal,
        outside_unit_interval: lower < 0.0 || upper > 1.0,
    })
}

/// Linear-interpolation quantile at position (n - 1) q + 1 of the order
/// statistics (the common "type 7" rule). `sorted` must be ascending.
pub fn quantile_type7<T: Real>(sorted: &[T], q: T) -> T {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let h = T::from(n - 1).unwrap() * q;
    let lo = h.floor().to_usize().unwrap().min(n - 1);
    let hi = (lo + 1).min(n - 1);
    let frac = h - h.floor();
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Percentile interval from bootstrap replicate AUCs: the alpha/2 and
/// 1 - alpha/2 empirical quantiles. Jackknife replicates are refused.
pub fn ci_percentile(
    aucs: &[Option<Scalar>],
    alpha: Scalar,
    method: Method,
) -> Result<ConfidenceInterval> {
    check_alpha(alpha)?;
    if !method.is_bootstrap() {
        return Err(Error::PercentileRequiresBootstrap(method));
    }
    let mut usable: Vec<Scalar> = aucs.iter().flatten().copied().collect();
    if usable.len() < 2 {
        return Err(Error::TooFewUsableReplicates {
            usable: usable.len(),
        });
    }
    usable.sort_by(|a, b| a.partial_cmp(b).expect("replicate AUCs are finite"));
    let lower = quantile_type7(&usable, alpha / 2.0);
    let upper = quantile_type7(&usable, 1.0 - alpha / 2.0);
    Ok(ConfidenceInterval {
        lower,
        upper,
        level: 1.0 - alpha,
        construction: CiKind::Percentile,
        outside_unit_interval: lower < 0.0 || upper > 1.0,
    })
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // negation catches NaN
fn z_test(
    d_hat: Scalar,
    variance_d: Scalar,
    alpha: Scalar,
    pairing: Pairing,
    method: Method,
    used: usize,
    degenerate: usize,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    if !(variance_d >= 0.0) {
        return Err(Error::NegativeVariance(variance_d));
    }
    let (z, p_value) = if variance_d == 0.0 {
        if d_hat == 0.0 {
            (0.0, 1.0)
        } else {
            return Err(Error::InfiniteZ { d_hat });
        }
    } else {
        let z = d_hat / variance_d.sqrt();
        (z, 2.0 * std_normal_sf(z.abs()))
    };
    Ok(TestResult {
        d_hat,
        variance_d,
        z,
        p_value,
        alpha,
        reject: p_value < alpha,
        pairing,
        method,
        n_used_replicates: used,
        n_degenerate: degenerate,
    })
}

/// Compares the AUCs of two models estimated on independent samples:
/// z = (auc1 - auc2) / sqrt(var1 + var2). Both estimates must come from
/// the same replicate method.
pub fn test_independent(
    est1: &AucEstimate,
    est2: &AucEstimate,
    alpha: Scalar,
) -> Result<TestResult> {
    if est1.method != est2.method {
        return Err(Error::MethodMismatch {
            left: est1.method,
            right: est2.method,
        });
    }
    z_test(
        est1.point - est2.point,
        est1.variance + est2.variance,
        alpha,
        Pairing::Independent,
        est1.method,
        est1.n_used_replicates.min(est2.n_used_replicates),
        est1.n_degenerate + est2.n_degenerate,
    )
}

/// Compares two models fitted on the same frame. One replicate weight set
/// is generated and shared by both models; each replicate contributes the
/// difference of the two replicate AUCs at fixed original-fit
/// probabilities. A replicate degenerate for either model is dropped for
/// both (jackknife: error).
pub fn test_paired(
    frame: &SurveyFrame,
    model1: &FittedModel,
    model2: &FittedModel,
    method: Method,
    b: usize,
    rng: ResampleRng,
    alpha: Scalar,
) -> Result<TestResult> {
    check_alpha(alpha)?;
    for model in [model1, model2] {
        if model.probs.len() != frame.n() {
            return Err(Error::DimensionMismatch {
                expected: frame.n(),
                actual: model.probs.len(),
            });
        }
    }
    let set = replicate_weights(frame, method, b, rng)?;
    let d_replicates = paired_difference_replicates(frame, model1, model2, &set);
    let (used, degenerate) = degenerate_guard(method, &d_replicates)?;

    let point1 = weighted_auc(&AucInput::new(&model1.probs, frame.outcomes(), frame.weights())?)?;
    let point2 = weighted_auc(&AucInput::new(&model2.probs, frame.outcomes(), frame.weights())?)?;
    let d_hat = point1 - point2;

    let variance_d = match method {
        Method::Jkn => {
            let factors = set.jkn_factors.as_ref().expect("jkn factors");
            let mut terms = Vec::with_capacity(d_replicates.len());
            for (idx, d) in d_replicates.iter().enumerate() {
                let d = d.ok_or(Error::MissingReplicate(idx))?;
                let dev = d - d_hat;
                terms.push(factors[idx] * dev * dev);
            }
            pairwise_sum(&terms)
        }
        _ => variance_boot(&d_replicates)?,
    };
    z_test(
        d_hat,
        variance_d,
        alpha,
        Pairing::Paired,
        method,
        used,
        degenerate,
    )
}

/// Per-replicate AUC differences for two models sharing one weight set.
pub fn paired_difference_replicates(
    frame: &SurveyFrame,
    model1: &FittedModel,
    model2: &FittedModel,
    set: &ReplicateWeightSet,
) -> Vec<Option<Scalar>> {
    let order1 = score_order(&model1.probs);
    let order2 = score_order(&model2.probs);
    let outcomes = frame.outcomes();
    (0..set.n_replicates())
        .into_par_iter()
        .map(|idx| {
            let w = set.replicate(idx);
            let a1 = weighted_auc_ordered(&order1, &model1.probs, outcomes, w).ok()?;
            let a2 = weighted_auc_ordered(&order2, &model2.probs, outcomes, w).ok()?;
            Some(a1 - a2)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::UnitRecord;

    fn wrap(xs: &[Scalar]) -> Vec<Option<Scalar>> {
        xs.iter().map(|&x| Some(x)).collect()
    }

    #[test]
    fn variance_boot_two_replicates_hand_value() {
        let v = variance_boot(&wrap(&[0.7, 0.8])).unwrap();
        assert!((v - 0.005).abs() < 1e-15);
    }

    #[test]
    fn variance_boot_needs_two_usable() {
        assert!(matches!(
            variance_boot(&[Some(0.5), None]),
            Err(Error::TooFewUsableReplicates { usable: 1 })
        ));
    }

    #[test]
    fn ci_normal_hand_value() {
        let ci = ci_normal(0.8, 0.0001, 0.05).unwrap();
        assert!((ci.lower - 0.780400).abs() < 5e-7, "lower = {}", ci.lower);
        assert!((ci.upper - 0.819600).abs() < 5e-7, "upper = {}", ci.upper);
        assert!(!ci.outside_unit_interval);
        // midpoint recovers the point estimate
        assert!(((ci.lower + ci.upper) / 2.0 - 0.8).abs() < 1e-12);
    }

    #[test]
    fn ci_normal_flags_unit_interval_violations() {
        let ci = ci_normal(0.98, 0.01, 0.05).unwrap();
        assert!(ci.upper > 1.0);
        assert!(ci.outside_unit_interval);
        let ci = ci_normal(0.5, 0.0, 0.05).unwrap();
        assert_eq!((ci.lower, ci.upper), (0.5, 0.5));
    }

    #[test]
    fn ci_normal_rejects_bad_alpha() {
        assert!(matches!(ci_normal(0.5, 0.01, 0.0), Err(Error::InvalidAlpha(_))));
        assert!(matches!(ci_normal(0.5, 0.01, 1.0), Err(Error::InvalidAlpha(_))));
        assert!(matches!(
            ci_normal(0.5, -1e-9, 0.05),
            Err(Error::NegativeVariance(_))
        ));
    }

    #[test]
    fn percentile_interval_follows_type7_rule() {
        let reps = wrap(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]);
        // alpha = 0.2: positions (9*0.1)+1 = 1.9 and (9*0.9)+1 = 9.1
        let ci = ci_percentile(&reps, 0.2, Method::Rb).unwrap();
        assert!((ci.lower - 0.19).abs() < 1e-15, "lower = {}", ci.lower);
        assert!((ci.upper - 0.91).abs() < 1e-15, "upper = {}", ci.upper);
        // alpha = 0.1: positions 1.45 and 9.55
        let ci = ci_percentile(&reps, 0.1, Method::Rb).unwrap();
        assert!((ci.lower - 0.145).abs() < 1e-15, "lower = {}", ci.lower);
        assert!((ci.upper - 0.955).abs() < 1e-15, "upper = {}", ci.upper);
    }

    #[test]
    fn percentile_rejects_jackknife() {
        let reps = wrap(&[0.4, 0.5, 0.6]);
        assert!(matches!(
            ci_percentile(&reps, 0.1, Method::Jkn),
            Err(Error::PercentileRequiresBootstrap(Method::Jkn))
        ));
    }

    #[test]
    fn quantile_type7_is_order_statistic_at_grid_points() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_type7(&xs, 0.0), 1.0);
        assert_eq!(quantile_type7(&xs, 1.0), 4.0);
        assert_eq!(quantile_type7(&xs, 0.5), 2.5);
        assert_eq!(quantile_type7(&xs[..1], 0.7), 1.0);
    }

    #[test]
    fn independent_test_hand_value() {
        let est = |point, variance| AucEstimate {
            point,
            method: Method::Rb,
            variance,
            replicate_aucs: vec![],
            n_used_replicates: 0,
            n_degenerate: 0,
        };
        let t = test_independent(&est(0.82, 5e-5), &est(0.80, 5e-5), 0.05).unwrap();
        assert!((t.z - 2.0).abs() < 1e-12);
        assert!((t.p_value - 0.0455).abs() < 5e-5, "p = {}", t.p_value);
        assert!(t.reject);
        // antisymmetry under argument swap is exact
        let t2 = test_independent(&est(0.80, 5e-5), &est(0.82, 5e-5), 0.05).unwrap();
        assert_eq!(t2.z, -t.z);
        assert_eq!(t2.p_value, t.p_value);
    }

    #[test]
    fn independent_test_requires_matching_methods() {
        let est = |method| AucEstimate {
            point: 0.5,
            method,
            variance: 1e-4,
            replicate_aucs: vec![],
            n_used_replicates: 0,
            n_degenerate: 0,
        };
        assert!(matches!(
            test_independent(&est(Method::Jkn), &est(Method::Trb), 0.05),
            Err(Error::MethodMismatch { .. })
        ));
    }

    #[test]
    fn zero_variance_zero_difference_accepts_h0() {
        let est = |point| AucEstimate {
            point,
            method: Method::Rb,
            variance: 0.0,
            replicate_aucs: vec![],
            n_used_replicates: 0,
            n_degenerate: 0,
        };
        let t = test_independent(&est(0.75), &est(0.75), 0.05).unwrap();
        assert_eq!((t.z, t.p_value), (0.0, 1.0));
        assert!(!t.reject);
        assert!(matches!(
            test_independent(&est(0.8), &est(0.7), 0.05),
            Err(Error::InfiniteZ { .. })
        ));
    }

    #[test]
    fn variance_jkn_single_stratum_hand_value() {
        // one stratum, two PSUs: factor 1/2 on both replicates
        let units: Vec<UnitRecord> = (0..4)
            .map(|i| UnitRecord {
                id: i.to_string(),
                stratum: "s".into(),
                psu: (i % 2).to_string(),
                weight: 1.0,
                outcome: i % 2 == 0,
                covariates: vec![],
            })
            .collect();
        let frame = SurveyFrame::from_units(units, vec![]).unwrap();
        let set = crate::replicate::jkn_weights(&frame).unwrap();
        let point = 0.6;
        let v = variance_jkn(point, &set, &wrap(&[0.5, 0.9])).unwrap();
        let expected = 0.5 * (0.01 + 0.09);
        assert!((v - expected).abs() < 1e-15);
    }

    #[test]
    fn variance_jkn_rejects_missing_and_wrong_scheme() {
        let units: Vec<UnitRecord> = (0..4)
            .map(|i| UnitRecord {
                id: i.to_string(),
                stratum: "s".into(),
                psu: (i % 2).to_string(),
                weight: 1.0,
                outcome: i % 2 == 0,
                covariates: vec![],
            })
            .collect();
        let frame = SurveyFrame::from_units(units, vec![]).unwrap();
        let set = crate::replicate::jkn_weights(&frame).unwrap();
        assert!(matches!(
            variance_jkn(0.5, &set, &[Some(0.4), None]),
            Err(Error::MissingReplicate(1))
        ));
        let boot = crate::replicate::trb_weights(&frame, 5, ResampleRng::new(0, 0)).unwrap();
        assert!(matches!(
            variance_jkn(0.5, &boot, &wrap(&[0.1; 5])),
            Err(Error::SchemeMismatch { .. })
        ));
    }

    #[test]
    fn variance_is_invariant_to_replicate_order() {
        let aucs: Vec<Scalar> = (0..500)
            .map(|i| 0.7 + 0.05 * ((i * 37 % 101) as Scalar / 101.0 - 0.5))
            .collect();
        let v1 = variance_boot(&wrap(&aucs)).unwrap();
        let mut rev = aucs.clone();
        rev.reverse();
        let v2 = variance_boot(&wrap(&rev)).unwrap();
        assert!((v1 - v2).abs() <= 1e-15, "{v1} vs {v2}");
    }
}
