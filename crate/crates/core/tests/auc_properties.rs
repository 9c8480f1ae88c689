//! Property tests for the weighted AUC estimator.

mod support;

use proptest::collection::vec;
use proptest::prelude::*;
use support::auc_double_sum;
use svyauc::{weighted_auc, AucInput};

#[derive(Debug, Clone)]
struct Instance {
    scores: Vec<f64>,
    outcomes: Vec<bool>,
    weights: Vec<f64>,
}

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..60)
        .prop_flat_map(|n| {
            (
                vec(
                    prop_oneof![
                        // lattice values force ties through the tie path
                        (0u8..8).prop_map(|k| k as f64 * 0.25),
                        (-5.0f64..5.0),
                    ],
                    n,
                ),
                vec(any::<bool>(), n),
                vec(0.01f64..10.0, n),
            )
        })
        .prop_map(|(scores, outcomes, weights)| Instance {
            scores,
            outcomes,
            weights,
        })
}

fn auc(inst: &Instance) -> f64 {
    weighted_auc(&AucInput::new(&inst.scores, &inst.outcomes, &inst.weights).unwrap()).unwrap()
}

fn both_classes(outcomes: &[bool]) -> bool {
    outcomes.iter().any(|&y| y) && outcomes.iter().any(|&y| !y)
}

proptest! {
    #[test]
    fn matches_double_sum(inst in instance()) {
        prop_assume!(both_classes(&inst.outcomes));
        let fast = auc(&inst);
        let slow = auc_double_sum(&inst.scores, &inst.outcomes, &inst.weights);
        prop_assert!((fast - slow).abs() <= 1e-12);
    }

    #[test]
    fn stays_in_unit_interval(inst in instance()) {
        prop_assume!(both_classes(&inst.outcomes));
        let a = auc(&inst);
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn label_flip_complements(inst in instance()) {
        prop_assume!(both_classes(&inst.outcomes));
        let a = auc(&inst);
        let flipped = Instance {
            outcomes: inst.outcomes.iter().map(|y| !y).collect(),
            ..inst
        };
        prop_assert!((auc(&flipped) - (1.0 - a)).abs() <= 1e-12);
    }

    #[test]
    fn score_negation_complements(inst in instance()) {
        prop_assume!(both_classes(&inst.outcomes));
        let a = auc(&inst);
        let negated = Instance {
            scores: inst.scores.iter().map(|s| -s).collect(),
            ..inst
        };
        prop_assert!((auc(&negated) - (1.0 - a)).abs() <= 1e-12);
    }

    #[test]
    fn increasing_affine_transform_is_exact(inst in instance()) {
        prop_assume!(both_classes(&inst.outcomes));
        let a = auc(&inst);
        let shifted = Instance {
            scores: inst.scores.iter().map(|s| 0.5 * s + 11.0).collect(),
            ..inst
        };
        prop_assert_eq!(auc(&shifted), a);
    }

    #[test]
    fn weight_rescaling_is_invariant(inst in instance(), c in 0.01f64..100.0) {
        prop_assume!(both_classes(&inst.outcomes));
        let a = auc(&inst);
        let scaled = Instance {
            weights: inst.weights.iter().map(|w| w * c).collect(),
            ..inst
        };
        prop_assert!((auc(&scaled) - a).abs() <= 1e-12);
    }

    #[test]
    fn unit_order_is_irrelevant(inst in instance(), rot in 0usize..59) {
        prop_assume!(both_classes(&inst.outcomes));
        let a = auc(&inst);
        let k = rot % inst.scores.len();
        let rotate_f = |v: &[f64]| {
            let mut r = v[k..].to_vec();
            r.extend_from_slice(&v[..k]);
            r
        };
        let mut outcomes = inst.outcomes[k..].to_vec();
        outcomes.extend_from_slice(&inst.outcomes[..k]);
        let rotated = Instance {
            scores: rotate_f(&inst.scores),
            outcomes,
            weights: rotate_f(&inst.weights),
        };
        prop_assert!((auc(&rotated) - a).abs() <= 1e-12);
    }

    #[test]
    fn splitting_a_unit_preserves_auc(inst in instance(), pick in 0usize..59) {
        prop_assume!(both_classes(&inst.outcomes));
        let a = auc(&inst);
        let i = pick % inst.scores.len();
        let mut split = inst.clone();
        split.weights[i] *= 0.5;
        split.scores.push(inst.scores[i]);
        split.outcomes.push(inst.outcomes[i]);
        split.weights.push(inst.weights[i] * 0.5);
        prop_assert!((auc(&split) - a).abs() <= 1e-12);
    }
}

#[test]
fn rejects_single_class_and_bad_weights() {
    let scores = [0.1, 0.9];
    assert!(
        weighted_auc(&AucInput::new(&scores, &[true, true], &[1.0, 1.0]).unwrap()).is_err()
    );
    // zero weights are valid inputs (dropped-PSU replicates rely on them);
    // the error appears only when a whole class has zero weight
    assert!(
        weighted_auc(&AucInput::new(&scores, &[true, false], &[1.0, 0.0]).unwrap()).is_err()
    );
    assert!(AucInput::new(&scores, &[true, false], &[1.0, -2.0]).is_err());
    assert!(AucInput::new(&scores, &[true], &[1.0, 1.0]).is_err());
}
