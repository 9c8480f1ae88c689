//! Independent oracles for the integration suites. These reimplement the
//! target quantities by the most literal route available (double sums,
//! derivative-free search, quadrature) so the optimized library paths can
//! be checked against them.
//!
//! Each test target pulls in its own subset of these.
#![allow(dead_code)]

use svyauc::frame::SurveyFrame;
use svyauc::Scalar;

/// Literal double-sum weighted AUC over all control/case pairs, ties
/// counted half. Quadratic and simple on purpose.
pub fn auc_double_sum(scores: &[Scalar], outcomes: &[bool], weights: &[Scalar]) -> Scalar {
    let mut num = 0.0;
    let mut w0 = 0.0;
    let mut w1 = 0.0;
    for i in 0..scores.len() {
        if outcomes[i] {
            w1 += weights[i];
        } else {
            w0 += weights[i];
        }
    }
    for i in 0..scores.len() {
        if !outcomes[i] {
            continue;
        }
        for j in 0..scores.len() {
            if outcomes[j] {
                continue;
            }
            let kernel = if scores[j] < scores[i] {
                1.0
            } else if scores[j] == scores[i] {
                0.5
            } else {
                0.0
            };
            num += weights[i] * weights[j] * kernel;
        }
    }
    num / (w0 * w1)
}

/// Weighted log pseudo-likelihood of a logistic model with an intercept,
/// evaluated on the frame's covariate subset.
pub fn weighted_log_likelihood(frame: &SurveyFrame, subset: &[usize], beta: &[Scalar]) -> Scalar {
    let mut ll = 0.0;
    for i in 0..frame.n() {
        let row = frame.covariate_row(i);
        let mut eta = beta[0];
        for (k, &c) in subset.iter().enumerate() {
            eta += beta[k + 1] * row[c];
        }
        // log(1 + e^eta) without overflow
        let log1p_exp = if eta > 0.0 {
            eta + (-eta).exp().ln_1p()
        } else {
            eta.exp().ln_1p()
        };
        let y = frame.outcomes()[i] as u8 as f64;
        ll += frame.weights()[i] * (y * eta - log1p_exp);
    }
    ll
}

/// Derivative-free maximizer of the weighted log pseudo-likelihood:
/// cyclic coordinate ascent with golden-section line searches. Slow and
/// gradient-free, which is the point.
pub fn maximize_derivative_free(frame: &SurveyFrame, subset: &[usize]) -> Vec<Scalar> {
    let p = subset.len() + 1;
    let mut beta = vec![0.0; p];
    let mut best = weighted_log_likelihood(frame, subset, &beta);
    for _ in 0..2000 {
        let before = best;
        let mut max_move: f64 = 0.0;
        for j in 0..p {
            let eval = |t: f64| {
                let mut b = beta.clone();
                b[j] += t;
                weighted_log_likelihood(frame, subset, &b)
            };
            let t = golden_section_max(eval, -8.0, 8.0, 1e-11);
            beta[j] += t;
            max_move = max_move.max(t.abs());
            best = weighted_log_likelihood(frame, subset, &beta);
        }
        if best - before < 1e-14 && max_move < 1e-9 {
            break;
        }
    }
    beta
}

/// Golden-section search for the maximum of a unimodal function on [a, b].
fn golden_section_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Standard normal upper tail by composite Simpson quadrature of the
/// density over [z, z + 45].
pub fn normal_sf_quadrature(z: f64) -> f64 {
    if z < 0.0 {
        return 1.0 - normal_sf_quadrature(-z);
    }
    let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let a = z;
    let b = z + 45.0;
    let n = 90_000; // even
    let h = (b - a) / n as f64;
    let mut s = pdf(a) + pdf(b);
    for k in 1..n {
        let x = a + h * k as f64;
        s += pdf(x) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Standard normal quantile by bisection against the quadrature tail.
pub fn normal_quantile_bisection(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0);
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let cdf = 1.0 - normal_sf_quadrature(mid);
        if cdf < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Stratified jackknife variance computed the literal way: group replicate
/// AUCs by stratum of the dropped PSU and sum (a_h - 1)/a_h squared
/// deviations from the full-sample point, left to right.
pub fn jkn_variance_direct(
    point: Scalar,
    frame: &SurveyFrame,
    dropped: &[(u32, u32)],
    aucs: &[Scalar],
) -> Scalar {
    assert_eq!(dropped.len(), aucs.len());
    let mut v = 0.0;
    for (r, &(h, _)) in dropped.iter().enumerate() {
        let a_h = frame.strata()[h as usize].psus.len() as f64;
        let dev = aucs[r] - point;
        v += (a_h - 1.0) / a_h * dev * dev;
    }
    v
}
