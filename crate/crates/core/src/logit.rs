//! Weighted logistic regression maximizing the pseudo-log-likelihood
//! sum_i w_i [y_i log p_i + (1 - y_i) log(1 - p_i)] by Newton steps with
//! step halving (IRLS). Probabilities never reach 0 or 1 exactly.

use crate::error::{Error, Result};
use crate::frame::SurveyFrame;
use crate::linalg::solve_spd_pivoted;
use crate::num::{real, KahanSum, Real};
use crate::Scalar;

/// Tuning knobs for the IRLS loop; defaults are the supported contract.
#[derive(Clone, Copy, Debug)]
pub struct FitOptions {
    /// Convergence needs max |score_j| <= `score_tol` * sum of weights.
    pub score_tol: f64,
    /// ... and a relative beta change at most this large.
    pub beta_rel_tol: f64,
    pub max_iterations: usize,
    /// Any |beta_j| beyond this bound is treated as separation.
    pub divergence_bound: f64,
    /// Relative pivot threshold of the rank check in the Newton solve.
    pub rank_rel_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            score_tol: 1e-8,
            beta_rel_tol: 1e-10,
            max_iterations: 100,
            divergence_bound: 30.0,
            rank_rel_tol: 1e-10,
        }
    }
}

/// Result of a pseudo-likelihood fit. `probs` always equals the inverse
/// logit of the linear predictor at `beta` over the training frame, so it
/// is bit-for-bit recomputable via [`predict`].
#[derive(Clone, Debug)]
pub struct FittedModel {
    /// Intercept first, then one slope per entry of `covariate_indices`.
    pub beta: Vec<Scalar>,
    pub probs: Vec<Scalar>,
    /// Frame covariate columns the model was fitted on.
    pub covariate_indices: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
    pub max_abs_score: Scalar,
}

/// Numerically stable inverse logit, clamped into the open unit interval.
#[inline]
pub fn inverse_logit<T: Real>(eta: T) -> T {
    let p = if eta >= T::zero() {
        let e = (-eta).exp();
        T::one() / (T::one() + e)
    } else {
        let e = eta.exp();
        e / (T::one() + e)
    };
    let two = T::one() + T::one();
    p.max(T::min_positive_value())
        .min(T::one() - T::epsilon() / two)
}

/// log(1 + exp(eta)) without overflow.
#[inline]
fn log1p_exp<T: Real>(eta: T) -> T {
    if eta <= real(-37.0) {
        eta.exp()
    } else if eta <= real(18.0) {
        eta.exp().ln_1p()
    } else if eta <= real(33.3) {
        eta + (-eta).exp()
    } else {
        eta
    }
}

/// Raw fit over an explicit design matrix (row-major `n x p`).
#[derive(Clone, Debug)]
pub struct LogisticFit<T> {
    pub beta: Vec<T>,
    pub converged: bool,
    pub iterations: usize,
    pub max_abs_score: T,
}

fn log_pseudo_likelihood<T: Real>(eta: &[T], y: &[bool], w: &[T]) -> T {
    let mut acc = KahanSum::new();
    for i in 0..eta.len() {
        let term = if y[i] { eta[i] } else { T::zero() };
        acc.add(w[i] * (term - log1p_exp(eta[i])));
    }
    acc.value()
}

/// Maximizes the weighted logistic pseudo-log-likelihood by Newton/IRLS
/// with step halving. `x` holds `n` rows of `p` columns; the caller is
/// responsible for including an intercept column if one is wanted.
pub fn fit_logistic<T: Real>(
    x: &[T],
    n: usize,
    p: usize,
    y: &[bool],
    w: &[T],
    opts: &FitOptions,
) -> Result<LogisticFit<T>> {
    assert_eq!(x.len(), n * p);
    assert_eq!(y.len(), n);
    assert_eq!(w.len(), n);

    let sum_w: T = {
        let mut acc = KahanSum::new();
        for &wi in w {
            acc.add(wi);
        }
        acc.value()
    };
    let score_bound = real::<T>(opts.score_tol) * sum_w;

    let mut beta = vec![T::zero(); p];
    let mut eta = vec![T::zero(); n];
    let mut loglik = log_pseudo_likelihood(&eta, y, w);
    let mut last_rel_step = T::infinity();
    let mut max_abs_score = T::infinity();
    let mut iterations = 0;
    let mut converged = false;

    for _ in 0..opts.max_iterations {
        // score and expected information at the current beta
        let mut score = vec![T::zero(); p];
        let mut info = vec![T::zero(); p * p];
        for i in 0..n {
            let row = &x[i * p..(i + 1) * p];
            let prob = inverse_logit(eta[i]);
            let resid = w[i] * (if y[i] { T::one() } else { T::zero() } - prob);
            let curv = w[i] * prob * (T::one() - prob);
            for a in 0..p {
                score[a] += resid * row[a];
                let ca = curv * row[a];
                for b in 0..=a {
                    info[a * p + b] += ca * row[b];
                }
            }
        }
        for a in 0..p {
            for b in a + 1..p {
                info[a * p + b] = info[b * p + a];
            }
        }
        max_abs_score = score.iter().fold(T::zero(), |m, s| m.max(s.abs()));
        if max_abs_score <= score_bound && last_rel_step <= real(opts.beta_rel_tol) {
            converged = true;
            break;
        }

        let delta = solve_spd_pivoted(&info, &score, p, real(opts.rank_rel_tol))
            .map_err(|column| Error::RankDeficient { column })?;

        // step halving until the pseudo-likelihood stops decreasing
        let mut step = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<T> = beta
                .iter()
                .zip(&delta)
                .map(|(&b, &d)| b + step * d)
                .collect();
            let mut trial_eta = vec![T::zero(); n];
            for i in 0..n {
                let row = &x[i * p..(i + 1) * p];
                let mut s = T::zero();
                for a in 0..p {
                    s += row[a] * trial[a];
                }
                trial_eta[i] = s;
            }
            let trial_ll = log_pseudo_likelihood(&trial_eta, y, w);
            if trial_ll >= loglik || !loglik.is_finite() {
                last_rel_step = beta
                    .iter()
                    .zip(&trial)
                    .map(|(&b, &t)| (t - b).abs() / (T::one() + b.abs()))
                    .fold(T::zero(), T::max);
                beta = trial;
                eta = trial_eta;
                loglik = trial_ll;
                accepted = true;
                break;
            }
            step /= T::one() + T::one();
        }
        iterations += 1;
        if !accepted {
            // no ascent direction left at this scale; convergence checks
            // at the top of the loop decide the outcome
            last_rel_step = T::zero();
        }

        for (j, &b) in beta.iter().enumerate() {
            if b.abs() > real(opts.divergence_bound) {
                return Err(Error::Separation {
                    index: j,
                    value: b.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
    }

    if !converged {
        // one last check so a fit that lands exactly on the optimum at the
        // iteration cap is not misreported
        if max_abs_score <= score_bound && last_rel_step <= real(opts.beta_rel_tol) {
            converged = true;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            max_abs_score: max_abs_score.to_f64().unwrap_or(f64::NAN),
            last_beta: beta.iter().map(|b| b.to_f64().unwrap_or(f64::NAN)).collect(),
        });
    }
    Ok(LogisticFit {
        beta,
        converged,
        iterations,
        max_abs_score,
    })
}

fn design_matrix(frame: &SurveyFrame, subset: &[usize]) -> Result<Vec<Scalar>> {
    for &j in subset {
        if j >= frame.q() {
            return Err(Error::DimensionMismatch {
                expected: frame.q(),
                actual: j,
            });
        }
    }
    let p = subset.len() + 1;
    let mut x = Vec::with_capacity(frame.n() * p);
    for i in 0..frame.n() {
        let row = frame.covariate_row(i);
        x.push(1.0);
        for &j in subset {
            x.push(row[j]);
        }
    }
    Ok(x)
}

fn linear_predictor(frame: &SurveyFrame, beta: &[Scalar], subset: &[usize]) -> Vec<Scalar> {
    let mut probs = Vec::with_capacity(frame.n());
    for i in 0..frame.n() {
        let row = frame.covariate_row(i);
        let mut eta = beta[0];
        for (k, &j) in subset.iter().enumerate() {
            eta += beta[k + 1] * row[j];
        }
        probs.push(inverse_logit(eta));
    }
    probs
}

/// Fits the weighted logistic model on the given covariate columns
/// (intercept always included) with default options.
pub fn fit_pseudo_likelihood(frame: &SurveyFrame, subset: &[usize]) -> Result<FittedModel> {
    fit_pseudo_likelihood_with(frame, subset, &FitOptions::default())
}

pub fn fit_pseudo_likelihood_with(
    frame: &SurveyFrame,
    subset: &[usize],
    opts: &FitOptions,
) -> Result<FittedModel> {
    let any_event = frame.outcomes().iter().any(|&y| y);
    let any_nonevent = frame.outcomes().iter().any(|&y| !y);
    if !any_event || !any_nonevent {
        return Err(Error::ConstantOutcome);
    }
    let p = subset.len() + 1;
    let x = design_matrix(frame, subset)?;
    let fit = fit_logistic(&x, frame.n(), p, frame.outcomes(), frame.weights(), opts)?;
    let probs = linear_predictor(frame, &fit.beta, subset);
    Ok(FittedModel {
        beta: fit.beta,
        probs,
        covariate_indices: subset.to_vec(),
        converged: fit.converged,
        iterations: fit.iterations,
        max_abs_score: fit.max_abs_score,
    })
}

/// Applies a fitted model to a frame with the same covariate layout.
pub fn predict(model: &FittedModel, frame: &SurveyFrame) -> Result<Vec<Scalar>> {
    if model.beta.len() != model.covariate_indices.len() + 1 {
        return Err(Error::DimensionMismatch {
            expected: model.covariate_indices.len() + 1,
            actual: model.beta.len(),
        });
    }
    for &j in &model.covariate_indices {
        if j >= frame.q() {
            return Err(Error::DimensionMismatch {
                expected: frame.q(),
                actual: j,
            });
        }
    }
    Ok(linear_predictor(frame, &model.beta, &model.covariate_indices))
}
