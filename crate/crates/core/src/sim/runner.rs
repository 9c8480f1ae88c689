//! Monte Carlo driver. One call runs a scenario under one design row:
//! generate the population(s) once, then repeatedly draw samples, fit,
//! estimate with every replicate method, and aggregate coverage or
//! rejection rates. Runs are independent and keyed by index, so the
//! whole report is reproducible from (registry, scenario, options).

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::inference::{
    ci_normal, ci_percentile, estimate_auc, test_independent, test_paired,
};
use crate::logit::{fit_pseudo_likelihood, FittedModel};
use crate::num::pairwise_sum;
use crate::replicate::{replicate_weights, Method, ResampleRng};
use crate::rng::{derive_u64, domain};
use crate::sim::population::{generate_population, FinitePopulation};
use crate::sim::sampling::{draw_sample, SamplingScheme};
use crate::sim::scenario::{Contrast, Registry, SampleSize, ScenarioSpec};
use crate::Scalar;

/// Fraction of runs allowed to fail before the whole scenario is abandoned.
const MAX_FAILURE_RATE: f64 = 0.02;

/// Knobs of one Monte Carlo invocation.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub a_h: usize,
    pub size: SampleSize,
    pub runs: usize,
    /// Bootstrap replicate count; the jackknife ignores it.
    pub b: usize,
    pub seed: u64,
    pub alphas: Vec<f64>,
}

impl RunOptions {
    /// Options with runs, B, and alpha levels taken from the registry
    /// defaults.
    pub fn from_registry(registry: &Registry, a_h: usize, size: SampleSize, seed: u64) -> Self {
        RunOptions {
            a_h,
            size,
            runs: registry.defaults.runs,
            b: registry.defaults.bootstrap_replicates,
            seed,
            alphas: registry.defaults.alphas.clone(),
        }
    }
}

/// One aggregated cell: a coverage or rejection rate for a
/// (method, construction, alpha) combination.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub scenario: u32,
    pub contrast: Contrast,
    pub a_h: usize,
    pub size: String,
    pub method: Method,
    /// "normal", "percentile", or "z-test".
    pub construction: &'static str,
    pub alpha: f64,
    /// "coverage" or "rejection".
    pub statistic: &'static str,
    pub value: f64,
    /// Binomial Monte Carlo standard error sqrt(v (1 - v) / runs_used).
    pub mc_se: f64,
    pub runs_used: usize,
    pub runs_failed: usize,
    pub mean_point: f64,
    pub sd_point: f64,
    pub mean_se: f64,
    pub degenerate_replicates: usize,
}

/// Per-run, per-method point and standard error, for dispersion checks.
#[derive(Clone, Debug, PartialEq)]
pub struct SeSample {
    pub run: usize,
    pub method: Method,
    /// AUC for interval scenarios, AUC difference for test scenarios.
    pub point: f64,
    pub se: f64,
}

/// Everything a scenario run produces.
#[derive(Clone, Debug)]
pub struct MonteCarloReport {
    pub scenario: u32,
    pub contrast: Contrast,
    pub a_h: usize,
    pub size: SampleSize,
    pub seed: u64,
    pub b: usize,
    pub runs_requested: usize,
    pub runs_used: usize,
    pub runs_failed: usize,
    pub alphas: Vec<f64>,
    /// Census-fit AUC per compared model (the coverage target for interval
    /// scenarios).
    pub auc_pop: Vec<Scalar>,
    /// Registry-declared values the census AUCs should be close to.
    pub expected_auc_pop: Vec<f64>,
    /// Census AUC difference for test scenarios.
    pub d_pop: Option<Scalar>,
    pub rows: Vec<SummaryRow>,
    pub se_samples: Vec<SeSample>,
}

struct MethodCi {
    point: Scalar,
    se: Scalar,
    degenerate: usize,
    normal_hits: Vec<bool>,
    percentile_hits: Option<Vec<bool>>,
}

struct MethodTest {
    d_hat: Scalar,
    se_d: Scalar,
    p_value: Scalar,
    degenerate: usize,
}

enum RunOutcome {
    Ci(Vec<MethodCi>),
    Test(Vec<MethodTest>),
}

/// Runs one scenario end to end and aggregates the results.
pub fn run_scenario(
    registry: &Registry,
    id: u32,
    opts: &RunOptions,
) -> Result<MonteCarloReport> {
    let scenario = registry.scenario(id)?;
    let scheme = registry.scheme(opts.a_h, opts.size)?;
    if opts.runs == 0 {
        return Err(Error::InvalidSpec("run count must be positive".into()));
    }

    let mut populations = Vec::with_capacity(scenario.populations.len());
    for p in 0..scenario.populations.len() {
        let spec = registry.population_spec(scenario, p)?;
        let pop_seed = derive_u64(&[opts.seed, id as u64, p as u64]);
        populations.push(generate_population(&spec, pop_seed)?);
    }

    // census targets, one per compared model
    let mut auc_pop = Vec::new();
    match scenario.contrast {
        Contrast::Ci => {
            let idx = populations[0].frame.covariate_indices(&scenario.models[0])?;
            auc_pop.push(populations[0].model_auc(&idx)?.1);
        }
        Contrast::HtIndependent => {
            for pop in &populations {
                let idx = pop.frame.covariate_indices(&scenario.models[0])?;
                auc_pop.push(pop.model_auc(&idx)?.1);
            }
        }
        Contrast::HtPaired => {
            for model in &scenario.models {
                let idx = populations[0].frame.covariate_indices(model)?;
                auc_pop.push(populations[0].model_auc(&idx)?.1);
            }
        }
    }
    let d_pop = match scenario.contrast {
        Contrast::Ci => None,
        _ => Some(auc_pop[0] - auc_pop[1]),
    };

    let outcomes: Vec<Result<RunOutcome>> = (0..opts.runs)
        .into_par_iter()
        .map(|r| match scenario.contrast {
            Contrast::Ci => run_ci(scenario, &populations[0], &scheme, opts, auc_pop[0], r),
            Contrast::HtIndependent => run_independent(scenario, &populations, &scheme, opts, r),
            Contrast::HtPaired => run_paired(scenario, &populations[0], &scheme, opts, r),
        })
        .collect();

    let runs_failed = outcomes.iter().filter(|o| o.is_err()).count();
    if runs_failed as f64 > MAX_FAILURE_RATE * opts.runs as f64 {
        return Err(Error::TooManyRunFailures {
            failed: runs_failed,
            total: opts.runs,
        });
    }
    let runs_used = opts.runs - runs_failed;

    let mut report = MonteCarloReport {
        scenario: id,
        contrast: scenario.contrast,
        a_h: opts.a_h,
        size: opts.size,
        seed: opts.seed,
        b: opts.b,
        runs_requested: opts.runs,
        runs_used,
        runs_failed,
        alphas: opts.alphas.clone(),
        auc_pop,
        expected_auc_pop: scenario.expected_auc_pop.clone(),
        d_pop,
        rows: Vec::new(),
        se_samples: Vec::new(),
    };
    aggregate(scenario, opts, &outcomes, &mut report);
    Ok(report)
}

fn stream_for(run: usize, method_idx: usize, frame_idx: u64) -> u64 {
    derive_u64(&[domain::RUN_STREAM, run as u64, method_idx as u64, frame_idx])
}

fn fit_on_sample(
    sample: &crate::frame::SurveyFrame,
    names: &[String],
) -> Result<FittedModel> {
    let idx = sample.covariate_indices(names)?;
    fit_pseudo_likelihood(sample, &idx)
}

fn run_ci(
    scenario: &ScenarioSpec,
    pop: &FinitePopulation,
    scheme: &SamplingScheme,
    opts: &RunOptions,
    target: Scalar,
    r: usize,
) -> Result<RunOutcome> {
    let sample = draw_sample(pop, scheme, opts.seed, (r as u64) * 2)?;
    let model = fit_on_sample(&sample, &scenario.models[0])?;
    let mut per_method = Vec::with_capacity(Method::ALL.len());
    for (mi, &method) in Method::ALL.iter().enumerate() {
        let rng = ResampleRng::new(opts.seed, stream_for(r, mi, 0));
        let set = replicate_weights(&sample, method, opts.b, rng)?;
        let est = estimate_auc(&model.probs, sample.outcomes(), sample.weights(), &set)?;
        let mut normal_hits = Vec::with_capacity(opts.alphas.len());
        for &alpha in &opts.alphas {
            let ci = ci_normal(est.point, est.variance, alpha)?;
            normal_hits.push(ci.lower <= target && target <= ci.upper);
        }
        let percentile_hits = if method.is_bootstrap() {
            let mut hits = Vec::with_capacity(opts.alphas.len());
            for &alpha in &opts.alphas {
                let ci = ci_percentile(&est.replicate_aucs, alpha, method)?;
                hits.push(ci.lower <= target && target <= ci.upper);
            }
            Some(hits)
        } else {
            None
        };
        per_method.push(MethodCi {
            point: est.point,
            se: est.se(),
            degenerate: est.n_degenerate,
            normal_hits,
            percentile_hits,
        });
    }
    Ok(RunOutcome::Ci(per_method))
}

fn run_independent(
    scenario: &ScenarioSpec,
    populations: &[FinitePopulation],
    scheme: &SamplingScheme,
    opts: &RunOptions,
    r: usize,
) -> Result<RunOutcome> {
    let alpha0 = opts.alphas[0];
    let mut samples = Vec::with_capacity(2);
    let mut models = Vec::with_capacity(2);
    for (f, pop) in populations.iter().enumerate() {
        let sample = draw_sample(pop, scheme, opts.seed, (r as u64) * 2 + f as u64)?;
        let model = fit_on_sample(&sample, &scenario.models[0])?;
        samples.push(sample);
        models.push(model);
    }
    let mut per_method = Vec::with_capacity(Method::ALL.len());
    for (mi, &method) in Method::ALL.iter().enumerate() {
        let mut ests = Vec::with_capacity(2);
        for f in 0..2 {
            let rng = ResampleRng::new(opts.seed, stream_for(r, mi, f as u64));
            let set = replicate_weights(&samples[f], method, opts.b, rng)?;
            ests.push(estimate_auc(
                &models[f].probs,
                samples[f].outcomes(),
                samples[f].weights(),
                &set,
            )?);
        }
        let tr = test_independent(&ests[0], &ests[1], alpha0)?;
        per_method.push(MethodTest {
            d_hat: tr.d_hat,
            se_d: tr.variance_d.sqrt(),
            p_value: tr.p_value,
            degenerate: tr.n_degenerate,
        });
    }
    Ok(RunOutcome::Test(per_method))
}

fn run_paired(
    scenario: &ScenarioSpec,
    pop: &FinitePopulation,
    scheme: &SamplingScheme,
    opts: &RunOptions,
    r: usize,
) -> Result<RunOutcome> {
    let alpha0 = opts.alphas[0];
    let sample = draw_sample(pop, scheme, opts.seed, (r as u64) * 2)?;
    let model1 = fit_on_sample(&sample, &scenario.models[0])?;
    let model2 = fit_on_sample(&sample, &scenario.models[1])?;
    let mut per_method = Vec::with_capacity(Method::ALL.len());
    for (mi, &method) in Method::ALL.iter().enumerate() {
        let rng = ResampleRng::new(opts.seed, stream_for(r, mi, 0));
        let tr = test_paired(&sample, &model1, &model2, method, opts.b, rng, alpha0)?;
        per_method.push(MethodTest {
            d_hat: tr.d_hat,
            se_d: tr.variance_d.sqrt(),
            p_value: tr.p_value,
            degenerate: tr.n_degenerate,
        });
    }
    Ok(RunOutcome::Test(per_method))
}

fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / values.len() as f64;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let sd = (pairwise_sum(&sq) / (values.len() - 1) as f64).sqrt();
    (mean, sd)
}

fn proportion_row(hits: usize, used: usize) -> (f64, f64) {
    if used == 0 {
        return (f64::NAN, f64::NAN);
    }
    let p = hits as f64 / used as f64;
    (p, (p * (1.0 - p) / used as f64).sqrt())
}

fn aggregate(
    scenario: &ScenarioSpec,
    opts: &RunOptions,
    outcomes: &[Result<RunOutcome>],
    report: &mut MonteCarloReport,
) {
    let used = report.runs_used;
    for (mi, &method) in Method::ALL.iter().enumerate() {
        let mut points = Vec::with_capacity(used);
        let mut ses = Vec::with_capacity(used);
        let mut degenerate = 0;
        for (r, outcome) in outcomes.iter().enumerate() {
            let (point, se, deg) = match outcome {
                Ok(RunOutcome::Ci(rows)) => {
                    (rows[mi].point, rows[mi].se, rows[mi].degenerate)
                }
                Ok(RunOutcome::Test(rows)) => {
                    (rows[mi].d_hat, rows[mi].se_d, rows[mi].degenerate)
                }
                Err(_) => continue,
            };
            points.push(point);
            ses.push(se);
            degenerate += deg;
            report.se_samples.push(SeSample {
                run: r,
                method,
                point,
                se,
            });
        }
        let (mean_point, sd_point) = mean_and_sd(&points);
        let (mean_se, _) = mean_and_sd(&ses);

        let base = |construction: &'static str, alpha: f64| SummaryRow {
            scenario: scenario.id,
            contrast: scenario.contrast,
            a_h: opts.a_h,
            size: opts.size.to_string(),
            method,
            construction,
            alpha,
            statistic: "",
            value: 0.0,
            mc_se: 0.0,
            runs_used: used,
            runs_failed: report.runs_failed,
            mean_point,
            sd_point,
            mean_se,
            degenerate_replicates: degenerate,
        };

        for (ai, &alpha) in opts.alphas.iter().enumerate() {
            match scenario.contrast {
                Contrast::Ci => {
                    let hits = outcomes
                        .iter()
                        .filter_map(|o| match o {
                            Ok(RunOutcome::Ci(rows)) => Some(rows[mi].normal_hits[ai]),
                            _ => None,
                        })
                        .filter(|&h| h)
                        .count();
                    let (value, mc_se) = proportion_row(hits, used);
                    let mut row = base("normal", alpha);
                    row.statistic = "coverage";
                    row.value = value;
                    row.mc_se = mc_se;
                    report.rows.push(row);
                    if method.is_bootstrap() {
                        let hits = outcomes
                            .iter()
                            .filter_map(|o| match o {
                                Ok(RunOutcome::Ci(rows)) => rows[mi]
                                    .percentile_hits
                                    .as_ref()
                                    .map(|h| h[ai]),
                                _ => None,
                            })
                            .filter(|&h| h)
                            .count();
                        let (value, mc_se) = proportion_row(hits, used);
                        let mut row = base("percentile", alpha);
                        row.statistic = "coverage";
                        row.value = value;
                        row.mc_se = mc_se;
                        report.rows.push(row);
                    }
                }
                _ => {
                    let rejections = outcomes
                        .iter()
                        .filter_map(|o| match o {
                            Ok(RunOutcome::Test(rows)) => Some(rows[mi].p_value),
                            _ => None,
                        })
                        .filter(|&p| p < alpha)
                        .count();
                    let (value, mc_se) = proportion_row(rejections, used);
                    let mut row = base("z-test", alpha);
                    row.statistic = "rejection";
                    row.value = value;
                    row.mc_se = mc_se;
                    report.rows.push(row);
                }
            }
        }
    }
    // group the dispersion samples by run for a stable on-disk order
    report.se_samples.sort_by_key(|s| s.run);
}
