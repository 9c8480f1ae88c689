//! Finite population generation.
//!
//! Units carry ten jointly normal variables: model covariates X (stored in
//! the frame) and design variables Z (absorbed into the stratum/cluster
//! structure). The outcome is drawn from the implied logistic model, so the
//! population follows that model exactly. Units are then sorted by the
//! Z-part of the linear predictor and cut into equal strata of equal
//! clusters, which ties the design to the outcome and makes the clustering
//! informative.

use crate::auc::population_auc;
use crate::error::{Error, Result};
use crate::frame::{SurveyFrame, UnitRecord};
use crate::linalg::{cholesky, solve_spd_pivoted};
use crate::logit::{fit_pseudo_likelihood, inverse_logit, FittedModel};
use crate::num::KahanSum;
use crate::rng::{bernoulli, domain, keyed_rng, std_normal_draw};
use crate::Scalar;

/// Super-population model: class-conditional Gaussians with a shared
/// covariance, plus the finite design layout.
#[derive(Clone, Debug)]
pub struct PopulationSpec {
    pub n: usize,
    /// P(Y = 1); also the structural class split of the generated units.
    pub prevalence: f64,
    /// Class means, length `dim`.
    pub mu0: Vec<f64>,
    pub mu1: Vec<f64>,
    /// Shared covariance, row-major `dim x dim`.
    pub sigma: Vec<f64>,
    /// Leading variables stored as frame covariates X1..Xn_x; the rest are
    /// design variables Z.
    pub n_x: usize,
    pub n_strata: usize,
    pub clusters_per_stratum: usize,
}

/// Coefficients of the exact super-population logistic model.
#[derive(Clone, Debug)]
pub struct BetaStar {
    pub intercept: f64,
    pub slopes: Vec<f64>,
}

impl PopulationSpec {
    pub fn dim(&self) -> usize {
        self.mu1.len()
    }

    pub fn cluster_size(&self) -> usize {
        self.n / (self.n_strata * self.clusters_per_stratum)
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.dim();
        if self.mu0.len() != dim || self.sigma.len() != dim * dim {
            return Err(Error::InvalidSpec(
                "mean and covariance dimensions disagree".into(),
            ));
        }
        if self.n_x == 0 || self.n_x > dim {
            return Err(Error::InvalidSpec(format!(
                "frame covariate count {} outside 1..={dim}",
                self.n_x
            )));
        }
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "prevalence {} outside (0, 1)",
                self.prevalence
            )));
        }
        let cells = self.n_strata * self.clusters_per_stratum;
        if cells == 0 || !self.n.is_multiple_of(cells) {
            return Err(Error::InvalidSpec(format!(
                "population size {} is not divisible into {} clusters",
                self.n, cells
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                if (self.sigma[i * dim + j] - self.sigma[j * dim + i]).abs() > 1e-12 {
                    return Err(Error::InvalidSpec("covariance is not symmetric".into()));
                }
            }
        }
        Ok(())
    }

    /// Slopes Sigma^-1 (mu1 - mu0) and the matching intercept
    /// ln(P1/P0) - (mu1 + mu0)' Sigma^-1 (mu1 - mu0) / 2.
    pub fn beta_star(&self) -> Result<BetaStar> {
        let dim = self.dim();
        let diff: Vec<f64> = (0..dim).map(|k| self.mu1[k] - self.mu0[k]).collect();
        let slopes = solve_spd_pivoted(&self.sigma, &diff, dim, 1e-12)
            .map_err(|_| Error::NotPositiveDefinite)?;
        let mut cross = 0.0;
        for (k, &slope) in slopes.iter().enumerate() {
            cross += (self.mu1[k] + self.mu0[k]) * slope;
        }
        let intercept = (self.prevalence / (1.0 - self.prevalence)).ln() - 0.5 * cross;
        Ok(BetaStar { intercept, slopes })
    }
}

/// A realized finite population: census frame (weights 1) with design
/// labels, plus the population fit on all X covariates and its AUC.
#[derive(Clone, Debug)]
pub struct FinitePopulation {
    pub frame: SurveyFrame,
    pub model: FittedModel,
    pub auc_pop: Scalar,
    pub cluster_size: usize,
}

impl FinitePopulation {
    /// Census fit on a covariate subset and the population AUC it achieves.
    pub fn model_auc(&self, subset: &[usize]) -> Result<(FittedModel, Scalar)> {
        let model = fit_pseudo_likelihood(&self.frame, subset)?;
        let auc = population_auc(&self.frame, &model)?;
        Ok((model, auc))
    }
}

/// Generates a finite population from `spec`, fully determined by `seed`.
pub fn generate_population(spec: &PopulationSpec, seed: u64) -> Result<FinitePopulation> {
    spec.validate()?;
    let dim = spec.dim();
    let n = spec.n;
    let chol = cholesky(&spec.sigma, dim).ok_or(Error::NotPositiveDefinite)?;
    let beta = spec.beta_star()?;

    let n_cases = (n as f64 * spec.prevalence).round() as usize;
    let n_controls = n - n_cases;

    let mut rng = keyed_rng(&[seed, domain::POPULATION]);
    let mut xs = vec![0.0; n * spec.n_x];
    let mut sort_key = vec![0.0; n];
    let mut outcomes = vec![false; n];
    let mut z = vec![0.0; dim];
    for i in 0..n {
        let mu = if i < n_controls { &spec.mu0 } else { &spec.mu1 };
        for v in z.iter_mut() {
            *v = std_normal_draw(&mut rng);
        }
        let mut eta = KahanSum::new();
        eta.add(beta.intercept);
        let mut key = KahanSum::new();
        for r in 0..dim {
            let mut value = mu[r];
            for c in 0..=r {
                value += chol[r * dim + c] * z[c];
            }
            if r < spec.n_x {
                xs[i * spec.n_x + r] = value;
            } else {
                key.add(value * beta.slopes[r]);
            }
            eta.add(value * beta.slopes[r]);
        }
        sort_key[i] = key.value();
        outcomes[i] = bernoulli(&mut rng, inverse_logit(eta.value()));
    }

    // sort by the Z-part of the linear predictor, unit index breaking ties
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        sort_key[a as usize]
            .partial_cmp(&sort_key[b as usize])
            .expect("sort keys are finite")
            .then(a.cmp(&b))
    });

    let stratum_size = n / spec.n_strata;
    let cluster_size = spec.cluster_size();
    let mut units = Vec::with_capacity(n);
    for (rank, &idx) in order.iter().enumerate() {
        let idx = idx as usize;
        let stratum = rank / stratum_size;
        let cluster = (rank % stratum_size) / cluster_size;
        units.push(UnitRecord {
            id: (idx + 1).to_string(),
            stratum: (stratum + 1).to_string(),
            psu: (cluster + 1).to_string(),
            weight: 1.0,
            outcome: outcomes[idx],
            covariates: xs[idx * spec.n_x..(idx + 1) * spec.n_x].to_vec(),
        });
    }
    let names = (0..spec.n_x).map(|k| format!("X{}", k + 1)).collect();
    let frame = SurveyFrame::from_units(units, names)?;

    let full_subset: Vec<usize> = (0..spec.n_x).collect();
    let model = fit_pseudo_likelihood(&frame, &full_subset)?;
    let auc_pop = population_auc(&frame, &model)?;
    Ok(FinitePopulation {
        frame,
        model,
        auc_pop,
        cluster_size,
    })
}
