//! Scenario registry: TOML-declared simulation settings resolved into
//! population specs and sampling schemes. A registry bundles shared
//! defaults, the design rows (cluster take sizes per stratum), and the
//! scenario list with per-population mean vectors and covariance
//! overrides.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::sim::population::PopulationSpec;
use crate::sim::sampling::SamplingScheme;

/// What a scenario estimates: a one-sample confidence interval, a test of
/// two models fitted on independent samples, or a test of two models
/// fitted on the same sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Contrast {
    Ci,
    HtIndependent,
    HtPaired,
}

impl Contrast {
    pub fn as_str(self) -> &'static str {
        match self {
            Contrast::Ci => "ci",
            Contrast::HtIndependent => "ht-independent",
            Contrast::HtPaired => "ht-paired",
        }
    }
}

impl std::fmt::Display for Contrast {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which of the two per-cluster take columns a design row uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleSize {
    N1,
    N2,
}

impl std::str::FromStr for SampleSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "n1" => Ok(SampleSize::N1),
            "n2" => Ok(SampleSize::N2),
            other => Err(Error::InvalidSpec(format!(
                "unknown sample size set {other:?}, expected n1 or n2"
            ))),
        }
    }
}

impl std::fmt::Display for SampleSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SampleSize::N1 => "n1",
            SampleSize::N2 => "n2",
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    pub population_size: usize,
    pub prevalence: f64,
    pub strata: usize,
    pub clusters_per_stratum: usize,
    pub frame_covariates: usize,
    pub gamma: f64,
    pub runs: usize,
    pub bootstrap_replicates: usize,
    pub alphas: Vec<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SchemeRow {
    a_h: usize,
    n1: Vec<usize>,
    n2: Vec<usize>,
}

/// One symmetric covariance entry, named by variable (X1..Xk are frame
/// covariates, Z1..Zm the remaining design variables).
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CovOverride {
    pub a: String,
    pub b: String,
    pub value: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationRow {
    pub mu1: Vec<f64>,
    #[serde(default)]
    pub covariance: Vec<CovOverride>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub id: u32,
    pub contrast: Contrast,
    /// Covariate name lists, one per compared model.
    pub models: Vec<Vec<String>>,
    /// Census-fit AUC each model is expected to achieve, for reporting.
    pub expected_auc_pop: Vec<f64>,
    pub populations: Vec<PopulationRow>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    defaults: Defaults,
    sampling_schemes: Vec<SchemeRow>,
    scenarios: Vec<ScenarioSpec>,
}

/// Parsed and validated registry.
#[derive(Clone, Debug)]
pub struct Registry {
    pub defaults: Defaults,
    schemes: Vec<SchemeRow>,
    scenarios: Vec<ScenarioSpec>,
}

const DEFAULT_REGISTRY: &str = include_str!("../../data/scenarios.toml");

/// The built-in registry shipped with the crate.
pub fn default_registry() -> Registry {
    registry_from_str(DEFAULT_REGISTRY).expect("built-in registry is valid")
}

/// Parses a registry from TOML text and validates its cross-references.
pub fn registry_from_str(text: &str) -> Result<Registry> {
    let file: RegistryFile =
        toml::from_str(text).map_err(|e| Error::Registry(e.to_string()))?;
    let registry = Registry {
        defaults: file.defaults,
        schemes: file.sampling_schemes,
        scenarios: file.scenarios,
    };
    registry.validate()?;
    Ok(registry)
}

impl Registry {
    pub fn scenarios(&self) -> &[ScenarioSpec] {
        &self.scenarios
    }

    pub fn scenario(&self, id: u32) -> Result<&ScenarioSpec> {
        self.scenarios
            .iter()
            .find(|s| s.id == id)
            .ok_or(Error::ScenarioNotFound(id))
    }

    pub fn scheme_sizes(&self) -> Vec<usize> {
        self.schemes.iter().map(|s| s.a_h).collect()
    }

    /// Resolves a design row into a concrete sampling scheme.
    pub fn scheme(&self, a_h: usize, size: SampleSize) -> Result<SamplingScheme> {
        let row = self
            .schemes
            .iter()
            .find(|s| s.a_h == a_h)
            .ok_or_else(|| {
                Error::Registry(format!("no sampling scheme with a_h = {a_h}"))
            })?;
        let n_per_cluster = match size {
            SampleSize::N1 => row.n1.clone(),
            SampleSize::N2 => row.n2.clone(),
        };
        Ok(SamplingScheme {
            a_h,
            n_per_cluster,
            size_label: size.to_string(),
        })
    }

    /// Builds the population spec for one of a scenario's populations:
    /// exchangeable covariance (1 - gamma) I + gamma J with the row's
    /// symmetric overrides applied.
    pub fn population_spec(
        &self,
        scenario: &ScenarioSpec,
        pop_idx: usize,
    ) -> Result<PopulationSpec> {
        let row = scenario.populations.get(pop_idx).ok_or_else(|| {
            Error::Registry(format!(
                "scenario {} has no population {pop_idx}",
                scenario.id
            ))
        })?;
        let dim = row.mu1.len();
        let gamma = self.defaults.gamma;
        let mut sigma = vec![gamma; dim * dim];
        for k in 0..dim {
            sigma[k * dim + k] = 1.0;
        }
        for over in &row.covariance {
            let i = var_index(&over.a, self.defaults.frame_covariates, dim)?;
            let j = var_index(&over.b, self.defaults.frame_covariates, dim)?;
            if i == j {
                return Err(Error::Registry(format!(
                    "covariance override pairs {} with itself",
                    over.a
                )));
            }
            sigma[i * dim + j] = over.value;
            sigma[j * dim + i] = over.value;
        }
        Ok(PopulationSpec {
            n: self.defaults.population_size,
            prevalence: self.defaults.prevalence,
            mu0: vec![0.0; dim],
            mu1: row.mu1.clone(),
            sigma,
            n_x: self.defaults.frame_covariates,
            n_strata: self.defaults.strata,
            clusters_per_stratum: self.defaults.clusters_per_stratum,
        })
    }

    fn validate(&self) -> Result<()> {
        let strata = self.defaults.strata;
        for row in &self.schemes {
            if row.n1.len() != strata || row.n2.len() != strata {
                return Err(Error::Registry(format!(
                    "scheme a_h = {} must list {strata} per-stratum takes",
                    row.a_h
                )));
            }
        }
        for s in &self.scenarios {
            let (models, pops) = match s.contrast {
                Contrast::Ci => (1, 1),
                Contrast::HtIndependent => (1, 2),
                Contrast::HtPaired => (2, 1),
            };
            if s.models.len() != models {
                return Err(Error::Registry(format!(
                    "scenario {} needs {models} model(s), found {}",
                    s.id,
                    s.models.len()
                )));
            }
            if s.populations.len() != pops {
                return Err(Error::Registry(format!(
                    "scenario {} needs {pops} population(s), found {}",
                    s.id,
                    s.populations.len()
                )));
            }
            if s.expected_auc_pop.len() != models.max(pops) {
                return Err(Error::Registry(format!(
                    "scenario {} lists {} expected AUCs, needs {}",
                    s.id,
                    s.expected_auc_pop.len(),
                    models.max(pops)
                )));
            }
            for (p, row) in s.populations.iter().enumerate() {
                // build each PopulationSpec once so name and shape errors
                // surface at load time
                self.population_spec(s, p)?;
                if row.mu1.len() < self.defaults.frame_covariates {
                    return Err(Error::Registry(format!(
                        "scenario {} mean vector is shorter than the covariate count",
                        s.id
                    )));
                }
            }
            for model in &s.models {
                for name in model {
                    var_index(name, self.defaults.frame_covariates, usize::MAX)?;
                    if !name.starts_with('X') {
                        return Err(Error::Registry(format!(
                            "scenario {} model uses design variable {name}",
                            s.id
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Maps a variable name to its coordinate: Xk -> k - 1 for k <= n_x,
/// Zk -> n_x + k - 1.
fn var_index(name: &str, n_x: usize, dim: usize) -> Result<usize> {
    let bad = || Error::Registry(format!("unknown variable name {name:?}"));
    let (prefix, rest) = name.split_at(1);
    let k: usize = rest.parse().map_err(|_| bad())?;
    if k == 0 {
        return Err(bad());
    }
    let idx = match prefix {
        "X" if k <= n_x => k - 1,
        "Z" => n_x + k - 1,
        _ => return Err(bad()),
    };
    if idx >= dim {
        return Err(bad());
    }
    Ok(idx)
}
