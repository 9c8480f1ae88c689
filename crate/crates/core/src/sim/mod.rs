//! Finite population generation, two-stage cluster sampling, and the
//! Monte Carlo driver that turns scenarios into coverage and rejection
//! tables.

pub mod population;
pub mod report;
pub mod runner;
pub mod sampling;
pub mod scenario;

pub use population::{generate_population, FinitePopulation, PopulationSpec};
pub use report::{meta_json, se_samples_csv, summary_csv};
pub use runner::{run_scenario, MonteCarloReport, RunOptions, SeSample, SummaryRow};
pub use sampling::{draw_sample, SamplingScheme};
pub use scenario::{
    default_registry, registry_from_str, Contrast, Registry, SampleSize, ScenarioSpec,
};
