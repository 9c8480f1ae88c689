//! Two-stage sampling from a finite population: SRS without replacement of
//! clusters within strata, then SRS without replacement of units within
//! the selected clusters. Weights are the product of the two inverse
//! inclusion fractions.

use crate::error::{Error, Result};
use crate::frame::{SurveyFrame, UnitRecord};
use crate::rng::{domain, keyed_rng, sample_without_replacement};
use crate::sim::population::FinitePopulation;

/// Stage sizes of one design row: `a_h` clusters per stratum and the
/// per-cluster unit take for each stratum.
#[derive(Clone, Debug)]
pub struct SamplingScheme {
    pub a_h: usize,
    /// One entry per stratum; every selected cluster of that stratum
    /// contributes this many units.
    pub n_per_cluster: Vec<usize>,
    pub size_label: String,
}

/// Draws one two-stage sample. All randomness is keyed by
/// (seed, run, stratum), so any run can be regenerated in isolation.
pub fn draw_sample(
    pop: &FinitePopulation,
    scheme: &SamplingScheme,
    seed: u64,
    run: u64,
) -> Result<SurveyFrame> {
    let frame = &pop.frame;
    if scheme.n_per_cluster.len() != frame.strata().len() {
        return Err(Error::InvalidSpec(format!(
            "scheme lists {} strata, population has {}",
            scheme.n_per_cluster.len(),
            frame.strata().len()
        )));
    }
    let mut units = Vec::new();
    for (h, info) in frame.strata().iter().enumerate() {
        let a_total = info.psus.len();
        if scheme.a_h > a_total {
            return Err(Error::SchemeExceedsPopulation(format!(
                "a_h = {} but stratum {} has {} clusters",
                scheme.a_h, info.label, a_total
            )));
        }
        let n_hj = scheme.n_per_cluster[h];
        let mut stage1 = keyed_rng(&[seed, domain::SAMPLE_STAGE1, run, h as u64]);
        let picked = sample_without_replacement(&mut stage1, scheme.a_h, a_total);
        for &jc in &picked {
            let psu = &frame.psus()[info.psus[jc as usize] as usize];
            let n_total = psu.units.len();
            if n_hj > n_total {
                return Err(Error::SchemeExceedsPopulation(format!(
                    "take of {n_hj} units but cluster {} of stratum {} has {n_total}",
                    psu.label, info.label
                )));
            }
            let mut stage2 =
                keyed_rng(&[seed, domain::SAMPLE_STAGE2, run, h as u64, jc as u64]);
            let sel = sample_without_replacement(&mut stage2, n_hj, n_total);
            let weight =
                (a_total as f64 / scheme.a_h as f64) * (n_total as f64 / n_hj as f64);
            for &ui in &sel {
                let u = psu.units[ui as usize] as usize;
                units.push(UnitRecord {
                    id: frame.ids()[u].clone(),
                    stratum: info.label.clone(),
                    psu: psu.label.clone(),
                    weight,
                    outcome: frame.outcomes()[u],
                    covariates: frame.covariate_row(u).to_vec(),
                });
            }
        }
    }
    SurveyFrame::from_units(units, frame.covariate_names().to_vec())
}
