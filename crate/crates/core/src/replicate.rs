//! Replicate weight generation for variance estimation: stratified
//! delete-one-PSU jackknife (JKn), the rescaling bootstrap resampling
//! a_h - 1 PSUs (RB) or a_h PSUs (RBn) per stratum, and the traditional
//! unit bootstrap (trB) that ignores the design.
//!
//! Replicate b is fully determined by (seed, stream, b), so replicates can
//! be generated in parallel and in any order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{validate_for_replication, SurveyFrame};
use crate::rng::{domain, keyed_rng, uniform_index};
use crate::Scalar;

/// Replicate weight scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Jkn,
    Rb,
    Rbn,
    Trb,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Jkn, Method::Rb, Method::Rbn, Method::Trb];

    pub fn is_bootstrap(self) -> bool {
        !matches!(self, Method::Jkn)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Jkn => "jkn",
            Method::Rb => "rb",
            Method::Rbn => "rbn",
            Method::Trb => "trb",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jkn" => Ok(Method::Jkn),
            "rb" => Ok(Method::Rb),
            "rbn" => Ok(Method::Rbn),
            "trb" => Ok(Method::Trb),
            other => Err(Error::InvalidSpec(format!("unknown method `{other}`"))),
        }
    }
}

/// Key for the replicate random streams. The pair (seed, stream) plus the
/// replicate index fully determines every draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ResampleRng {
    pub seed: u64,
    pub stream: u64,
}

impl ResampleRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        ResampleRng { seed, stream }
    }

    fn stratum_rng(&self, replicate: u64, stratum: u64) -> rand_chacha::ChaCha8Rng {
        keyed_rng(&[
            self.seed,
            self.stream,
            domain::REPLICATE_STRATUM,
            replicate,
            stratum,
        ])
    }

    fn unit_rng(&self, replicate: u64) -> rand_chacha::ChaCha8Rng {
        keyed_rng(&[self.seed, self.stream, domain::REPLICATE_UNIT, replicate])
    }
}

/// A dense set of full-length replicate weight vectors.
#[derive(Clone, Debug)]
pub struct ReplicateWeightSet {
    pub method: Method,
    n_units: usize,
    n_replicates: usize,
    /// Row-major: replicate b occupies `weights[b*n .. (b+1)*n]`.
    weights: Vec<Scalar>,
    /// JKn only: multiplier (a_h - 1)/a_h of each replicate's stratum.
    pub jkn_factors: Option<Vec<Scalar>>,
    /// JKn only: (stratum index, PSU index within stratum) dropped in each
    /// replicate.
    pub jkn_dropped: Option<Vec<(u32, u32)>>,
}

impl ReplicateWeightSet {
    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_replicates(&self) -> usize {
        self.n_replicates
    }

    pub fn replicate(&self, b: usize) -> &[Scalar] {
        &self.weights[b * self.n_units..(b + 1) * self.n_units]
    }

    pub fn iter_replicates(&self) -> impl Iterator<Item = &[Scalar]> {
        self.weights.chunks_exact(self.n_units)
    }
}

/// Delete-one-PSU jackknife replicates; one replicate per PSU, enumerated
/// stratum by stratum in first-appearance order. Dropped PSU weights go to
/// zero, same-stratum weights are scaled by a_h/(a_h - 1), everything else
/// is carried over untouched.
pub fn jkn_weights(frame: &SurveyFrame) -> Result<ReplicateWeightSet> {
    let summary = validate_for_replication(frame)?;
    let n = frame.n();
    let total = summary.n_psus;
    let mut weights = vec![0.0; total * n];
    let mut factors = Vec::with_capacity(total);
    let mut dropped = Vec::with_capacity(total);

    let mut b = 0;
    for (h, info) in frame.strata().iter().enumerate() {
        let a_h = info.psus.len() as Scalar;
        let scale = a_h / (a_h - 1.0);
        for (j, &dropped_psu) in info.psus.iter().enumerate() {
            let row = &mut weights[b * n..(b + 1) * n];
            row.copy_from_slice(frame.weights());
            for &other in &info.psus {
                let psu = &frame.psus()[other as usize];
                if other == dropped_psu {
                    for &u in &psu.units {
                        row[u as usize] = 0.0;
                    }
                } else {
                    for &u in &psu.units {
                        row[u as usize] *= scale;
                    }
                }
            }
            factors.push((a_h - 1.0) / a_h);
            dropped.push((h as u32, j as u32));
            b += 1;
        }
    }
    Ok(ReplicateWeightSet {
        method: Method::Jkn,
        n_units: n,
        n_replicates: total,
        weights,
        jkn_factors: Some(factors),
        jkn_dropped: Some(dropped),
    })
}

fn psu_bootstrap(
    frame: &SurveyFrame,
    b: usize,
    rng: ResampleRng,
    method: Method,
) -> Result<ReplicateWeightSet> {
    validate_for_replication(frame)?;
    if b < 2 {
        return Err(Error::ReplicateCountTooSmall(b));
    }
    let n = frame.n();
    let mut weights = vec![0.0; b * n];
    weights
        .par_chunks_exact_mut(n)
        .enumerate()
        .for_each(|(rep, row)| {
            for (h, info) in frame.strata().iter().enumerate() {
                let a_h = info.psus.len();
                let (draws, scale) = match method {
                    Method::Rb => (a_h - 1, a_h as Scalar / (a_h as Scalar - 1.0)),
                    Method::Rbn => (a_h, 1.0),
                    _ => unreachable!("psu bootstrap only handles rb/rbn"),
                };
                let mut rng = rng.stratum_rng(rep as u64, h as u64);
                let mut counts = vec![0u32; a_h];
                for _ in 0..draws {
                    counts[uniform_index(&mut rng, a_h as u64) as usize] += 1;
                }
                for (j, &psu_idx) in info.psus.iter().enumerate() {
                    let k = counts[j] as Scalar;
                    let psu = &frame.psus()[psu_idx as usize];
                    for &u in &psu.units {
                        let u = u as usize;
                        row[u] = frame.weights()[u] * scale * k;
                    }
                }
            }
        });
    Ok(ReplicateWeightSet {
        method,
        n_units: n,
        n_replicates: b,
        weights,
        jkn_factors: None,
        jkn_dropped: None,
    })
}

/// Rescaling bootstrap: per stratum, a_h - 1 PSU draws with replacement;
/// replicate weight w * (a_h/(a_h - 1)) * k with k the hit count.
pub fn rb_weights(frame: &SurveyFrame, b: usize, rng: ResampleRng) -> Result<ReplicateWeightSet> {
    psu_bootstrap(frame, b, rng, Method::Rb)
}

/// Naive-scale variant: a_h PSU draws per stratum, weight w * k.
pub fn rbn_weights(frame: &SurveyFrame, b: usize, rng: ResampleRng) -> Result<ReplicateWeightSet> {
    psu_bootstrap(frame, b, rng, Method::Rbn)
}

/// Traditional bootstrap: n unit draws with replacement ignoring strata
/// and clusters; replicate weight w * k.
pub fn trb_weights(frame: &SurveyFrame, b: usize, rng: ResampleRng) -> Result<ReplicateWeightSet> {
    if b < 2 {
        return Err(Error::ReplicateCountTooSmall(b));
    }
    let n = frame.n();
    if n < 2 {
        return Err(Error::FrameTooSmallForResampling(n));
    }
    let mut weights = vec![0.0; b * n];
    weights
        .par_chunks_exact_mut(n)
        .enumerate()
        .for_each(|(rep, row)| {
            let mut rng = rng.unit_rng(rep as u64);
            let mut counts = vec![0u32; n];
            for _ in 0..n {
                counts[uniform_index(&mut rng, n as u64) as usize] += 1;
            }
            for u in 0..n {
                row[u] = frame.weights()[u] * counts[u] as Scalar;
            }
        });
    Ok(ReplicateWeightSet {
        method: Method::Trb,
        n_units: n,
        n_replicates: b,
        weights,
        jkn_factors: None,
        jkn_dropped: None,
    })
}

/// Dispatch by method; `b` and `rng` are ignored for the deterministic JKn.
pub fn replicate_weights(
    frame: &SurveyFrame,
    method: Method,
    b: usize,
    rng: ResampleRng,
) -> Result<ReplicateWeightSet> {
    match method {
        Method::Jkn => jkn_weights(frame),
        Method::Rb => rb_weights(frame, b, rng),
        Method::Rbn => rbn_weights(frame, b, rng),
        Method::Trb => trb_weights(frame, b, rng),
    }
}
