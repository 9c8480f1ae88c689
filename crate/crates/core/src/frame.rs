//! Survey frame: units with stratum/PSU labels, sampling weights, a binary
//! outcome, and covariates. Stratum and PSU identifiers are opaque strings;
//! internally they are re-indexed densely in first-appearance order. PSU
//! labels are scoped to their stratum, so the same label in two strata names
//! two different PSUs.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::Scalar;

/// One sampled unit. Unit ids are free-form metadata; duplicates are
/// allowed and position in the frame is the working identity.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitRecord {
    pub id: String,
    pub stratum: String,
    pub psu: String,
    pub weight: Scalar,
    pub outcome: bool,
    pub covariates: Vec<Scalar>,
}

/// Per-stratum design bookkeeping.
#[derive(Clone, Debug)]
pub struct StratumInfo {
    pub label: String,
    /// Global PSU indices, first-appearance order.
    pub psus: Vec<u32>,
}

/// Per-PSU bookkeeping.
#[derive(Clone, Debug)]
pub struct PsuInfo {
    pub label: String,
    pub stratum: u32,
    /// Frame positions of the member units.
    pub units: Vec<u32>,
}

/// Immutable column-oriented survey data set.
#[derive(Clone, Debug)]
pub struct SurveyFrame {
    ids: Vec<String>,
    covariate_names: Vec<String>,
    weights: Vec<Scalar>,
    outcomes: Vec<bool>,
    covariates: Vec<Scalar>, // row-major n x q
    q: usize,
    stratum_of: Vec<u32>,
    psu_of: Vec<u32>,
    strata: Vec<StratumInfo>,
    psus: Vec<PsuInfo>,
}

impl SurveyFrame {
    /// Builds a frame from unit records, validating weights, covariate
    /// arity, and finiteness. Row numbers in errors are 1-based.
    pub fn from_units(units: Vec<UnitRecord>, covariate_names: Vec<String>) -> Result<Self> {
        if units.is_empty() {
            return Err(Error::EmptyFrame);
        }
        let n = units.len();
        let q = covariate_names.len();
        let mut frame = SurveyFrame {
            ids: Vec::with_capacity(n),
            covariate_names,
            weights: Vec::with_capacity(n),
            outcomes: Vec::with_capacity(n),
            covariates: Vec::with_capacity(n * q),
            q,
            stratum_of: Vec::with_capacity(n),
            psu_of: Vec::with_capacity(n),
            strata: Vec::new(),
            psus: Vec::new(),
        };
        let mut stratum_lookup: HashMap<String, u32> = HashMap::new();
        let mut psu_lookup: HashMap<(u32, String), u32> = HashMap::new();
        for (pos, unit) in units.into_iter().enumerate() {
            let row = pos + 1;
            if unit.covariates.len() != q {
                return Err(Error::RaggedRow(row));
            }
            if !unit.weight.is_finite() || unit.weight <= 0.0 {
                return Err(Error::NonPositiveWeight(row));
            }
            for (j, &x) in unit.covariates.iter().enumerate() {
                if !x.is_finite() {
                    return Err(Error::NonFiniteField {
                        column: frame.covariate_names[j].clone(),
                        row,
                    });
                }
            }
            frame.push_unit_unchecked(unit, &mut stratum_lookup, &mut psu_lookup);
        }
        Ok(frame)
    }

    fn push_unit_unchecked(
        &mut self,
        unit: UnitRecord,
        stratum_lookup: &mut HashMap<String, u32>,
        psu_lookup: &mut HashMap<(u32, String), u32>,
    ) {
        let pos = self.ids.len() as u32;
        let h = *stratum_lookup.entry(unit.stratum.clone()).or_insert_with(|| {
            self.strata.push(StratumInfo {
                label: unit.stratum.clone(),
                psus: Vec::new(),
            });
            (self.strata.len() - 1) as u32
        });
        let p = *psu_lookup.entry((h, unit.psu.clone())).or_insert_with(|| {
            self.psus.push(PsuInfo {
                label: unit.psu.clone(),
                stratum: h,
                units: Vec::new(),
            });
            let idx = (self.psus.len() - 1) as u32;
            self.strata[h as usize].psus.push(idx);
            idx
        });
        self.psus[p as usize].units.push(pos);
        self.ids.push(unit.id);
        self.weights.push(unit.weight);
        self.outcomes.push(unit.outcome);
        self.covariates.extend_from_slice(&unit.covariates);
        self.stratum_of.push(h);
        self.psu_of.push(p);
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn weights(&self) -> &[Scalar] {
        &self.weights
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn covariate_row(&self, i: usize) -> &[Scalar] {
        &self.covariates[i * self.q..(i + 1) * self.q]
    }

    pub fn strata(&self) -> &[StratumInfo] {
        &self.strata
    }

    pub fn psus(&self) -> &[PsuInfo] {
        &self.psus
    }

    /// Dense stratum index of unit `i`.
    pub fn stratum_of(&self, i: usize) -> u32 {
        self.stratum_of[i]
    }

    /// Dense global PSU index of unit `i`.
    pub fn psu_of(&self, i: usize) -> u32 {
        self.psu_of[i]
    }

    /// Resolves covariate names to column indices.
    pub fn covariate_indices(&self, names: &[String]) -> Result<Vec<usize>> {
        names
            .iter()
            .map(|name| {
                self.covariate_names
                    .iter()
                    .position(|c| c == name)
                    .ok_or_else(|| Error::UnknownCovariate(name.clone()))
            })
            .collect()
    }

    /// Reconstructs the record at position `i`.
    pub fn unit(&self, i: usize) -> UnitRecord {
        UnitRecord {
            id: self.ids[i].clone(),
            stratum: self.strata[self.stratum_of[i] as usize].label.clone(),
            psu: self.psus[self.psu_of[i] as usize].label.clone(),
            weight: self.weights[i],
            outcome: self.outcomes[i],
            covariates: self.covariate_row(i).to_vec(),
        }
    }
}

/// Column names used when reading a CSV file into a frame.
#[derive(Clone, Debug)]
pub struct CsvSchema {
    pub stratum: String,
    pub psu: String,
    pub weight: String,
    pub outcome: String,
    pub covariates: Vec<String>,
    pub id: Option<String>,
}

fn find_column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_number(field: &str, column: &str, row: usize) -> Result<Scalar> {
    let v: Scalar = field
        .trim()
        .parse()
        .map_err(|_| Error::NonNumericField {
            column: column.to_string(),
            row,
        })?;
    Ok(v)
}

/// Reads a headered CSV file into a [`SurveyFrame`]. Loading is
/// single-threaded and preserves file row order.
pub fn load_survey_csv(path: &Path, schema: &CsvSchema) -> Result<SurveyFrame> {
    let file = std::fs::File::open(path)?;
    read_survey_csv(file, schema)
}

/// Same as [`load_survey_csv`] but from any reader.
pub fn read_survey_csv<R: Read>(reader: R, schema: &CsvSchema) -> Result<SurveyFrame> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let stratum_col = find_column(&headers, &schema.stratum)?;
    let psu_col = find_column(&headers, &schema.psu)?;
    let weight_col = find_column(&headers, &schema.weight)?;
    let outcome_col = find_column(&headers, &schema.outcome)?;
    let id_col = schema
        .id
        .as_ref()
        .map(|name| find_column(&headers, name))
        .transpose()?;
    let cov_cols: Vec<usize> = schema
        .covariates
        .iter()
        .map(|name| find_column(&headers, name))
        .collect::<Result<_>>()?;

    let mut units = Vec::new();
    for (pos, record) in rdr.records().enumerate() {
        let row = pos + 1;
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::RaggedRow(row));
        }
        let weight = parse_number(&record[weight_col], &schema.weight, row)?;
        if !weight.is_finite() || weight <= 0.0 {
            return Err(Error::NonPositiveWeight(row));
        }
        let outcome_raw = parse_number(&record[outcome_col], &schema.outcome, row)?;
        let outcome = if outcome_raw == 0.0 {
            false
        } else if outcome_raw == 1.0 {
            true
        } else {
            return Err(Error::InvalidOutcome(row));
        };
        let mut covariates = Vec::with_capacity(cov_cols.len());
        for (&col, name) in cov_cols.iter().zip(&schema.covariates) {
            let x = parse_number(&record[col], name, row)?;
            if !x.is_finite() {
                return Err(Error::NonFiniteField {
                    column: name.clone(),
                    row,
                });
            }
            covariates.push(x);
        }
        units.push(UnitRecord {
            id: id_col.map(|c| record[c].to_string()).unwrap_or_default(),
            stratum: record[stratum_col].to_string(),
            psu: record[psu_col].to_string(),
            weight,
            outcome,
            covariates,
        });
    }
    SurveyFrame::from_units(units, schema.covariates.clone())
}

/// Writes a frame back to CSV. Floats are printed with the shortest decimal
/// representation that round-trips bit-exactly.
pub fn write_survey_csv<W: Write>(frame: &SurveyFrame, writer: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![
        "id".to_string(),
        "stratum".to_string(),
        "psu".to_string(),
        "weight".to_string(),
        "outcome".to_string(),
    ];
    header.extend(frame.covariate_names().iter().cloned());
    wtr.write_record(&header)?;
    for i in 0..frame.n() {
        let mut record = vec![
            frame.ids()[i].clone(),
            frame.strata()[frame.stratum_of(i) as usize].label.clone(),
            frame.psus()[frame.psu_of(i) as usize].label.clone(),
            format!("{}", frame.weights()[i]),
            if frame.outcomes()[i] { "1" } else { "0" }.to_string(),
        ];
        for &x in frame.covariate_row(i) {
            record.push(format!("{x}"));
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Per-stratum PSU counts produced by [`validate_for_replication`].
#[derive(Clone, Debug)]
pub struct StratumSummary {
    pub label: String,
    pub a_h: usize,
    /// (PSU label, unit count) in first-appearance order.
    pub psu_counts: Vec<(String, usize)>,
}

#[derive(Clone, Debug)]
pub struct DesignSummary {
    pub n_units: usize,
    pub n_strata: usize,
    pub n_psus: usize,
    pub strata: Vec<StratumSummary>,
}

impl DesignSummary {
    /// Total replicate count of the delete-one-PSU jackknife.
    pub fn total_psus(&self) -> usize {
        self.n_psus
    }
}

/// Checks that every stratum has at least two PSUs and summarizes the
/// design. Strata violating the requirement are all reported at once.
pub fn validate_for_replication(frame: &SurveyFrame) -> Result<DesignSummary> {
    let mut singletons = Vec::new();
    let mut strata = Vec::with_capacity(frame.strata().len());
    for info in frame.strata() {
        if info.psus.len() < 2 {
            singletons.push(info.label.clone());
        }
        strata.push(StratumSummary {
            label: info.label.clone(),
            a_h: info.psus.len(),
            psu_counts: info
                .psus
                .iter()
                .map(|&p| {
                    let psu = &frame.psus()[p as usize];
                    (psu.label.clone(), psu.units.len())
                })
                .collect(),
        });
    }
    if !singletons.is_empty() {
        return Err(Error::SingletonPsuStrata(singletons));
    }
    Ok(DesignSummary {
        n_units: frame.n(),
        n_strata: frame.strata().len(),
        n_psus: frame.psus().len(),
        strata,
    })
}
