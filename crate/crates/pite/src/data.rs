//! Trial data representation: validation, arm splitting, and treatment-label
//! permutation.
//!
//! A [`Dataset`] is immutable once built. Outcome, covariates, and column
//! metadata live behind `Arc`s, so permuted copies share everything except the
//! treatment vector itself.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    Treatment,
    Control,
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Arm::Treatment => write!(f, "treatment"),
            Arm::Control => write!(f, "control"),
        }
    }
}

/// Row indices belonging to one arm, sorted ascending.
#[derive(Debug, Clone)]
pub struct ArmView {
    pub indices: Vec<usize>,
    pub arm: Arm,
}

impl ArmView {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// One randomized trial: outcome, 0/1 treatment assignment, covariate matrix.
///
/// Invariants (checked at construction):
/// - outcome, treatment, and covariate rows all have length `n`
/// - treatment holds only 0 and 1, with at least 2 of each
/// - binary-kind covariate columns hold only 0 and 1
/// - every value is finite
#[derive(Debug, Clone)]
pub struct Dataset {
    outcome: Arc<Vec<f64>>,
    treatment: Vec<u8>,
    covariates: Arc<Matrix>,
    covariate_names: Arc<Vec<String>>,
    covariate_kinds: Arc<Vec<CovariateKind>>,
}

impl Dataset {
    pub fn new(
        outcome: Vec<f64>,
        treatment: Vec<u8>,
        covariates: Matrix,
        covariate_names: Vec<String>,
        covariate_kinds: Vec<CovariateKind>,
    ) -> Result<Self> {
        let n = outcome.len();
        if covariates.cols() == 0 {
            return Err(Error::EmptyCovariates);
        }
        if treatment.len() != n || covariates.rows() != n {
            return Err(Error::InvalidConfig(format!(
                "row counts differ: outcome {}, treatment {}, covariates {}",
                n,
                treatment.len(),
                covariates.rows()
            )));
        }
        if covariate_names.len() != covariates.cols() || covariate_kinds.len() != covariates.cols() {
            return Err(Error::InvalidConfig(
                "covariate names/kinds do not match column count".into(),
            ));
        }
        for (row, value) in outcome.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFiniteValue { row, column: "outcome".into() });
            }
        }
        for (row, t) in treatment.iter().enumerate() {
            if *t > 1 {
                return Err(Error::NonBinaryTreatment { row });
            }
        }
        check_arm_sizes(&treatment)?;
        for (j, kind) in covariate_kinds.iter().enumerate() {
            for row in 0..n {
                let v = covariates.get(row, j);
                if !v.is_finite() {
                    return Err(Error::NonFiniteValue { row, column: covariate_names[j].clone() });
                }
                if *kind == CovariateKind::Binary && v != 0.0 && v != 1.0 {
                    return Err(Error::NonBinaryCovariate { row, column: covariate_names[j].clone() });
                }
            }
        }
        Ok(Dataset {
            outcome: Arc::new(outcome),
            treatment,
            covariates: Arc::new(covariates),
            covariate_names: Arc::new(covariate_names),
            covariate_kinds: Arc::new(covariate_kinds),
        })
    }

    pub fn n(&self) -> usize {
        self.outcome.len()
    }

    /// Number of covariate columns.
    pub fn p(&self) -> usize {
        self.covariates.cols()
    }

    pub fn outcome(&self) -> &[f64] {
        &self.outcome
    }

    pub fn treatment(&self) -> &[u8] {
        &self.treatment
    }

    pub fn covariates(&self) -> &Matrix {
        &self.covariates
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn covariate_kinds(&self) -> &[CovariateKind] {
        &self.covariate_kinds
    }

    /// Split rows by treatment label.
    pub fn split_arms(&self) -> (ArmView, ArmView) {
        let mut treated = Vec::new();
        let mut control = Vec::new();
        for (i, t) in self.treatment.iter().enumerate() {
            if *t == 1 {
                treated.push(i);
            } else {
                control.push(i);
            }
        }
        (
            ArmView { indices: treated, arm: Arm::Treatment },
            ArmView { indices: control, arm: Arm::Control },
        )
    }

    /// A copy of this dataset with uniformly re-shuffled treatment labels.
    ///
    /// Outcome and covariates are shared with `self`; arm sizes are preserved
    /// exactly because only the label vector is permuted.
    pub fn permute_treatment<R: Rng + ?Sized>(&self, rng: &mut R) -> Dataset {
        let mut labels = self.treatment.clone();
        permute_labels(&mut labels, rng);
        Dataset {
            outcome: Arc::clone(&self.outcome),
            treatment: labels,
            covariates: Arc::clone(&self.covariates),
            covariate_names: Arc::clone(&self.covariate_names),
            covariate_kinds: Arc::clone(&self.covariate_kinds),
        }
    }

    /// A copy of this dataset with the given treatment labels (arm sizes may differ).
    pub fn with_treatment(&self, treatment: Vec<u8>) -> Result<Dataset> {
        if treatment.len() != self.n() {
            return Err(Error::InvalidConfig(format!(
                "treatment length {} does not match n = {}",
                treatment.len(),
                self.n()
            )));
        }
        check_arm_sizes(&treatment)?;
        Ok(Dataset {
            outcome: Arc::clone(&self.outcome),
            treatment,
            covariates: Arc::clone(&self.covariates),
            covariate_names: Arc::clone(&self.covariate_names),
            covariate_kinds: Arc::clone(&self.covariate_kinds),
        })
    }

    /// True when `other` shares outcome and covariate storage with `self`.
    pub fn shares_data_with(&self, other: &Dataset) -> bool {
        Arc::ptr_eq(&self.outcome, &other.outcome) && Arc::ptr_eq(&self.covariates, &other.covariates)
    }
}

/// Uniform random permutation of a label vector (Fisher-Yates).
pub fn permute_labels<R: Rng + ?Sized>(labels: &mut [u8], rng: &mut R) {
    labels.shuffle(rng);
}

fn check_arm_sizes(treatment: &[u8]) -> Result<()> {
    let treated = treatment.iter().filter(|t| **t == 1).count();
    let control = treatment.len() - treated;
    if treated < 2 {
        return Err(Error::DegenerateArm { arm: Arm::Treatment, size: treated, required: 2 });
    }
    if control < 2 {
        return Err(Error::DegenerateArm { arm: Arm::Control, size: control, required: 2 });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

/// Column roles for CSV ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Schema {
    /// Header name of the outcome column.
    pub outcome: String,
    /// Header name of the treatment column (values must parse as 0 or 1).
    pub treatment: String,
    /// Covariate column names; `None` selects every remaining column.
    #[serde(default)]
    pub covariates: Option<Vec<String>>,
    /// Kind overrides; columns not listed are inferred from their values
    /// (a column holding only 0 and 1 is binary, anything else continuous).
    #[serde(default)]
    pub kind_overrides: Vec<(String, CovariateKind)>,
}

impl Schema {
    pub fn new(outcome: impl Into<String>, treatment: impl Into<String>) -> Self {
        Schema {
            outcome: outcome.into(),
            treatment: treatment.into(),
            covariates: None,
            kind_overrides: Vec::new(),
        }
    }
}

/// Read and validate a dataset from CSV (header row required, UTF-8, `.` decimal).
pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    let mut csv_reader = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers: Vec<String> = csv_reader.headers()?.iter().map(|h| h.trim().to_string()).collect();

    let outcome_idx = find_column(&headers, &schema.outcome)?;
    let treatment_idx = find_column(&headers, &schema.treatment)?;
    let covariate_cols: Vec<usize> = match &schema.covariates {
        Some(names) => names
            .iter()
            .map(|name| find_column(&headers, name))
            .collect::<Result<Vec<_>>>()?,
        None => (0..headers.len())
            .filter(|idx| *idx != outcome_idx && *idx != treatment_idx)
            .collect(),
    };
    if covariate_cols.is_empty() {
        return Err(Error::EmptyCovariates);
    }

    let mut outcome = Vec::new();
    let mut treatment = Vec::new();
    let mut cov_data: Vec<f64> = Vec::new();
    for (row, record) in csv_reader.records().enumerate() {
        let record = record?;
        let y = parse_cell(record.get(outcome_idx), row, &headers[outcome_idx])?;
        let t_raw = parse_cell(record.get(treatment_idx), row, &headers[treatment_idx])?;
        let t = if t_raw == 0.0 {
            0u8
        } else if t_raw == 1.0 {
            1u8
        } else {
            return Err(Error::NonBinaryTreatment { row });
        };
        outcome.push(y);
        treatment.push(t);
        for idx in &covariate_cols {
            cov_data.push(parse_cell(record.get(*idx), row, &headers[*idx])?);
        }
    }

    let n = outcome.len();
    let p = covariate_cols.len();
    let covariates = Matrix::new(n, p, cov_data);
    let names: Vec<String> = covariate_cols.iter().map(|idx| headers[*idx].clone()).collect();
    let kinds = resolve_kinds(&covariates, &names, &schema.kind_overrides);
    Dataset::new(outcome, treatment, covariates, names, kinds)
}

pub fn read_csv_path(path: &Path, schema: &Schema) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_csv(std::io::BufReader::new(file), schema)
}

/// Write a dataset as CSV: outcome, treatment, then covariate columns.
///
/// Floats are written with shortest round-trip formatting, so read-back is lossless.
pub fn write_csv<W: Write>(writer: W, dataset: &Dataset, outcome_name: &str, treatment_name: &str) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec![outcome_name.to_string(), treatment_name.to_string()];
    header.extend(dataset.covariate_names().iter().cloned());
    w.write_record(&header)?;
    for i in 0..dataset.n() {
        let mut record = Vec::with_capacity(2 + dataset.p());
        record.push(format_float(dataset.outcome()[i]));
        record.push(dataset.treatment()[i].to_string());
        for j in 0..dataset.p() {
            record.push(format_float(dataset.covariates().get(i, j)));
        }
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn format_float(v: f64) -> String {
    // Display for f64 is the shortest decimal that round-trips.
    format!("{v}")
}

fn find_column(headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::InvalidConfig(format!("column `{name}` not found in CSV header")))
}

fn parse_cell(cell: Option<&str>, row: usize, column: &str) -> Result<f64> {
    let text = cell.unwrap_or("").trim();
    if text.is_empty() {
        return Err(Error::MissingValue { row, column: column.to_string() });
    }
    let value: f64 = text
        .parse()
        .map_err(|_| Error::MissingValue { row, column: column.to_string() })?;
    if !value.is_finite() {
        return Err(Error::NonFiniteValue { row, column: column.to_string() });
    }
    Ok(value)
}

fn resolve_kinds(
    covariates: &Matrix,
    names: &[String],
    overrides: &[(String, CovariateKind)],
) -> Vec<CovariateKind> {
    names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            if let Some((_, kind)) = overrides.iter().find(|(n, _)| n == name) {
                return *kind;
            }
            let only_01 = (0..covariates.rows()).all(|i| {
                let v = covariates.get(i, j);
                v == 0.0 || v == 1.0
            });
            if only_01 {
                CovariateKind::Binary
            } else {
                CovariateKind::Continuous
            }
        })
        .collect()
}
