//! Replication-level experiment runner.
//!
//! A grid is a list of cells, each pairing a data-generating design with a
//! predictor and permutation-test settings. For every cell the runner draws
//! `replications` independent trials, runs the full permutation test on each,
//! and aggregates the rejection rate with its binomial half-width — the
//! quantity reported per cell of a type-I-error or power table.
//!
//! Seeding: replication `r` of cell `c` under master seed `s` derives its
//! generator seed and test seed from `root(s).child(c).child(r)`, so any cell
//! can be rerun in isolation and reproduces exactly its full-grid numbers,
//! and results are independent of scheduling.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perm::{run_permutation_test, PermutationConfig};
use crate::predict::PredictorSpec;
use crate::rng::SeedStream;
use crate::simgen::{generate_als, generate_null, AlsDesign, NullDesign};

/// The data-generating side of one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellDesign {
    Null(NullDesign),
    Als(AlsDesign),
}

impl CellDesign {
    fn describe(&self) -> String {
        match self {
            CellDesign::Null(d) => format!(
                "null n={} ate={} nuisance={}+{}",
                d.n, d.ate, d.n_nuisance_cont, d.n_nuisance_bin
            ),
            CellDesign::Als(d) => format!(
                "als n={} es={} spread={} nuisance={}",
                d.n, d.target_effect_size, d.spread, d.n_nuisance
            ),
        }
    }
}

/// One experimental condition: a design, a predictor, and test settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub design: CellDesign,
    pub predictor: PredictorSpec,
    pub n_permutations: usize,
    pub replications: usize,
    pub alpha: f64,
}

impl Cell {
    pub fn describe(&self) -> String {
        format!(
            "{}, {}, P={}, reps={}, alpha={}",
            self.design.describe(),
            self.predictor.family_name(),
            self.n_permutations,
            self.replications,
            self.alpha
        )
    }

    pub fn validate(&self) -> Result<()> {
        match &self.design {
            CellDesign::Null(d) => d.validate()?,
            CellDesign::Als(d) => d.validate()?,
        }
        self.predictor.validate()?;
        if self.replications == 0 {
            return Err(Error::InvalidConfig("cell needs at least one replication".into()));
        }
        PermutationConfig { n_permutations: self.n_permutations, alpha: self.alpha, seed: 0 }
            .validate()
    }
}

/// A full experiment: cells plus the master seed that keys every stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGrid {
    pub label: String,
    pub master_seed: u64,
    pub cells: Vec<Cell>,
}

impl ExperimentGrid {
    pub fn validate(&self) -> Result<()> {
        if self.cells.is_empty() {
            return Err(Error::InvalidConfig("experiment grid has no cells".into()));
        }
        for (index, cell) in self.cells.iter().enumerate() {
            cell.validate().map_err(|source| Error::CellFailure {
                index,
                label: cell.describe(),
                source: Box::new(source),
            })?;
        }
        Ok(())
    }
}

/// Which table a grid reproduces; constrains the admissible design kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Constant-effect designs; the rejection rate estimates type I error.
    Type1,
    /// Heterogeneous designs; the rejection rate estimates power.
    Power,
}

/// Aggregated outcome of one cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub cell_index: usize,
    /// The condition this row aggregates, echoed for self-description.
    pub cell: Cell,
    /// Fraction of replications with `p_value < alpha`.
    pub rejection_rate: f64,
    pub replications: usize,
    pub mean_p_value: f64,
    /// 1.96·√(r(1−r)/replications), the 95% binomial half-width.
    pub half_width: f64,
    /// Per-replication permutation-test p-values, in replication order.
    pub p_values: Vec<f64>,
    /// Wall-clock time spent on the cell; informational only, never
    /// serialized (result documents must be byte-stable across runs).
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Results for a whole grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationTable {
    pub label: String,
    pub master_seed: u64,
    pub cells: Vec<CellResult>,
}

/// Run one cell under `master_seed` as if it were cell `index` of a grid.
pub fn run_cell(master_seed: u64, index: usize, cell: &Cell) -> Result<CellResult> {
    cell.validate().map_err(|source| fail(index, cell, source))?;
    let start = Instant::now();
    let cell_stream = SeedStream::root(master_seed).child(index as u64);
    let outcomes: Vec<Result<f64>> = (0..cell.replications)
        .into_par_iter()
        .map(|rep| {
            let rep_stream = cell_stream.child(rep as u64);
            let generator_seed = rep_stream.child(0).key();
            let test_seed = rep_stream.child(1).key();
            let dataset = match &cell.design {
                CellDesign::Null(d) => generate_null(&NullDesign { seed: generator_seed, ..d.clone() })?,
                CellDesign::Als(d) => {
                    generate_als(&AlsDesign { seed: generator_seed, ..d.clone() })?.0
                }
            };
            let config = PermutationConfig {
                n_permutations: cell.n_permutations,
                alpha: cell.alpha,
                seed: test_seed,
            };
            Ok(run_permutation_test(&dataset, &cell.predictor, &config)?.p_value)
        })
        .collect();

    let mut p_values = Vec::with_capacity(cell.replications);
    for outcome in outcomes {
        p_values.push(outcome.map_err(|source| fail(index, cell, source))?);
    }

    let replications = p_values.len();
    let rejections = p_values.iter().filter(|p| **p < cell.alpha).count();
    let rejection_rate = rejections as f64 / replications as f64;
    let mean_p_value = p_values.iter().sum::<f64>() / replications as f64;
    let half_width =
        1.96 * (rejection_rate * (1.0 - rejection_rate) / replications as f64).sqrt();
    Ok(CellResult {
        cell_index: index,
        cell: cell.clone(),
        rejection_rate,
        replications,
        mean_p_value,
        half_width,
        p_values,
        wall_time: start.elapsed(),
    })
}

fn fail(index: usize, cell: &Cell, source: Error) -> Error {
    Error::CellFailure { index, label: cell.describe(), source: Box::new(source) }
}

/// Run a grid, invoking `on_cell` as each cell finishes (the checkpoint
/// hook). Cells whose index appears in `resume` are taken as already done
/// and are neither recomputed nor re-reported.
pub fn run_grid(
    grid: &ExperimentGrid,
    kind: GridKind,
    resume: Vec<CellResult>,
    mut on_cell: impl FnMut(&CellResult) -> Result<()>,
) -> Result<SimulationTable> {
    grid.validate()?;
    for (index, cell) in grid.cells.iter().enumerate() {
        let ok = match (kind, &cell.design) {
            (GridKind::Type1, CellDesign::Null(_)) | (GridKind::Power, CellDesign::Als(_)) => true,
            _ => false,
        };
        if !ok {
            let expected = match kind {
                GridKind::Type1 => "a constant-effect (null) design",
                GridKind::Power => "a heterogeneous (als) design",
            };
            return Err(fail(
                index,
                cell,
                Error::InvalidConfig(format!("this grid requires {expected}")),
            ));
        }
    }

    let mut done: Vec<Option<CellResult>> = vec![None; grid.cells.len()];
    for result in resume {
        let index = result.cell_index;
        if index >= grid.cells.len() || grid.cells[index] != result.cell {
            return Err(Error::InvalidConfig(format!(
                "resume entry for cell {index} does not match the grid"
            )));
        }
        done[index] = Some(result);
    }

    let mut cells = Vec::with_capacity(grid.cells.len());
    for (index, slot) in done.into_iter().enumerate() {
        match slot {
            Some(result) => cells.push(result),
            None => {
                let result = run_cell(grid.master_seed, index, &grid.cells[index])?;
                on_cell(&result)?;
                cells.push(result);
            }
        }
    }
    Ok(SimulationTable { label: grid.label.clone(), master_seed: grid.master_seed, cells })
}

/// Run a type-I-error grid (all cells must use null designs).
pub fn run_type1(grid: &ExperimentGrid) -> Result<SimulationTable> {
    run_grid(grid, GridKind::Type1, Vec::new(), |_| Ok(()))
}

/// Run a power grid (all cells must use heterogeneous designs).
pub fn run_power(grid: &ExperimentGrid) -> Result<SimulationTable> {
    run_grid(grid, GridKind::Power, Vec::new(), |_| Ok(()))
}
