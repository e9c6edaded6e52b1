//! Predicted individual treatment effects (PITEs) for two-arm randomized
//! trials, with a permutation test for treatment-effect heterogeneity.
//!
//! The pipeline: fit a predictive model separately on each arm ([`predict`]),
//! take the difference of the two model predictions for every individual
//! ([`pite`]), and judge the spread of those differences against the
//! chance distribution obtained by permuting treatment labels ([`perm`]).
//! [`simgen`] generates synthetic trial data with controlled heterogeneity
//! and [`harness`] runs type-I-error and power experiments over a grid.

pub mod data;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod perm;
pub mod pite;
pub mod predict;
pub mod rng;
pub mod simgen;

pub use data::{read_csv, read_csv_path, write_csv, Arm, ArmView, CovariateKind, Dataset, Schema};
pub use error::{Error, Result};
pub use harness::{
    run_cell, run_grid, run_power, run_type1, Cell, CellDesign, CellResult, ExperimentGrid,
    GridKind, SimulationTable,
};
pub use perm::{exhaustive_null_distribution, run_permutation_test, PermutationConfig, PermutationReport};
pub use pite::{estimate_pite, pite_effect_size, screen_interactions, sd_of_pite, PiteResult, ScreenResult};
pub use predict::{fit_predictor, FittedPredictor, ForestParams, Mtry, PredictorSpec};
pub use rng::SeedStream;
pub use simgen::{
    calibrate_effect_size, distribute_heterogeneity, generate_als, generate_null, AlsDesign,
    AlsTruth, Calibration, CorrelationMatrix, EffectSpread, GeneratorConstants, NullDesign,
};
