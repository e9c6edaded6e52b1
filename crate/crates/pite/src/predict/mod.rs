//! Pluggable per-arm predictive models.
//!
//! A predictor is fit on the rows of one arm and can then predict the outcome
//! for every individual in a dataset, whichever arm they belong to. Two model
//! families are provided: ordinary least squares and a regression random
//! forest with random split points.

mod forest;
mod linear;

pub use forest::{fit_forest, predict_forest, ForestModel, Tree};
pub use linear::{fit_linear, predict_linear, LinearModel};

use serde::{Deserialize, Serialize};

use crate::data::{ArmView, Dataset};
use crate::error::{Error, Result};
use crate::rng::SeedStream;

/// Which model family to fit, with its tuning parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PredictorSpec {
    Linear,
    Forest { params: ForestParams },
}

impl PredictorSpec {
    pub fn forest_default() -> Self {
        PredictorSpec::Forest { params: ForestParams::default() }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PredictorSpec::Linear => Ok(()),
            PredictorSpec::Forest { params } => params.validate(),
        }
    }

    /// Whether fitting consumes randomness (forest bootstrap / feature sampling).
    pub fn is_stochastic(&self) -> bool {
        matches!(self, PredictorSpec::Forest { .. })
    }

    /// Short family name for table rows and log lines.
    pub fn family_name(&self) -> &'static str {
        match self {
            PredictorSpec::Linear => "linear",
            PredictorSpec::Forest { .. } => "forest",
        }
    }
}

/// Number of candidate features sampled at each split.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mtry {
    /// ⌈p/3⌉, the regression-forest convention.
    Auto,
    /// Every feature at every split.
    All,
    /// A fixed count (capped at p).
    Count(usize),
}

impl Mtry {
    pub fn resolve(self, p: usize) -> usize {
        match self {
            Mtry::Auto => p.div_ceil(3).max(1),
            Mtry::All => p.max(1),
            Mtry::Count(m) => m.min(p).max(1),
        }
    }
}

/// Random-forest tuning parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    /// Trees in the ensemble.
    pub n_trees: usize,
    /// Maximum split depth; the root is at depth 0.
    pub max_depth: usize,
    /// Candidate thresholds drawn uniformly in the node's feature range.
    pub n_split_points: usize,
    /// Minimum rows in each child of a split.
    pub min_leaf_size: usize,
    pub mtry: Mtry,
    /// Grow each tree on a bootstrap resample of the arm.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 500,
            max_depth: 10,
            n_split_points: 10,
            min_leaf_size: 5,
            mtry: Mtry::Auto,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees == 0 || self.max_depth == 0 || self.n_split_points == 0 || self.min_leaf_size == 0 {
            return Err(Error::InvalidConfig(
                "forest parameters must all be at least 1".into(),
            ));
        }
        if let Mtry::Count(0) = self.mtry {
            return Err(Error::InvalidConfig("mtry count must be at least 1".into()));
        }
        Ok(())
    }
}

/// A fitted model, immutable and safe for concurrent prediction.
#[derive(Debug, Clone)]
pub enum FittedPredictor {
    Linear(LinearModel),
    Forest(ForestModel),
}

impl FittedPredictor {
    /// Predict the outcome for every row of `d`.
    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        match self {
            FittedPredictor::Linear(model) => predict_linear(model, d),
            FittedPredictor::Forest(model) => predict_forest(model, d),
        }
    }
}

/// Fit the model named by `spec` on one arm.
///
/// `stream` feeds the forest's bootstrap and split sampling; the linear fit
/// ignores it.
pub fn fit_predictor(
    d: &Dataset,
    arm: &ArmView,
    spec: &PredictorSpec,
    stream: SeedStream,
) -> Result<FittedPredictor> {
    match spec {
        PredictorSpec::Linear => Ok(FittedPredictor::Linear(fit_linear(d, arm)?)),
        PredictorSpec::Forest { params } => {
            Ok(FittedPredictor::Forest(fit_forest(d, arm, params, stream)?))
        }
    }
}
