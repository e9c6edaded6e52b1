//! Ordinary least squares on one arm, via Householder QR.

use serde::{Deserialize, Serialize};

use crate::data::{ArmView, Dataset};
use crate::error::{Error, Result};
use crate::linalg::LstsqWorkspace;

/// Fitted linear model: intercept followed by one coefficient per covariate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
}

impl LinearModel {
    pub fn covariate_count(&self) -> usize {
        self.coefficients.len() - 1
    }
}

/// Least-squares fit of the arm's outcomes on an intercept plus all covariates.
///
/// Errors with [`Error::RankDeficient`] when the augmented design on the arm
/// has column rank below p+1 (too many covariates for the arm, or collinearity).
pub fn fit_linear(d: &Dataset, arm: &ArmView) -> Result<LinearModel> {
    let m = arm.len();
    let k = d.p() + 1;
    let mut ws = LstsqWorkspace::new();
    let (a, b) = ws.reset(m, k);
    fill_design(d, arm, a, b, m);
    let mut coefficients = Vec::new();
    ws.solve(m, k, &mut coefficients)?;
    Ok(LinearModel { coefficients })
}

fn fill_design(d: &Dataset, arm: &ArmView, a: &mut [f64], b: &mut [f64], m: usize) {
    let p = d.p();
    let covs = d.covariates();
    for v in a[0..m].iter_mut() {
        *v = 1.0;
    }
    for (slot, row) in arm.indices.iter().enumerate() {
        let values = covs.row(*row);
        for j in 0..p {
            a[(j + 1) * m + slot] = values[j];
        }
        b[slot] = d.outcome()[*row];
    }
}

/// Predict `[1, xᵢ]·β` for every row of `d`.
pub fn predict_linear(model: &LinearModel, d: &Dataset) -> Result<Vec<f64>> {
    if model.covariate_count() != d.p() {
        return Err(Error::DimensionMismatch { expected: model.covariate_count(), got: d.p() });
    }
    let covs = d.covariates();
    let mut out = vec![0.0; d.n()];
    for (i, slot) in out.iter_mut().enumerate() {
        let row = covs.row(i);
        let mut acc = model.coefficients[0];
        for (x, c) in row.iter().zip(&model.coefficients[1..]) {
            acc += x * c;
        }
        *slot = acc;
    }
    Ok(out)
}
