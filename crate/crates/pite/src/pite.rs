//! Predicted individual treatment effects and summaries of their spread.
//!
//! The estimate fits one predictor per arm and scores every individual with
//! both models; the PITE is the difference (treated-model prediction minus
//! control-model prediction). Its standard deviation is the heterogeneity
//! statistic tested in [`crate::perm`].

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{householder_lstsq_full, xtx_inverse_diagonal};
use crate::predict::{fit_predictor, PredictorSpec};
use crate::rng::SeedStream;

/// PITE estimates for one dataset, with the spread summaries reported by the
/// command-line tool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiteResult {
    /// Per-individual predicted treatment effect, in row order.
    pub pite: Vec<f64>,
    /// Sample standard deviation of the PITEs (n−1 denominator).
    pub sd: f64,
    /// Mean PITE.
    pub mean: f64,
    /// Mean |PITE| divided by the pooled outcome standard deviation.
    pub effect_size: f64,
    /// The model family that produced the estimates.
    pub predictor: PredictorSpec,
}

/// Fit both arm models and score every individual.
///
/// `stream` seeds any model randomness: the treated-arm fit uses child 0 and
/// the control-arm fit child 1, so results are reproducible and independent
/// of evaluation order.
pub fn estimate_pite(d: &Dataset, spec: &PredictorSpec, stream: SeedStream) -> Result<PiteResult> {
    let pite = pite_vector(d, spec, stream)?;
    let sd = sd_of_pite(&pite)?;
    let mean = pite.iter().sum::<f64>() / pite.len() as f64;
    let effect_size = pite_effect_size(&pite, pooled_outcome_sd(d)?)?;
    Ok(PiteResult { pite, sd, mean, effect_size, predictor: spec.clone() })
}

/// The PITE vector alone, without summaries; the permutation loop uses this.
pub fn pite_vector(d: &Dataset, spec: &PredictorSpec, stream: SeedStream) -> Result<Vec<f64>> {
    spec.validate()?;
    let (treated, control) = d.split_arms();
    let model_t = fit_predictor(d, &treated, spec, stream.child(0))?;
    let model_c = fit_predictor(d, &control, spec, stream.child(1))?;
    let pred_t = model_t.predict(d)?;
    let pred_c = model_c.predict(d)?;
    Ok(pred_t.iter().zip(&pred_c).map(|(t, c)| t - c).collect())
}

/// Sample standard deviation with the n−1 denominator.
pub fn sd_of_pite(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewValues { got: values.len(), required: 2 });
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    Ok((ss / (n - 1.0)).sqrt())
}

/// Pooled outcome standard deviation across the two arms:
/// √[(Σ_T (y−ȳ_T)² + Σ_C (y−ȳ_C)²) / (N_T + N_C − 1)].
pub fn pooled_outcome_sd(d: &Dataset) -> Result<f64> {
    let (treated, control) = d.split_arms();
    let y = d.outcome();
    let mut total_ss = 0.0;
    for view in [&treated, &control] {
        let m = view.len() as f64;
        let mean = view.indices.iter().map(|&i| y[i]).sum::<f64>() / m;
        total_ss += view.indices.iter().map(|&i| (y[i] - mean) * (y[i] - mean)).sum::<f64>();
    }
    Ok((total_ss / (d.n() as f64 - 1.0)).sqrt())
}

/// PITE effect size: mean |PITE| over the pooled outcome standard deviation.
pub fn pite_effect_size(pite: &[f64], pooled_sd: f64) -> Result<f64> {
    if pite.is_empty() {
        return Err(Error::TooFewValues { got: 0, required: 1 });
    }
    if pooled_sd <= 0.0 {
        return Err(Error::ZeroPooledSd);
    }
    let mean_abs = pite.iter().map(|v| v.abs()).sum::<f64>() / pite.len() as f64;
    Ok(mean_abs / pooled_sd)
}

/// One row of the interaction screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenTerm {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    pub p_value: f64,
}

/// Classical covariate-by-treatment interaction screen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenResult {
    /// Main treatment effect in the pooled interaction model.
    pub treatment: ScreenTerm,
    /// One term per covariate, testing its interaction with treatment.
    pub interactions: Vec<ScreenTerm>,
    pub residual_df: usize,
    pub residual_sd: f64,
}

/// Fit the pooled linear model `y ~ 1 + X + T + X·T` and report the treatment
/// and interaction coefficients with classical standard errors and two-sided
/// t-test p-values.
pub fn screen_interactions(d: &Dataset) -> Result<ScreenResult> {
    let n = d.n();
    let p = d.p();
    let k = 2 * p + 2;
    if n <= k {
        return Err(Error::TooFewValues { got: n, required: k + 1 });
    }

    let covs = d.covariates();
    let trt = d.treatment();
    let mut a = vec![0.0; n * k];
    for i in 0..n {
        let t = trt[i] as f64;
        a[i] = 1.0;
        let row = covs.row(i);
        for j in 0..p {
            a[(1 + j) * n + i] = row[j];
            a[(p + 2 + j) * n + i] = row[j] * t;
        }
        a[(p + 1) * n + i] = t;
    }
    let ls = householder_lstsq_full(a, n, k, d.outcome().to_vec())?;

    let df = n - k;
    let sigma2 = ls.rss / df as f64;
    let diag = xtx_inverse_diagonal(&ls.r_factor, k);
    let dist = StudentsT::new(0.0, 1.0, df as f64)
        .expect("positive degrees of freedom");
    let term = |name: String, j: usize| {
        let estimate = ls.coefficients[j];
        let std_error = (sigma2 * diag[j]).sqrt();
        let t_value = estimate / std_error;
        let p_value = 2.0 * dist.cdf(-t_value.abs());
        ScreenTerm { name, estimate, std_error, t_value, p_value }
    };

    let treatment = term("treatment".to_string(), p + 1);
    let interactions = d
        .covariate_names()
        .iter()
        .enumerate()
        .map(|(j, name)| term(format!("{name}:treatment"), p + 2 + j))
        .collect();
    Ok(ScreenResult { treatment, interactions, residual_df: df, residual_sd: sigma2.sqrt() })
}
