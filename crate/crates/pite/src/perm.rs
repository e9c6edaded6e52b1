//! Permutation test for treatment-effect heterogeneity.
//!
//! Under the null of a homogeneous effect, the spread of the PITEs is pure
//! overfitting noise, and shuffling the treatment labels leaves its
//! distribution unchanged. The test refits the whole two-model pipeline on
//! label-shuffled copies of the data and asks how often chance alone produces
//! a PITE standard deviation above the observed one.
//!
//! The p-value is the strict exceedance fraction `#{σᵖ > σ̂} / P` with no
//! smoothing, and the null is rejected when it falls below α.

use itertools::Itertools;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::pite::{estimate_pite, pite_vector, sd_of_pite, PiteResult};
use crate::predict::PredictorSpec;
use crate::rng::SeedStream;

/// Largest number of treatment arrangements [`exhaustive_null_distribution`]
/// will enumerate.
pub const EXHAUSTIVE_LIMIT: u64 = 10_000;

/// Settings for one permutation test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PermutationConfig {
    /// Number of label shuffles, P.
    pub n_permutations: usize,
    /// Rejection threshold for the p-value.
    pub alpha: f64,
    /// Master seed; fixes the shuffles and any model randomness.
    pub seed: u64,
}

impl Default for PermutationConfig {
    fn default() -> Self {
        PermutationConfig { n_permutations: 1000, alpha: 0.05, seed: 0 }
    }
}

impl PermutationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_permutations == 0 {
            return Err(Error::InvalidConfig("need at least one permutation".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie strictly between 0 and 1, got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Location summary of the chance (permutation) SD distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdSummary {
    pub min: f64,
    pub median: f64,
    pub mean: f64,
    pub max: f64,
}

impl SdSummary {
    pub fn from_values(values: &[f64]) -> Result<SdSummary> {
        if values.is_empty() {
            return Err(Error::TooFewValues { got: 0, required: 1 });
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Ok(SdSummary {
            min: sorted[0],
            median,
            mean: sorted.iter().sum::<f64>() / n as f64,
            max: sorted[n - 1],
        })
    }
}

/// Everything produced by one permutation test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationReport {
    /// The PITE fit on the observed labels.
    pub observed: PiteResult,
    /// Chance SDs, one per permutation, in permutation order.
    pub permuted_sds: Vec<f64>,
    /// Strict exceedance fraction `#{σᵖ > σ̂} / P`.
    pub p_value: f64,
    pub alpha: f64,
    /// True when `p_value < alpha`.
    pub reject: bool,
    pub seed: u64,
    /// Summary of `permuted_sds`.
    pub chance_sd: SdSummary,
}

impl PermutationReport {
    pub fn n_permutations(&self) -> usize {
        self.permuted_sds.len()
    }
}

/// Run the full permutation test.
///
/// Seeding: with master stream `S = root(seed)`, the observed fit uses
/// `S.child(0)` and permutation `p` (1-based) uses `S.child(p)`, splitting it
/// into child 0 for the label shuffle and child 1 for the refit. Every
/// permutation therefore has a pre-assigned stream and the result does not
/// depend on how the work is scheduled across threads.
///
/// A failed refit (for example a rank-deficient permuted arm) aborts the test
/// with [`Error::PermutationFitFailure`] naming the lowest failing
/// permutation index.
pub fn run_permutation_test(
    d: &Dataset,
    spec: &PredictorSpec,
    config: &PermutationConfig,
) -> Result<PermutationReport> {
    config.validate()?;
    spec.validate()?;
    let root = SeedStream::root(config.seed);
    let observed = estimate_pite(d, spec, root.child(0))?;

    let outcomes: Vec<Result<f64>> = (1..=config.n_permutations)
        .into_par_iter()
        .map(|p| {
            let stream = root.child(p as u64);
            let mut rng = stream.child(0).rng();
            let shuffled = d.permute_treatment(&mut rng);
            let pite = pite_vector(&shuffled, spec, stream.child(1))?;
            sd_of_pite(&pite)
        })
        .collect();

    let mut permuted_sds = Vec::with_capacity(config.n_permutations);
    for (offset, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(sd) => permuted_sds.push(sd),
            Err(source) => {
                return Err(Error::PermutationFitFailure {
                    index: offset + 1,
                    source: Box::new(source),
                })
            }
        }
    }

    let exceed = permuted_sds.iter().filter(|sd| **sd > observed.sd).count();
    let p_value = exceed as f64 / config.n_permutations as f64;
    let reject = p_value < config.alpha;
    let chance_sd = SdSummary::from_values(&permuted_sds)?;
    Ok(PermutationReport {
        observed,
        permuted_sds,
        p_value,
        alpha: config.alpha,
        reject,
        seed: config.seed,
        chance_sd,
    })
}

/// The complete null distribution of the PITE SD over every arrangement of
/// the observed arm sizes, in lexicographic order of treated index sets.
///
/// Refuses designs with more than [`EXHAUSTIVE_LIMIT`] arrangements via
/// [`Error::TooLarge`]. `seed` feeds model randomness (arrangement `i` uses
/// stream `root(seed).child(i)`); linear fits ignore it.
pub fn exhaustive_null_distribution(
    d: &Dataset,
    spec: &PredictorSpec,
    seed: u64,
) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = d.n();
    let n_treated = d.treatment().iter().filter(|t| **t == 1).count();
    let total = binomial_capped(n as u64, n_treated as u64, EXHAUSTIVE_LIMIT as u128);
    if total > EXHAUSTIVE_LIMIT as u128 {
        return Err(Error::TooLarge { n, treated: n_treated, limit: EXHAUSTIVE_LIMIT });
    }

    let root = SeedStream::root(seed);
    let arrangements: Vec<Vec<usize>> = (0..n).combinations(n_treated).collect();
    let outcomes: Vec<Result<f64>> = arrangements
        .into_par_iter()
        .enumerate()
        .map(|(idx, treated_rows)| {
            let mut labels = vec![0u8; n];
            for row in treated_rows {
                labels[row] = 1;
            }
            let relabeled = d.with_treatment(labels)?;
            let pite = pite_vector(&relabeled, spec, root.child(idx as u64))?;
            sd_of_pite(&pite)
        })
        .collect();

    let mut sds = Vec::with_capacity(outcomes.len());
    for (idx, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(sd) => sds.push(sd),
            Err(source) => {
                return Err(Error::PermutationFitFailure { index: idx, source: Box::new(source) })
            }
        }
    }
    Ok(sds)
}

/// C(n, k), saturating just above `cap` so callers can test the limit without
/// overflow.
fn binomial_capped(n: u64, k: u64, cap: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Multiplicative formula; each intermediate is an exact binomial.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > cap {
            return cap + 1;
        }
    }
    acc
}
