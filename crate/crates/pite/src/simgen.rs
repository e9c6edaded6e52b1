//! Synthetic two-arm trial generators.
//!
//! Two families are provided. [`generate_null`] draws trials with a constant
//! treatment effect — any spread in estimated effects is pure chance, so it
//! probes the test's type I error. [`generate_als`] mimics a published ALS
//! trial fit: seven covariates with the trial's moments, a prognostic base
//! signal from the trial's control-arm coefficients, and a heterogeneous
//! treatment effect δᵀX̃ whose variance is allocated across covariates by an
//! [`EffectSpread`] condition and scaled by [`calibrate_effect_size`] to hit
//! a target effect size. The ALS generator returns the true per-individual
//! effects alongside the data so oracle checks never have to re-derive them.
//!
//! Everything is deterministic in the design's seed; distinct draw stages use
//! distinct child streams so adding, say, nuisance columns never perturbs the
//! core covariate draws.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::data::{permute_labels, CovariateKind, Dataset};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::SeedStream;

/// Monte Carlo draws behind one effect-size calibration.
pub const CALIBRATION_DRAWS: usize = 200_000;

// Child-stream indices under a design's root seed. Keeping the stages on
// separate streams means changing one stage's consumption (e.g. more
// nuisance columns) cannot shift another stage's draws.
const STAGE_CALIBRATION: u64 = 0;
const STAGE_COVARIATES: u64 = 1;
const STAGE_NOISE: u64 = 2;
const STAGE_ASSIGNMENT: u64 = 3;
const STAGE_NUISANCE: u64 = 4;

/// Fixed constants of the generators: the null design's prognostic
/// coefficients and the ALS trial's published covariate moments and
/// per-arm regression coefficients.
///
/// Covariate order everywhere: respiratory rate, systolic blood pressure,
/// age (continuous); delta flag, limb-only onset, male, riluzole use
/// (binary).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConstants {
    /// Effects of the null design's five prognostic covariates
    /// (three standard normal, then two Bernoulli(½)).
    pub null_prognostic_betas: [f64; 5],
    /// (mean, SD) of the three continuous ALS covariates.
    pub als_continuous_moments: [(f64, f64); 3],
    /// Prevalence of the four binary ALS covariates.
    pub als_binary_probs: [f64; 4],
    /// Control-arm regression intercept.
    pub als_base_intercept: f64,
    /// Control-arm coefficients of the seven covariates; these form the
    /// prognostic base of the ALS generator's outcome.
    pub als_base_betas: [f64; 7],
    /// Treated-arm coefficients of the same seven covariates; only their
    /// differences from the control coefficients are used, as the signs of
    /// the heterogeneity directions.
    pub als_treated_betas: [f64; 7],
}

impl Default for GeneratorConstants {
    fn default() -> Self {
        GeneratorConstants {
            null_prognostic_betas: [0.406, -0.239, 0.703, -0.090, -0.299],
            als_continuous_moments: [(17.19, 3.27), (131.88, 16.63), (54.70, 11.35)],
            als_binary_probs: [0.0320, 0.6708, 0.6351, 0.3821],
            als_base_intercept: -2.88826,
            als_base_betas: [0.01067, -0.00113, -0.00327, 0.17810, 0.08838, -0.03439, -0.22549],
            als_treated_betas: [-0.00099, 0.00110, 0.00130, 0.01969, -0.08336, 0.00712, -0.07150],
        }
    }
}

/// Column names of the seven ALS covariates, in generator order.
pub const ALS_COVARIATE_NAMES: [&str; 7] =
    ["respiratory_rate", "systolic_bp", "age", "delta_flag", "limb_only", "male", "riluzole"];

impl GeneratorConstants {
    /// Population mean of each ALS covariate.
    pub fn covariate_means(&self) -> [f64; 7] {
        let mut means = [0.0; 7];
        for (k, (mean, _)) in self.als_continuous_moments.iter().enumerate() {
            means[k] = *mean;
        }
        for (k, p) in self.als_binary_probs.iter().enumerate() {
            means[3 + k] = *p;
        }
        means
    }

    /// Population variance of each ALS covariate (sd² or p(1−p)).
    pub fn covariate_variances(&self) -> [f64; 7] {
        let mut vars = [0.0; 7];
        for (k, (_, sd)) in self.als_continuous_moments.iter().enumerate() {
            vars[k] = sd * sd;
        }
        for (k, p) in self.als_binary_probs.iter().enumerate() {
            vars[3 + k] = p * (1.0 - p);
        }
        vars
    }

    /// Sign of each heterogeneity direction: the sign of the treated-minus-
    /// control coefficient difference (+1 where the difference is zero).
    pub fn delta_signs(&self) -> [f64; 7] {
        let mut signs = [1.0; 7];
        for k in 0..7 {
            if self.als_treated_betas[k] - self.als_base_betas[k] < 0.0 {
                signs[k] = -1.0;
            }
        }
        signs
    }
}

/// How the heterogeneous effect's variance is split across the seven ALS
/// covariates.
#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffectSpread {
    /// Each covariate contributes 1/7 of the variance.
    Spread,
    /// The first continuous covariate (respiratory rate) contributes 90%,
    /// the other six share 10% equally.
    Cont90_10,
    Cont75_25,
    Cont50_50,
    Cont25_75,
    /// The first binary covariate (delta flag) contributes 90%.
    Bin90_10,
}

impl EffectSpread {
    pub const ALL: [EffectSpread; 6] = [
        EffectSpread::Spread,
        EffectSpread::Cont90_10,
        EffectSpread::Cont75_25,
        EffectSpread::Cont50_50,
        EffectSpread::Cont25_75,
        EffectSpread::Bin90_10,
    ];

    /// Target variance share of each covariate; sums to 1.
    pub fn shares(self) -> [f64; 7] {
        fn concentrated(index: usize, main: f64) -> [f64; 7] {
            let rest = (1.0 - main) / 6.0;
            let mut shares = [rest; 7];
            shares[index] = main;
            shares
        }
        match self {
            EffectSpread::Spread => [1.0 / 7.0; 7],
            EffectSpread::Cont90_10 => concentrated(0, 0.90),
            EffectSpread::Cont75_25 => concentrated(0, 0.75),
            EffectSpread::Cont50_50 => concentrated(0, 0.50),
            EffectSpread::Cont25_75 => concentrated(0, 0.25),
            EffectSpread::Bin90_10 => concentrated(3, 0.90),
        }
    }

    /// Short table label, e.g. `90/10 cont.`.
    pub fn label(self) -> &'static str {
        match self {
            EffectSpread::Spread => "spread",
            EffectSpread::Cont90_10 => "90/10 cont.",
            EffectSpread::Cont75_25 => "75/25 cont.",
            EffectSpread::Cont50_50 => "50/50 cont.",
            EffectSpread::Cont25_75 => "25/75 cont.",
            EffectSpread::Bin90_10 => "90/10 bin.",
        }
    }

    fn key(self) -> &'static str {
        match self {
            EffectSpread::Spread => "spread",
            EffectSpread::Cont90_10 => "cont90_10",
            EffectSpread::Cont75_25 => "cont75_25",
            EffectSpread::Cont50_50 => "cont50_50",
            EffectSpread::Cont25_75 => "cont25_75",
            EffectSpread::Bin90_10 => "bin90_10",
        }
    }
}

impl fmt::Display for EffectSpread {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for EffectSpread {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let canonical = s.to_ascii_lowercase().replace(['-', '/'], "_");
        for spread in EffectSpread::ALL {
            if canonical == spread.key() {
                return Ok(spread);
            }
        }
        Err(Error::InvalidConfig(format!(
            "unknown effect spread `{s}` (expected one of spread, cont90_10, cont75_25, \
             cont50_50, cont25_75, bin90_10)"
        )))
    }
}

/// Unit-scale heterogeneity direction: δ with Var(δᵀX) = 1 under independent
/// covariates, with each covariate's variance contribution δₖ²·Var(Xₖ)
/// matching the spread condition's share, and δₖ carrying the sign of the
/// treated-minus-control coefficient difference.
pub fn distribute_heterogeneity(
    spread: EffectSpread,
    constants: &GeneratorConstants,
) -> [f64; 7] {
    let shares = spread.shares();
    let variances = constants.covariate_variances();
    let signs = constants.delta_signs();
    let mut delta = [0.0; 7];
    for k in 0..7 {
        delta[k] = signs[k] * (shares[k] / variances[k]).sqrt();
    }
    // Exact unit normalization (the shares sum to 1 only up to rounding).
    let total: f64 = (0..7).map(|k| delta[k] * delta[k] * variances[k]).sum();
    let norm = total.sqrt();
    for d in &mut delta {
        *d /= norm;
    }
    delta
}

/// A symmetric positive-definite correlation matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    dim: usize,
    values: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != dim * dim {
            return Err(Error::InvalidConfig(format!(
                "correlation matrix needs {}×{} = {} entries, got {}",
                dim,
                dim,
                dim * dim,
                values.len()
            )));
        }
        let m = CorrelationMatrix { dim, values };
        for i in 0..dim {
            if m.get(i, i) != 1.0 {
                return Err(Error::InvalidConfig("correlation diagonal must be 1".into()));
            }
            for j in 0..i {
                let v = m.get(i, j);
                if v != m.get(j, i) || !v.is_finite() || v.abs() > 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "correlation entry ({i}, {j}) is not a symmetric value in [−1, 1]"
                    )));
                }
            }
        }
        m.cholesky()?; // positive definiteness
        Ok(m)
    }

    pub fn identity(dim: usize) -> Self {
        let mut values = vec![0.0; dim * dim];
        for i in 0..dim {
            values[i * dim + i] = 1.0;
        }
        CorrelationMatrix { dim, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.dim + j]
    }

    /// Lower-triangular Cholesky factor L with LLᵀ = R, row-major.
    pub fn cholesky(&self) -> Result<Vec<f64>> {
        let n = self.dim;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut acc = self.get(i, j);
                for k in 0..j {
                    acc -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if acc <= 0.0 {
                        return Err(Error::InvalidConfig(
                            "correlation matrix is not positive definite".into(),
                        ));
                    }
                    l[i * n + j] = acc.sqrt();
                } else {
                    l[i * n + j] = acc / l[j * n + j];
                }
            }
        }
        Ok(l)
    }
}

/// Constant-effect (null) trial design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullDesign {
    /// Total sample size; ⌊n/2⌋ individuals are treated.
    pub n: usize,
    /// The uniform treatment effect added to every treated outcome.
    #[serde(default)]
    pub ate: f64,
    /// Standard-normal nuisance covariates with zero outcome coefficients.
    #[serde(default)]
    pub n_nuisance_cont: usize,
    /// Bernoulli(½) nuisance covariates with zero outcome coefficients.
    #[serde(default)]
    pub n_nuisance_bin: usize,
    /// Residual noise standard deviation.
    #[serde(default = "default_residual_sd")]
    pub residual_sd: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_residual_sd() -> f64 {
    1.0
}

impl NullDesign {
    pub fn new(n: usize, seed: u64) -> Self {
        NullDesign { n, ate: 0.0, n_nuisance_cont: 0, n_nuisance_bin: 0, residual_sd: 1.0, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 20 {
            return Err(Error::InvalidConfig(format!(
                "null design needs n ≥ 20, got {}",
                self.n
            )));
        }
        if !(self.residual_sd > 0.0) || !self.residual_sd.is_finite() {
            return Err(Error::InvalidConfig("residual_sd must be a positive real".into()));
        }
        if !self.ate.is_finite() {
            return Err(Error::InvalidConfig("ate must be finite".into()));
        }
        Ok(())
    }
}

/// ALS-mimicking heterogeneous trial design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlsDesign {
    /// Total sample size; arms are exactly equal, so n must be even.
    pub n: usize,
    /// Population PITE effect size the heterogeneous effect is scaled to.
    /// Zero collapses the design to a constant-effect trial.
    pub target_effect_size: f64,
    pub spread: EffectSpread,
    /// Nuisance covariates appended with zero coefficients, split half
    /// continuous and half binary (odd counts give the extra to continuous).
    #[serde(default)]
    pub n_nuisance: usize,
    #[serde(default = "default_residual_sd")]
    pub residual_sd: f64,
    /// Constant effect added on top of the heterogeneous part; zero by
    /// default so the outcome difference is pure heterogeneity.
    #[serde(default)]
    pub ate: f64,
    /// Optional 7×7 covariate correlation, applied through a Gaussian
    /// copula; independent covariates when absent.
    #[serde(default)]
    pub correlation: Option<CorrelationMatrix>,
    #[serde(default)]
    pub seed: u64,
}

impl AlsDesign {
    pub fn new(n: usize, target_effect_size: f64, spread: EffectSpread, seed: u64) -> Self {
        AlsDesign {
            n,
            target_effect_size,
            spread,
            n_nuisance: 0,
            residual_sd: 1.0,
            ate: 0.0,
            correlation: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 4 || self.n % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "ALS design needs an even n ≥ 4, got {}",
                self.n
            )));
        }
        if !(self.target_effect_size >= 0.0) || !self.target_effect_size.is_finite() {
            return Err(Error::InvalidConfig(
                "target_effect_size must be a non-negative real".into(),
            ));
        }
        if !(self.residual_sd > 0.0) || !self.residual_sd.is_finite() {
            return Err(Error::InvalidConfig("residual_sd must be a positive real".into()));
        }
        if !self.ate.is_finite() {
            return Err(Error::InvalidConfig("ate must be finite".into()));
        }
        if let Some(corr) = &self.correlation {
            if corr.dim() != 7 {
                return Err(Error::InvalidConfig(format!(
                    "correlation matrix must be 7×7, got {0}×{0}",
                    corr.dim()
                )));
            }
            corr.cholesky()?;
        }
        Ok(())
    }

    /// Nuisance column split: (continuous, binary).
    pub fn nuisance_split(&self) -> (usize, usize) {
        (self.n_nuisance - self.n_nuisance / 2, self.n_nuisance / 2)
    }
}

/// Result of one effect-size calibration, at the population level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Multiplier applied to the unit-scale δ.
    pub scale: f64,
    /// Population effect size achieved at `scale` (equals the target up to
    /// root-search and Monte Carlo tolerance).
    pub effect_size: f64,
    /// Population pooled outcome SD at `scale`.
    pub pooled_sd: f64,
    /// Population mean |δᵀX̃| at `scale`.
    pub mean_abs_effect: f64,
}

/// Scale the unit heterogeneity direction so the population PITE effect size
/// — E|c·δᵀX̃| over the pooled outcome SD, with X̃ the centered covariates —
/// hits the design's target.
///
/// The population moments (E|δᵀX̃|, the base signal's variance, and their
/// covariance) come from one seeded Monte Carlo sample of
/// [`CALIBRATION_DRAWS`] covariate draws; the scale then solves a
/// closed-form one-dimensional root problem on those moments.
pub fn calibrate_effect_size(
    delta_unit: &[f64; 7],
    design: &AlsDesign,
    constants: &GeneratorConstants,
) -> Result<([f64; 7], Calibration)> {
    design.validate()?;
    let mut sampler = AlsCovariateSampler::new(design, constants)?;
    let mut rng = SeedStream::root(design.seed).child(STAGE_CALIBRATION).rng();

    // Moments of t = δᵀX̃ (centered heterogeneity direction) and
    // b = βᵀX̃ (centered prognostic base).
    let mut sum_abs_t = 0.0;
    let mut sum_t2 = 0.0;
    let mut sum_b2 = 0.0;
    let mut sum_bt = 0.0;
    let mut row = [0.0; 7];
    let mut centered = [0.0; 7];
    for _ in 0..CALIBRATION_DRAWS {
        sampler.draw(&mut rng, &mut row, &mut centered);
        let mut t = 0.0;
        let mut b = 0.0;
        for k in 0..7 {
            t += delta_unit[k] * centered[k];
            b += constants.als_base_betas[k] * centered[k];
        }
        sum_abs_t += t.abs();
        sum_t2 += t * t;
        sum_b2 += b * b;
        sum_bt += b * t;
    }
    let m = CALIBRATION_DRAWS as f64;
    let mean_abs_t = sum_abs_t / m;
    let var_t = sum_t2 / m;
    let var_b = sum_b2 / m;
    let cov_bt = sum_bt / m;
    let res_var = design.residual_sd * design.residual_sd;

    // Equal arms: pooled variance = (σ_T²(c) + σ_C²)/2 with
    // σ_T²(c) = Var(b + c·t) + σ² and σ_C² = Var(b) + σ².
    let pooled_sd_at =
        move |c: f64| (var_b + 0.5 * c * c * var_t + c * cov_bt + res_var).sqrt();

    let scale = solve_scale(design.target_effect_size, mean_abs_t, pooled_sd_at)?;
    let pooled_sd = pooled_sd_at(scale);
    let calibration = Calibration {
        scale,
        effect_size: scale * mean_abs_t / pooled_sd,
        pooled_sd,
        mean_abs_effect: scale * mean_abs_t,
    };
    let mut delta = *delta_unit;
    for d in &mut delta {
        *d *= calibration.scale;
    }
    Ok((delta, calibration))
}

/// Solve `c · mean_abs_unit / pooled_sd_at(c) = target` for c ≥ 0 by
/// bracketed bisection.
///
/// `mean_abs_unit` is E|δᵀX̃| at unit scale and `pooled_sd_at` maps a scale
/// to the pooled outcome SD it induces. Fails when the target exceeds the
/// largest reachable effect size.
pub fn solve_scale(
    target: f64,
    mean_abs_unit: f64,
    pooled_sd_at: impl Fn(f64) -> f64,
) -> Result<f64> {
    if target == 0.0 {
        return Ok(0.0);
    }
    if !(mean_abs_unit > 0.0) {
        return Err(Error::CalibrationFailure(
            "heterogeneity direction has zero mean absolute effect; no scale can reach a \
             positive target"
                .into(),
        ));
    }
    let effect_at = |c: f64| c * mean_abs_unit / pooled_sd_at(c);
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut tries = 0;
    while effect_at(hi) < target {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 60 {
            return Err(Error::CalibrationFailure(format!(
                "target effect size {target} is unreachable; the achievable ceiling is about \
                 {:.4}",
                effect_at(hi)
            )));
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if effect_at(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Ground truth accompanying an ALS-design dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlsTruth {
    /// Scaled heterogeneity coefficients over the seven covariates.
    pub delta: [f64; 7],
    /// True treatment effect of each generated individual
    /// (`ate + δᵀX̃ᵢ`), in row order.
    pub true_effect: Vec<f64>,
    pub calibration: Calibration,
}

/// Draws one individual's seven ALS covariates, through a Gaussian copula
/// when a correlation matrix is configured.
struct AlsCovariateSampler<'a> {
    constants: &'a GeneratorConstants,
    /// Lower Cholesky factor of the correlation; `None` for independence.
    chol: Option<Vec<f64>>,
    /// Standard-normal quantiles of the binary prevalences.
    thresholds: [f64; 4],
    z: [f64; 7],
    w: [f64; 7],
}

impl<'a> AlsCovariateSampler<'a> {
    fn new(design: &AlsDesign, constants: &'a GeneratorConstants) -> Result<Self> {
        let chol = match &design.correlation {
            Some(corr) => Some(corr.cholesky()?),
            None => None,
        };
        let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
        let mut thresholds = [0.0; 4];
        for (k, p) in constants.als_binary_probs.iter().enumerate() {
            thresholds[k] = normal.inverse_cdf(*p);
        }
        Ok(AlsCovariateSampler { constants, chol, thresholds, z: [0.0; 7], w: [0.0; 7] })
    }

    /// Fill `row` with covariate values and `centered` with the values minus
    /// their population means.
    fn draw<R: Rng>(&mut self, rng: &mut R, row: &mut [f64; 7], centered: &mut [f64; 7]) {
        for z in &mut self.z {
            *z = rng.sample(StandardNormal);
        }
        match &self.chol {
            Some(l) => {
                for i in 0..7 {
                    let mut acc = 0.0;
                    for k in 0..=i {
                        acc += l[i * 7 + k] * self.z[k];
                    }
                    self.w[i] = acc;
                }
            }
            None => self.w = self.z,
        }
        for (k, (mean, sd)) in self.constants.als_continuous_moments.iter().enumerate() {
            centered[k] = sd * self.w[k];
            row[k] = mean + centered[k];
        }
        for k in 0..4 {
            let p = self.constants.als_binary_probs[k];
            let value = f64::from(self.w[3 + k] <= self.thresholds[k]);
            row[3 + k] = value;
            centered[3 + k] = value - p;
        }
    }
}

/// Generate a constant-effect trial.
pub fn generate_null(design: &NullDesign) -> Result<Dataset> {
    design.validate()?;
    let constants = GeneratorConstants::default();
    let root = SeedStream::root(design.seed);
    let n = design.n;
    let p = 5 + design.n_nuisance_cont + design.n_nuisance_bin;

    let mut covariates = Matrix::zeros(n, p);
    let mut base = vec![0.0; n];
    let mut rng = root.child(STAGE_COVARIATES).rng();
    for i in 0..n {
        let mut signal = 0.0;
        for k in 0..3 {
            let x: f64 = rng.sample(StandardNormal);
            covariates.set(i, k, x);
            signal += constants.null_prognostic_betas[k] * x;
        }
        for k in 3..5 {
            let x = f64::from(rng.random_bool(0.5));
            covariates.set(i, k, x);
            signal += constants.null_prognostic_betas[k] * x;
        }
        base[i] = signal;
    }

    fill_nuisance(
        &mut covariates,
        5,
        design.n_nuisance_cont,
        design.n_nuisance_bin,
        &mut root.child(STAGE_NUISANCE).rng(),
    );

    let treatment = draw_assignment(n, n / 2, root.child(STAGE_ASSIGNMENT));

    let noise = Normal::new(0.0, design.residual_sd)
        .map_err(|e| Error::InvalidConfig(format!("residual noise: {e}")))?;
    let mut noise_rng = root.child(STAGE_NOISE).rng();
    let outcome: Vec<f64> = (0..n)
        .map(|i| base[i] + design.ate * f64::from(treatment[i]) + noise.sample(&mut noise_rng))
        .collect();

    let mut names = Vec::with_capacity(p);
    let mut kinds = Vec::with_capacity(p);
    for k in 1..=3 {
        names.push(format!("prog_cont_{k}"));
        kinds.push(CovariateKind::Continuous);
    }
    for k in 1..=2 {
        names.push(format!("prog_bin_{k}"));
        kinds.push(CovariateKind::Binary);
    }
    push_nuisance_names(&mut names, &mut kinds, design.n_nuisance_cont, design.n_nuisance_bin);

    Dataset::new(outcome, treatment, covariates, names, kinds)
}

/// Generate an ALS-mimicking heterogeneous trial together with its ground
/// truth.
pub fn generate_als(design: &AlsDesign) -> Result<(Dataset, AlsTruth)> {
    design.validate()?;
    let constants = GeneratorConstants::default();
    let delta_unit = distribute_heterogeneity(design.spread, &constants);
    let (delta, calibration) = calibrate_effect_size(&delta_unit, design, &constants)?;

    let root = SeedStream::root(design.seed);
    let n = design.n;
    let (nuis_cont, nuis_bin) = design.nuisance_split();
    let p = 7 + design.n_nuisance;

    let mut covariates = Matrix::zeros(n, p);
    let mut base = vec![0.0; n];
    let mut true_effect = vec![0.0; n];
    let mut sampler = AlsCovariateSampler::new(design, &constants)?;
    let mut rng = root.child(STAGE_COVARIATES).rng();
    let mut row = [0.0; 7];
    let mut centered = [0.0; 7];
    for i in 0..n {
        sampler.draw(&mut rng, &mut row, &mut centered);
        let mut b = constants.als_base_intercept;
        let mut t = 0.0;
        for k in 0..7 {
            covariates.set(i, k, row[k]);
            b += constants.als_base_betas[k] * row[k];
            t += delta[k] * centered[k];
        }
        base[i] = b;
        true_effect[i] = design.ate + t;
    }

    fill_nuisance(&mut covariates, 7, nuis_cont, nuis_bin, &mut root.child(STAGE_NUISANCE).rng());

    let treatment = draw_assignment(n, n / 2, root.child(STAGE_ASSIGNMENT));

    let noise = Normal::new(0.0, design.residual_sd)
        .map_err(|e| Error::InvalidConfig(format!("residual noise: {e}")))?;
    let mut noise_rng = root.child(STAGE_NOISE).rng();
    let outcome: Vec<f64> = (0..n)
        .map(|i| {
            base[i] + f64::from(treatment[i]) * true_effect[i] + noise.sample(&mut noise_rng)
        })
        .collect();

    let mut names: Vec<String> = ALS_COVARIATE_NAMES.iter().map(|s| s.to_string()).collect();
    let mut kinds = vec![
        CovariateKind::Continuous,
        CovariateKind::Continuous,
        CovariateKind::Continuous,
        CovariateKind::Binary,
        CovariateKind::Binary,
        CovariateKind::Binary,
        CovariateKind::Binary,
    ];
    push_nuisance_names(&mut names, &mut kinds, nuis_cont, nuis_bin);

    let dataset = Dataset::new(outcome, treatment, covariates, names, kinds)?;
    Ok((dataset, AlsTruth { delta, true_effect, calibration }))
}

/// Exactly `treated` ones placed uniformly at random among `n` labels.
fn draw_assignment(n: usize, treated: usize, stream: SeedStream) -> Vec<u8> {
    let mut labels = vec![0u8; n];
    for label in labels.iter_mut().take(treated) {
        *label = 1;
    }
    permute_labels(&mut labels, &mut stream.rng());
    labels
}

/// Standard-normal then Bernoulli(½) nuisance columns, drawn column by
/// column starting at `first_col`.
fn fill_nuisance<R: Rng>(
    covariates: &mut Matrix,
    first_col: usize,
    n_cont: usize,
    n_bin: usize,
    rng: &mut R,
) {
    let n = covariates.rows();
    for c in 0..n_cont {
        for i in 0..n {
            covariates.set(i, first_col + c, rng.sample(StandardNormal));
        }
    }
    for c in 0..n_bin {
        for i in 0..n {
            covariates.set(i, first_col + n_cont + c, f64::from(rng.random_bool(0.5)));
        }
    }
}

fn push_nuisance_names(
    names: &mut Vec<String>,
    kinds: &mut Vec<CovariateKind>,
    n_cont: usize,
    n_bin: usize,
) {
    for k in 1..=n_cont {
        names.push(format!("nuis_cont_{k}"));
        kinds.push(CovariateKind::Continuous);
    }
    for k in 1..=n_bin {
        names.push(format!("nuis_bin_{k}"));
        kinds.push(CovariateKind::Binary);
    }
}
