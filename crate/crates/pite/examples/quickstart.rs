//! Generate a synthetic trial with real treatment-effect heterogeneity,
//! then run the permutation test against it.
//!
//!     cargo run --release --example quickstart

use pite::{
    generate_als, run_permutation_test, AlsDesign, EffectSpread, PermutationConfig, PredictorSpec,
};

fn main() -> pite::Result<()> {
    // A 1,000-subject two-arm trial whose treatment effect varies across
    // individuals, calibrated to a population effect size of 0.38.
    let design = AlsDesign {
        n: 1000,
        target_effect_size: 0.38,
        spread: EffectSpread::Spread,
        n_nuisance: 0,
        residual_sd: 1.0,
        ate: 0.0,
        correlation: None,
        seed: 7,
    };
    let (data, truth) = generate_als(&design)?;

    let config = PermutationConfig { n_permutations: 200, alpha: 0.05, seed: 1 };
    let report = run_permutation_test(&data, &PredictorSpec::Linear, &config)?;

    println!("observed SD of the predicted effects: {:.4}", report.observed.sd);
    println!(
        "chance SD range over {} permutations: [{:.4}, {:.4}]",
        report.permuted_sds.len(),
        report.chance_sd.min,
        report.chance_sd.max
    );
    println!("p-value {:.4}, reject at alpha {}: {}", report.p_value, report.alpha, report.reject);
    println!("calibrated heterogeneity scale: {:.4}", truth.calibration.scale);
    Ok(())
}
