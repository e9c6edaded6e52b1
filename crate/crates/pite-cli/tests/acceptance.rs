//! Statistical acceptance gate for the whole pipeline.
//!
//! Every test pins a master seed, so each run is a deterministic replay.
//! The asserted bands are pre-registered operating characteristics of the
//! procedure — nominal 5% size for constant-effect designs, high power at
//! calibrated effect sizes — widened for the binomial noise of the pinned
//! replication counts. A band failure therefore means a real behavioral
//! change, not an unlucky draw.
//!
//! The suite runs in tens of minutes on one core; the heavy tests print
//! their realized rates with `--nocapture` for inspection.

use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pite::harness::{run_cell, Cell, CellDesign};
use pite::linalg::Matrix;
use pite::pite::pooled_outcome_sd;
use pite::simgen::{generate_als, AlsDesign, EffectSpread, NullDesign};
use pite::{
    estimate_pite, exhaustive_null_distribution, fit_predictor, run_permutation_test,
    CovariateKind, Dataset, ForestParams, PermutationConfig, PredictorSpec, SeedStream,
};

const ALPHA: f64 = 0.05;

fn linear_cell(design: CellDesign, n_permutations: usize, replications: usize) -> Cell {
    Cell { design, predictor: PredictorSpec::Linear, n_permutations, replications, alpha: ALPHA }
}

fn forest_cell(design: CellDesign, n_trees: usize, n_permutations: usize, replications: usize) -> Cell {
    Cell {
        design,
        predictor: PredictorSpec::Forest { params: ForestParams { n_trees, ..ForestParams::default() } },
        n_permutations,
        replications,
        alpha: ALPHA,
    }
}

fn null_design(n: usize, ate: f64) -> CellDesign {
    CellDesign::Null(NullDesign { ate, ..NullDesign::new(n, 0) })
}

fn als_design(n: usize, effect_size: f64, spread: EffectSpread, n_nuisance: usize) -> CellDesign {
    CellDesign::Als(AlsDesign { n_nuisance, ..AlsDesign::new(n, effect_size, spread, 0) })
}

/// Run one cell and return its realized rejection rate, printing it so a
/// `--nocapture` run documents the replay.
fn rejection_rate(master_seed: u64, index: usize, cell: &Cell) -> f64 {
    let result = run_cell(master_seed, index, cell).expect("cell must run to completion");
    println!(
        "cell {index} ({}): rejection rate {:.4} ± {:.4}",
        cell.describe(),
        result.rejection_rate,
        result.half_width
    );
    result.rejection_rate
}

// ---------------------------------------------------------------------------
// Size (type I error) of the permutation test
// ---------------------------------------------------------------------------

/// Under constant treatment effects the test should reject at close to the
/// nominal 5% across sample sizes, with or without a mean shift between arms.
/// 300 replications put the 95% half-width near ±0.025, hence the band.
#[test]
fn type1_error_stays_near_nominal_across_sample_sizes() {
    let master_seed = 113;
    let mut outside = Vec::new();
    let grid = [(100, 0.0), (100, 0.5), (250, 0.0), (250, 0.5), (500, 0.0), (500, 0.5)];
    for (index, (n, ate)) in grid.into_iter().enumerate() {
        let cell = linear_cell(null_design(n, ate), 300, 300);
        let rate = rejection_rate(master_seed, index, &cell);
        if !(0.03..=0.08).contains(&rate) {
            outside.push(format!("n={n} ate={ate}: rate {rate:.4}"));
        }
    }
    assert!(outside.is_empty(), "rejection rate outside [0.03, 0.08] for: {outside:?}");
}

/// Size should survive a covariate set dominated by noise: 75 continuous and
/// 35 binary nuisance columns on top of the 5 prognostic ones at n=500.
#[test]
fn type1_error_stays_near_nominal_with_many_nuisance_covariates() {
    let design = CellDesign::Null(NullDesign {
        n_nuisance_cont: 75,
        n_nuisance_bin: 35,
        ..NullDesign::new(500, 0)
    });
    let cell = linear_cell(design, 200, 200);
    let rate = rejection_rate(102, 0, &cell);
    assert!(
        (0.02..=0.09).contains(&rate),
        "rejection rate {rate:.4} outside [0.02, 0.09] with 110 nuisance covariates"
    );
}

// ---------------------------------------------------------------------------
// Invariance to a constant arm shift
// ---------------------------------------------------------------------------

/// Adding a constant treatment effect moves only the treated arm's intercept,
/// which the per-arm fits absorb, so the observed heterogeneity statistic is
/// unchanged to rounding on otherwise-identical data. The permuted refits see
/// shifted outcomes under remixed labels, so their p-values are compared at
/// the level of the rejection rate rather than bit for bit.
#[test]
fn constant_arm_shift_leaves_observed_statistic_unchanged() {
    let master_seed = 103;
    let replications = 150u64;
    let designs = |ate: f64| NullDesign { ate, ..NullDesign::new(250, 0) };
    let spec = PredictorSpec::Linear;

    let mut rejections = [0usize; 2];
    let mut max_rel_sd_gap = 0.0f64;
    for rep in 0..replications {
        let rep_stream = SeedStream::root(master_seed).child(0).child(rep);
        let generator_seed = rep_stream.child(0).key();
        let test_seed = rep_stream.child(1).key();
        let config = PermutationConfig { n_permutations: 200, alpha: ALPHA, seed: test_seed };

        let mut observed_sds = [0.0f64; 2];
        for (which, ate) in [0.0, 0.5].into_iter().enumerate() {
            let design = NullDesign { seed: generator_seed, ..designs(ate) };
            let dataset = pite::simgen::generate_null(&design).unwrap();
            let report = run_permutation_test(&dataset, &spec, &config).unwrap();
            observed_sds[which] = report.observed.sd;
            rejections[which] += report.reject as usize;
        }
        let rel_gap = (observed_sds[0] - observed_sds[1]).abs() / observed_sds[0].max(1e-3);
        max_rel_sd_gap = max_rel_sd_gap.max(rel_gap);
    }

    println!(
        "max relative observed-SD gap {max_rel_sd_gap:.3e}; rejections {} vs {} of {replications}",
        rejections[0], rejections[1]
    );
    assert!(
        max_rel_sd_gap <= 1e-9,
        "observed SD moved under a constant arm shift (max relative gap {max_rel_sd_gap:.3e})"
    );
    let rate_gap = (rejections[0] as f64 - rejections[1] as f64).abs() / replications as f64;
    assert!(
        rate_gap <= 0.06,
        "rejection rates diverged under a constant arm shift (gap {rate_gap:.4})"
    );
}

// ---------------------------------------------------------------------------
// Power at calibrated effect sizes
// ---------------------------------------------------------------------------

/// Moderate heterogeneity (population effect size 0.19 at n=1,000) separates
/// the three regimes that matter in practice: a signal spread evenly over the
/// seven covariates is detected most of the time when every fitted covariate
/// is real; fifty nuisance covariates collapse that same spread signal; and a
/// signal concentrated on the rare binary covariate — one large, precisely
/// estimable interaction — survives those fifty nuisance covariates almost
/// intact. Bands are centered on the pipeline's measured long-run rates
/// (0.788, 0.300, 0.908; 1,000/500/500 replications pooled over independent
/// master seeds, cross-checked against an independent implementation of the
/// same pipeline) with
/// margins for 200-replication binomial noise. The two trailing assertions
/// pin the regime ordering itself, which no amount of seed luck should bend.
#[test]
fn power_bands_hold_at_moderate_effect_size() {
    let master_seed = 104;
    let rate_at = |index: usize, design: CellDesign| {
        rejection_rate(master_seed, index, &linear_cell(design, 300, 200))
    };
    let spread_clean = rate_at(0, als_design(1000, 0.19, EffectSpread::Spread, 0));
    let spread_noisy = rate_at(1, als_design(1000, 0.19, EffectSpread::Spread, 50));
    let bin_noisy = rate_at(2, als_design(1000, 0.19, EffectSpread::Bin90_10, 50));

    let checks = [
        (spread_clean, 0.68, 0.90, "spread, 0 nuisance"),
        (spread_noisy, 0.16, 0.44, "spread, 50 nuisance"),
        (bin_noisy, 0.82, 1.0, "90/10 bin., 50 nuisance"),
    ];
    let mut outside = Vec::new();
    for (rate, lo, hi, label) in checks {
        if !(lo..=hi).contains(&rate) {
            outside.push(format!("{label}: rate {rate:.4} outside [{lo}, {hi}]"));
        }
    }
    assert!(outside.is_empty(), "power band failures: {outside:?}");

    assert!(
        spread_clean - spread_noisy >= 0.3,
        "nuisance covariates should collapse spread-signal power \
         (clean {spread_clean:.4} vs noisy {spread_noisy:.4})"
    );
    assert!(
        bin_noisy - spread_noisy >= 0.3,
        "a rare-binary signal should survive nuisance that kills a spread signal \
         (binary {bin_noisy:.4} vs spread {spread_noisy:.4})"
    );
}

/// Strong heterogeneity (population effect size 0.38 at n=1,000) should be
/// detected essentially always for every spread condition, with 0 or 20
/// nuisance covariates.
#[test]
fn power_is_near_one_at_strong_effect_size() {
    let master_seed = 105;
    let mut outside = Vec::new();
    let mut index = 0;
    for n_nuisance in [0usize, 20] {
        for spread in EffectSpread::ALL {
            let cell = linear_cell(als_design(1000, 0.38, spread, n_nuisance), 300, 100);
            let rate = rejection_rate(master_seed, index, &cell);
            if rate < 0.95 {
                outside.push(format!("{spread} with {n_nuisance} nuisance: power {rate:.4}"));
            }
            index += 1;
        }
    }
    assert!(outside.is_empty(), "power below 0.95 for: {outside:?}");
}

/// The forest predictor, at its documented tuning scaled down to 100 trees,
/// must both detect strong heterogeneity and hold its size on null data.
#[test]
fn forest_predictor_has_power_and_holds_its_size() {
    let power_cell = forest_cell(als_design(1000, 0.38, EffectSpread::Spread, 0), 100, 100, 25);
    let power = rejection_rate(106, 0, &power_cell);
    assert!(power >= 0.9, "forest power {power:.4} below 0.9 at strong heterogeneity");

    let size_cell = forest_cell(null_design(250, 0.0), 100, 150, 150);
    let size = rejection_rate(106, 1, &size_cell);
    assert!(
        (0.02..=0.09).contains(&size),
        "forest type-I rate {size:.4} outside [0.02, 0.09]"
    );
}

// ---------------------------------------------------------------------------
// Oracles: exhaustive enumeration, uniformity, least squares, calibration
// ---------------------------------------------------------------------------

/// Build a tiny random trial: continuous covariates, standard-ish outcomes,
/// balanced arms. Small enough that every label arrangement can be listed.
fn tiny_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize) -> Dataset {
    let outcome: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
    let treatment: Vec<u8> = (0..n).map(|i| u8::from(i < n / 2)).collect();
    let data: Vec<f64> = (0..n * p).map(|_| rng.random_range(-1.0..1.0)).collect();
    let names = (0..p).map(|j| format!("x{j}")).collect();
    let kinds = vec![CovariateKind::Continuous; p];
    Dataset::new(outcome, treatment, Matrix::new(n, p, data), names, kinds).unwrap()
}

/// On trials small enough to enumerate every treatment arrangement, the
/// Monte Carlo p-value at 50,000 permutations must agree with the exhaustive
/// p-value to within three binomial standard errors (exactly, when the
/// exhaustive p-value is zero).
#[test]
fn monte_carlo_p_values_match_exhaustive_enumeration() {
    let spec = PredictorSpec::Linear;
    let n_mc = 50_000usize;
    for case in 0u64..24 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + case);
        let (n, p) = if case % 2 == 0 { (6, 1) } else { (8, 1 + (case as usize / 2) % 2) };
        let dataset = tiny_dataset(&mut rng, n, p);

        let observed = estimate_pite(&dataset, &spec, SeedStream::root(case).child(0)).unwrap();
        let chance = exhaustive_null_distribution(&dataset, &spec, case).unwrap();
        let exceed = chance.iter().filter(|sd| **sd > observed.sd).count();
        let p_exhaustive = exceed as f64 / chance.len() as f64;

        let config = PermutationConfig { n_permutations: n_mc, alpha: ALPHA, seed: case };
        let p_mc = run_permutation_test(&dataset, &spec, &config).unwrap().p_value;

        let tolerance = 3.0 * (p_exhaustive * (1.0 - p_exhaustive) / n_mc as f64).sqrt();
        let gap = (p_mc - p_exhaustive).abs();
        println!(
            "case {case}: n={n} p={p}, exhaustive {p_exhaustive:.5} vs MC {p_mc:.5} \
             (tolerance {tolerance:.5})"
        );
        assert!(
            gap <= tolerance,
            "case {case}: MC p {p_mc} vs exhaustive {p_exhaustive}, gap {gap:.6} > {tolerance:.6}"
        );
    }
}

/// Under the null the permutation p-value should be (discretely) uniform;
/// 0.0728 is the 1% Kolmogorov–Smirnov critical value for 500 samples.
#[test]
fn null_p_values_are_uniform() {
    let master_seed = 108;
    let replications = 500u64;
    let spec = PredictorSpec::Linear;
    let mut p_values = Vec::with_capacity(replications as usize);
    for rep in 0..replications {
        let rep_stream = SeedStream::root(master_seed).child(0).child(rep);
        let design = NullDesign { seed: rep_stream.child(0).key(), ..NullDesign::new(250, 0) };
        let dataset = pite::simgen::generate_null(&design).unwrap();
        let config =
            PermutationConfig { n_permutations: 200, alpha: ALPHA, seed: rep_stream.child(1).key() };
        p_values.push(run_permutation_test(&dataset, &spec, &config).unwrap().p_value);
    }

    p_values.sort_by(f64::total_cmp);
    let n = p_values.len() as f64;
    let mut ks = 0.0f64;
    for (i, p) in p_values.iter().enumerate() {
        let above = ((i + 1) as f64 / n - p).abs();
        let below = (p - i as f64 / n).abs();
        ks = ks.max(above).max(below);
    }
    println!("KS statistic vs Uniform(0,1): {ks:.4} over {replications} replications");
    assert!(ks < 0.0728, "null p-values not uniform: KS {ks:.4} ≥ 0.0728");
}

/// Solve the normal equations (AᵀA)x = Aᵀy by Gaussian elimination with
/// partial pivoting — an implementation independent of the library's fit.
fn normal_equation_solve(rows: &[usize], d: &Dataset) -> Vec<f64> {
    let k = d.p() + 1;
    let design_row = |i: usize| -> Vec<f64> {
        let mut row = Vec::with_capacity(k);
        row.push(1.0);
        for j in 0..d.p() {
            row.push(d.covariates().get(i, j));
        }
        row
    };
    let mut gram = vec![0.0f64; k * k];
    let mut rhs = vec![0.0f64; k];
    for &i in rows {
        let row = design_row(i);
        for a in 0..k {
            rhs[a] += row[a] * d.outcome()[i];
            for b in 0..k {
                gram[a * k + b] += row[a] * row[b];
            }
        }
    }
    // Gaussian elimination with partial pivoting on [gram | rhs].
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|a, b| gram[a * k + col].abs().total_cmp(&gram[b * k + col].abs()))
            .unwrap();
        if pivot != col {
            for j in 0..k {
                gram.swap(col * k + j, pivot * k + j);
            }
            rhs.swap(col, pivot);
        }
        let diag = gram[col * k + col];
        assert!(diag.abs() > 1e-12, "singular normal equations in the oracle");
        for r in (col + 1)..k {
            let factor = gram[r * k + col] / diag;
            for j in col..k {
                gram[r * k + j] -= factor * gram[col * k + j];
            }
            rhs[r] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0f64; k];
    for col in (0..k).rev() {
        let mut value = rhs[col];
        for j in (col + 1)..k {
            value -= gram[col * k + j] * x[j];
        }
        x[col] = value / gram[col * k + col];
    }
    x
}

/// 1,000 random regression problems: the fitted coefficients must match an
/// independent normal-equations solve to 1e-6 in relative 2-norm.
#[test]
fn least_squares_fit_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.random_range(20..=120);
        let p = rng.random_range(1..=8);
        let beta: Vec<f64> = (0..=p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let data: Vec<f64> = (0..n * p).map(|_| rng.random_range(-2.0..2.0)).collect();
        let covariates = Matrix::new(n, p, data);
        let outcome: Vec<f64> = (0..n)
            .map(|i| {
                let mut y = beta[0] + 0.3 * rng.random_range(-1.0..1.0);
                for j in 0..p {
                    y += beta[j + 1] * covariates.get(i, j);
                }
                y
            })
            .collect();
        // Park two rows in the control arm so the dataset is a valid trial;
        // the fit under test runs on the treated arm's rows.
        let treatment: Vec<u8> = (0..n).map(|i| u8::from(i < n - 2)).collect();
        let names = (0..p).map(|j| format!("x{j}")).collect();
        let kinds = vec![CovariateKind::Continuous; p];
        let dataset = Dataset::new(outcome, treatment, covariates, names, kinds).unwrap();

        let (treated, _) = dataset.split_arms();
        let fitted = pite::predict::fit_linear(&dataset, &treated).unwrap();
        let reference = normal_equation_solve(&treated.indices, &dataset);

        let diff_norm: f64 = fitted
            .coefficients
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let ref_norm: f64 = reference.iter().map(|b| b * b).sum::<f64>().sqrt();
        let rel = diff_norm / (1.0 + ref_norm);
        worst = worst.max(rel);
        assert!(rel <= 1e-6, "coefficient mismatch: relative gap {rel:.3e}");
    }
    println!("worst relative coefficient gap over 1,000 problems: {worst:.3e}");
}

/// The generator's effect-size calibration must be self-consistent: the
/// effect size recomputed from the generated individuals' true effects and
/// the realized pooled outcome SD has to hit the configured target.
#[test]
fn calibrated_generators_hit_their_target_effect_size() {
    let mut worst = 0.0f64;
    for (t, target) in [0.19f64, 0.38].into_iter().enumerate() {
        for (s, spread) in EffectSpread::ALL.into_iter().enumerate() {
            let seed = 110 + (t * 6 + s) as u64;
            let design = AlsDesign::new(500_000, target, spread, seed);
            let (dataset, truth) = generate_als(&design).unwrap();
            let mean_abs: f64 = truth.true_effect.iter().map(|e| e.abs()).sum::<f64>()
                / truth.true_effect.len() as f64;
            let realized = mean_abs / pooled_outcome_sd(&dataset).unwrap();
            let gap = (realized - target).abs();
            worst = worst.max(gap);
            println!("target {target} {spread}: realized effect size {realized:.4}");
            assert!(
                gap <= 0.005,
                "{spread} at target {target}: realized {realized:.4} off by {gap:.4}"
            );
        }
    }
    println!("worst calibration gap: {worst:.4}");
}

// ---------------------------------------------------------------------------
// Determinism of the command-line tool
// ---------------------------------------------------------------------------

fn run_cli(dir: &Path, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_pite"))
        .current_dir(dir)
        .args(args)
        .status()
        .expect("binary must launch");
    assert!(status.success(), "`pite {}` failed", args.join(" "));
}

fn assert_identical(dir: &Path, first: &str, second: &str) {
    let a = std::fs::read(dir.join(first)).unwrap();
    let b = std::fs::read(dir.join(second)).unwrap();
    assert!(!a.is_empty(), "{first} is empty");
    assert!(a == b, "{first} and {second} differ");
}

/// Every command, run twice with the same seed but different `--threads`,
/// must produce byte-identical result documents.
#[test]
fn cli_documents_are_byte_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let dir = dir.path();

    // generate: covers the data generator end to end (with ground truth).
    // The sidecar records the CSV path it describes, so the two runs use the
    // same relative paths inside separate directories.
    for (threads, sub) in [("1", "a"), ("3", "b")] {
        std::fs::create_dir(dir.join(sub)).unwrap();
        run_cli(
            &dir.join(sub),
            &[
                "--threads", threads, "generate", "--kind", "als", "--n", "300",
                "--target-effect-size", "0.38", "--spread", "bin90_10", "--seed", "5",
                "--out", "gen.csv", "--sidecar", "gen.json",
            ],
        );
    }
    assert_identical(dir, "a/gen.csv", "b/gen.csv");
    assert_identical(dir, "a/gen.json", "b/gen.json");
    std::fs::copy(dir.join("a/gen.csv"), dir.join("gen_a.csv")).unwrap();

    // test: the forest predictor consumes randomness inside the parallel
    // permutation loop, so this exercises scheduling independence directly.
    for (threads, report, sds) in
        [("1", "report_a.json", "sds_a.txt"), ("3", "report_b.json", "sds_b.txt")]
    {
        run_cli(
            dir,
            &[
                "--threads", threads, "test", "--data", "gen_a.csv", "--outcome", "y",
                "--treatment", "trt", "--model", "rf", "--trees", "20", "--permutations", "100",
                "--seed", "9", "--out", report, "--sd-out", sds,
            ],
        );
    }
    assert_identical(dir, "report_a.json", "report_b.json");
    assert_identical(dir, "sds_a.txt", "sds_b.txt");

    // screen: deterministic closed-form fit, still must not vary.
    for (threads, out) in [("1", "screen_a.json"), ("3", "screen_b.json")] {
        run_cli(
            dir,
            &[
                "--threads", threads, "screen", "--data", "gen_a.csv", "--outcome", "y",
                "--treatment", "trt", "--out", out,
            ],
        );
    }
    assert_identical(dir, "screen_a.json", "screen_b.json");

    // simulate-type1 and simulate-power: nested parallelism over
    // replications and permutations.
    let type1_grid = serde_json::json!({
        "label": "determinism type1",
        "master_seed": 31,
        "cells": [{
            "design": {"kind": "null", "n": 60},
            "predictor": {"kind": "linear"},
            "n_permutations": 80,
            "replications": 30,
            "alpha": 0.05
        }]
    });
    std::fs::write(dir.join("grid_t1.json"), type1_grid.to_string()).unwrap();
    let power_grid = serde_json::json!({
        "label": "determinism power",
        "master_seed": 32,
        "cells": [{
            "design": {"kind": "als", "n": 200, "target_effect_size": 0.38, "spread": "spread"},
            "predictor": {"kind": "forest", "params": {"n_trees": 20}},
            "n_permutations": 40,
            "replications": 6,
            "alpha": 0.05
        }]
    });
    std::fs::write(dir.join("grid_pw.json"), power_grid.to_string()).unwrap();

    for (threads, t1, t1_csv, pw) in [
        ("1", "t1_a.json", "t1_a.csv", "pw_a.json"),
        ("3", "t1_b.json", "t1_b.csv", "pw_b.json"),
    ] {
        run_cli(
            dir,
            &[
                "--threads", threads, "simulate-type1", "--config", "grid_t1.json",
                "--out", t1, "--csv", t1_csv,
            ],
        );
        run_cli(
            dir,
            &["--threads", threads, "simulate-power", "--config", "grid_pw.json", "--out", pw],
        );
    }
    assert_identical(dir, "t1_a.json", "t1_b.json");
    assert_identical(dir, "t1_a.csv", "t1_b.csv");
    assert_identical(dir, "pw_a.json", "pw_b.json");
}

// ---------------------------------------------------------------------------

/// Guard for the helper itself: the fitted-model path used by the oracle
/// tests must be the same one the pipeline uses.
#[test]
fn oracle_helpers_agree_with_the_pipeline_entry_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    let dataset = tiny_dataset(&mut rng, 8, 2);
    let spec = PredictorSpec::Linear;
    let (treated, _) = dataset.split_arms();
    let direct = pite::predict::fit_linear(&dataset, &treated).unwrap();
    let via_spec = fit_predictor(&dataset, &treated, &spec, SeedStream::root(0)).unwrap();
    let predictions_direct = pite::predict::predict_linear(&direct, &dataset).unwrap();
    let predictions_via = via_spec.predict(&dataset).unwrap();
    assert_eq!(predictions_direct, predictions_via);
}
