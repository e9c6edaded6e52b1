//! `pite` — predicted individual treatment effects from the command line.
//!
//! Subcommands:
//!
//! * `test` — permutation test for treatment-effect heterogeneity on a CSV.
//! * `screen` — joint linear model with treatment×covariate interactions.
//! * `generate` — synthetic two-arm trial data with known ground truth.
//! * `simulate-type1` — rejection rates over a grid of constant-effect designs.
//! * `simulate-power` — rejection rates over a grid of heterogeneous designs.
//!
//! Every analysis command accepts either per-field flags or `--config FILE`
//! pointing at a JSON object with the same field names (snake_case). Result
//! documents are JSON, embed the tool version and the fully resolved
//! configuration including the seed, and are byte-identical for a given seed
//! regardless of `--threads`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
//! failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use pite::harness::{
    run_grid, Cell, CellDesign, CellResult, ExperimentGrid, GridKind, SimulationTable,
};
use pite::simgen::{generate_als, generate_null, AlsDesign, AlsTruth, NullDesign};
use pite::{
    read_csv_path, run_permutation_test, screen_interactions, write_csv, Error, ForestParams,
    PermutationConfig, PermutationReport, PredictorSpec, Result, Schema, ScreenResult,
};

const TOOL: &str = "pite";
const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Column names used for generated datasets.
const GEN_OUTCOME: &str = "y";
const GEN_TREATMENT: &str = "trt";

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "pite",
    version,
    about = "Predicted individual treatment effects and a permutation test for \
             treatment-effect heterogeneity"
)]
struct Cli {
    /// Size of the worker thread pool (default: one thread per CPU core).
    /// Results never depend on this.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the permutation test for treatment-effect heterogeneity.
    Test(TestArgs),
    /// Fit one linear model with treatment interactions and report each
    /// interaction's t-statistic.
    Screen(ScreenArgs),
    /// Generate a synthetic two-arm trial dataset.
    Generate(GenerateArgs),
    /// Estimate type-I error over a grid of constant-effect designs.
    #[command(name = "simulate-type1")]
    SimulateType1(SimulateArgs),
    /// Estimate power over a grid of heterogeneous designs.
    #[command(name = "simulate-power")]
    SimulatePower(SimulateArgs),
}

#[derive(Args)]
struct TestArgs {
    /// JSON file carrying the fields below (same names, snake_case);
    /// exclusive with the per-field flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Trial data CSV (header row required).
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,

    /// Outcome column name.
    #[arg(long, value_name = "COLUMN")]
    outcome: Option<String>,

    /// Treatment column name; values must be 0 or 1.
    #[arg(long, value_name = "COLUMN")]
    treatment: Option<String>,

    /// Covariate column names, comma separated (default: every other column).
    #[arg(long, value_name = "COLUMNS", value_delimiter = ',')]
    covariates: Option<Vec<String>>,

    /// Model fit within each arm: `lm` (least squares) or `rf`
    /// (regression forest with random split points). [default: lm]
    #[arg(long, value_name = "FAMILY")]
    model: Option<String>,

    /// rf only: trees in the ensemble. [default: 500]
    #[arg(long, value_name = "N")]
    trees: Option<usize>,

    /// rf only: maximum split depth. [default: 10]
    #[arg(long, value_name = "N")]
    max_depth: Option<usize>,

    /// rf only: random candidate split points per feature. [default: 10]
    #[arg(long, value_name = "N")]
    nsplit: Option<usize>,

    /// rf only: minimum rows in each child of a split. [default: 5]
    #[arg(long, value_name = "N")]
    min_leaf: Option<usize>,

    /// Number of treatment-label permutations. [default: 1000]
    #[arg(long, value_name = "P")]
    permutations: Option<usize>,

    /// Rejection threshold for the permutation p-value. [default: 0.05]
    #[arg(long, value_name = "A")]
    alpha: Option<f64>,

    /// Root seed; every random draw in the run flows from it. [default: 0]
    #[arg(long, value_name = "S")]
    seed: Option<u64>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Also write the permuted SDs as a flat text file, one SD per line,
    /// with a header comment recording the observed SD.
    #[arg(long, value_name = "FILE")]
    sd_out: Option<PathBuf>,
}

#[derive(Args)]
struct ScreenArgs {
    /// JSON file carrying the fields below (same names, snake_case);
    /// exclusive with the per-field flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Trial data CSV (header row required).
    #[arg(long, value_name = "FILE")]
    data: Option<PathBuf>,

    /// Outcome column name.
    #[arg(long, value_name = "COLUMN")]
    outcome: Option<String>,

    /// Treatment column name; values must be 0 or 1.
    #[arg(long, value_name = "COLUMN")]
    treatment: Option<String>,

    /// Covariate column names, comma separated (default: every other column).
    #[arg(long, value_name = "COLUMNS", value_delimiter = ',')]
    covariates: Option<Vec<String>>,

    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    /// JSON design file: `{"kind": "null" | "als", ...}` with the same
    /// field names as the flags below; exclusive with those flags.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Design kind: `null` (constant effect) or `als` (heterogeneous).
    #[arg(long, value_name = "KIND")]
    kind: Option<String>,

    /// Total sample size.
    #[arg(long, value_name = "N")]
    n: Option<usize>,

    /// Generator seed. [default: 0]
    #[arg(long, value_name = "S")]
    seed: Option<u64>,

    /// Constant treatment effect. [default: 0]
    #[arg(long, value_name = "X")]
    ate: Option<f64>,

    /// Residual noise standard deviation. [default: 1]
    #[arg(long, value_name = "X")]
    residual_sd: Option<f64>,

    /// null only: continuous nuisance covariates. [default: 0]
    #[arg(long, value_name = "N")]
    n_nuisance_cont: Option<usize>,

    /// null only: binary nuisance covariates. [default: 0]
    #[arg(long, value_name = "N")]
    n_nuisance_bin: Option<usize>,

    /// als only: population PITE effect size to calibrate the
    /// heterogeneous effect to.
    #[arg(long, value_name = "X")]
    target_effect_size: Option<f64>,

    /// als only: how the effect variance spreads over covariates (spread,
    /// cont90_10, cont75_25, cont50_50, cont25_75, bin90_10).
    /// [default: spread]
    #[arg(long, value_name = "SPREAD")]
    spread: Option<String>,

    /// als only: nuisance covariates, split half continuous, half binary.
    /// [default: 0]
    #[arg(long, value_name = "N")]
    n_nuisance: Option<usize>,

    /// Output CSV path (columns: y, trt, covariates).
    #[arg(long, value_name = "FILE")]
    out: PathBuf,

    /// Also write a JSON sidecar with the design, the seed, and — for als
    /// designs — the true per-individual effects.
    #[arg(long, value_name = "FILE")]
    sidecar: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment grid JSON: `{"label", "master_seed", "cells": [...]}`.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,

    /// Write the result table JSON here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Also write the table as flat CSV, one row per cell.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,

    /// Checkpoint file, rewritten after every finished cell; if it already
    /// exists, matching finished cells are not recomputed.
    #[arg(long, value_name = "FILE")]
    checkpoint: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Config files (field names mirror the flags)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TestConfig {
    data: PathBuf,
    outcome: String,
    treatment: String,
    #[serde(default)]
    covariates: Option<Vec<String>>,
    #[serde(default = "default_model")]
    model: String,
    #[serde(default)]
    trees: Option<usize>,
    #[serde(default)]
    max_depth: Option<usize>,
    #[serde(default)]
    nsplit: Option<usize>,
    #[serde(default)]
    min_leaf: Option<usize>,
    #[serde(default = "default_permutations")]
    permutations: usize,
    #[serde(default = "default_alpha")]
    alpha: f64,
    #[serde(default)]
    seed: u64,
}

fn default_model() -> String {
    "lm".to_string()
}

fn default_permutations() -> usize {
    1000
}

fn default_alpha() -> f64 {
    0.05
}

impl TestConfig {
    /// Resolve the model fields into a predictor spec, rejecting forest
    /// tuning flags when the family is linear.
    fn predictor_spec(&self) -> Result<PredictorSpec> {
        let forest_tuning = self.trees.is_some()
            || self.max_depth.is_some()
            || self.nsplit.is_some()
            || self.min_leaf.is_some();
        match self.model.as_str() {
            "lm" | "linear" | "ols" => {
                if forest_tuning {
                    return Err(Error::InvalidConfig(
                        "trees / max_depth / nsplit / min_leaf only apply to model `rf`".into(),
                    ));
                }
                Ok(PredictorSpec::Linear)
            }
            "rf" | "forest" => {
                let mut params = ForestParams::default();
                if let Some(v) = self.trees {
                    params.n_trees = v;
                }
                if let Some(v) = self.max_depth {
                    params.max_depth = v;
                }
                if let Some(v) = self.nsplit {
                    params.n_split_points = v;
                }
                if let Some(v) = self.min_leaf {
                    params.min_leaf_size = v;
                }
                Ok(PredictorSpec::Forest { params })
            }
            other => Err(Error::InvalidConfig(format!(
                "unknown model `{other}` (expected lm or rf)"
            ))),
        }
    }

    fn schema(&self) -> Schema {
        Schema {
            outcome: self.outcome.clone(),
            treatment: self.treatment.clone(),
            covariates: self.covariates.clone(),
            kind_overrides: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScreenConfig {
    data: PathBuf,
    outcome: String,
    treatment: String,
    #[serde(default)]
    covariates: Option<Vec<String>>,
}

impl ScreenConfig {
    fn schema(&self) -> Schema {
        Schema {
            outcome: self.outcome.clone(),
            treatment: self.treatment.clone(),
            covariates: self.covariates.clone(),
            kind_overrides: Vec::new(),
        }
    }
}

// ---------------------------------------------------------------------------
// Result documents
// ---------------------------------------------------------------------------

/// Envelope for every JSON document the tool writes: version, the fully
/// resolved configuration (including the seed), and the result. `--threads`
/// is deliberately not recorded — results never depend on it.
#[derive(Serialize)]
struct Document<C: Serialize, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: C,
    result: R,
}

/// The resolved configuration block of a `test` document.
#[derive(Serialize)]
struct TestDocConfig {
    data: PathBuf,
    outcome: String,
    treatment: String,
    /// Covariates actually used, in model column order.
    covariates: Vec<String>,
    model: PredictorSpec,
    permutations: usize,
    alpha: f64,
    seed: u64,
}

/// The resolved configuration block of a `screen` document.
#[derive(Serialize)]
struct ScreenDocConfig {
    data: PathBuf,
    outcome: String,
    treatment: String,
    covariates: Vec<String>,
}

/// Result block of a `generate` sidecar.
#[derive(Serialize)]
struct SidecarResult<'a> {
    /// Path of the CSV this sidecar describes, as given on the command line.
    data: &'a Path,
    n: usize,
    outcome: &'a str,
    treatment: &'a str,
    covariates: &'a [String],
    /// Ground truth for heterogeneous designs: scaled coefficients,
    /// calibration, and each row's true treatment effect. Null for
    /// constant-effect designs (their truth is the design's `ate`).
    truth: Option<&'a AlsTruth>,
}

/// On-disk checkpoint of a partially finished simulation grid.
#[derive(Serialize, Deserialize)]
struct Checkpoint {
    label: String,
    master_seed: u64,
    cells: Vec<CellResult>,
}

// ---------------------------------------------------------------------------
// Entry point and error mapping
// ---------------------------------------------------------------------------

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Error::InvalidConfig("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidConfig(format!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::Test(args) => run_test(args),
        Command::Screen(args) => run_screen(args),
        Command::Generate(args) => run_generate(args),
        Command::SimulateType1(args) => run_simulate(GridKind::Type1, args),
        Command::SimulatePower(args) => run_simulate(GridKind::Power, args),
    }
}

/// Process exit code for an error: 2 configuration, 3 data, 4 numerical.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::TooLarge { .. } => 2,
        Error::MissingValue { .. }
        | Error::NonFiniteValue { .. }
        | Error::NonBinaryTreatment { .. }
        | Error::NonBinaryCovariate { .. }
        | Error::DegenerateArm { .. }
        | Error::EmptyCovariates
        | Error::DimensionMismatch { .. }
        | Error::TooFewValues { .. }
        | Error::Csv(_)
        | Error::Io(_) => 3,
        Error::RankDeficient { .. }
        | Error::ZeroPooledSd
        | Error::PermutationFitFailure { .. }
        | Error::CalibrationFailure(_) => 4,
        Error::CellFailure { source, .. } => exit_code(source),
    }
}

// ---------------------------------------------------------------------------
// test
// ---------------------------------------------------------------------------

fn run_test(args: TestArgs) -> Result<()> {
    let cfg = resolve_test_config(&args)?;
    let spec = cfg.predictor_spec()?;
    let dataset = read_csv_path(&cfg.data, &cfg.schema())?;
    let perm_config = PermutationConfig {
        n_permutations: cfg.permutations,
        alpha: cfg.alpha,
        seed: cfg.seed,
    };
    let report = run_permutation_test(&dataset, &spec, &perm_config)?;

    let doc = Document {
        tool: TOOL,
        version: VERSION,
        command: "test",
        config: TestDocConfig {
            data: cfg.data.clone(),
            outcome: cfg.outcome.clone(),
            treatment: cfg.treatment.clone(),
            covariates: dataset.covariate_names().to_vec(),
            model: spec,
            permutations: cfg.permutations,
            alpha: cfg.alpha,
            seed: cfg.seed,
        },
        result: &report,
    };
    emit(&to_json(&doc)?, args.out.as_deref())?;
    if let Some(path) = &args.sd_out {
        write_sd_file(path, &report)?;
        eprintln!("wrote {}", path.display());
    }
    eprintln!(
        "n = {}, observed PITE sd = {:.6}, p = {:.4} over {} permutations; \
         reject at alpha {}: {}",
        dataset.n(),
        report.observed.sd,
        report.p_value,
        report.n_permutations(),
        report.alpha,
        if report.reject { "yes" } else { "no" }
    );
    Ok(())
}

fn resolve_test_config(args: &TestArgs) -> Result<TestConfig> {
    if let Some(path) = &args.config {
        forbid_with_config(
            path,
            &[
                ("data", args.data.is_some()),
                ("outcome", args.outcome.is_some()),
                ("treatment", args.treatment.is_some()),
                ("covariates", args.covariates.is_some()),
                ("model", args.model.is_some()),
                ("trees", args.trees.is_some()),
                ("max-depth", args.max_depth.is_some()),
                ("nsplit", args.nsplit.is_some()),
                ("min-leaf", args.min_leaf.is_some()),
                ("permutations", args.permutations.is_some()),
                ("alpha", args.alpha.is_some()),
                ("seed", args.seed.is_some()),
            ],
        )?;
        return read_config(path);
    }
    Ok(TestConfig {
        data: require_flag(args.data.clone(), "data")?,
        outcome: require_flag(args.outcome.clone(), "outcome")?,
        treatment: require_flag(args.treatment.clone(), "treatment")?,
        covariates: args.covariates.clone(),
        model: args.model.clone().unwrap_or_else(default_model),
        trees: args.trees,
        max_depth: args.max_depth,
        nsplit: args.nsplit,
        min_leaf: args.min_leaf,
        permutations: args.permutations.unwrap_or_else(default_permutations),
        alpha: args.alpha.unwrap_or_else(default_alpha),
        seed: args.seed.unwrap_or_default(),
    })
}

/// Write the permuted SDs as a flat text file: a header comment carrying the
/// observed SD, then one SD per line in permutation order.
fn write_sd_file(path: &Path, report: &PermutationReport) -> Result<()> {
    use std::fmt::Write as _;
    let mut text = String::new();
    let _ = writeln!(text, "# observed_sd = {}", report.observed.sd);
    for sd in &report.permuted_sds {
        let _ = writeln!(text, "{sd}");
    }
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// screen
// ---------------------------------------------------------------------------

fn run_screen(args: ScreenArgs) -> Result<()> {
    let cfg = resolve_screen_config(&args)?;
    let dataset = read_csv_path(&cfg.data, &cfg.schema())?;
    let screen = screen_interactions(&dataset)?;

    let doc = Document {
        tool: TOOL,
        version: VERSION,
        command: "screen",
        config: ScreenDocConfig {
            data: cfg.data.clone(),
            outcome: cfg.outcome.clone(),
            treatment: cfg.treatment.clone(),
            covariates: dataset.covariate_names().to_vec(),
        },
        result: &screen,
    };
    emit(&to_json(&doc)?, args.out.as_deref())?;
    print_screen_summary(&screen);
    Ok(())
}

fn resolve_screen_config(args: &ScreenArgs) -> Result<ScreenConfig> {
    if let Some(path) = &args.config {
        forbid_with_config(
            path,
            &[
                ("data", args.data.is_some()),
                ("outcome", args.outcome.is_some()),
                ("treatment", args.treatment.is_some()),
                ("covariates", args.covariates.is_some()),
            ],
        )?;
        return read_config(path);
    }
    Ok(ScreenConfig {
        data: require_flag(args.data.clone(), "data")?,
        outcome: require_flag(args.outcome.clone(), "outcome")?,
        treatment: require_flag(args.treatment.clone(), "treatment")?,
        covariates: args.covariates.clone(),
    })
}

fn print_screen_summary(screen: &ScreenResult) {
    eprintln!(
        "treatment: estimate = {:.4}, p = {:.4}",
        screen.treatment.estimate, screen.treatment.p_value
    );
    let strongest = screen
        .interactions
        .iter()
        .min_by(|a, b| a.p_value.total_cmp(&b.p_value));
    if let Some(term) = strongest {
        eprintln!(
            "{} interactions; strongest: {} (t = {:.3}, p = {:.4})",
            screen.interactions.len(),
            term.name,
            term.t_value,
            term.p_value
        );
    }
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn run_generate(args: GenerateArgs) -> Result<()> {
    let design = resolve_design(&args)?;
    let (dataset, truth) = match &design {
        CellDesign::Null(d) => (generate_null(d)?, None),
        CellDesign::Als(d) => {
            let (dataset, truth) = generate_als(d)?;
            (dataset, Some(truth))
        }
    };

    let file = std::fs::File::create(&args.out)?;
    write_csv(std::io::BufWriter::new(file), &dataset, GEN_OUTCOME, GEN_TREATMENT)?;
    eprintln!(
        "wrote {} ({} rows, {} covariates)",
        args.out.display(),
        dataset.n(),
        dataset.p()
    );

    if let Some(path) = &args.sidecar {
        let doc = Document {
            tool: TOOL,
            version: VERSION,
            command: "generate",
            config: &design,
            result: SidecarResult {
                data: &args.out,
                n: dataset.n(),
                outcome: GEN_OUTCOME,
                treatment: GEN_TREATMENT,
                covariates: dataset.covariate_names(),
                truth: truth.as_ref(),
            },
        };
        std::fs::write(path, to_json(&doc)?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn resolve_design(args: &GenerateArgs) -> Result<CellDesign> {
    if let Some(path) = &args.config {
        forbid_with_config(
            path,
            &[
                ("kind", args.kind.is_some()),
                ("n", args.n.is_some()),
                ("seed", args.seed.is_some()),
                ("ate", args.ate.is_some()),
                ("residual-sd", args.residual_sd.is_some()),
                ("n-nuisance-cont", args.n_nuisance_cont.is_some()),
                ("n-nuisance-bin", args.n_nuisance_bin.is_some()),
                ("target-effect-size", args.target_effect_size.is_some()),
                ("spread", args.spread.is_some()),
                ("n-nuisance", args.n_nuisance.is_some()),
            ],
        )?;
        return read_config(path);
    }

    let kind = require_flag(args.kind.clone(), "kind")?;
    let n = require_flag(args.n, "n")?;
    let seed = args.seed.unwrap_or_default();
    let ate = args.ate.unwrap_or(0.0);
    let residual_sd = args.residual_sd.unwrap_or(1.0);
    match kind.as_str() {
        "null" => {
            forbid_for_kind(
                "null",
                &[
                    ("target-effect-size", args.target_effect_size.is_some()),
                    ("spread", args.spread.is_some()),
                    ("n-nuisance", args.n_nuisance.is_some()),
                ],
            )?;
            Ok(CellDesign::Null(NullDesign {
                n,
                ate,
                n_nuisance_cont: args.n_nuisance_cont.unwrap_or_default(),
                n_nuisance_bin: args.n_nuisance_bin.unwrap_or_default(),
                residual_sd,
                seed,
            }))
        }
        "als" => {
            forbid_for_kind(
                "als",
                &[
                    ("n-nuisance-cont", args.n_nuisance_cont.is_some()),
                    ("n-nuisance-bin", args.n_nuisance_bin.is_some()),
                ],
            )?;
            let target_effect_size = require_flag(args.target_effect_size, "target-effect-size")?;
            let spread = args.spread.as_deref().unwrap_or("spread").parse()?;
            Ok(CellDesign::Als(AlsDesign {
                n,
                target_effect_size,
                spread,
                n_nuisance: args.n_nuisance.unwrap_or_default(),
                residual_sd,
                ate,
                correlation: None,
                seed,
            }))
        }
        other => Err(Error::InvalidConfig(format!(
            "unknown design kind `{other}` (expected null or als)"
        ))),
    }
}

// ---------------------------------------------------------------------------
// simulate-type1 / simulate-power
// ---------------------------------------------------------------------------

fn run_simulate(kind: GridKind, args: SimulateArgs) -> Result<()> {
    let grid: ExperimentGrid = read_config(&args.config)?;
    let command = match kind {
        GridKind::Type1 => "simulate-type1",
        GridKind::Power => "simulate-power",
    };

    let resume = load_checkpoint(args.checkpoint.as_deref(), &grid)?;
    let total = grid.cells.len();
    let mut finished = resume.clone();
    let table = run_grid(&grid, kind, resume, |result| {
        eprintln!(
            "cell {}/{} ({}): rejection rate {:.4} ± {:.4} in {:.1?}",
            result.cell_index + 1,
            total,
            result.cell.describe(),
            result.rejection_rate,
            result.half_width,
            result.wall_time
        );
        if let Some(path) = &args.checkpoint {
            finished.push(result.clone());
            finished.sort_by_key(|cell| cell.cell_index);
            write_checkpoint(path, &grid, &finished)?;
        }
        Ok(())
    })?;

    let doc = Document { tool: TOOL, version: VERSION, command, config: &grid, result: &table };
    emit(&to_json(&doc)?, args.out.as_deref())?;
    if let Some(path) = &args.csv {
        write_table_csv(path, &table)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn load_checkpoint(path: Option<&Path>, grid: &ExperimentGrid) -> Result<Vec<CellResult>> {
    let Some(path) = path else { return Ok(Vec::new()) };
    if !path.exists() {
        return Ok(Vec::new());
    }
    let checkpoint: Checkpoint = read_config(path)?;
    if checkpoint.master_seed != grid.master_seed || checkpoint.label != grid.label {
        return Err(Error::InvalidConfig(format!(
            "checkpoint `{}` belongs to a different experiment \
             (label `{}`, master seed {})",
            path.display(),
            checkpoint.label,
            checkpoint.master_seed
        )));
    }
    eprintln!(
        "resuming from {} ({} of {} cells already finished)",
        path.display(),
        checkpoint.cells.len(),
        grid.cells.len()
    );
    Ok(checkpoint.cells)
}

fn write_checkpoint(path: &Path, grid: &ExperimentGrid, cells: &[CellResult]) -> Result<()> {
    let checkpoint = Checkpoint {
        label: grid.label.clone(),
        master_seed: grid.master_seed,
        cells: cells.to_vec(),
    };
    let text = to_json(&checkpoint)?;
    // Write-then-rename so an interrupt never leaves a truncated checkpoint.
    let tmp = PathBuf::from(format!("{}.tmp", path.display()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// One row per cell: design and predictor identifiers, then the rejection
/// rate with its 95% binomial half-width.
fn write_table_csv(path: &Path, table: &SimulationTable) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
    writer.write_record([
        "cell",
        "design",
        "model",
        "n",
        "ate",
        "target_effect_size",
        "spread",
        "nuisance_cont",
        "nuisance_bin",
        "permutations",
        "replications",
        "alpha",
        "rejection_rate",
        "half_width",
        "mean_p_value",
    ])?;
    for cell in &table.cells {
        writer.write_record(table_row(cell))?;
    }
    writer.flush().map_err(std::io::Error::from)?;
    Ok(())
}

fn table_row(result: &CellResult) -> [String; 15] {
    let cell: &Cell = &result.cell;
    let (design, n, ate, effect_size, spread, nuis_cont, nuis_bin) = match &cell.design {
        CellDesign::Null(d) => {
            ("null", d.n, d.ate, String::new(), String::new(), d.n_nuisance_cont, d.n_nuisance_bin)
        }
        CellDesign::Als(d) => {
            let (nuis_cont, nuis_bin) = d.nuisance_split();
            (
                "als",
                d.n,
                d.ate,
                format!("{}", d.target_effect_size),
                d.spread.label().to_string(),
                nuis_cont,
                nuis_bin,
            )
        }
    };
    [
        result.cell_index.to_string(),
        design.to_string(),
        cell.predictor.family_name().to_string(),
        n.to_string(),
        format!("{ate}"),
        effect_size,
        spread,
        nuis_cont.to_string(),
        nuis_bin.to_string(),
        cell.n_permutations.to_string(),
        result.replications.to_string(),
        format!("{}", cell.alpha),
        format!("{}", result.rejection_rate),
        format!("{}", result.half_width),
        format!("{}", result.mean_p_value),
    ]
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

fn require_flag<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.ok_or_else(|| {
        Error::InvalidConfig(format!("--{flag} is required (or supply it via --config)"))
    })
}

fn forbid_with_config(config: &Path, flags: &[(&str, bool)]) -> Result<()> {
    for (flag, present) in flags {
        if *present {
            return Err(Error::InvalidConfig(format!(
                "--{flag} cannot be combined with --config `{}`; \
                 put the field in the config file instead",
                config.display()
            )));
        }
    }
    Ok(())
}

fn forbid_for_kind(kind: &str, flags: &[(&str, bool)]) -> Result<()> {
    for (flag, present) in flags {
        if *present {
            return Err(Error::InvalidConfig(format!(
                "--{flag} does not apply to --kind {kind}"
            )));
        }
    }
    Ok(())
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidConfig(format!("cannot read config `{}`: {e}", path.display()))
    })?;
    serde_json::from_str(&text).map_err(|e| {
        Error::InvalidConfig(format!("config `{}` is not valid: {e}", path.display()))
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::InvalidConfig(format!("cannot serialize result: {e}")))?;
    text.push('\n');
    Ok(text)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    use std::io::Write as _;
    match out {
        Some(path) => {
            std::fs::write(path, text)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

// ---------------------------------------------------------------------------
