//! `svyauc`: design-based AUC inference for complex survey data.
//!
//! Single-analysis commands print JSON to stdout; `simulate` writes a
//! directory of CSV tables plus a `meta.json` echoing the full
//! configuration. Exit codes: 0 success, 2 input error, 3 numerical
//! failure, 4 degenerate-replicate abort.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use svyauc::inference::replicate_aucs;
use svyauc::sim::{default_registry, meta_json, run_scenario, se_samples_csv, summary_csv};
use svyauc::sim::{RunOptions, SampleSize};
use svyauc::{
    ci_normal, ci_percentile, estimate_auc, fit_pseudo_likelihood, load_survey_csv,
    replicate_weights, test_independent, test_paired, weighted_auc,
    AucInput, CiKind, CsvSchema, Error, ErrorCategory, FittedModel, Method, ResampleRng,
    SurveyFrame,
};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "svyauc", version, about = "Survey-weighted AUC estimation and inference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a pseudo-likelihood logistic model and report coefficients.
    Fit(FitArgs),
    /// Weighted AUC of a fitted model or a precomputed score column.
    Auc(AucArgs),
    /// Point estimate, replicate variance, and confidence interval.
    Ci(CiArgs),
    /// Compare model AUCs across two independent samples.
    CompareIndep(CompareIndepArgs),
    /// Compare two models fitted on the same sample.
    ComparePaired(ComparePairedArgs),
    /// Run a Monte Carlo scenario and write summary tables.
    Simulate(SimulateArgs),
    /// Write a frame's replicate weights as CSV for external tools.
    DumpReplicates(DumpReplicatesArgs),
}

/// Column mapping shared by every command that reads a survey CSV.
#[derive(Args)]
struct SchemaArgs {
    /// Input CSV file
    #[arg(long)]
    input: PathBuf,
    /// Column holding the stratum identifier
    #[arg(long, default_value = "stratum")]
    stratum_col: String,
    /// Column holding the PSU identifier
    #[arg(long, default_value = "psu")]
    psu_col: String,
    /// Column holding the sampling weight
    #[arg(long, default_value = "weight")]
    weight_col: String,
    /// Column holding the 0/1 outcome
    #[arg(long, default_value = "outcome")]
    outcome_col: String,
    /// Comma-separated covariate columns
    #[arg(long, value_delimiter = ',')]
    covariate_cols: Vec<String>,
    /// Optional unit identifier column
    #[arg(long)]
    id_col: Option<String>,
}

impl SchemaArgs {
    fn schema(&self, extra: &[String]) -> CsvSchema {
        let mut covariates = self.covariate_cols.clone();
        for name in extra {
            if !covariates.contains(name) {
                covariates.push(name.clone());
            }
        }
        CsvSchema {
            stratum: self.stratum_col.clone(),
            psu: self.psu_col.clone(),
            weight: self.weight_col.clone(),
            outcome: self.outcome_col.clone(),
            covariates,
            id: self.id_col.clone(),
        }
    }

    fn load(&self, extra: &[String]) -> svyauc::Result<SurveyFrame> {
        load_survey_csv(&self.input, &self.schema(extra))
    }
}

#[derive(Args)]
struct ResampleArgs {
    /// Replicate weight method
    #[arg(long, default_value = "jkn")]
    method: Method,
    /// Bootstrap replicate count (ignored by jkn)
    #[arg(long = "B", visible_alias = "b", default_value_t = 1000)]
    b: usize,
    /// Master seed; identical seeds reproduce every byte of output
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    schema: SchemaArgs,
}

#[derive(Args)]
struct AucArgs {
    #[command(flatten)]
    schema: SchemaArgs,
    /// Use this column as the score instead of fitting a model
    #[arg(long)]
    score_col: Option<String>,
}

#[derive(Args)]
struct CiArgs {
    #[command(flatten)]
    schema: SchemaArgs,
    #[command(flatten)]
    resample: ResampleArgs,
    /// Use this column as the score instead of fitting a model
    #[arg(long)]
    score_col: Option<String>,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Interval construction
    #[arg(long = "ci", default_value = "normal")]
    ci_kind: CiKind,
}

#[derive(Args)]
struct CompareIndepArgs {
    /// First input CSV file
    #[arg(long)]
    input1: PathBuf,
    /// Second input CSV file
    #[arg(long)]
    input2: PathBuf,
    #[arg(long, default_value = "stratum")]
    stratum_col: String,
    #[arg(long, default_value = "psu")]
    psu_col: String,
    #[arg(long, default_value = "weight")]
    weight_col: String,
    #[arg(long, default_value = "outcome")]
    outcome_col: String,
    /// Model covariates, fitted separately on each sample
    #[arg(long, value_delimiter = ',')]
    covariate_cols: Vec<String>,
    #[arg(long)]
    id_col: Option<String>,
    #[command(flatten)]
    resample: ResampleArgs,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct ComparePairedArgs {
    #[command(flatten)]
    schema: SchemaArgs,
    /// Covariates of the second model; the first comes from --covariate-cols
    #[arg(long, value_delimiter = ',')]
    covariate_cols2: Vec<String>,
    #[command(flatten)]
    resample: ResampleArgs,
    /// Significance level
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario identifier from the built-in registry
    #[arg(long)]
    scenario: u32,
    /// Monte Carlo runs (registry default when omitted)
    #[arg(long)]
    runs: Option<usize>,
    /// Bootstrap replicate count (registry default when omitted)
    #[arg(long = "B", visible_alias = "b")]
    b: Option<usize>,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// PSUs sampled per stratum
    #[arg(long = "a-h", default_value_t = 2)]
    a_h: usize,
    /// Sample size label (n1 or n2)
    #[arg(long, default_value = "n1")]
    size: SampleSize,
    /// Significance levels (registry default when omitted)
    #[arg(long, value_delimiter = ',')]
    alpha: Vec<f64>,
    /// Output directory for summary.csv, se_samples.csv, meta.json
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct DumpReplicatesArgs {
    #[command(flatten)]
    schema: SchemaArgs,
    #[command(flatten)]
    resample: ResampleArgs,
    /// Output CSV file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(match err.category() {
                ErrorCategory::Input => 2,
                ErrorCategory::Numerical => 3,
                ErrorCategory::DegenerateReplicates => 4,
            })
        }
    }
}

fn dispatch(command: Command) -> svyauc::Result<()> {
    match command {
        Command::Fit(args) => run_fit(args),
        Command::Auc(args) => run_auc(args),
        Command::Ci(args) => run_ci(args),
        Command::CompareIndep(args) => run_compare_indep(args),
        Command::ComparePaired(args) => run_compare_paired(args),
        Command::Simulate(args) => run_simulate(args),
        Command::DumpReplicates(args) => run_dump_replicates(args),
    }
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable value"));
}

fn fit_all(frame: &SurveyFrame, names: &[String]) -> svyauc::Result<FittedModel> {
    if names.is_empty() {
        return Err(Error::InvalidSpec(
            "at least one covariate is required to fit a model".into(),
        ));
    }
    let subset = frame.covariate_indices(names)?;
    fit_pseudo_likelihood(frame, &subset)
}

fn coefficients(model: &FittedModel, names: &[String]) -> serde_json::Value {
    let mut terms = vec![json!({"term": "(intercept)", "estimate": model.beta[0]})];
    for (name, value) in names.iter().zip(model.beta.iter().skip(1)) {
        terms.push(json!({"term": name, "estimate": value}));
    }
    serde_json::Value::Array(terms)
}

/// Scores for inference: a named column read off the frame, or in-sample
/// fitted probabilities.
fn resolve_scores(
    frame: &SurveyFrame,
    covariates: &[String],
    score_col: &Option<String>,
) -> svyauc::Result<(Vec<f64>, serde_json::Value)> {
    match score_col {
        Some(name) => {
            if !covariates.is_empty() {
                return Err(Error::InvalidSpec(
                    "--score-col and --covariate-cols are mutually exclusive".into(),
                ));
            }
            let j = frame.covariate_indices(std::slice::from_ref(name))?[0];
            let scores = (0..frame.n()).map(|i| frame.covariate_row(i)[j]).collect();
            Ok((scores, json!({"score_col": name})))
        }
        None => {
            let model = fit_all(frame, covariates)?;
            let scores = model.probs.clone();
            Ok((scores, json!({"model": coefficients(&model, covariates)})))
        }
    }
}

fn run_fit(args: FitArgs) -> svyauc::Result<()> {
    let frame = args.schema.load(&[])?;
    let model = fit_all(&frame, &args.schema.covariate_cols)?;
    let auc = weighted_auc(&AucInput::new(&model.probs, frame.outcomes(), frame.weights())?)?;
    print_json(&json!({
        "tool_version": VERSION,
        "command": "fit",
        "input": args.schema.input,
        "n_units": frame.n(),
        "coefficients": coefficients(&model, &args.schema.covariate_cols),
        "converged": model.converged,
        "iterations": model.iterations,
        "max_abs_score": model.max_abs_score,
        "auc": auc,
    }));
    Ok(())
}

fn run_auc(args: AucArgs) -> svyauc::Result<()> {
    let extra: Vec<String> = args.score_col.iter().cloned().collect();
    let frame = args.schema.load(&extra)?;
    let (scores, source) =
        resolve_scores(&frame, &args.schema.covariate_cols, &args.score_col)?;
    let auc = weighted_auc(&AucInput::new(&scores, frame.outcomes(), frame.weights())?)?;
    print_json(&json!({
        "tool_version": VERSION,
        "command": "auc",
        "input": args.schema.input,
        "n_units": frame.n(),
        "source": source,
        "auc": auc,
    }));
    Ok(())
}

fn run_ci(args: CiArgs) -> svyauc::Result<()> {
    if args.ci_kind == CiKind::Percentile && !args.resample.method.is_bootstrap() {
        return Err(Error::PercentileRequiresBootstrap(args.resample.method));
    }
    let extra: Vec<String> = args.score_col.iter().cloned().collect();
    let frame = args.schema.load(&extra)?;
    let (scores, source) =
        resolve_scores(&frame, &args.schema.covariate_cols, &args.score_col)?;
    let set = replicate_weights(
        &frame,
        args.resample.method,
        args.resample.b,
        ResampleRng::new(args.resample.seed, 0),
    )?;
    let est = estimate_auc(&scores, frame.outcomes(), frame.weights(), &set)?;
    let interval = match args.ci_kind {
        CiKind::Normal => ci_normal(est.point, est.variance, args.alpha)?,
        CiKind::Percentile => ci_percentile(&est.replicate_aucs, args.alpha, est.method)?,
    };
    print_json(&json!({
        "tool_version": VERSION,
        "command": "ci",
        "input": args.schema.input,
        "n_units": frame.n(),
        "source": source,
        "method": est.method,
        "b": set.n_replicates(),
        "seed": args.resample.seed,
        "alpha": args.alpha,
        "point": est.point,
        "variance": est.variance,
        "se": est.se(),
        "ci": interval,
        "replicates": {
            "total": set.n_replicates(),
            "used": est.n_used_replicates,
            "degenerate": est.n_degenerate,
        },
    }));
    Ok(())
}

fn run_compare_indep(args: CompareIndepArgs) -> svyauc::Result<()> {
    let schema = CsvSchema {
        stratum: args.stratum_col,
        psu: args.psu_col,
        weight: args.weight_col,
        outcome: args.outcome_col,
        covariates: args.covariate_cols.clone(),
        id: args.id_col,
    };
    let mut estimates = Vec::with_capacity(2);
    for (stream, path) in [(0u64, &args.input1), (1, &args.input2)] {
        let frame = load_survey_csv(path, &schema)?;
        let model = fit_all(&frame, &args.covariate_cols)?;
        let set = replicate_weights(
            &frame,
            args.resample.method,
            args.resample.b,
            ResampleRng::new(args.resample.seed, stream),
        )?;
        estimates.push(estimate_auc(&model.probs, frame.outcomes(), frame.weights(), &set)?);
    }
    let result = test_independent(&estimates[0], &estimates[1], args.alpha)?;
    print_json(&json!({
        "tool_version": VERSION,
        "command": "compare-indep",
        "input1": args.input1,
        "input2": args.input2,
        "covariates": args.covariate_cols,
        "method": args.resample.method,
        "seed": args.resample.seed,
        "auc1": estimates[0].point,
        "auc2": estimates[1].point,
        "se1": estimates[0].se(),
        "se2": estimates[1].se(),
        "test": result,
    }));
    Ok(())
}

fn run_compare_paired(args: ComparePairedArgs) -> svyauc::Result<()> {
    let frame = args.schema.load(&args.covariate_cols2)?;
    let model1 = fit_all(&frame, &args.schema.covariate_cols)?;
    let model2 = fit_all(&frame, &args.covariate_cols2)?;
    let auc_of = |m: &FittedModel| {
        weighted_auc(&AucInput::new(&m.probs, frame.outcomes(), frame.weights())?)
    };
    let result = test_paired(
        &frame,
        &model1,
        &model2,
        args.resample.method,
        args.resample.b,
        ResampleRng::new(args.resample.seed, 0),
        args.alpha,
    )?;
    print_json(&json!({
        "tool_version": VERSION,
        "command": "compare-paired",
        "input": args.schema.input,
        "covariates1": args.schema.covariate_cols,
        "covariates2": args.covariate_cols2,
        "method": args.resample.method,
        "seed": args.resample.seed,
        "auc1": auc_of(&model1)?,
        "auc2": auc_of(&model2)?,
        "test": result,
    }));
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> svyauc::Result<()> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?;
    }
    let registry = default_registry();
    let mut opts = RunOptions::from_registry(&registry, args.a_h, args.size, args.seed);
    if let Some(runs) = args.runs {
        opts.runs = runs;
    }
    if let Some(b) = args.b {
        opts.b = b;
    }
    if !args.alpha.is_empty() {
        opts.alphas = args.alpha.clone();
    }
    let report = run_scenario(&registry, args.scenario, &opts)?;

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("summary.csv"), summary_csv(&report)?)?;
    std::fs::write(args.out.join("se_samples.csv"), se_samples_csv(&report)?)?;
    let meta = meta_json(&report, VERSION);
    std::fs::write(
        args.out.join("meta.json"),
        serde_json::to_string_pretty(&meta).expect("serializable meta") + "\n",
    )?;
    eprintln!(
        "scenario {} done: {} runs used, {} failed; tables in {}",
        args.scenario,
        report.runs_used,
        report.runs_failed,
        args.out.display()
    );
    Ok(())
}

fn run_dump_replicates(args: DumpReplicatesArgs) -> svyauc::Result<()> {
    let frame = args.schema.load(&[])?;
    let set = replicate_weights(
        &frame,
        args.resample.method,
        args.resample.b,
        ResampleRng::new(args.resample.seed, 0),
    )?;
    // smoke-test the weights before exporting them
    let scores: Vec<f64> = (0..frame.n()).map(|i| i as f64).collect();
    let _ = replicate_aucs(&scores, frame.outcomes(), &set);

    let sink: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut writer = csv::Writer::from_writer(sink);
    let mut header = vec!["id".to_string(), "base_weight".to_string()];
    header.extend((1..=set.n_replicates()).map(|r| format!("rep{r}")));
    writer.write_record(&header)?;
    for i in 0..frame.n() {
        let unit = frame.unit(i);
        let mut row = vec![unit.id, unit.weight.to_string()];
        row.extend(set.iter_replicates().map(|rep| rep[i].to_string()));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}
