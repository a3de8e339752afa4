//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit code: 0 on success, 1 for bad
//! input, 2 for internal failures.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::causal::{
    bootstrap_ate, cate, estimate_pipeline, positivity_report, AteEstimate, BootstrapConfig, CausalFrame, Estimator,
    PositivityPolicy,
};
use crate::error::{Error, Result};
use crate::inference::{intervene, marginal, sample_with, InterventionSpec};
use crate::io::{
    export_dot, read_csv_path, read_model, read_schema, write_csv, write_model, write_results_csv, write_summary_csv,
    DotOptions,
};
use crate::learning::{bic, Learner};
use crate::model::{fit_mle, Dataset, EventTree, StagedTreeModel, Staging};
use crate::simulation::{run_experiment, summarize, Generator, ParamDist, SimConfig, SimEstimator};

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "STAGEDCAUSAL_THREADS";

#[derive(Parser, Debug)]
#[command(name = "stagedcausal", version, about = "Staged event trees for treatment effect estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit stage probabilities for a fixed staging.
    Fit(FitArgs),
    /// Learn a staging from data and fit it.
    Learn(LearnArgs),
    /// Estimate the average treatment effect.
    Ate(AteArgs),
    /// Bootstrap the learn, fit and estimate pipeline.
    Bootstrap(AteArgs),
    /// Conditional effects per covariate context.
    Cate(CateArgs),
    /// Treated and untreated counts per covariate context and stage.
    Positivity(PositivityArgs),
    /// Estimator comparison on simulated data.
    Simulate(SimulateArgs),
    /// Graphviz drawing of a model.
    ExportDot(DotArgs),
    /// Apply an intervention to a model.
    Intervene(InterveneArgs),
    /// Draw rows from a model.
    Sample(SampleArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// Causal order of the variables, comma separated.
    #[arg(long, value_delimiter = ',')]
    order: Option<Vec<String>>,
    /// JSON schema with variables and levels in causal order.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitOptions {
    /// Additive smoothing.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Drop contexts that no row reaches.
    #[arg(long)]
    prune: bool,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StagingKind {
    Saturated,
    Independence,
}

#[derive(Args, Debug)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    fit: FitOptions,
    #[arg(long, value_enum, default_value = "saturated")]
    staging: StagingKind,
    /// Output model JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LearnerArg {
    Bhc,
    Hclust,
}

impl From<LearnerArg> for Learner {
    fn from(l: LearnerArg) -> Self {
        match l {
            LearnerArg::Bhc => Learner::Bhc,
            LearnerArg::Hclust => Learner::Hclust,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EstimatorArg {
    Randomized,
    PsStratified,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Randomized => Estimator::Randomized,
            EstimatorArg::PsStratified => Estimator::PsStratified,
        }
    }
}

#[derive(Args, Debug)]
struct LearnArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    fit: FitOptions,
    #[arg(long, value_enum, default_value = "hclust")]
    learner: LearnerArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RoleArgs {
    #[arg(long)]
    treatment: String,
    #[arg(long)]
    outcome: String,
    /// Treatment level counted as treated (default: "1", else the second level).
    #[arg(long)]
    treated_level: Option<String>,
    /// Outcome level counted as positive (default: "1", else the second level).
    #[arg(long)]
    positive_level: Option<String>,
}

#[derive(Args, Debug)]
struct AteArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    roles: RoleArgs,
    #[arg(long, value_enum, default_value = "hclust")]
    learner: LearnerArg,
    #[arg(long, value_enum, default_value = "ps-stratified")]
    estimator: EstimatorArg,
    /// Bootstrap replicates; 0 skips the bootstrap for `ate`.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = 0.95)]
    ci_level: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Learn on the full tree instead of dropping unobserved contexts.
    #[arg(long)]
    no_prune: bool,
    /// Merge treatment stages lacking an arm into the closest observed one.
    #[arg(long, conflicts_with = "impute_uniform")]
    merge_violating_strata: bool,
    /// Use probability 0.5 for a missing treatment arm.
    #[arg(long)]
    impute_uniform: bool,
    /// Use this model instead of learning one.
    #[arg(long)]
    model: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bootstrap replicate estimates, one per line.
    #[arg(long)]
    replicates_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    roles: RoleArgs,
    #[arg(long, value_enum, default_value = "hclust")]
    learner: LearnerArg,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Covariate assignment such as `Z1=a,Z2=b`; all contexts when absent.
    #[arg(long)]
    at: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PositivityArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    roles: RoleArgs,
    /// Aggregate over the treatment stages learned by this learner.
    #[arg(long, value_enum)]
    learner: Option<LearnerArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GeneratorArg {
    Sevt,
    Dag,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistArg {
    Exp,
    Unif,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "sevt")]
    generator: Vec<GeneratorArg>,
    /// Stage joining probabilities.
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.5, 0.8])]
    join: Vec<f64>,
    #[arg(long, value_enum, value_delimiter = ',', default_values = ["exp", "unif"])]
    dist: Vec<DistArg>,
    /// Total number of binary variables.
    #[arg(long, default_value_t = 8)]
    p: usize,
    #[arg(long, default_value_t = 20)]
    reps: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [100, 500, 1000, 10000])]
    sizes: Vec<usize>,
    /// Estimators among bhc, hclust, full, oracle, q.model, ipw, aipw.
    #[arg(long, value_delimiter = ',')]
    estimators: Option<Vec<String>>,
    #[arg(long, default_value_t = 0.3)]
    edge_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report every runtime as 0 so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Median absolute error per cell.
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DotArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    show_probs: bool,
    /// Red borders on one-sided treatment contexts; needs data and roles.
    #[arg(long, requires_all = ["data", "treatment", "outcome"])]
    highlight_positivity: bool,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    treatment: Option<String>,
    #[arg(long)]
    outcome: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct InterveneArgs {
    #[arg(long)]
    model: PathBuf,
    /// Assignments such as `R=1,Z2=b`.
    #[arg(long)]
    set: String,
    /// Print the interventional distribution of this variable.
    #[arg(long)]
    query: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    allow_undefined: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        // a second call in the same process fails harmlessly
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    configure_threads();
    match std::panic::catch_unwind(|| dispatch(cli.command)) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            if e.is_user_error() {
                1
            } else {
                2
            }
        }
        Err(_) => {
            eprintln!("error: internal failure");
            2
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Fit(a) => cmd_fit(a),
        Command::Learn(a) => cmd_learn(a),
        Command::Ate(a) => cmd_ate(a, false),
        Command::Bootstrap(a) => cmd_ate(a, true),
        Command::Cate(a) => cmd_cate(a),
        Command::Positivity(a) => cmd_positivity(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::ExportDot(a) => cmd_dot(a),
        Command::Intervene(a) => cmd_intervene(a),
        Command::Sample(a) => cmd_sample(a),
    }
}

fn check_output(path: &Option<PathBuf>) -> Result<()> {
    if let Some(dir) = path.as_ref().and_then(|p| p.parent()).filter(|d| !d.as_os_str().is_empty()) {
        if !dir.is_dir() {
            return Err(Error::InvalidArgument(format!("output directory {} does not exist", dir.display())));
        }
    }
    Ok(())
}

/// Loads the CSV and puts its columns in causal order: `--order`, else the
/// schema order, else (when roles are given) the remaining columns in file
/// order followed by treatment and outcome.
fn load_data(args: &DataArgs, roles: Option<&RoleArgs>) -> Result<Dataset> {
    if !args.data.is_file() {
        return Err(Error::InvalidArgument(format!("data file {} not found", args.data.display())));
    }
    let schema = args.schema.as_ref().map(read_schema).transpose()?;
    let data = read_csv_path(&args.data, schema.as_deref())?;
    let order: Vec<String> = if let Some(o) = &args.order {
        o.clone()
    } else if let Some(s) = &schema {
        s.iter().map(|v| v.name.clone()).collect()
    } else if let Some(r) = roles {
        let mut o: Vec<String> = data
            .variables()
            .iter()
            .map(|v| v.name.clone())
            .filter(|n| n != &r.treatment && n != &r.outcome)
            .collect();
        o.push(r.treatment.clone());
        o.push(r.outcome.clone());
        o
    } else {
        return Err(Error::InvalidArgument("give the causal order with --order or --schema".into()));
    };
    let names: Vec<&str> = order.iter().map(String::as_str).collect();
    data.reorder(&names)
}

fn frame_for(tree: &EventTree, roles: &RoleArgs) -> Result<CausalFrame> {
    let frame = CausalFrame::from_names(tree, &roles.treatment, &roles.outcome)?;
    let treated = roles
        .treated_level
        .clone()
        .unwrap_or_else(|| tree.variable(frame.treatment).levels[frame.treated_level].clone());
    let positive = roles
        .positive_level
        .clone()
        .unwrap_or_else(|| tree.variable(frame.outcome).levels[frame.positive_level].clone());
    frame.with_levels(tree, &treated, &positive)
}

fn make_tree(data: &Dataset, prune: bool) -> Result<EventTree> {
    let tree = EventTree::new(data.variables().to_vec())?;
    if prune {
        tree.prune_unobserved(data)
    } else {
        Ok(tree)
    }
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn model_summary(model: &StagedTreeModel) {
    let tree = model.tree();
    for i in 0..tree.p() {
        println!(
            "  {:<16} {:>6} contexts {:>6} stages",
            tree.variable(i).name,
            tree.n_contexts(i),
            model.staging().n_stages(i)
        );
    }
    let undefined = model.undefined_stages();
    if !undefined.is_empty() {
        println!("  {} stage(s) without data (uniform placeholder)", undefined.len());
    }
}

fn cmd_fit(a: FitArgs) -> Result<()> {
    check_output(&a.out)?;
    let data = load_data(&a.data, None)?;
    let tree = make_tree(&data, a.fit.prune)?;
    let staging = match a.staging {
        StagingKind::Saturated => Staging::saturated(&tree),
        StagingKind::Independence => Staging::independence(&tree),
    };
    let model = fit_mle(&tree, &staging, &data, a.fit.alpha)?;
    let score = bic(&tree, &staging, &data)?;
    println!("fitted {} rows, log-likelihood {:.4}, BIC {:.4}", data.n_rows(), score.log_likelihood, score.bic);
    model_summary(&model);
    if let Some(out) = &a.out {
        write_model(&model, out)?;
        println!("model written to {}", out.display());
    }
    Ok(())
}

fn cmd_learn(a: LearnArgs) -> Result<()> {
    check_output(&a.out)?;
    let data = load_data(&a.data, None)?;
    let tree = make_tree(&data, a.fit.prune)?;
    let learner = Learner::from(a.learner);
    let scored = learner.learn(&tree, &data)?;
    let model = fit_mle(&tree, &scored.staging, &data, a.fit.alpha)?;
    println!(
        "{}: log-likelihood {:.4}, {} free parameters, BIC {:.4}",
        learner.name(),
        scored.log_likelihood,
        scored.n_free_params,
        scored.bic
    );
    model_summary(&model);
    if let Some(out) = &a.out {
        write_model(&model, out)?;
        println!("model written to {}", out.display());
    }
    Ok(())
}

fn policy(a: &AteArgs) -> PositivityPolicy {
    if a.merge_violating_strata {
        PositivityPolicy::MergeNearest
    } else if a.impute_uniform {
        PositivityPolicy::ImputeUniform
    } else {
        PositivityPolicy::Exclude
    }
}

fn print_estimate(label: &str, est: &AteEstimate) {
    println!("{label}: {:.4}", est.ate);
    if let Some(ci) = &est.ci {
        println!(
            "  {:.0}% percentile CI: ({:.4}, {:.4}) from {} replicates",
            ci.level * 100.0,
            ci.lower,
            ci.upper,
            ci.n_bootstrap
        );
    }
    for s in &est.per_stratum {
        match s.effect {
            Some(e) if !s.excluded => println!("  stratum {:<24} weight {:.4} effect {:+.4}", s.stratum, s.weight, e),
            _ => println!("  stratum {:<24} excluded", s.stratum),
        }
    }
    for d in &est.diagnostics {
        println!("  warning: {}", serde_json::to_string(d).unwrap_or_default());
    }
}

fn cmd_ate(a: AteArgs, force_bootstrap: bool) -> Result<()> {
    check_output(&a.out)?;
    check_output(&a.replicates_out)?;
    let data = load_data(&a.data, Some(&a.roles))?;
    let tree = EventTree::new(data.variables().to_vec())?;
    let frame = frame_for(&tree, &a.roles)?;
    let config = BootstrapConfig {
        learner: a.learner.into(),
        estimator: a.estimator.into(),
        replicates: a.bootstrap.unwrap_or(if force_bootstrap { 200 } else { 0 }),
        seed: a.seed,
        ci_level: a.ci_level,
        alpha: a.alpha,
        policy: policy(&a),
        prune: !a.no_prune,
    };
    let point = match &a.model {
        Some(path) => {
            let model = read_model(path)?;
            if model.tree().variables() != data.variables() {
                return Err(Error::Schema("model variables differ from the data columns".into()));
            }
            config.estimator.estimate(&model, &data, &frame, config.policy)?
        }
        None => estimate_pipeline(&data, &frame, &config)?,
    };
    print_estimate(&format!("ATE ({}, {})", config.learner.name(), config.estimator.name()), &point);
    let mut report = json!({
        "treatment": a.roles.treatment,
        "outcome": a.roles.outcome,
        "learner": config.learner.name(),
        "estimator": config.estimator.name(),
        "n": data.n_rows(),
        "estimate": point,
    });
    if config.replicates > 0 {
        let boot = bootstrap_ate(&data, &frame, &config)?;
        print_estimate("bootstrap mean ATE", &boot);
        if let Some(path) = a.replicates_out.clone().or_else(|| a.out.as_ref().map(|o| o.with_extension("replicates.csv"))) {
            let mut text = String::from("ate\n");
            for v in &boot.replicates {
                text.push_str(&format!("{v}\n"));
            }
            fs::write(&path, text)?;
            println!("replicates written to {}", path.display());
        }
        report["bootstrap"] = json!({
            "mean": boot.ate,
            "ci": boot.ci,
            "seed": config.seed,
            "replicates": config.replicates,
            "diagnostics": boot.diagnostics,
        });
    }
    if let Some(out) = &a.out {
        write_json(out, &report)?;
        println!("report written to {}", out.display());
    }
    Ok(())
}

fn parse_assignment(tree: &EventTree, text: &str) -> Result<Vec<(usize, usize)>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|part| {
            let (name, level) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected NAME=LEVEL, got {part:?}")))?;
            let v = tree
                .variable_index(name.trim())
                .ok_or_else(|| Error::InvalidArgument(format!("unknown variable {name:?}")))?;
            let c = tree.variable(v).level_code(level.trim()).ok_or_else(|| {
                Error::InvalidArgument(format!("{level:?} is not a level of {name:?}"))
            })?;
            Ok((v, c))
        })
        .collect()
}

fn cmd_cate(a: CateArgs) -> Result<()> {
    check_output(&a.out)?;
    let data = load_data(&a.data, Some(&a.roles))?;
    let model = match &a.model {
        Some(path) => read_model(path)?,
        None => {
            let tree = make_tree(&data, !a.no_prune)?;
            let staging = Learner::from(a.learner).learn(&tree, &data)?.staging;
            fit_mle(&tree, &staging, &data, a.alpha)?
        }
    };
    let tree = model.tree();
    let frame = frame_for(tree, &a.roles)?;
    let mut rows = Vec::new();
    let targets: Vec<Vec<usize>> = match &a.at {
        Some(text) => {
            let assignment = parse_assignment(tree, text)?;
            let mut z = vec![usize::MAX; frame.treatment];
            for (v, c) in assignment {
                if v >= frame.treatment {
                    return Err(Error::InvalidArgument(format!(
                        "{:?} is not a covariate",
                        tree.variable(v).name
                    )));
                }
                z[v] = c;
            }
            if z.contains(&usize::MAX) {
                return Err(Error::InvalidArgument("--at must set every covariate".into()));
            }
            vec![z]
        }
        None => tree.contexts(frame.treatment).map(|c| c.prefix).collect(),
    };
    for z in targets {
        let name: Vec<String> = z
            .iter()
            .enumerate()
            .map(|(j, &c)| format!("{}={}", tree.variable(j).name, tree.variable(j).levels[c]))
            .collect();
        let name = if name.is_empty() { "all".to_string() } else { name.join(",") };
        match cate(&model, &frame, &z) {
            Ok(v) => {
                println!("CATE {name:<30} {v:+.4}");
                rows.push(json!({"context": name, "cate": v}));
            }
            Err(e) if a.at.is_none() && e.is_user_error() || matches!(e, Error::UndefinedStage(_)) && a.at.is_none() => {
                println!("CATE {name:<30} not identified ({e})");
                rows.push(json!({"context": name, "cate": null, "reason": e.to_string()}));
            }
            Err(e) => return Err(e),
        }
    }
    if let Some(out) = &a.out {
        write_json(out, &json!({ "treatment": a.roles.treatment, "outcome": a.roles.outcome, "cate": rows }))?;
    }
    Ok(())
}

fn cmd_positivity(a: PositivityArgs) -> Result<()> {
    check_output(&a.out)?;
    let data = load_data(&a.data, Some(&a.roles))?;
    let tree = make_tree(&data, true)?;
    let frame = frame_for(&tree, &a.roles)?;
    let staging = a.learner.map(|l| Learner::from(l).learn(&tree, &data)).transpose()?.map(|s| s.staging);
    let report = positivity_report(&tree, &data, &frame, staging.as_ref())?;
    for c in &report.contexts {
        println!(
            "{:<32} treated {:>6} untreated {:>6}  {:?}",
            c.context, c.n_treated, c.n_untreated, c.status
        );
    }
    for s in &report.stages {
        println!(
            "stage {:<26} treated {:>6} untreated {:>6}  {:?}",
            s.stage, s.n_treated, s.n_untreated, s.status
        );
    }
    if report.has_violations() {
        println!("positivity violations found");
    }
    if let Some(out) = &a.out {
        write_json(out, &serde_json::to_value(&report)?)?;
    }
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    check_output(&a.out)?;
    check_output(&a.summary_out)?;
    let estimators = match &a.estimators {
        Some(list) => list.iter().map(|s| s.parse::<SimEstimator>()).collect::<Result<Vec<_>>>()?,
        None => SimEstimator::ALL.to_vec(),
    };
    let config = SimConfig {
        p: a.p,
        generators: a
            .generator
            .iter()
            .map(|g| match g {
                GeneratorArg::Sevt => Generator::Sevt,
                GeneratorArg::Dag => Generator::Dag,
            })
            .collect(),
        join_probs: a.join.clone(),
        dists: a
            .dist
            .iter()
            .map(|d| match d {
                DistArg::Exp => ParamDist::Exp,
                DistArg::Unif => ParamDist::Unif,
            })
            .collect(),
        sample_sizes: a.sizes.clone(),
        repetitions: a.reps,
        seed: a.seed,
        estimators,
        edge_prob: a.edge_prob,
        record_runtime: !a.no_timing,
    };
    let records = run_experiment(&config)?;
    let summary = summarize(&records);
    println!("{:<6} {:>4} {:<5} {:>6} {:<8} {:>10}", "gen", "pi", "dist", "n", "method", "median|err|");
    for s in &summary {
        println!(
            "{:<6} {:>4} {:<5} {:>6} {:<8} {:>10}",
            s.generator.name(),
            s.pi,
            s.dist.name(),
            s.n,
            s.estimator.name(),
            s.median_abs_error.map_or("-".into(), |m| format!("{m:.4}"))
        );
    }
    if let Some(out) = &a.out {
        write_results_csv(&records, BufWriter::new(File::create(out)?))?;
        println!("{} records written to {}", records.len(), out.display());
    }
    if let Some(out) = &a.summary_out {
        write_summary_csv(&summary, BufWriter::new(File::create(out)?))?;
    }
    Ok(())
}

fn cmd_dot(a: DotArgs) -> Result<()> {
    check_output(&a.out)?;
    let model = read_model(&a.model)?;
    let mut options = DotOptions {
        show_probs: a.show_probs,
        ..DotOptions::default()
    };
    if a.highlight_positivity {
        let (Some(data), Some(treatment), Some(outcome)) = (&a.data, &a.treatment, &a.outcome) else {
            return Err(Error::InvalidArgument("--highlight-positivity needs --data, --treatment and --outcome".into()));
        };
        let names: Vec<&str> = model.tree().variables().iter().map(|v| v.name.as_str()).collect();
        let data = read_csv_path(data, Some(model.tree().variables()))?.reorder(&names)?;
        let frame = CausalFrame::from_names(model.tree(), treatment, outcome)?;
        let report = positivity_report(model.tree(), &data, &frame, None)?;
        options = options.with_positivity(model.tree(), &report);
    }
    let text = export_dot(&model, &options);
    match &a.out {
        Some(out) => fs::write(out, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_intervene(a: InterveneArgs) -> Result<()> {
    check_output(&a.out)?;
    let model = read_model(&a.model)?;
    let spec = InterventionSpec::new(parse_assignment(model.tree(), &a.set)?)?;
    let result = intervene(&model, &spec)?;
    if let Some(q) = &a.query {
        let v = result
            .tree()
            .variable_index(q)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variable {q:?}")))?;
        let table = marginal(&result, &[v])?;
        for (codes, p) in table.cells() {
            println!("P({}={} | do({})) = {p:.6}", q, result.tree().variable(v).levels[codes[0]], a.set);
        }
    }
    if let Some(out) = &a.out {
        write_model(&result, out)?;
        println!("model written to {}", out.display());
    }
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    check_output(&a.out)?;
    let model = read_model(&a.model)?;
    let data = sample_with(&model, a.n, a.seed, a.allow_undefined)?;
    match &a.out {
        Some(out) => {
            write_csv(&data, BufWriter::new(File::create(out)?))?;
            println!("{} rows written to {}", data.n_rows(), out.display());
        }
        None => write_csv(&data, std::io::stdout().lock())?,
    }
    Ok(())
}
