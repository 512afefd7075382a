//! Command-line adapter over the library. Exit codes: 0 success, 1 user
//! error (bad flags or input), 2 internal failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{emit_reports, run_grid, ExperimentConfig, ExplainerConfig, GridResults};
use crate::bucketing::{assign_buckets, lookup_bucket, BucketingStrategy};
use crate::encoding::{fit_encoder, EncodingStrategy, FeatureColumn, FeatureMatrix};
use crate::error::{Error, Result};
use crate::eventlog::{
    apply_labeling, compute_statistics, generate_synthetic_log, log_statistics, parse_event_log, temporal_split,
    write_event_log, LabeledLog, LabelingRule, SynthConfig, DEFAULT_TRAIN_RATIO,
};
use crate::explainers::{
    ale_global_rank, decision_path_data, pfi, plots, sample_background, shap_global, shap_kernel, shap_linear,
    AleExplainer, Attribution, GlobalExplanation, LimeContext,
};
use crate::models::{
    evaluate, intrinsic_importance, random_search, train, GbtSpace, HyperParams, LogitSpace, Model, ModelKind,
    SearchSpace,
};
use crate::prefixing::{build_prefix_log, PrefixSpec};
use crate::stability::{global_run_consistency, stability_report};
use crate::util::derive_seed;

/// `println!` that stops quietly when stdout is closed, e.g. piped into `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

macro_rules! out_raw {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
}

#[derive(Parser, Debug)]
#[command(name = "ppm-xai", version, about = "Explanation workbench for predictive process monitoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
struct Common {
    /// Master seed (default 0; `bench` falls back to the config's seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Subcommand-specific JSON (or TOML for `bench`) config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct LogInput {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    schema: PathBuf,
    /// `case_id,label` CSV.
    #[arg(long, conflicts_with = "rule")]
    labels: Option<PathBuf>,
    /// Labeling rule JSON.
    #[arg(long)]
    rule: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic labeled log (`--config` holds a synthetic log config).
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        traces: Option<usize>,
    },
    /// Print event-log statistics (`--config` may hold a labeling rule).
    Stats {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        labels: Option<PathBuf>,
    },
    /// Prefix, bucket and encode a log into per-bucket train/test matrices.
    Prep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        input: LogInput,
        #[arg(long, default_value_t = 10)]
        max_prefix_len: usize,
        #[arg(long, default_value_t = 1)]
        gap: usize,
        #[arg(long, value_enum, default_value_t = BucketingArg::Single)]
        bucketing: BucketingArg,
        #[arg(long, value_enum, default_value_t = EncodingArg::Aggregation)]
        encoding: EncodingArg,
        #[arg(long, default_value_t = DEFAULT_TRAIN_RATIO)]
        train_ratio: f64,
    },
    /// Train a model on an encoded matrix (`--config` holds hyperparameters
    /// or a search space).
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        matrix: PathBuf,
        /// Column schema; defaults to the `.columns.json` file next to the matrix.
        #[arg(long)]
        columns: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModelArg::Logit)]
        model: ModelArg,
        /// Random-search budget used when no hyperparameters are given.
        #[arg(long, default_value_t = 5)]
        budget: usize,
        #[arg(long)]
        test: Option<PathBuf>,
    },
    /// Global explanation of a saved model (`--config` holds explainer parameters).
    ExplainGlobal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        /// Training matrix for the SHAP background; defaults to `--matrix`.
        #[arg(long)]
        background: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: GlobalArg,
    },
    /// Local explanation of one matrix row.
    ExplainLocal {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        background: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        row: usize,
        #[arg(long, value_enum)]
        method: LocalArg,
    },
    /// LIME stability of one row over repeated runs, or consistency of two
    /// saved global explanations (`--a`, `--b`).
    Stability {
        #[command(flatten)]
        common: Common,
        #[arg(long, requires = "matrix")]
        model: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long)]
        background: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        row: usize,
        #[arg(long, requires = "b")]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
    },
    /// Run the full experiment grid from `--config`.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Re-emit reports from a saved `grid_results.json`.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        results: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BucketingArg {
    Single,
    PrefixLength,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum EncodingArg {
    Aggregation,
    Index,
    LastState,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModelArg {
    Logit,
    Gbt,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GlobalArg {
    Pfi,
    Ale,
    Shap,
    Intrinsic,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum LocalArg {
    Shap,
    Lime,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Synth { common, .. }
            | Command::Stats { common, .. }
            | Command::Prep { common, .. }
            | Command::Train { common, .. }
            | Command::ExplainGlobal { common, .. }
            | Command::ExplainLocal { common, .. }
            | Command::Stability { common, .. }
            | Command::Bench { common, .. }
            | Command::Report { common, .. } => common,
        }
    }
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns the process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = std::panic::catch_unwind(|| run(cli.command));
    match outcome {
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
            eprintln!("internal error: unexpected panic");
            2
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_str(&read_text(path)?)?)
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, content).map_err(|e| Error::io(path, e))
}

fn out_dir(common: &Common, default: &str) -> Result<PathBuf> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(default));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn load_labeled(input: &LogInput) -> Result<LabeledLog> {
    let log = parse_event_log(&input.log, &input.schema)?;
    match (&input.labels, &input.rule) {
        (Some(l), _) => LabeledLog::with_labels_csv(log, BufReader::new(File::open(l).map_err(|e| Error::io(l, e))?)),
        (None, Some(r)) => apply_labeling(&log, &read_json::<LabelingRule>(r)?),
        (None, None) => Err(Error::InvalidConfig("either --labels or --rule is required".into())),
    }
}

/// `<dir>/<name up to the first dot>.columns.json`.
fn default_columns_path(matrix: &Path) -> PathBuf {
    let name = matrix.file_name().and_then(|n| n.to_str()).unwrap_or("matrix");
    let stem = name.split('.').next().unwrap_or(name);
    matrix.with_file_name(format!("{stem}.columns.json"))
}

fn read_matrix(path: &Path, columns: Vec<FeatureColumn>) -> Result<FeatureMatrix> {
    FeatureMatrix::read_csv(BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?), columns)
}

fn explainer_config(common: &Common) -> Result<ExplainerConfig> {
    match &common.config {
        Some(p) => read_json(p),
        None => Ok(ExplainerConfig::default()),
    }
}

fn print_ranking(g: &GlobalExplanation, limit: usize) {
    out!("{:>4}  {:<40} {:>12}", "rank", "feature", g.method.name());
    for (r, &j) in g.top_k(limit).iter().enumerate() {
        out!("{:>4}  {:<40} {:>12.6}", r + 1, g.feature_names[j], g.scores[j]);
    }
}

fn run(cmd: Command) -> Result<()> {
    let common = cmd.common().clone();
    let seed = common.seed.unwrap_or(0);
    if !matches!(cmd, Command::Synth { .. } | Command::Bench { .. } | Command::Report { .. }) {
        out!("master seed: {seed}");
    }
    match cmd {
        Command::Synth { traces, .. } => {
            let mut cfg: SynthConfig = match &common.config {
                Some(p) => read_json(p)?,
                None => SynthConfig::default(),
            };
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            out!("master seed: {}", cfg.seed);
            if let Some(n) = traces {
                cfg.trace_count = n;
            }
            let log = generate_synthetic_log(&cfg)?;
            let dir = out_dir(&common, "synth")?;
            write_event_log(&log.log, dir.join("log.csv"), dir.join("schema.json"))?;
            let labels = dir.join("labels.csv");
            log.write_labels_csv(File::create(&labels).map_err(|e| Error::io(&labels, e))?)?;
            out_raw!("{}", compute_statistics(&log)?);
            out!("wrote {}", dir.display());
        }
        Command::Stats { log, schema, labels, .. } => {
            let parsed = parse_event_log(&log, &schema)?;
            let stats = match (labels, &common.config) {
                (Some(l), _) => compute_statistics(&LabeledLog::with_labels_csv(
                    parsed,
                    BufReader::new(File::open(&l).map_err(|e| Error::io(&l, e))?),
                )?)?,
                (None, Some(rule)) => compute_statistics(&apply_labeling(&parsed, &read_json(rule)?)?)?,
                (None, None) => log_statistics(&parsed)?,
            };
            out_raw!("{stats}");
            if let Some(out) = &common.out {
                write_text(out, &serde_json::to_string_pretty(&stats)?)?;
            }
        }
        Command::Prep {
            input,
            max_prefix_len,
            gap,
            bucketing,
            encoding,
            train_ratio,
            ..
        } => {
            let labeled = load_labeled(&input)?;
            let spec = PrefixSpec::new(max_prefix_len, gap)?;
            let bucketing = match bucketing {
                BucketingArg::Single => BucketingStrategy::Single,
                BucketingArg::PrefixLength => BucketingStrategy::PrefixLength,
            };
            let encoding = match encoding {
                EncodingArg::Aggregation => EncodingStrategy::Aggregation,
                EncodingArg::Index => EncodingStrategy::Index,
                EncodingArg::LastState => EncodingStrategy::LastState,
            };
            let (train_log, test_log) = temporal_split(&labeled, train_ratio)?;
            let plog = build_prefix_log(&train_log, spec)?;
            let test_plog = build_prefix_log(&test_log, spec)?;
            let blog = assign_buckets(&plog, bucketing)?;
            let dir = out_dir(&common, "prep")?;
            out!("{:<8} {:>6} {:>6} {:>6}", "bucket", "train", "test", "width");
            for (key, prefixes) in &blog.buckets {
                let k = match key {
                    crate::bucketing::BucketKey::Length(l) => *l,
                    crate::bucketing::BucketKey::All => max_prefix_len,
                };
                let enc = fit_encoder(&plog.schema, prefixes, encoding, Some(k))?;
                let x = enc.encode_bucket(prefixes)?;
                let test: Vec<_> = test_plog
                    .prefixes
                    .iter()
                    .filter(|p| lookup_bucket(&blog, p).ok() == Some(*key))
                    .cloned()
                    .collect();
                let stem = format!("bucket_{key}");
                write_text(&dir.join(format!("{stem}.columns.json")), &x.schema_json())?;
                let mut buf = Vec::new();
                x.write_csv(&mut buf)?;
                write_text(&dir.join(format!("{stem}.train.csv")), &String::from_utf8_lossy(&buf))?;
                let xt = enc.encode_bucket(&test)?;
                let mut buf = Vec::new();
                xt.write_csv(&mut buf)?;
                write_text(&dir.join(format!("{stem}.test.csv")), &String::from_utf8_lossy(&buf))?;
                write_text(
                    &dir.join(format!("{stem}.encoder.json")),
                    &serde_json::to_string_pretty(&enc)?,
                )?;
                out!("{:<8} {:>6} {:>6} {:>6}", key.to_string(), x.n_rows(), xt.n_rows(), x.n_cols());
            }
            out!("wrote {}", dir.display());
        }
        Command::Train {
            matrix,
            columns,
            model,
            budget,
            test,
            ..
        } => {
            let columns_path = columns.unwrap_or_else(|| default_columns_path(&matrix));
            let cols: Vec<FeatureColumn> = read_json(&columns_path)?;
            let x = read_matrix(&matrix, cols.clone())?;
            let kind = match model {
                ModelArg::Logit => ModelKind::Logit,
                ModelArg::Gbt => ModelKind::Gbt,
            };
            let hyper = match &common.config {
                Some(p) => {
                    let text = read_text(p)?;
                    match serde_json::from_str::<HyperParams>(&text) {
                        Ok(h) => h,
                        Err(_) => {
                            let space: SearchSpace = serde_json::from_str(&text)?;
                            random_search(&x, &space, budget, 0.2, seed)?.best
                        }
                    }
                }
                None => {
                    let space = match kind {
                        ModelKind::Logit => SearchSpace::Logit(LogitSpace::default()),
                        ModelKind::Gbt => SearchSpace::Gbt(GbtSpace::default()),
                    };
                    random_search(&x, &space, budget, 0.2, seed)?.best
                }
            };
            let m = train(&x, &hyper)?;
            out!("model {} trained on {} rows x {} features", m.kind.name(), x.n_rows(), x.n_cols());
            out!("hyperparameters: {}", serde_json::to_string(&m.hyper)?);
            if let Some(t) = test {
                let xt = read_matrix(&t, cols)?;
                let rep = evaluate(&m, &xt)?;
                out!(
                    "test auc {}  accuracy {:.4}  tp {} fp {} tn {} fn {}",
                    rep.auc.map_or("n/a".into(), |a| format!("{a:.4}")),
                    rep.accuracy,
                    rep.true_positives,
                    rep.false_positives,
                    rep.true_negatives,
                    rep.false_negatives
                );
            }
            let out = common.out.clone().unwrap_or_else(|| PathBuf::from("model.json"));
            write_text(&out, &m.to_json())?;
            out!("wrote {}", out.display());
        }
        Command::ExplainGlobal {
            model,
            matrix,
            background,
            method,
            ..
        } => {
            let m = Model::from_json(&read_text(&model)?)?;
            let x = read_matrix(&matrix, m.training_schema.clone())?;
            let ec = explainer_config(&common)?;
            let dir = out_dir(&common, "explain_global")?;
            let g = match method {
                GlobalArg::Pfi => pfi(&m, &x, ec.pfi_iterations, seed)?,
                GlobalArg::Intrinsic => intrinsic_importance(&m),
                GlobalArg::Ale => {
                    let curves = AleExplainer::new(&x, ec.ale_bins)?.curves(&m, &x)?;
                    write_text(&dir.join("ale.csv"), &plots::ale_csv(&curves))?;
                    ale_global_rank(&curves, &x.column_names())
                }
                GlobalArg::Shap => {
                    let bg_matrix = match &background {
                        Some(b) => read_matrix(b, m.training_schema.clone())?,
                        None => x.clone(),
                    };
                    let bg = sample_background(&bg_matrix, ec.shap_background, seed);
                    let rows: Vec<usize> = (0..x.n_rows().min(ec.global_rows)).collect();
                    let attrs = rows
                        .iter()
                        .map(|&i| attribute(&m, &x.rows[i], &bg, &ec, derive_seed(seed, &[&i.to_string()])))
                        .collect::<Result<Vec<_>>>()?;
                    shap_global(&attrs, &x.column_names())?
                }
            };
            write_text(&dir.join("global.json"), &serde_json::to_string_pretty(&g)?)?;
            write_text(&dir.join("scores.csv"), &plots::global_scores_csv(&g))?;
            write_text(&dir.join("scores.svg"), &plots::global_svg(&g, 15))?;
            if let Some(csv) = plots::pfi_iterations_csv(&g) {
                write_text(&dir.join("pfi_iterations.csv"), &csv)?;
            }
            print_ranking(&g, 20);
            out!("wrote {}", dir.display());
        }
        Command::ExplainLocal {
            model,
            matrix,
            background,
            row,
            method,
            ..
        } => {
            let m = Model::from_json(&read_text(&model)?)?;
            let x = read_matrix(&matrix, m.training_schema.clone())?;
            let r = x
                .rows
                .get(row)
                .ok_or_else(|| Error::InvalidArgument(format!("row {row} out of range")))?;
            let train_x = match &background {
                Some(b) => read_matrix(b, m.training_schema.clone())?,
                None => x.clone(),
            };
            let ec = explainer_config(&common)?;
            let dir = out_dir(&common, "explain_local")?;
            match method {
                LocalArg::Shap => {
                    let bg = sample_background(&train_x, ec.shap_background, seed);
                    let a = attribute(&m, r, &bg, &ec, seed)?;
                    let path = decision_path_data(&a, &x.column_names(), ec.decision_top_n);
                    out!("base value {:.6}  predicted margin {:.6}", a.base_value, a.predicted);
                    out!("{:<40} {:>12} {:>12}", "step", "phi", "cumulative");
                    for s in &path.steps {
                        out!("{:<40} {:>12.6} {:>12.6}", s.label, s.phi, s.cumulative);
                    }
                    write_text(&dir.join("attribution.json"), &serde_json::to_string_pretty(&a)?)?;
                    write_text(&dir.join("decision.csv"), &plots::decision_path_csv(&path))?;
                    write_text(&dir.join("decision.svg"), &plots::decision_path_svg(&path))?;
                }
                LocalArg::Lime => {
                    let e = LimeContext::new(&train_x)?.explain(&m, r, &ec.lime, seed)?;
                    out!("predicted probability {:.6}  surrogate r2 {:.4}", e.predicted_proba, e.surrogate_r2);
                    for f in &e.top_features {
                        out!("{:<40} {:>12.6}", f.name, f.coefficient);
                    }
                    write_text(&dir.join("lime.json"), &serde_json::to_string_pretty(&e)?)?;
                    write_text(&dir.join("lime.csv"), &plots::lime_csv(&e))?;
                    write_text(&dir.join("lime.svg"), &plots::lime_svg(&e))?;
                }
            }
            out!("wrote {}", dir.display());
        }
        Command::Stability {
            model,
            matrix,
            background,
            row,
            a,
            b,
            top_k,
            ..
        } => {
            let json = if let (Some(a), Some(b)) = (a, b) {
                let ga: GlobalExplanation = read_json(&a)?;
                let gb: GlobalExplanation = read_json(&b)?;
                let r = global_run_consistency(&ga, &gb, top_k)?;
                out!("top-{top_k} jaccard {:.4}", r.jaccard_top_k);
                out!("spearman (union of top-{top_k}) {:.4}", r.spearman_union);
                out!("spearman (full ranking) {:.4}", r.spearman_full);
                serde_json::to_string_pretty(&r)?
            } else {
                let (model, matrix) = model
                    .zip(matrix)
                    .ok_or_else(|| Error::InvalidArgument("give --model and --matrix, or --a and --b".into()))?;
                let m = Model::from_json(&read_text(&model)?)?;
                let x = read_matrix(&matrix, m.training_schema.clone())?;
                let train_x = match &background {
                    Some(b) => read_matrix(b, m.training_schema.clone())?,
                    None => x.clone(),
                };
                let r = x
                    .rows
                    .get(row)
                    .ok_or_else(|| Error::InvalidArgument(format!("row {row} out of range")))?;
                let ec = explainer_config(&common)?;
                let ctx = LimeContext::new(&train_x)?;
                let runs = (0..ec.lime_runs)
                    .map(|i| ctx.explain(&m, r, &ec.lime, derive_seed(seed, &["run", &i.to_string()])))
                    .collect::<Result<Vec<_>>>()?;
                let rep = stability_report(&runs, ec.lime.k, ec.cv_threshold)?;
                out!("runs {}  k {}  VSI {:.2}  CSI {:.2}", rep.runs, rep.k, rep.vsi, rep.csi);
                for s in &rep.coefficient_stats {
                    out!("{:<40} mean {:>10.6} std {:>10.6} {}", s.feature, s.mean, s.std, if s.stable { "stable" } else { "unstable" });
                }
                serde_json::to_string_pretty(&rep)?
            };
            if let Some(out) = &common.out {
                write_text(out, &json)?;
            }
        }
        Command::Bench { jobs, .. } => {
            let path = common
                .config
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("bench requires --config".into()))?;
            let mut cfg = ExperimentConfig::from_path(path)?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            out!("master seed: {}", cfg.seed);
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            if let Some(out) = &common.out {
                cfg.output_dir = out.clone();
            }
            cfg.validate()?;
            let results = run_grid(&cfg)?;
            let manifest = emit_reports(&results, &cfg.output_dir)?;
            print_grid_summary(&results);
            out!("wrote {} files to {}", manifest.files.len() + 1, cfg.output_dir.display());
        }
        Command::Report { results, .. } => {
            let r = GridResults::from_json(&read_text(&results)?)?;
            out!("master seed: {}", r.master_seed);
            let dir = match (&common.out, &common.config) {
                (Some(o), _) => o.clone(),
                (None, Some(c)) => ExperimentConfig::from_path(c)?.output_dir,
                (None, None) => PathBuf::from("report"),
            };
            let manifest = emit_reports(&r, &dir)?;
            print_grid_summary(&r);
            out!("wrote {} files to {}", manifest.files.len() + 1, dir.display());
        }
    }
    Ok(())
}

fn attribute(m: &Model, row: &[f64], bg: &[Vec<f64>], ec: &ExplainerConfig, seed: u64) -> Result<Attribution> {
    match m.kind {
        ModelKind::Logit => shap_linear(m, row, bg),
        ModelKind::Gbt => shap_kernel(m, row, bg, ec.shap_samples.max(2 * row.len() + 2), seed),
    }
}

fn print_grid_summary(r: &GridResults) {
    out!(
        "{:<44} {:<6} {:>6} {:>10} {:>10}",
        "cell", "bucket", "width", "setup_s", "compute_s"
    );
    for t in &r.timings {
        let width = r
            .units
            .iter()
            .find(|u| u.id.dataset == t.cell.dataset && u.id.variant == t.cell.variant && u.id.bucketing == t.cell.bucketing && u.id.encoding == t.cell.encoding && u.id.model == t.cell.model)
            .and_then(|u| u.buckets.iter().find(|b| b.bucket.to_string() == t.bucket))
            .map_or(0, |b| b.width);
        let name = format!(
            "{}/{}/{}-{}/{}/{}",
            t.cell.dataset,
            t.cell.variant,
            t.cell.bucketing.name(),
            t.cell.encoding.name(),
            t.cell.model.name(),
            t.cell.method.name()
        );
        out!("{name:<44} {:<6} {width:>6} {:>10.4} {:>10.4}", t.bucket, t.setup_s, t.compute_s);
    }
    let errors: usize = r
        .cells
        .iter()
        .map(|c| usize::from(c.error.is_some()) + c.buckets.iter().filter(|b| b.error.is_some()).count())
        .sum();
    out!("{} cells, {} skipped, {} error records", r.cells.len(), r.skipped.len(), errors);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_subcommand_is_user_error() {
        assert_eq!(dispatch(["ppm-xai", "frobnicate"]), 1);
        assert_eq!(dispatch(["ppm-xai", "stats", "--bogus"]), 1);
    }

    #[test]
    fn columns_path_default() {
        assert_eq!(
            default_columns_path(Path::new("out/bucket_ALL.train.csv")),
            PathBuf::from("out/bucket_ALL.columns.json")
        );
    }
}
