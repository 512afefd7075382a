use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::timing::{time_explainer, timed_exclusive, Timeable, TimingRecord, TimingTarget};
use super::{
    variant_name, BucketExplanation, BucketModel, CellId, CellResult, DatasetConfig, DatasetSource, ExperimentConfig,
    GridResults, Method, Preprocessing, PredictionTiming, SkippedCell, UnitId, UnitResult,
};
use crate::bucketing::{assign_buckets, lookup_bucket, BucketKey};
use crate::encoding::{fit_encoder, EncodingStrategy, FeatureMatrix};
use crate::error::{Error, Result};
use crate::eventlog::{apply_labeling, generate_synthetic_log, parse_event_log, temporal_split, LabeledLog};
use crate::explainers::{
    decision_path_data, pfi, sample_background, shap_dependence_data, shap_global, shap_kernel, shap_linear,
    AleExplainer, ALECurve, Attribution, GlobalExplanation, LimeContext, LimeExplanation, ale_global_rank,
};
use crate::models::{evaluate, intrinsic_importance, random_search, train, Model, ModelKind, Predictor, SearchSpace};
use crate::prefixing::{build_prefix_log, Prefix, PrefixSpec};
use crate::stability::{global_run_consistency, stability_report};
use crate::util::{derive_seed, mean};

pub fn load_dataset(d: &DatasetConfig) -> Result<LabeledLog> {
    match &d.source {
        DatasetSource::Synthetic { config } => generate_synthetic_log(config),
        DatasetSource::Csv { log, schema, labeling } => apply_labeling(&parse_event_log(log, schema)?, labeling),
    }
}

/// Picks up to `n` row indices, alternating between rows predicted positive
/// and negative (each group in seeded random order) so both classes are
/// represented whenever possible.
pub fn sample_local_rows(predicted_positive: &[bool], n: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["local_rows"]));
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = (0..predicted_positive.len()).partition(|&i| predicted_positive[i]);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut out = Vec::with_capacity(n);
    let (mut a, mut b) = (pos.into_iter(), neg.into_iter());
    while out.len() < n {
        let mut progressed = false;
        for it in [&mut a, &mut b] {
            if out.len() < n {
                if let Some(i) = it.next() {
                    out.push(i);
                    progressed = true;
                }
            }
        }
        if !progressed {
            break;
        }
    }
    out
}

struct UnitPlan<'a> {
    id: UnitId,
    dataset: &'a std::result::Result<(LabeledLog, LabeledLog), String>,
    spec: PrefixSpec,
    preprocessing: Preprocessing,
    space: &'a SearchSpace,
}

struct UnitOutput {
    unit: UnitResult,
    cells: Vec<CellResult>,
    timings: Vec<TimingRecord>,
    prediction_times: Vec<PredictionTiming>,
}

fn space_kind(space: &SearchSpace) -> ModelKind {
    match space {
        SearchSpace::Logit(_) => ModelKind::Logit,
        SearchSpace::Gbt(_) => ModelKind::Gbt,
    }
}

/// Runs the whole grid. Failures inside a unit or cell are recorded in the
/// results; only an invalid config is an error.
pub fn run_grid(cfg: &ExperimentConfig) -> Result<GridResults> {
    cfg.validate()?;
    let datasets: Vec<std::result::Result<(LabeledLog, LabeledLog), String>> = cfg
        .datasets
        .iter()
        .map(|d| {
            load_dataset(d)
                .and_then(|l| temporal_split(&l, cfg.train_ratio))
                .map_err(|e| e.to_string())
        })
        .collect();
    let mut plans = Vec::new();
    let mut skipped = Vec::new();
    for (d, data) in cfg.datasets.iter().zip(&datasets) {
        for spec in &cfg.prefix_specs {
            for pre in &cfg.preprocessing {
                for space in &cfg.models {
                    let id = UnitId {
                        dataset: d.name.clone(),
                        variant: variant_name(spec),
                        bucketing: pre.bucketing,
                        encoding: pre.encoding,
                        model: space_kind(space),
                    };
                    if !pre.bucketing.is_supported() {
                        for &m in &cfg.methods {
                            skipped.push(SkippedCell {
                                id: id.with_method(m),
                                reason: Error::UnsupportedStrategy(pre.bucketing.name().into()).to_string(),
                            });
                        }
                        continue;
                    }
                    plans.push(UnitPlan {
                        id,
                        dataset: data,
                        spec: *spec,
                        preprocessing: *pre,
                        space,
                    });
                }
            }
        }
    }

    let outputs: Mutex<Vec<Option<UnitOutput>>> = Mutex::new((0..plans.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = cfg.jobs.min(plans.len()).max(1);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= plans.len() {
                    break;
                }
                let out = run_unit(cfg, &plans[i]);
                outputs.lock().unwrap_or_else(|p| p.into_inner())[i] = Some(out);
            });
        }
    });

    let mut results = GridResults {
        name: cfg.name.clone(),
        master_seed: cfg.seed,
        units: Vec::new(),
        cells: Vec::new(),
        skipped,
        timings: Vec::new(),
        prediction_times: Vec::new(),
    };
    for out in outputs.into_inner().unwrap_or_else(|p| p.into_inner()).into_iter().flatten() {
        results.units.push(out.unit);
        results.cells.extend(out.cells);
        results.timings.extend(out.timings);
        results.prediction_times.extend(out.prediction_times);
    }
    Ok(results)
}

/// Everything a method needs for one bucket.
struct Prepared {
    key: BucketKey,
    prefix_len: usize,
    x_train: FeatureMatrix,
    x_explain: FeatureMatrix,
    explained_on: &'static str,
    model: Model,
    local_rows: Vec<usize>,
    global_rows: Vec<usize>,
}

fn bucket_prefix_len(key: BucketKey, spec: &PrefixSpec) -> usize {
    match key {
        BucketKey::Length(l) => l,
        BucketKey::All => spec.max_prefix_len,
    }
}

fn two_classes(labels: &[bool]) -> bool {
    labels.iter().any(|&l| l) && labels.iter().any(|&l| !l)
}

fn failed_unit(plan: &UnitPlan, cfg: &ExperimentConfig, msg: String) -> UnitOutput {
    UnitOutput {
        unit: UnitResult {
            id: plan.id.clone(),
            buckets: Vec::new(),
            unrouted_test_prefixes: 0,
            error: Some(msg.clone()),
        },
        cells: cfg
            .methods
            .iter()
            .map(|&m| CellResult {
                id: plan.id.with_method(m),
                buckets: Vec::new(),
                error: Some(msg.clone()),
            })
            .collect(),
        timings: Vec::new(),
        prediction_times: Vec::new(),
    }
}

fn unit_seed(cfg: &ExperimentConfig, id: &UnitId) -> u64 {
    derive_seed(
        cfg.seed,
        &[&id.dataset, &id.variant, id.bucketing.name(), id.encoding.name(), id.model.name()],
    )
}

fn run_unit(cfg: &ExperimentConfig, plan: &UnitPlan) -> UnitOutput {
    let (train_log, test_log) = match plan.dataset {
        Ok(v) => v,
        Err(e) => return failed_unit(plan, cfg, e.clone()),
    };
    let staged = (|| -> Result<_> {
        let plog_train = build_prefix_log(train_log, plan.spec)?;
        let plog_test = build_prefix_log(test_log, plan.spec)?;
        let blog = assign_buckets(&plog_train, plan.preprocessing.bucketing)?;
        Ok((plog_train.schema, plog_test, blog))
    })();
    let (schema, plog_test, blog) = match staged {
        Ok(v) => v,
        Err(e) => return failed_unit(plan, cfg, e.to_string()),
    };
    let mut routed: BTreeMap<BucketKey, Vec<Prefix>> = BTreeMap::new();
    let mut unrouted = 0;
    for p in plog_test.prefixes {
        match lookup_bucket(&blog, &p) {
            Ok(k) => routed.entry(k).or_default().push(p),
            Err(_) => unrouted += 1,
        }
    }

    let seed = unit_seed(cfg, &plan.id);
    let mut models = Vec::new();
    let mut prepared: Vec<std::result::Result<Prepared, (BucketKey, usize, String)>> = Vec::new();
    let mut prediction_times = Vec::new();
    for (key, train_prefixes) in &blog.buckets {
        let prefix_len = bucket_prefix_len(*key, &plan.spec);
        let test_prefixes = routed.get(key).map_or(&[][..], Vec::as_slice);
        let bucket_seed = derive_seed(seed, &["bucket", &key.to_string()]);
        let mut record = BucketModel {
            bucket: *key,
            prefix_len,
            n_train_rows: train_prefixes.len(),
            n_test_rows: test_prefixes.len(),
            width: 0,
            schema_hash: String::new(),
            hyper: None,
            search_trials: Vec::new(),
            eval: None,
            error: None,
        };
        let result = (|| -> Result<Prepared> {
            let index_len = (plan.preprocessing.encoding == EncodingStrategy::Index).then_some(prefix_len);
            let enc = fit_encoder(&schema, train_prefixes, plan.preprocessing.encoding, index_len)?;
            let x_train = enc.encode_bucket(train_prefixes)?;
            record.width = x_train.n_cols();
            record.schema_hash = x_train.schema_hash();
            let x_test = if test_prefixes.is_empty() {
                None
            } else {
                Some(enc.encode_bucket(test_prefixes)?)
            };
            let search = random_search(&x_train, plan.space, cfg.search_budget, cfg.val_ratio, bucket_seed)?;
            record.hyper = Some(search.best);
            record.search_trials = search.trials;
            let (model, train_s) = timed_exclusive(|| train(&x_train, &search.best));
            let model = model?;
            if let Some(xt) = &x_test {
                record.eval = Some(evaluate(&model, xt)?);
            }
            let predict_on = x_test.as_ref().unwrap_or(&x_train);
            let trials: Vec<f64> = (0..cfg.explainers.prediction_trials)
                .map(|_| timed_exclusive(|| model.predict_proba(&predict_on.rows)).1)
                .collect();
            prediction_times.push(PredictionTiming {
                unit: plan.id.clone(),
                bucket: key.to_string(),
                prefix_len,
                train_s,
                predict_s: mean(&trials),
                predict_trials: trials,
            });
            let (x_explain, explained_on) = match x_test {
                Some(xt) if two_classes(&xt.labels) => (xt, "test"),
                _ => (x_train.clone(), "train"),
            };
            let predicted: Vec<bool> = x_explain.rows.iter().map(|r| model.margin(r) >= 0.0).collect();
            let local_rows = sample_local_rows(&predicted, cfg.explainers.local_rows, bucket_seed);
            let n = x_explain.n_rows();
            let global_rows = if n <= cfg.explainers.global_rows {
                (0..n).collect()
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(bucket_seed, &["global_rows"]));
                let mut idx = sample(&mut rng, n, cfg.explainers.global_rows).into_vec();
                idx.sort_unstable();
                idx
            };
            Ok(Prepared {
                key: *key,
                prefix_len,
                x_train,
                x_explain,
                explained_on,
                model,
                local_rows,
                global_rows,
            })
        })();
        match result {
            Ok(p) => prepared.push(Ok(p)),
            Err(e) => {
                record.error = Some(e.to_string());
                prepared.push(Err((*key, prefix_len, e.to_string())));
            }
        }
        models.push(record);
    }

    let mut cells = Vec::new();
    let mut timings = Vec::new();
    for &method in &cfg.methods {
        let cell = plan.id.with_method(method);
        let cell_seed = derive_seed(seed, &["method", method.name()]);
        let mut buckets = Vec::new();
        for p in &prepared {
            match p {
                Ok(p) => {
                    let (b, t) = explain_bucket(cfg, &cell, method, p, derive_seed(cell_seed, &[&p.key.to_string()]));
                    buckets.push(b);
                    timings.extend(t);
                }
                Err((key, prefix_len, msg)) => buckets.push(BucketExplanation {
                    bucket: key.to_string(),
                    prefix_len: *prefix_len,
                    error: Some(format!("bucket not prepared: {msg}")),
                    ..BucketExplanation::default()
                }),
            }
        }
        cells.push(CellResult {
            id: cell,
            buckets,
            error: None,
        });
    }
    UnitOutput {
        unit: UnitResult {
            id: plan.id.clone(),
            buckets: models,
            unrouted_test_prefixes: unrouted,
            error: None,
        },
        cells,
        timings,
        prediction_times,
    }
}

fn explain_bucket(
    cfg: &ExperimentConfig,
    cell: &CellId,
    method: Method,
    p: &Prepared,
    seed: u64,
) -> (BucketExplanation, Option<TimingRecord>) {
    let mut out = BucketExplanation {
        bucket: p.key.to_string(),
        prefix_len: p.prefix_len,
        explained_on: p.explained_on.to_string(),
        n_rows: p.x_explain.n_rows(),
        n_features: p.x_explain.n_cols(),
        ..BucketExplanation::default()
    };
    let target = TimingTarget {
        cell: cell.clone(),
        bucket: p.key.to_string(),
        prefix_len: p.prefix_len,
    };
    let reps = cfg.explainers.timing_repetitions;
    let result = (|| -> Result<TimingRecord> {
        match method {
            Method::Pfi => {
                let mut job = PfiJob { p, iters: cfg.explainers.pfi_iterations, seed, out: None };
                let timing = time_explainer(target, &mut job, reps)?;
                let first = job.out.take().expect("computed");
                let second = pfi(&p.model, &p.x_explain, job.iters, derive_seed(seed, &["rerun"]))?;
                out.rerun_consistency = Some(global_run_consistency(&first, &second, cfg.explainers.top_k)?);
                out.global = Some(first);
                Ok(timing)
            }
            Method::Ale => {
                let mut job = AleJob { p, bins: cfg.explainers.ale_bins, explainer: None, out: None };
                let timing = time_explainer(target, &mut job, reps)?;
                let (curves, global) = job.out.take().expect("computed");
                let again = AleExplainer::new(&p.x_explain, cfg.explainers.ale_bins)?.curves(&p.model, &p.x_explain)?;
                let second = ale_global_rank(&again, &p.x_explain.column_names());
                out.rerun_consistency = Some(global_run_consistency(&global, &second, cfg.explainers.top_k)?);
                out.ale_curves = curves;
                out.global = Some(global);
                Ok(timing)
            }
            Method::Shap => {
                let mut job = ShapJob::new(cfg, p, seed);
                let timing = time_explainer(target, &mut job, reps)?;
                let global = job.global.take().expect("computed");
                let mut gap = job.attrs.iter().map(Attribution::local_accuracy_gap).fold(0.0, f64::max);
                let mut rerun = ShapJob::new(cfg, p, derive_seed(seed, &["rerun"]));
                rerun.setup()?;
                rerun.compute()?;
                out.rerun_consistency =
                    Some(global_run_consistency(&global, rerun.global.as_ref().expect("computed"), cfg.explainers.top_k)?);
                let names = p.x_explain.column_names();
                let local: Vec<Attribution> = p
                    .local_rows
                    .iter()
                    .map(|&i| job.attribute(i).map(|a| a.with_row_id(p.x_explain.row_ids[i].clone())))
                    .collect::<Result<_>>()?;
                gap = local.iter().map(Attribution::local_accuracy_gap).fold(gap, f64::max);
                out.decision_paths = local
                    .iter()
                    .map(|a| decision_path_data(a, &names, cfg.explainers.decision_top_n))
                    .collect();
                let sub = p.x_explain.select(&p.global_rows);
                out.dependence = global
                    .ranking
                    .iter()
                    .find_map(|&j| shap_dependence_data(&job.attrs, &sub, j, None).ok());
                out.attributions = local;
                out.max_local_accuracy_gap = Some(gap);
                out.global = Some(global);
                Ok(timing)
            }
            Method::Lime => {
                let mut job = LimeJob { p, cfg, seed, ctx: None, out: Vec::new() };
                let timing = time_explainer(target, &mut job, reps)?;
                let ctx = job.ctx.take().expect("set up");
                let mut reports = Vec::new();
                for (r, &i) in p.local_rows.iter().enumerate() {
                    let mut runs = vec![job.out[r].clone()];
                    for run in 1..cfg.explainers.lime_runs {
                        runs.push(ctx.explain(&p.model, &p.x_explain.rows[i], &cfg.explainers.lime, lime_seed(seed, r, run))?);
                    }
                    reports.push(stability_report(&runs, cfg.explainers.lime.k, cfg.explainers.cv_threshold)?);
                }
                if !reports.is_empty() {
                    out.mean_vsi = Some(reports.iter().map(|s| s.vsi).sum::<f64>() / reports.len() as f64);
                    out.mean_csi = Some(reports.iter().map(|s| s.csi).sum::<f64>() / reports.len() as f64);
                }
                out.lime = std::mem::take(&mut job.out);
                out.lime_stability = reports;
                Ok(timing)
            }
            Method::Intrinsic => {
                let mut job = IntrinsicJob { p, out: None };
                let timing = time_explainer(target, &mut job, reps)?;
                let global = job.out.take().expect("computed");
                out.rerun_consistency = Some(global_run_consistency(&global, &intrinsic_importance(&p.model), cfg.explainers.top_k)?);
                out.global = Some(global);
                Ok(timing)
            }
        }
    })();
    match result {
        Ok(t) => (out, Some(t)),
        Err(e) => {
            out.error = Some(e.to_string());
            (out, None)
        }
    }
}

fn lime_seed(seed: u64, row: usize, run: usize) -> u64 {
    derive_seed(seed, &["lime", &row.to_string(), &run.to_string()])
}

struct PfiJob<'a> {
    p: &'a Prepared,
    iters: usize,
    seed: u64,
    out: Option<GlobalExplanation>,
}

impl Timeable for PfiJob<'_> {
    fn setup(&mut self) -> Result<()> {
        Ok(())
    }

    fn compute(&mut self) -> Result<()> {
        self.out = Some(pfi(&self.p.model, &self.p.x_explain, self.iters, self.seed)?);
        Ok(())
    }
}

struct AleJob<'a> {
    p: &'a Prepared,
    bins: usize,
    explainer: Option<AleExplainer>,
    out: Option<(Vec<ALECurve>, GlobalExplanation)>,
}

impl Timeable for AleJob<'_> {
    fn is_prepared(&self) -> bool {
        self.p.x_explain.n_rows() > 0
    }

    fn setup(&mut self) -> Result<()> {
        self.explainer = Some(AleExplainer::new(&self.p.x_explain, self.bins)?);
        Ok(())
    }

    fn compute(&mut self) -> Result<()> {
        let ale = self.explainer.as_ref().ok_or_else(|| Error::CellNotPrepared("ALE grid".into()))?;
        let curves = ale.curves(&self.p.model, &self.p.x_explain)?;
        let global = ale_global_rank(&curves, &self.p.x_explain.column_names());
        self.out = Some((curves, global));
        Ok(())
    }
}

struct ShapJob<'a> {
    p: &'a Prepared,
    background_rows: usize,
    samples: usize,
    seed: u64,
    background: Vec<Vec<f64>>,
    attrs: Vec<Attribution>,
    global: Option<GlobalExplanation>,
}

impl<'a> ShapJob<'a> {
    fn new(cfg: &ExperimentConfig, p: &'a Prepared, seed: u64) -> Self {
        ShapJob {
            p,
            background_rows: cfg.explainers.shap_background,
            samples: cfg.explainers.shap_samples.max(2 * p.x_explain.n_cols() + 2),
            seed,
            background: Vec::new(),
            attrs: Vec::new(),
            global: None,
        }
    }

    /// Closed form for logistic regression, kernel SHAP otherwise.
    fn attribute(&self, i: usize) -> Result<Attribution> {
        let row = &self.p.x_explain.rows[i];
        match self.p.model.kind {
            ModelKind::Logit => shap_linear(&self.p.model, row, &self.background),
            ModelKind::Gbt => shap_kernel(
                &self.p.model,
                row,
                &self.background,
                self.samples,
                derive_seed(self.seed, &["row", &i.to_string()]),
            ),
        }
    }
}

impl Timeable for ShapJob<'_> {
    fn setup(&mut self) -> Result<()> {
        self.background = sample_background(&self.p.x_train, self.background_rows, self.seed);
        Ok(())
    }

    fn compute(&mut self) -> Result<()> {
        self.attrs = self
            .p
            .global_rows
            .iter()
            .map(|&i| self.attribute(i))
            .collect::<Result<_>>()?;
        self.global = Some(shap_global(&self.attrs, &self.p.x_explain.column_names())?);
        Ok(())
    }
}

struct LimeJob<'a> {
    p: &'a Prepared,
    cfg: &'a ExperimentConfig,
    seed: u64,
    ctx: Option<LimeContext>,
    out: Vec<LimeExplanation>,
}

impl Timeable for LimeJob<'_> {
    fn setup(&mut self) -> Result<()> {
        self.ctx = Some(LimeContext::new(&self.p.x_train)?);
        Ok(())
    }

    fn compute(&mut self) -> Result<()> {
        let ctx = self.ctx.as_ref().ok_or_else(|| Error::CellNotPrepared("LIME context".into()))?;
        self.out = self
            .p
            .local_rows
            .iter()
            .enumerate()
            .map(|(r, &i)| ctx.explain(&self.p.model, &self.p.x_explain.rows[i], &self.cfg.explainers.lime, lime_seed(self.seed, r, 0)))
            .collect::<Result<_>>()?;
        Ok(())
    }
}

/// Times a fresh training run with the selected hyperparameters.
struct IntrinsicJob<'a> {
    p: &'a Prepared,
    out: Option<GlobalExplanation>,
}

impl Timeable for IntrinsicJob<'_> {
    fn setup(&mut self) -> Result<()> {
        Ok(())
    }

    fn compute(&mut self) -> Result<()> {
        let m = train(&self.p.x_train, &self.p.model.hyper)?;
        self.out = Some(intrinsic_importance(&m));
        Ok(())
    }
}
