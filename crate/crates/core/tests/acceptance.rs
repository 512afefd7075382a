//! Acceptance checks, one line per criterion. Run with
//! `cargo test --release --test acceptance`.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::AssertUnwindSafe;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ppm_xai::bench::{run_grid, DatasetSource, ExperimentConfig, GridResults, Method};
use ppm_xai::bucketing::{assign_buckets, lookup_bucket, BucketingStrategy};
use ppm_xai::encoding::{fit_encoder, EncodingKind, EncodingStrategy, FeatureColumn, FeatureMatrix};
use ppm_xai::eventlog::{
    generate_synthetic_log, Scope, SignalPlan, SignalSource, SynthConfig, Value, ACTIVITY,
};
use ppm_xai::explainers::{
    decision_path_data, pfi, sample_background, shap_dependence_data, shap_exact, shap_kernel, shap_linear,
    AleExplainer, Attribution, LimeContext, LimeExplanation, LimeFeature, LimeParams,
};
use ppm_xai::models::{
    evaluate, train, Diagnostics, GbtParams, HyperParams, LogitParams, Model, ModelKind, ModelParams, Predictor,
};
use ppm_xai::prefixing::{build_prefix_log, prefix_lengths, PrefixSpec};
use ppm_xai::stability::{csi, stability_report, vsi, DEFAULT_CV_THRESHOLD};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn logit_model(weights: Vec<f64>, bias: f64) -> Model {
    let n = weights.len();
    Model {
        kind: ModelKind::Logit,
        params: ModelParams::Logit { weights },
        base_score: bias,
        training_schema: (0..n).map(|j| FeatureColumn::numeric(format!("x{j}"))).collect(),
        hyper: HyperParams::Logit(LogitParams::default()),
        diagnostics: Diagnostics::default(),
    }
}

fn uniform_rows(rng: &mut ChaCha8Rng, n: usize, m: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..m).map(|_| rng.random_range(lo..hi)).collect()).collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn background_mean(model: &dyn Predictor, bg: &[Vec<f64>]) -> f64 {
    bg.iter().map(|r| model.margin(r)).sum::<f64>() / bg.len() as f64
}

/// Nonlinear test function with pairwise interactions and a kink.
fn interaction_fn(coef: Vec<f64>, pairs: Vec<(usize, usize, f64)>) -> impl Fn(&[f64]) -> f64 + Sync {
    move |x: &[f64]| {
        let lin: f64 = coef.iter().zip(x).map(|(c, v)| c * v).sum();
        let inter: f64 = pairs.iter().map(|&(i, j, c)| c * x[i] * x[j]).sum();
        lin + inter + x[0].max(0.2).sin()
    }
}

fn shapley_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    let mut worst_axiom: f64 = 0.0;
    for case in 0..60 {
        let m = rng.random_range(2..=10usize);
        let n_bg = rng.random_range(3..12);
        let bg = uniform_rows(&mut rng, n_bg, m, -1.0, 1.0);
        let row: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let seed = case as u64;
        match case % 3 {
            0 => {
                let model = logit_model((0..m).map(|_| rng.random_range(-2.0..2.0)).collect(), 0.3);
                let ex = shap_exact(&model, &row, &bg).map_err(|e| e.to_string())?;
                let lin = shap_linear(&model, &row, &bg).map_err(|e| e.to_string())?;
                let ker = shap_kernel(&model, &row, &bg, 1 << m, seed).map_err(|e| e.to_string())?;
                worst = worst.max(max_abs_diff(&lin.phi, &ex.phi)).max(max_abs_diff(&ker.phi, &ex.phi));
                worst_axiom = worst_axiom.max(efficiency_gap(&model, &row, &bg, &ex));
            }
            1 => {
                let x = FeatureMatrix::from_rows(
                    uniform_rows(&mut rng, 150, m, -1.0, 1.0),
                    (0..150).map(|_| rng.random_bool(0.5)).collect(),
                )
                .map_err(|e| e.to_string())?;
                let rows = x.rows.clone();
                let labels = rows.iter().map(|r| r[0] * r[m - 1] > 0.0).collect();
                let x = FeatureMatrix::from_rows(rows, labels).map_err(|e| e.to_string())?;
                let gbt = train(&x, &HyperParams::Gbt(GbtParams { n_trees: 15, max_depth: 3, ..GbtParams::default() }))
                    .map_err(|e| e.to_string())?;
                let ex = shap_exact(&gbt, &row, &bg).map_err(|e| e.to_string())?;
                let ker = shap_kernel(&gbt, &row, &bg, 1 << m, seed).map_err(|e| e.to_string())?;
                worst = worst.max(max_abs_diff(&ker.phi, &ex.phi));
                worst_axiom = worst_axiom.max(efficiency_gap(&gbt, &row, &bg, &ex));
            }
            _ => {
                let coef: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
                let pairs = (0..m).map(|i| (i, (i + 1) % m, rng.random_range(-1.0..1.0))).collect();
                let model = (m, interaction_fn(coef, pairs));
                let ex = shap_exact(&model, &row, &bg).map_err(|e| e.to_string())?;
                let ker = shap_kernel(&model, &row, &bg, 1 << m, seed).map_err(|e| e.to_string())?;
                worst = worst.max(max_abs_diff(&ker.phi, &ex.phi));
                worst_axiom = worst_axiom.max(efficiency_gap(&model, &row, &bg, &ex));
            }
        }
        cases += 1;
    }

    // Dummy and symmetry: f ignores x3 and is symmetric in (x0, x1); the
    // background is symmetric under swapping columns 0 and 1.
    let f = (5usize, |x: &[f64]| x[0] * x[1] + x[0] + x[1] + (x[2] * x[4]).tanh());
    let mut bg = uniform_rows(&mut rng, 8, 5, -1.0, 1.0);
    for r in &mut bg {
        r[1] = r[0];
    }
    let row = [0.4, 0.4, -0.3, 0.9, 0.7];
    for a in [shap_exact(&f, &row, &bg), shap_kernel(&f, &row, &bg, 32, 0)] {
        let a = a.map_err(|e| e.to_string())?;
        worst_axiom = worst_axiom.max(a.phi[3].abs()).max((a.phi[0] - a.phi[1]).abs());
        worst_axiom = worst_axiom.max(efficiency_gap(&f, &row, &bg, &a));
    }
    check(
        cases >= 50 && worst <= 1e-6 && worst_axiom <= 1e-9,
        format!("{cases} cases, M<=10, max |phi - exact| {worst:.1e}, max axiom violation {worst_axiom:.1e}"),
    )
}

fn efficiency_gap(model: &dyn Predictor, row: &[f64], bg: &[Vec<f64>], a: &Attribution) -> f64 {
    let sum: f64 = a.phi.iter().sum();
    (sum - (model.margin(row) - background_mean(model, bg))).abs()
}

fn local_accuracy() -> Outcome {
    let log = generate_synthetic_log(&SynthConfig { trace_count: 150, seed: 21, ..SynthConfig::default() })
        .map_err(|e| e.to_string())?;
    let plog = build_prefix_log(&log, PrefixSpec::new(5, 1).unwrap()).map_err(|e| e.to_string())?;
    let enc = fit_encoder(&plog.schema, &plog.prefixes, EncodingStrategy::LastState, None).map_err(|e| e.to_string())?;
    let x = enc.encode_bucket(&plog.prefixes).map_err(|e| e.to_string())?;
    let bg = sample_background(&x, 40, 1);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for hp in [HyperParams::Logit(LogitParams::default()), HyperParams::Gbt(GbtParams { n_trees: 40, ..GbtParams::default() })] {
        let model = train(&x, &hp).map_err(|e| e.to_string())?;
        for i in (0..x.n_rows()).step_by(x.n_rows() / 15) {
            let row = &x.rows[i];
            let a = match model.kind {
                ModelKind::Logit => shap_linear(&model, row, &bg),
                ModelKind::Gbt => shap_kernel(&model, row, &bg, 2 * row.len() + 200, i as u64),
            }
            .map_err(|e| e.to_string())?;
            let margin = model.margin(row);
            let path = decision_path_data(&a, &x.column_names(), 8);
            worst = worst
                .max((a.base_value + a.phi.iter().sum::<f64>() - margin).abs())
                .max((path.endpoint() - margin).abs());
            n += 1;
        }
    }
    // Every attribution and decision path emitted by the desk grid.
    let grid = &desk().results;
    let mut emitted = 0;
    for cell in grid.cells.iter().filter(|c| c.id.method == Method::Shap) {
        for b in &cell.buckets {
            worst = worst.max(b.max_local_accuracy_gap.ok_or("SHAP bucket without accuracy gap")?);
            for (a, p) in b.attributions.iter().zip(&b.decision_paths) {
                worst = worst.max(a.local_accuracy_gap()).max((p.endpoint() - a.predicted).abs());
                emitted += 1;
            }
        }
    }
    check(
        worst <= 1e-6 && emitted > 0,
        format!("{n} direct + {emitted} grid attributions, max gap {worst:.1e}"),
    )
}

fn ale_linear_recovery() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let w = vec![2.0, -1.5, 0.5, 0.0, 0.0];
    let rows = uniform_rows(&mut rng, 2000, w.len(), 0.0, 1.0);
    let labels = rows.iter().map(|r| r[0] > 0.5).collect();
    let x = FeatureMatrix::from_rows(rows, labels).map_err(|e| e.to_string())?;
    let model = logit_model(w.clone(), -0.25);
    let curves = AleExplainer::new(&x, 10).map_err(|e| e.to_string())?.curves(&model, &x).map_err(|e| e.to_string())?;
    let mut worst_rel: f64 = 0.0;
    let mut dummies_flat = true;
    for c in &curves {
        let wj = w[c.feature_index];
        if wj == 0.0 {
            dummies_flat &= c.effects.iter().all(|&e| e == 0.0);
            continue;
        }
        let n = c.edges.len() as f64;
        let mx = c.edges.iter().sum::<f64>() / n;
        let my = c.effects.iter().sum::<f64>() / n;
        let sxy: f64 = c.edges.iter().zip(&c.effects).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = c.edges.iter().map(|a| (a - mx).powi(2)).sum();
        worst_rel = worst_rel.max(((sxy / sxx) - wj).abs() / wj.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        curves.len() == w.len() && worst_rel <= 0.01 && dummies_flat && secs < 30.0,
        format!("max relative slope error {worst_rel:.1e}, dummy curves zero: {dummies_flat}, {secs:.2}s"),
    )
}

fn pfi_null_signal() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let rows = uniform_rows(&mut rng, 2000, 2, 0.0, 1.0);
    let labels = rows.iter().map(|r| r[0] > 0.5).collect();
    let x = FeatureMatrix::from_rows(rows, labels).map_err(|e| e.to_string())?;
    let model = train(&x, &HyperParams::Logit(LogitParams::default())).map_err(|e| e.to_string())?;
    let auc = evaluate(&model, &x).map_err(|e| e.to_string())?.auc.unwrap_or(0.0);
    let g = pfi(&model, &x, 10, 5).map_err(|e| e.to_string())?;
    let (signal, dummy) = (g.scores[0], g.scores[1]);
    check(
        (signal - 0.5).abs() <= 0.05 && dummy.abs() <= 0.01,
        format!("model AUC {auc:.4}, perfect feature {signal:.4}, dummy {dummy:.2e}"),
    )
}

/// Observed levels plus the two reserved `other` and `missing` columns.
fn vocab_size(prefixes: &[ppm_xai::prefixing::Prefix], attr: &str, scope: Scope) -> usize {
    let mut levels = BTreeSet::new();
    for p in prefixes {
        match scope {
            Scope::Static => {
                if let Some(Value::Cat(v)) = p.static_values.get(attr) {
                    levels.insert(v.clone());
                }
            }
            Scope::Dynamic => {
                for e in &p.events {
                    if attr == ACTIVITY {
                        levels.insert(e.activity.clone());
                    } else if let Some(Value::Cat(v)) = e.values.get(attr) {
                        levels.insert(v.clone());
                    }
                }
            }
        }
    }
    levels.len() + 2
}

fn encoding_widths() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut padded_checked = 0;
    for case in 0..200 {
        let sc = rng.random_range(0..3);
        let sn = rng.random_range(0..3);
        let dc = rng.random_range(0..4);
        let dn = rng.random_range(0..3);
        let acts = rng.random_range(1..7);
        let cfg = SynthConfig {
            trace_count: rng.random_range(8..30),
            min_len: 1,
            max_len: rng.random_range(2..9),
            activity_count: acts,
            static_categorical: sc,
            static_levels: rng.random_range(1..6),
            static_numeric: sn,
            dynamic_categorical: dc,
            dynamic_levels: rng.random_range(1..8),
            dynamic_numeric: dn,
            missing_rate: if case % 4 == 0 { 0.1 } else { 0.0 },
            signal: SignalPlan {
                source: SignalSource::ActivityOccurs { activity: "act_00".into() },
                strength: 0.8,
            },
            seed: case,
            ..SynthConfig::default()
        };
        let log = generate_synthetic_log(&cfg).map_err(|e| e.to_string())?;
        let k = rng.random_range(1..7);
        let plog = build_prefix_log(&log, PrefixSpec::new(k, 1).unwrap()).map_err(|e| e.to_string())?;
        let bucket = &plog.prefixes;
        let static_part = (0..sc).map(|i| vocab_size(bucket, &format!("static_cat_{i}"), Scope::Static)).sum::<usize>() + sn;
        let dyn_cat = vocab_size(bucket, ACTIVITY, Scope::Dynamic)
            + (0..dc).map(|i| vocab_size(bucket, &format!("dyn_cat_{i}"), Scope::Dynamic)).sum::<usize>();
        // two derived numeric attributes: time since last event, event number
        let dyn_num = dn + 2;
        for (strategy, expected) in [
            (EncodingStrategy::Aggregation, static_part + dyn_cat + 5 * dyn_num),
            (EncodingStrategy::Index, static_part + k * (dyn_cat + dyn_num)),
            (EncodingStrategy::LastState, static_part + dyn_cat + dyn_num),
        ] {
            let enc = fit_encoder(&plog.schema, bucket, strategy, Some(k)).map_err(|e| e.to_string())?;
            let x = enc.encode_bucket(bucket).map_err(|e| e.to_string())?;
            if x.n_cols() != expected || x.rows.iter().any(|r| r.len() != expected) {
                return Err(format!("case {case}: {} width {} != {expected}", strategy.name(), x.n_cols()));
            }
            if strategy == EncodingStrategy::Index {
                for (row, p) in x.rows.iter().zip(bucket) {
                    for (c, v) in x.columns.iter().zip(row) {
                        let Some(pos) = c.event_index else { continue };
                        if pos <= p.prefix_len {
                            continue;
                        }
                        let pad = match c.encoding_kind {
                            EncodingKind::IndexOnehot => 0.0,
                            _ => enc.means[&c.origin_attribute],
                        };
                        if *v != pad {
                            return Err(format!("case {case}: column {} not padded", c.name));
                        }
                        padded_checked += 1;
                    }
                }
            }
        }
    }
    check(true, format!("200 schemas x 3 encodings exact, {padded_checked} padded cells verified"))
}

fn prefix_bucket_algebra() -> Outcome {
    let mut checked = 0;
    for seed in 0..20u64 {
        let log = generate_synthetic_log(&SynthConfig {
            trace_count: 40,
            min_len: 1,
            max_len: 14,
            seed,
            ..SynthConfig::default()
        })
        .map_err(|e| e.to_string())?;
        let spec = PrefixSpec::new(1 + (seed as usize % 10), 1 + (seed as usize % 4)).unwrap();
        let plog = build_prefix_log(&log, spec).map_err(|e| e.to_string())?;
        let expected: usize = log.log.traces.iter().map(|t| prefix_lengths(t.len(), spec).len()).sum();
        if plog.prefixes.len() != expected {
            return Err(format!("seed {seed}: {} prefixes, expected {expected}", plog.prefixes.len()));
        }
        for strategy in [BucketingStrategy::Single, BucketingStrategy::PrefixLength] {
            let blog = assign_buckets(&plog, strategy).map_err(|e| e.to_string())?;
            let mut seen: BTreeMap<(String, usize), usize> = BTreeMap::new();
            for (key, prefixes) in &blog.buckets {
                for p in prefixes {
                    *seen.entry((p.case_id.clone(), p.prefix_len)).or_default() += 1;
                    if lookup_bucket(&blog, p).map_err(|e| e.to_string())? != *key {
                        return Err(format!("seed {seed}: online lookup disagrees for {}", p.case_id));
                    }
                    checked += 1;
                }
            }
            let all: BTreeSet<_> = plog.prefixes.iter().map(|p| (p.case_id.clone(), p.prefix_len)).collect();
            if seen.len() != all.len() || seen.values().any(|&c| c != 1) || seen.keys().cloned().collect::<BTreeSet<_>>() != all {
                return Err(format!("seed {seed}: {} buckets do not partition the prefix log", strategy.name()));
            }
        }
    }
    check(true, format!("20 logs, counts exact, partitions hold, {checked} lookups agree"))
}

fn lime_run(features: &[(&str, f64)]) -> LimeExplanation {
    LimeExplanation {
        top_features: features
            .iter()
            .enumerate()
            .map(|(i, &(name, coefficient))| LimeFeature { index: i, name: name.into(), coefficient })
            .collect(),
        intercept: 0.0,
        surrogate_r2: 1.0,
        seed: 0,
        n_features: 10,
        predicted_proba: 0.5,
    }
}

fn stability_degenerate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rows = uniform_rows(&mut rng, 300, 6, 0.0, 1.0);
    let labels = rows.iter().map(|r| r[0] + r[1] > 1.0).collect();
    let x = FeatureMatrix::from_rows(rows, labels).map_err(|e| e.to_string())?;
    let model = train(&x, &HyperParams::Gbt(GbtParams { n_trees: 30, ..GbtParams::default() })).map_err(|e| e.to_string())?;
    let ctx = LimeContext::new(&x).map_err(|e| e.to_string())?;
    let params = LimeParams { k: 3, n_samples: 500, ..LimeParams::default() };
    let runs = (0..5)
        .map(|_| ctx.explain(&model, &x.rows[0], &params, 42))
        .collect::<ppm_xai::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let same = stability_report(&runs, 3, DEFAULT_CV_THRESHOLD).map_err(|e| e.to_string())?;

    let disjoint = vec![lime_run(&[("a", 1.0), ("b", 1.0)]), lime_run(&[("c", 1.0), ("d", 1.0)]), lime_run(&[("e", 1.0), ("f", 1.0)])];
    let v0 = vsi(&disjoint, 2).map_err(|e| e.to_string())?;

    let flipping = vec![
        lime_run(&[("a", 0.8), ("b", 0.5)]),
        lime_run(&[("a", -0.8), ("b", 0.5)]),
        lime_run(&[("a", 0.8), ("b", 0.52)]),
    ];
    let rep = stability_report(&flipping, 2, DEFAULT_CV_THRESHOLD).map_err(|e| e.to_string())?;
    let a_stable = rep.coefficient_stats.iter().find(|s| s.feature == "a").map(|s| s.stable);
    let only_a: Vec<_> = flipping.iter().map(|r| lime_run(&[("a", r.top_features[0].coefficient)])).collect();
    let csi_a = csi(&only_a).map_err(|e| e.to_string())?;
    check(
        same.vsi == 100.0 && same.csi == 100.0 && v0 == 0.0 && a_stable == Some(false) && csi_a == 0.0,
        format!(
            "fixed seed VSI {:.1} CSI {:.1}; disjoint VSI {v0:.1}; sign flip: feature stable {:?}, CSI {csi_a:.1} (mixed run {:.1})",
            same.vsi, same.csi, a_stable, rep.csi
        ),
    )
}

struct Desk {
    results: GridResults,
    secs: f64,
}

const DESK_CONFIG: &str = include_str!("../configs/desk.toml");

fn desk() -> &'static Desk {
    static DESK: OnceLock<Desk> = OnceLock::new();
    DESK.get_or_init(|| {
        let cfg = ExperimentConfig::from_toml(DESK_CONFIG).expect("desk config parses");
        let start = Instant::now();
        let results = run_grid(&cfg).expect("desk grid runs");
        Desk {
            results,
            secs: start.elapsed().as_secs_f64(),
        }
    })
}

/// Spearman correlation with average ranks for ties.
fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for &k in &idx[i..=j] {
                r[k] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn qualitative_desk() -> Outcome {
    let d = desk();
    let r = &d.results;
    let errors: Vec<String> = r
        .cells
        .iter()
        .flat_map(|c| c.buckets.iter().filter_map(|b| b.error.clone()).chain(c.error.clone()))
        .collect();
    if !errors.is_empty() {
        return Err(format!("{} explanation errors, first: {}", errors.len(), errors[0]));
    }
    let models: BTreeSet<_> = r.cells.iter().map(|c| c.id.model.name()).collect();
    let pre: BTreeSet<_> = r.cells.iter().map(|c| (c.id.bucketing.name(), c.id.encoding.name())).collect();

    // (a) LR vs GBT explanation time, per preprocessing cell and bucket.
    type Group = (String, String, String, String, String);
    let key = |t: &ppm_xai::bench::TimingRecord| -> Group {
        (t.cell.dataset.clone(), t.cell.variant.clone(), t.cell.bucketing.name().into(), t.cell.encoding.name().into(), t.bucket.clone())
    };
    let mut sums: BTreeMap<Group, [f64; 2]> = BTreeMap::new();
    let mut lime: BTreeMap<Group, [f64; 2]> = BTreeMap::new();
    for t in &r.timings {
        let slot = usize::from(t.cell.model == ModelKind::Gbt);
        match t.cell.method {
            Method::Pfi | Method::Ale | Method::Shap => sums.entry(key(t)).or_default()[slot] += t.total_s,
            Method::Lime => lime.entry(key(t)).or_default()[slot] += t.total_s,
            Method::Intrinsic => {}
        }
    }
    let a_ok = sums.values().filter(|s| s[0] <= s[1]).count();
    let lime_ok = lime.values().filter(|s| s[0] <= s[1]).count();

    // (b) Longest vs shortest prefix bucket inside index-encoded cells.
    let mut by_cell: BTreeMap<String, Vec<(usize, f64)>> = BTreeMap::new();
    for t in r.timings.iter().filter(|t| t.cell.encoding == EncodingStrategy::Index) {
        by_cell.entry(t.cell.slug()).or_default().push((t.prefix_len, t.total_s));
    }
    let mut b_ok = 0;
    let mut monotone = 0;
    for v in by_cell.values_mut() {
        v.sort_by_key(|p| p.0);
        b_ok += usize::from(v.len() >= 2 && v.last().unwrap().1 > v[0].1);
        monotone += usize::from(v.windows(2).all(|w| w[0].1 < w[1].1));
    }

    // (c) Mean LIME VSI per log variant against its categorical level count.
    let cfg = ExperimentConfig::from_toml(DESK_CONFIG).map_err(|e| e.to_string())?;
    let mut levels = Vec::new();
    let mut vsis = Vec::new();
    let mut widths = Vec::new();
    for ds in &cfg.datasets {
        let DatasetSource::Synthetic { config } = &ds.source else { continue };
        let buckets: Vec<_> = r
            .cells
            .iter()
            .filter(|c| c.id.dataset == ds.name && c.id.method == Method::Lime)
            .flat_map(|c| &c.buckets)
            .collect();
        let v: Vec<f64> = buckets.iter().filter_map(|b| b.mean_vsi).collect();
        if v.is_empty() {
            return Err(format!("no LIME stability for {}", ds.name));
        }
        levels.push(config.dynamic_levels as f64);
        vsis.push(v.iter().sum::<f64>() / v.len() as f64);
        widths.push(buckets.iter().map(|b| b.n_features as f64).sum::<f64>() / buckets.len() as f64);
    }
    let rho = spearman(&levels, &vsis);
    let rho_width = spearman(&levels, &widths);

    let detail = format!(
        "{} cells in {:.1}s; (a) LR<=GBT in {a_ok}/{} pfi+ale+shap groups (lime alone {lime_ok}/{}); \
         (b) longest>shortest in {b_ok}/{} index cells ({monotone} strictly monotone); \
         (c) levels {:?} -> mean VSI [{}], spearman {rho:.2} (width spearman {rho_width:.2})",
        r.cells.len(),
        d.secs,
        sums.len(),
        lime.len(),
        by_cell.len(),
        levels,
        vsis.iter().map(|v| format!("{v:.1}")).collect::<Vec<_>>().join(", ")
    );
    check(
        d.secs < 300.0
            && models.len() == 2
            && pre.len() == 2
            && a_ok == sums.len()
            && b_ok == by_cell.len()
            && levels.len() >= 4
            && rho < 0.0
            && rho_width > 0.0,
        detail,
    )
}

const DETERMINISM_CONFIG: &str = r#"{
    "name": "determinism",
    "seed": 11,
    "search_budget": 2,
    "datasets": [{"name": "synth", "kind": "synthetic", "config": {"trace_count": 120, "min_len": 4, "max_len": 9, "seed": 2}}],
    "prefix_specs": [{"max_prefix_len": 5, "gap": 2}],
    "preprocessing": [
        {"bucketing": "single", "encoding": "aggregation"},
        {"bucketing": "prefix_length", "encoding": "index"}
    ],
    "models": [{"kind": "logit"}, {"kind": "gbt", "n_trees": [20, 40]}],
    "methods": ["pfi", "ale", "shap", "lime", "intrinsic"],
    "explainers": {"global_rows": 25, "shap_background": 20, "local_rows": 3, "lime_runs": 3, "lime": {"k": 4, "n_samples": 400}}
}"#;

fn manifest_files(dir: &Path) -> Result<Vec<(String, bool)>, String> {
    let text = std::fs::read_to_string(dir.join("manifest.json")).map_err(|e| e.to_string())?;
    let m: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    Ok(m["files"]
        .as_array()
        .ok_or("manifest without files")?
        .iter()
        .map(|f| (f["path"].as_str().unwrap_or_default().to_string(), f["wall_clock"].as_bool().unwrap_or(true)))
        .collect())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("determinism.json");
    std::fs::write(&cfg, DETERMINISM_CONFIG).map_err(|e| e.to_string())?;
    for out in ["run1", "run2"] {
        let status = Command::new(env!("CARGO_BIN_EXE_ppm-xai"))
            .args(["bench", "--config", cfg.to_str().unwrap(), "--out", out, "--jobs", "2"])
            .current_dir(dir.path())
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Err(format!("bench failed: {}", String::from_utf8_lossy(&status.stderr)));
        }
    }
    let (a, b) = (manifest_files(&dir.path().join("run1"))?, manifest_files(&dir.path().join("run2"))?);
    if a != b {
        return Err("runs wrote different file sets".into());
    }
    let mut compared = 0;
    let mut wall = 0;
    for (path, wall_clock) in &a {
        if *wall_clock {
            wall += 1;
            continue;
        }
        let x = std::fs::read(dir.path().join("run1").join(path)).map_err(|e| e.to_string())?;
        let y = std::fs::read(dir.path().join("run2").join(path)).map_err(|e| e.to_string())?;
        if x != y {
            return Err(format!("{path} differs between runs"));
        }
        compared += 1;
    }
    check(compared > 0, format!("{compared} deterministic files byte-identical ({wall} wall-clock files excluded)"))
}

fn xor_separation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rows: Vec<Vec<f64>> = (0..400).map(|_| vec![rng.random(), rng.random()]).collect();
    let labels = rows.iter().map(|r| (r[0] > 0.5) != (r[1] > 0.5)).collect();
    let x = FeatureMatrix::from_rows(rows, labels).map_err(|e| e.to_string())?;
    let gbt = train(&x, &HyperParams::Gbt(GbtParams { max_depth: 2, n_trees: 100, learning_rate: 0.3, ..GbtParams::default() }))
        .map_err(|e| e.to_string())?;
    let lr = train(&x, &HyperParams::Logit(LogitParams::default())).map_err(|e| e.to_string())?;
    let acc_gbt = evaluate(&gbt, &x).map_err(|e| e.to_string())?.accuracy;
    let acc_lr = evaluate(&lr, &x).map_err(|e| e.to_string())?.accuracy;

    let bg = sample_background(&x, 100, 1);
    let attrs_lr = x.rows.iter().map(|r| shap_linear(&lr, r, &bg)).collect::<ppm_xai::Result<Vec<_>>>().map_err(|e| e.to_string())?;
    let attrs_gbt = x
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| shap_kernel(&gbt, r, &bg, 64, i as u64))
        .collect::<ppm_xai::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let r2_lr = shap_dependence_data(&attrs_lr, &x, 0, None).map_err(|e| e.to_string())?.linear_r2();
    let r2_gbt = shap_dependence_data(&attrs_gbt, &x, 0, None).map_err(|e| e.to_string())?.linear_r2();
    check(
        acc_gbt >= 0.95 && acc_lr <= 0.6 && (r2_lr - 1.0).abs() <= 1e-9 && r2_gbt < 0.99,
        format!("train accuracy GBT {acc_gbt:.3}, LR {acc_lr:.3}; dependence R^2 LR {r2_lr:.6}, GBT {r2_gbt:.3}"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("shapley oracle", shapley_oracle),
        ("local accuracy", local_accuracy),
        ("ALE linear recovery", ale_linear_recovery),
        ("PFI null/signal", pfi_null_signal),
        ("encoding widths", encoding_widths),
        ("prefix/bucket algebra", prefix_bucket_algebra),
        ("stability degenerate cases", stability_degenerate),
        ("desk-scale qualitative trends", qualitative_desk),
        ("bench determinism", determinism),
        ("XOR separation", xor_separation),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
