//! Global explanations of a boosted-tree model: permutation importance, ALE,
//! mean absolute SHAP and gain importance, written as CSV and SVG.
//!
//! `cargo run --release --example global_explanations -- [out_dir]`

use std::path::PathBuf;

use ppm_xai::bucketing::{assign_buckets, BucketKey, BucketingStrategy};
use ppm_xai::encoding::{fit_encoder, EncodingStrategy};
use ppm_xai::eventlog::{generate_synthetic_log, SynthConfig};
use ppm_xai::explainers::{
    ale_global_rank, pfi, plots, sample_background, shap_global, shap_kernel, AleExplainer, GlobalExplanation,
};
use ppm_xai::models::{intrinsic_importance, train, GbtParams, HyperParams};
use ppm_xai::prefixing::{build_prefix_log, PrefixSpec};

fn show(g: &GlobalExplanation) {
    let top: Vec<_> = g.ranked_names().into_iter().take(5).collect();
    println!("{:<12} {}", g.method.name(), top.join(", "));
}

fn main() -> ppm_xai::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ppm_global"));
    std::fs::create_dir_all(&out).expect("create output directory");

    let log = generate_synthetic_log(&SynthConfig {
        trace_count: 300,
        seed: 4,
        ..SynthConfig::default()
    })?;
    let plog = build_prefix_log(&log, PrefixSpec::new(6, 1)?)?;
    let blog = assign_buckets(&plog, BucketingStrategy::Single)?;
    let bucket = &blog.buckets[&BucketKey::All];
    let x = fit_encoder(&plog.schema, bucket, EncodingStrategy::Aggregation, None)?.encode_bucket(bucket)?;
    let model = train(&x, &HyperParams::Gbt(GbtParams::default()))?;

    let g_pfi = pfi(&model, &x, 10, 1)?;
    let curves = AleExplainer::new(&x, 10)?.curves(&model, &x)?;
    let g_ale = ale_global_rank(&curves, &x.column_names());
    let bg = sample_background(&x, 50, 2);
    let attrs = (0..60)
        .map(|i| shap_kernel(&model, &x.rows[i], &bg, 1024, i as u64))
        .collect::<ppm_xai::Result<Vec<_>>>()?;
    let g_shap = shap_global(&attrs, &x.column_names())?;
    let g_gain = intrinsic_importance(&model);

    for g in [&g_pfi, &g_ale, &g_shap, &g_gain] {
        show(g);
        std::fs::write(out.join(format!("{}.csv", g.method.name())), plots::global_scores_csv(g)).expect("write csv");
        std::fs::write(out.join(format!("{}.svg", g.method.name())), plots::global_svg(g, 12)).expect("write svg");
    }
    std::fs::write(out.join("pfi_box.svg"), plots::pfi_box_svg("PFI", &g_pfi, 12)).expect("write svg");
    if let Some(c) = curves.iter().find(|c| c.feature_index == g_ale.ranking[0]) {
        std::fs::write(out.join("ale_top.svg"), plots::ale_svg(c)).expect("write svg");
    }
    println!("plots in {}", out.display());
    Ok(())
}
