//! Explains individual predictions: exact linear SHAP and a decision path
//! for logistic regression, kernel SHAP and LIME for boosted trees.
//!
//! `cargo run --release --example local_explanations`

use ppm_xai::bucketing::{assign_buckets, BucketKey, BucketingStrategy};
use ppm_xai::encoding::{fit_encoder, EncodingStrategy};
use ppm_xai::eventlog::{generate_synthetic_log, SynthConfig};
use ppm_xai::explainers::{decision_path_data, lime_explain, sample_background, shap_kernel, shap_linear, LimeParams};
use ppm_xai::models::{train, GbtParams, HyperParams, LogitParams, Predictor};
use ppm_xai::prefixing::{build_prefix_log, PrefixSpec};

fn main() -> ppm_xai::Result<()> {
    let log = generate_synthetic_log(&SynthConfig {
        trace_count: 250,
        seed: 8,
        ..SynthConfig::default()
    })?;
    let plog = build_prefix_log(&log, PrefixSpec::new(5, 1)?)?;
    let blog = assign_buckets(&plog, BucketingStrategy::Single)?;
    let bucket = &blog.buckets[&BucketKey::All];
    let x = fit_encoder(&plog.schema, bucket, EncodingStrategy::LastState, None)?.encode_bucket(bucket)?;
    let names = x.column_names();
    let row = &x.rows[7];
    let bg = sample_background(&x, 100, 3);

    let lr = train(&x, &HyperParams::Logit(LogitParams::default()))?;
    let a = shap_linear(&lr, row, &bg)?;
    let path = decision_path_data(&a, &names, 6);
    println!("logit: base {:.3} -> margin {:.3}", a.base_value, a.predicted);
    for s in &path.steps {
        println!("  {:<32} {:+.4}  => {:+.4}", s.label, s.phi, s.cumulative);
    }
    assert!((path.endpoint() - lr.margin(row)).abs() < 1e-6);

    let gbt = train(&x, &HyperParams::Gbt(GbtParams::default()))?;
    let a = shap_kernel(&gbt, row, &bg, 2048, 1)?;
    println!("gbt: kernel SHAP local accuracy gap {:.2e}", a.local_accuracy_gap());

    let params = LimeParams {
        k: 5,
        ..LimeParams::default()
    };
    let e = lime_explain(&gbt, row, &x, &params, 1)?;
    println!("gbt: LIME p = {:.3}, surrogate r2 = {:.3}", e.predicted_proba, e.surrogate_r2);
    for f in &e.top_features {
        println!("  {:<32} {:+.4}", f.name, f.coefficient);
    }
    Ok(())
}
