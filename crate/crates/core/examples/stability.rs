//! Measures how stable explanations are across runs: LIME variable and
//! coefficient stability for one row, and agreement between two PFI runs.
//!
//! `cargo run --release --example stability`

use ppm_xai::bucketing::{assign_buckets, BucketKey, BucketingStrategy};
use ppm_xai::encoding::{fit_encoder, EncodingStrategy};
use ppm_xai::eventlog::{generate_synthetic_log, SynthConfig};
use ppm_xai::explainers::{pfi, LimeContext, LimeParams};
use ppm_xai::models::{train, GbtParams, HyperParams};
use ppm_xai::prefixing::{build_prefix_log, PrefixSpec};
use ppm_xai::stability::{global_run_consistency, stability_report, DEFAULT_CV_THRESHOLD};

fn main() -> ppm_xai::Result<()> {
    for levels in [2, 8, 32] {
        let log = generate_synthetic_log(&SynthConfig {
            trace_count: 200,
            min_len: 6,
            max_len: 10,
            dynamic_categorical: 2,
            dynamic_levels: levels,
            seed: 6,
            ..SynthConfig::default()
        })?;
        let plog = build_prefix_log(&log, PrefixSpec::new(6, 1)?)?;
        let blog = assign_buckets(&plog, BucketingStrategy::PrefixLength)?;
        let bucket = &blog.buckets[&BucketKey::Length(6)];
        let x = fit_encoder(&plog.schema, bucket, EncodingStrategy::Index, Some(6))?.encode_bucket(bucket)?;
        let model = train(&x, &HyperParams::Gbt(GbtParams::default()))?;

        let ctx = LimeContext::new(&x)?;
        let params = LimeParams {
            k: 5,
            n_samples: 1000,
            ..LimeParams::default()
        };
        let runs = (0..8)
            .map(|seed| ctx.explain(&model, &x.rows[0], &params, seed))
            .collect::<ppm_xai::Result<Vec<_>>>()?;
        let report = stability_report(&runs, params.k, DEFAULT_CV_THRESHOLD)?;

        let consistency = global_run_consistency(&pfi(&model, &x, 10, 1)?, &pfi(&model, &x, 10, 2)?, 10)?;
        println!(
            "levels {levels:>2} width {:>4}: LIME VSI {:>6.2} CSI {:>6.2} | PFI rerun jaccard {:.2} spearman {:.2}",
            x.n_cols(),
            report.vsi,
            report.csi,
            consistency.jaccard_top_k,
            consistency.spearman_full
        );
    }
    Ok(())
}
