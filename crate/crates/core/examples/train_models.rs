//! Tunes and trains logistic regression and gradient-boosted trees on an
//! encoded bucket, then reports held-out AUC and accuracy.
//!
//! `cargo run --release --example train_models`

use ppm_xai::bucketing::{assign_buckets, BucketKey, BucketingStrategy};
use ppm_xai::encoding::{fit_encoder, EncodingStrategy};
use ppm_xai::eventlog::{generate_synthetic_log, temporal_split, SynthConfig};
use ppm_xai::models::{evaluate, random_search, train, GbtSpace, LogitSpace, SearchSpace};
use ppm_xai::prefixing::{build_prefix_log, PrefixSpec};

fn main() -> ppm_xai::Result<()> {
    let log = generate_synthetic_log(&SynthConfig {
        trace_count: 400,
        seed: 9,
        ..SynthConfig::default()
    })?;
    let (train_log, test_log) = temporal_split(&log, 0.8)?;
    let spec = PrefixSpec::new(8, 1)?;
    let train_prefixes = assign_buckets(&build_prefix_log(&train_log, spec)?, BucketingStrategy::Single)?;
    let bucket = &train_prefixes.buckets[&BucketKey::All];
    let enc = fit_encoder(&log.log.schema, bucket, EncodingStrategy::Aggregation, None)?;
    let x_train = enc.encode_bucket(bucket)?;
    let x_test = enc.encode_bucket(&build_prefix_log(&test_log, spec)?.prefixes)?;
    println!("train {} x {}, test {} rows", x_train.n_rows(), x_train.n_cols(), x_test.n_rows());

    let spaces = [
        SearchSpace::Logit(LogitSpace::default()),
        SearchSpace::Gbt(GbtSpace {
            n_trees: (50, 150),
            ..GbtSpace::default()
        }),
    ];
    for space in &spaces {
        let search = random_search(&x_train, space, 5, 0.2, 42)?;
        let model = train(&x_train, &search.best)?;
        let report = evaluate(&model, &x_test)?;
        println!(
            "{:<6} val auc {:.3}  test auc {:.3}  accuracy {:.3}",
            model.kind.name(),
            search.best_auc(),
            report.auc.unwrap_or(f64::NAN),
            report.accuracy
        );
    }
    Ok(())
}
