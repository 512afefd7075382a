//! Encodes the same bucket with aggregation, index and last-state encodings
//! and compares the resulting matrix widths.
//!
//! `cargo run --example encoding`

use ppm_xai::eventlog::{generate_synthetic_log, SynthConfig};
use ppm_xai::encoding::{fit_encoder, EncodingStrategy};
use ppm_xai::prefixing::{build_prefix_log, PrefixSpec};

fn main() -> ppm_xai::Result<()> {
    let log = generate_synthetic_log(&SynthConfig {
        trace_count: 80,
        min_len: 4,
        max_len: 8,
        dynamic_levels: 4,
        seed: 2,
        ..SynthConfig::default()
    })?;
    let plog = build_prefix_log(&log, PrefixSpec::new(4, 1)?)?;
    let bucket: Vec<_> = plog.prefixes.iter().filter(|p| p.prefix_len == 4).cloned().collect();

    for strategy in [EncodingStrategy::Aggregation, EncodingStrategy::Index, EncodingStrategy::LastState] {
        let enc = fit_encoder(&plog.schema, &bucket, strategy, Some(4))?;
        let x = enc.encode_bucket(&bucket)?;
        println!("{:<12} {:>4} rows x {:>3} columns", strategy.name(), x.n_rows(), x.n_cols());
        let names = x.column_names();
        println!("  first columns: {}", names.iter().take(6).cloned().collect::<Vec<_>>().join(", "));
        let single = enc.encode_instance(&bucket[0])?;
        assert_eq!(single, x.rows[0]);
    }
    Ok(())
}
