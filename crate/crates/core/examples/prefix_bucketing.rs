//! Builds gap-based prefix logs, assigns buckets and routes running cases to
//! the bucket whose model would score them.
//!
//! `cargo run --example prefix_bucketing`

use ppm_xai::bucketing::{assign_buckets, lookup_bucket, BucketingStrategy};
use ppm_xai::eventlog::{generate_synthetic_log, SynthConfig};
use ppm_xai::prefixing::{build_prefix_log, prefix_lengths, PrefixSpec};

fn main() -> ppm_xai::Result<()> {
    let log = generate_synthetic_log(&SynthConfig {
        trace_count: 100,
        min_len: 3,
        max_len: 15,
        seed: 5,
        ..SynthConfig::default()
    })?;
    let spec = PrefixSpec::new(12, 3)?;
    println!("a trace of length 10 yields prefixes of lengths {:?}", prefix_lengths(10, spec));

    let plog = build_prefix_log(&log, spec)?;
    println!("{} traces -> {} prefixes", log.log.traces.len(), plog.prefixes.len());

    for strategy in [BucketingStrategy::Single, BucketingStrategy::PrefixLength] {
        let blog = assign_buckets(&plog, strategy)?;
        println!("\n{} bucketing", strategy.name());
        for (key, prefixes) in &blog.buckets {
            let positives = prefixes.iter().filter(|p| p.label).count();
            println!("  bucket {key:>3}: {:>4} prefixes, {positives:>4} positive", prefixes.len());
        }
        let running = &plog.prefixes[plog.prefixes.len() / 2];
        println!(
            "  running case {} at length {} -> bucket {}",
            running.case_id,
            running.prefix_len,
            lookup_bucket(&blog, running)?
        );
    }
    Ok(())
}
