//! Generates a synthetic labeled event log, prints its statistics and writes
//! it as CSV plus schema JSON.
//!
//! `cargo run --example synthetic_log -- [out_dir]`

use std::fs::File;
use std::path::PathBuf;

use ppm_xai::eventlog::{compute_statistics, generate_synthetic_log, write_event_log, SynthConfig};

fn main() -> ppm_xai::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("ppm_synth"));
    std::fs::create_dir_all(&out).expect("create output directory");

    let cfg = SynthConfig {
        trace_count: 300,
        dynamic_levels: 5,
        seed: 11,
        ..SynthConfig::sepsis1_scale()
    };
    let log = generate_synthetic_log(&cfg)?;
    print!("{}", compute_statistics(&log)?);

    write_event_log(&log.log, out.join("log.csv"), out.join("schema.json"))?;
    log.write_labels_csv(File::create(out.join("labels.csv")).expect("create labels file"))?;
    println!("wrote log.csv, schema.json and labels.csv to {}", out.display());
    Ok(())
}
