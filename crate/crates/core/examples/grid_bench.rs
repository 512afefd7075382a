//! Runs the desk-scale experiment grid from `configs/desk.toml` and writes
//! the reports.
//!
//! `cargo run --release --example grid_bench -- [out_dir]`

use ppm_xai::bench::{emit_reports, run_grid, ExperimentConfig};

const CONFIG: &str = include_str!("../configs/desk.toml");

fn main() -> ppm_xai::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "grid_out".into());
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let started = std::time::Instant::now();
    let results = run_grid(&cfg)?;
    let manifest = emit_reports(&results, &out)?;
    println!("master seed {}", results.master_seed);
    println!("{} cells, {} skipped, {} files in {out}", results.cells.len(), results.skipped.len(), manifest.files.len());
    for t in &results.timings {
        println!(
            "{:<14} {:<8} {:<6} len {:>2}  {:>9.4}s",
            format!("{}-{}", t.cell.bucketing.name(), t.cell.encoding.name()),
            t.cell.model.name(),
            t.cell.method.name(),
            t.prefix_len,
            t.total_s
        );
    }
    for c in &results.cells {
        for b in &c.buckets {
            if let Some(e) = &b.error {
                println!("{} bucket {}: {e}", c.id.slug(), b.bucket);
            }
        }
    }
    println!("elapsed {:.1}s", started.elapsed().as_secs_f64());
    Ok(())
}
