use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{BucketExplanation, CellResult, GridResults, Method};
use crate::error::{Error, Result};
use crate::explainers::plots;
use crate::util::sha256_hex;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
    /// True for files holding wall-clock measurements.
    pub wall_clock: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub master_seed: u64,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn deterministic_files(&self) -> impl Iterator<Item = &FileEntry> {
        self.files.iter().filter(|f| !f.wall_clock)
    }
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn hash_file(path: impl AsRef<Path>) -> Result<String> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

struct Writer {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    fn put(&mut self, rel: &str, content: &str, wall_clock: bool) -> Result<()> {
        let path = self.root.join(rel);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        std::fs::write(&path, content).map_err(|e| Error::io(&path, e))?;
        self.files.push(FileEntry {
            path: rel.to_string(),
            sha256: sha256_hex(content.as_bytes()),
            bytes: content.len(),
            wall_clock,
        });
        Ok(())
    }
}

fn secs(x: f64) -> String {
    format!("{x:.6}")
}

/// One row per timed (cell, bucket).
fn timings_csv(r: &GridResults) -> String {
    let mut out = String::from("dataset,variant,prefix_len,bucketing,encoding,model,method,setup_s,compute_s,total_s\n");
    for t in &r.timings {
        let c = &t.cell;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            c.dataset,
            c.variant,
            t.prefix_len,
            c.bucketing.name(),
            c.encoding.name(),
            c.model.name(),
            c.method.name(),
            secs(t.setup_s),
            secs(t.compute_s),
            secs(t.total_s)
        );
    }
    out
}

/// Wide layout: one row per log variant and prefix length, one column per
/// method and model, holding total seconds.
fn timings_table_csv(r: &GridResults) -> String {
    let mut cols: Vec<(Method, &str)> = Vec::new();
    let mut rows: Vec<(String, String, usize, String)> = Vec::new();
    for t in &r.timings {
        let c = (t.cell.method, t.cell.model.name());
        if !cols.contains(&c) {
            cols.push(c);
        }
        let row = (
            t.cell.dataset.clone(),
            t.cell.variant.clone(),
            t.prefix_len,
            format!("{}_{}", t.cell.bucketing.name(), t.cell.encoding.name()),
        );
        if !rows.contains(&row) {
            rows.push(row);
        }
    }
    let mut out = String::from("dataset,variant,prefix_len,preprocessing");
    for (m, k) in &cols {
        let _ = write!(out, ",{}_{}", m.name(), k);
    }
    out.push('\n');
    for (d, v, l, pre) in &rows {
        let _ = write!(out, "{d},{v},{l},{pre}");
        for (m, k) in &cols {
            let cell = r.timings.iter().find(|t| {
                &t.cell.dataset == d
                    && &t.cell.variant == v
                    && t.prefix_len == *l
                    && &format!("{}_{}", t.cell.bucketing.name(), t.cell.encoding.name()) == pre
                    && t.cell.method == *m
                    && t.cell.model.name() == *k
            });
            let _ = write!(out, ",{}", cell.map(|t| secs(t.total_s)).unwrap_or_default());
        }
        out.push('\n');
    }
    out
}

fn prediction_csv(r: &GridResults) -> String {
    let mut out = String::from("dataset,variant,prefix_len,bucketing,encoding,model,train_s,predict_s\n");
    for p in &r.prediction_times {
        let u = &p.unit;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            u.dataset,
            u.variant,
            p.prefix_len,
            u.bucketing.name(),
            u.encoding.name(),
            u.model.name(),
            secs(p.train_s),
            secs(p.predict_s)
        );
    }
    out
}

const PLOT_FEATURES: usize = 15;

fn bucket_artifacts(w: &mut Writer, cell: &CellResult, b: &BucketExplanation) -> Result<()> {
    let stem = format!("{}__b{}", cell.id.slug(), b.bucket);
    let json = serde_json::to_string_pretty(&serde_json::json!({
        "cell": cell.id,
        "explanation": b,
    }))?;
    w.put(&format!("explanations/{stem}.json"), &json, false)?;
    if let Some(g) = &b.global {
        w.put(&format!("plotdata/{stem}__scores.csv"), &plots::global_scores_csv(g), false)?;
        let svg = match cell.id.method {
            Method::Pfi => plots::pfi_box_svg(&format!("PFI {}", cell.id.slug()), g, PLOT_FEATURES),
            _ => plots::global_svg(g, PLOT_FEATURES),
        };
        w.put(&format!("plots/{stem}__scores.svg"), &svg, false)?;
        if let Some(csv) = plots::pfi_iterations_csv(g) {
            w.put(&format!("plotdata/{stem}__pfi_iterations.csv"), &csv, false)?;
        }
    }
    if !b.ale_curves.is_empty() {
        w.put(&format!("plotdata/{stem}__ale.csv"), &plots::ale_csv(&b.ale_curves), false)?;
        if let Some(g) = &b.global {
            for &j in g.top_k(3) {
                if let Some(c) = b.ale_curves.iter().find(|c| c.feature_index == j) {
                    w.put(&format!("plots/{stem}__ale_{j}.svg"), &plots::ale_svg(c), false)?;
                }
            }
        }
    }
    if let Some(d) = &b.dependence {
        w.put(&format!("plotdata/{stem}__dependence.csv"), &plots::dependence_csv(d), false)?;
        w.put(&format!("plots/{stem}__dependence.svg"), &plots::dependence_svg(d), false)?;
    }
    if let Some(d) = b.decision_paths.first() {
        w.put(&format!("plotdata/{stem}__decision.csv"), &plots::decision_path_csv(d), false)?;
        w.put(&format!("plots/{stem}__decision.svg"), &plots::decision_path_svg(d), false)?;
    }
    if let Some(e) = b.lime.first() {
        w.put(&format!("plotdata/{stem}__lime.csv"), &plots::lime_csv(e), false)?;
        w.put(&format!("plots/{stem}__lime.svg"), &plots::lime_svg(e), false)?;
    }
    Ok(())
}

/// Writes every report file under `out_dir` and returns the manifest, which
/// is also written as `manifest.json`.
pub fn emit_reports(results: &GridResults, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    if results.cells.is_empty() {
        return Err(Error::EmptyResults);
    }
    let mut w = Writer {
        root: out_dir.as_ref().to_path_buf(),
        files: Vec::new(),
    };
    w.put("results.json", &results.deterministic_json(), false)?;
    w.put("grid_results.json", &results.to_json(), true)?;
    w.put("timings.csv", &timings_csv(results), true)?;
    w.put("timings_table.csv", &timings_table_csv(results), true)?;
    w.put("timings.json", &serde_json::to_string_pretty(&results.timings)?, true)?;
    w.put("prediction_times.csv", &prediction_csv(results), true)?;
    for cell in &results.cells {
        for b in &cell.buckets {
            bucket_artifacts(&mut w, cell, b)?;
        }
    }
    w.files.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        master_seed: results.master_seed,
        files: w.files,
    };
    let path = w.root.join(MANIFEST_FILE);
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}
