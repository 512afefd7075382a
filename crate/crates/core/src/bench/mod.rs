//! Experiment grid: datasets x prefix specs x preprocessing x models x
//! explanation methods, with timing under an exclusive lock and report
//! emission.
//!
//! Each (dataset, prefix spec, preprocessing, model) unit is prepared once:
//! label, split by time, prefix, bucket, encode, search and train one model
//! per bucket, evaluate. Every method then forms one cell on top of it.

mod config;
mod grid;
mod report;
mod timing;

use serde::{Deserialize, Serialize};

pub use config::{DatasetConfig, DatasetSource, ExperimentConfig, ExplainerConfig, Method, Preprocessing};
pub use grid::{load_dataset, run_grid, sample_local_rows};
pub use report::{emit_reports, hash_file, FileEntry, Manifest};
pub use timing::{time_explainer, timed_exclusive, Timeable, TimingRecord, TimingTarget};

use crate::bucketing::{BucketKey, BucketingStrategy};
use crate::encoding::EncodingStrategy;
use crate::explainers::{ALECurve, Attribution, DecisionPathData, DependenceData, GlobalExplanation, LimeExplanation};
use crate::models::{EvalReport, HyperParams, ModelKind, Trial};
use crate::prefixing::PrefixSpec;
use crate::stability::{ConsistencyReport, StabilityReport};

pub fn variant_name(spec: &PrefixSpec) -> String {
    format!("k{}_g{}", spec.max_prefix_len, spec.gap)
}

/// One prepared pipeline: everything but the explanation method.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UnitId {
    pub dataset: String,
    pub variant: String,
    pub bucketing: BucketingStrategy,
    pub encoding: EncodingStrategy,
    pub model: ModelKind,
}

impl UnitId {
    pub fn with_method(&self, method: Method) -> CellId {
        CellId {
            dataset: self.dataset.clone(),
            variant: self.variant.clone(),
            bucketing: self.bucketing,
            encoding: self.encoding,
            model: self.model,
            method,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub dataset: String,
    pub variant: String,
    pub bucketing: BucketingStrategy,
    pub encoding: EncodingStrategy,
    pub model: ModelKind,
    pub method: Method,
}

fn sanitize(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '_' })
        .collect()
}

impl CellId {
    /// File-name friendly identifier.
    pub fn slug(&self) -> String {
        sanitize(&format!(
            "{}__{}__{}-{}__{}__{}",
            self.dataset,
            self.variant,
            self.bucketing.name(),
            self.encoding.name(),
            self.model.name(),
            self.method.name()
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketModel {
    pub bucket: BucketKey,
    pub prefix_len: usize,
    pub n_train_rows: usize,
    pub n_test_rows: usize,
    pub width: usize,
    pub schema_hash: String,
    pub hyper: Option<HyperParams>,
    pub search_trials: Vec<Trial>,
    pub eval: Option<EvalReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitResult {
    pub id: UnitId,
    pub buckets: Vec<BucketModel>,
    /// Test prefixes with no applicable bucket.
    pub unrouted_test_prefixes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BucketExplanation {
    pub bucket: String,
    pub prefix_len: usize,
    /// `test`, or `train` when the test rows hold a single class.
    pub explained_on: String,
    pub n_rows: usize,
    pub n_features: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub global: Option<GlobalExplanation>,
    /// Agreement of two independent runs of the global method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rerun_consistency: Option<ConsistencyReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ale_curves: Vec<ALECurve>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub attributions: Vec<Attribution>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decision_paths: Vec<DecisionPathData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dependence: Option<DependenceData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_local_accuracy_gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lime: Vec<LimeExplanation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lime_stability: Vec<StabilityReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_vsi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_csi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub id: CellId,
    pub buckets: Vec<BucketExplanation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A configured cell that was not run because its pairing is unsupported.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub id: CellId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionTiming {
    pub unit: UnitId,
    pub bucket: String,
    pub prefix_len: usize,
    pub train_s: f64,
    /// Mean over the prediction trials.
    pub predict_s: f64,
    pub predict_trials: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResults {
    pub name: String,
    pub master_seed: u64,
    pub units: Vec<UnitResult>,
    pub cells: Vec<CellResult>,
    pub skipped: Vec<SkippedCell>,
    /// Wall-clock measurements; excluded from the deterministic results file.
    pub timings: Vec<TimingRecord>,
    pub prediction_times: Vec<PredictionTiming>,
}

/// The reproducible part of [`GridResults`].
#[derive(Serialize)]
pub(crate) struct DeterministicView<'a> {
    pub name: &'a str,
    pub master_seed: u64,
    pub units: &'a [UnitResult],
    pub cells: &'a [CellResult],
    pub skipped: &'a [SkippedCell],
}

impl GridResults {
    pub(crate) fn deterministic(&self) -> DeterministicView<'_> {
        DeterministicView {
            name: &self.name,
            master_seed: self.master_seed,
            units: &self.units,
            cells: &self.cells,
            skipped: &self.skipped,
        }
    }

    /// JSON of everything except wall-clock fields.
    pub fn deterministic_json(&self) -> String {
        serde_json::to_string_pretty(&self.deterministic()).expect("results serialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }

    pub fn from_json(s: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn cell(&self, id: &CellId) -> Option<&CellResult> {
        self.cells.iter().find(|c| &c.id == id)
    }

    pub fn timings_for(&self, id: &CellId) -> Vec<&TimingRecord> {
        self.timings.iter().filter(|t| &t.cell == id).collect()
    }
}
