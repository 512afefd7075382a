use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bucketing::BucketingStrategy;
use crate::encoding::EncodingStrategy;
use crate::error::{Error, Result};
use crate::eventlog::{LabelingRule, SynthConfig, DEFAULT_TRAIN_RATIO};
use crate::explainers::{LimeParams, DEFAULT_PFI_ITERATIONS};
use crate::models::SearchSpace;
use crate::prefixing::PrefixSpec;
use crate::stability::{DEFAULT_CV_THRESHOLD, DEFAULT_LIME_RUNS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic {
        #[serde(default)]
        config: SynthConfig,
    },
    /// Paths are resolved against the config file's directory.
    Csv {
        log: PathBuf,
        schema: PathBuf,
        labeling: LabelingRule,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub name: String,
    #[serde(flatten)]
    pub source: DatasetSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Preprocessing {
    pub bucketing: BucketingStrategy,
    pub encoding: EncodingStrategy,
}

impl Preprocessing {
    pub fn name(&self) -> String {
        format!("{}_{}", self.bucketing.name(), self.encoding.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Pfi,
    Ale,
    Shap,
    Lime,
    /// Coefficients or total gain; timed as model training.
    Intrinsic,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Pfi => "pfi",
            Method::Ale => "ale",
            Method::Shap => "shap",
            Method::Lime => "lime",
            Method::Intrinsic => "intrinsic",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        [Method::Pfi, Method::Ale, Method::Shap, Method::Lime, Method::Intrinsic]
            .into_iter()
            .find(|m| m.name() == s)
    }
}

fn default_methods() -> Vec<Method> {
    vec![Method::Pfi, Method::Ale, Method::Shap, Method::Lime]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainerConfig {
    pub pfi_iterations: usize,
    pub ale_bins: usize,
    /// Background rows for SHAP, subsampled from the training matrix.
    pub shap_background: usize,
    /// Coalition budget for kernel SHAP; raised to `2M + 2` when smaller.
    pub shap_samples: usize,
    /// Rows whose attributions feed the global SHAP ranking.
    pub global_rows: usize,
    /// Rows explained locally, balanced across predicted classes.
    pub local_rows: usize,
    pub lime: LimeParams,
    pub lime_runs: usize,
    pub top_k: usize,
    pub cv_threshold: f64,
    pub decision_top_n: usize,
    pub timing_repetitions: usize,
    pub prediction_trials: usize,
}

impl Default for ExplainerConfig {
    fn default() -> Self {
        ExplainerConfig {
            pfi_iterations: DEFAULT_PFI_ITERATIONS,
            ale_bins: 10,
            shap_background: 100,
            shap_samples: 512,
            global_rows: 100,
            local_rows: 20,
            lime: LimeParams::default(),
            lime_runs: DEFAULT_LIME_RUNS,
            top_k: 10,
            cv_threshold: DEFAULT_CV_THRESHOLD,
            decision_top_n: 10,
            timing_repetitions: 1,
            prediction_trials: 3,
        }
    }
}

fn default_name() -> String {
    "grid".into()
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_jobs() -> usize {
    1
}

fn default_train_ratio() -> f64 {
    DEFAULT_TRAIN_RATIO
}

fn default_val_ratio() -> f64 {
    0.2
}

fn default_budget() -> usize {
    5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    #[serde(default = "default_train_ratio")]
    pub train_ratio: f64,
    #[serde(default = "default_val_ratio")]
    pub val_ratio: f64,
    #[serde(default = "default_budget")]
    pub search_budget: usize,
    pub datasets: Vec<DatasetConfig>,
    pub prefix_specs: Vec<PrefixSpec>,
    pub preprocessing: Vec<Preprocessing>,
    pub models: Vec<SearchSpace>,
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub explainers: ExplainerConfig,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_toml(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Toml(e.to_string()))
    }

    /// Reads JSON, or TOML for a `.toml` extension, then resolves dataset
    /// paths against the file's directory and validates.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = if path.extension().is_some_and(|e| e == "toml") {
            Self::from_toml(&text)?
        } else {
            Self::from_json(&text)?
        };
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for d in &mut self.datasets {
            if let DatasetSource::Csv { log, schema, .. } = &mut d.source {
                if log.is_relative() {
                    *log = base.join(&*log);
                }
                if schema.is_relative() {
                    *schema = base.join(&*schema);
                }
            }
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.datasets.is_empty()
            || self.prefix_specs.is_empty()
            || self.preprocessing.is_empty()
            || self.models.is_empty()
            || self.methods.is_empty()
        {
            return bad("every axis (datasets, prefix_specs, preprocessing, models, methods) needs an entry");
        }
        let mut names: Vec<&str> = self.datasets.iter().map(|d| d.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return bad("dataset names must be unique");
        }
        for s in &self.prefix_specs {
            s.validate()?;
        }
        if self.jobs == 0 {
            return bad("jobs must be at least 1");
        }
        if !(self.train_ratio > 0.0 && self.train_ratio < 1.0) || !(self.val_ratio > 0.0 && self.val_ratio < 1.0) {
            return bad("train_ratio and val_ratio must lie in (0, 1)");
        }
        if self.search_budget == 0 {
            return bad("search_budget must be at least 1");
        }
        let e = &self.explainers;
        if e.pfi_iterations == 0 || e.ale_bins < 2 || e.shap_background == 0 || e.timing_repetitions == 0 {
            return bad("explainer parameters out of range");
        }
        if e.lime_runs < 2 || e.lime.k == 0 || e.lime.n_samples < 10 * e.lime.k {
            return bad("LIME needs at least 2 runs, k >= 1 and n_samples >= 10 k");
        }
        if e.prediction_trials == 0 || e.global_rows == 0 {
            return bad("prediction_trials and global_rows must be positive");
        }
        Ok(())
    }

    /// Product of the axis cardinalities.
    pub fn cell_count(&self) -> usize {
        self.datasets.len() * self.prefix_specs.len() * self.preprocessing.len() * self.models.len() * self.methods.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const JSON: &str = r#"{
        "seed": 7,
        "datasets": [{"name": "synth", "kind": "synthetic", "config": {"trace_count": 50}}],
        "prefix_specs": [{"max_prefix_len": 11, "gap": 5}],
        "preprocessing": [
            {"bucketing": "single", "encoding": "aggregation"},
            {"bucketing": "prefix_length", "encoding": "index"}
        ],
        "models": [{"kind": "logit"}, {"kind": "gbt", "n_trees": [10, 20]}]
    }"#;

    #[test]
    fn json_with_defaults() {
        let cfg = ExperimentConfig::from_json(JSON).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.cell_count(), 16);
        assert_eq!(cfg.methods, default_methods());
        assert_eq!(cfg.explainers.pfi_iterations, 10);
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn toml_matches_json() {
        let toml_text = r#"
            seed = 7
            [[datasets]]
            name = "synth"
            kind = "synthetic"
            [datasets.config]
            trace_count = 50
            [[prefix_specs]]
            max_prefix_len = 11
            gap = 5
            [[preprocessing]]
            bucketing = "single"
            encoding = "aggregation"
            [[preprocessing]]
            bucketing = "prefix_length"
            encoding = "index"
            [[models]]
            kind = "logit"
            [[models]]
            kind = "gbt"
            n_trees = [10, 20]
        "#;
        assert_eq!(ExperimentConfig::from_toml(toml_text).unwrap(), ExperimentConfig::from_json(JSON).unwrap());
    }

    #[test]
    fn empty_axis_rejected() {
        let mut cfg = ExperimentConfig::from_json(JSON).unwrap();
        cfg.models.clear();
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }
}
