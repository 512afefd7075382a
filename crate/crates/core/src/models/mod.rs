//! Predictive models: L2-regularized logistic regression and second-order
//! gradient-boosted trees, plus evaluation and random hyperparameter search.
//!
//! Both models predict in margin (log-odds) space; probabilities are the
//! logistic transform of the margin.

mod gbt;
mod logit;
mod metrics;
mod search;

use serde::{Deserialize, Serialize};

pub use gbt::{train_gbt, Node, Tree};
pub use logit::train_logit;
pub use metrics::{evaluate, evaluate_auc, EvalReport};
pub use search::{random_search, GbtSpace, LogitSpace, SearchOutcome, SearchSpace, Trial};

use crate::encoding::{schema_hash, FeatureColumn, FeatureMatrix};
use crate::error::{Error, Result};
use crate::explainers::{GlobalExplanation, GlobalMethod};
use crate::util::sigmoid;

/// Anything that maps a feature row to a log-odds margin.
pub trait Predictor: Sync {
    fn n_features(&self) -> usize;

    fn margin(&self, row: &[f64]) -> f64;

    fn proba(&self, row: &[f64]) -> f64 {
        sigmoid(self.margin(row))
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Predictor for (usize, F) {
    fn n_features(&self) -> usize {
        self.0
    }

    fn margin(&self, row: &[f64]) -> f64 {
        (self.1)(row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Logit,
    Gbt,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Logit => "logit",
            ModelKind::Gbt => "gbt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogitParams {
    pub l2: f64,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for LogitParams {
    fn default() -> Self {
        LogitParams {
            l2: 1e-2,
            max_iters: 100,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_trees: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub min_child_weight: f64,
    pub l2_leaf: f64,
    pub gamma: f64,
    pub subsample: f64,
    pub seed: u64,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams {
            n_trees: 100,
            learning_rate: 0.1,
            max_depth: 3,
            min_child_weight: 1.0,
            l2_leaf: 1.0,
            gamma: 0.0,
            subsample: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HyperParams {
    Logit(LogitParams),
    Gbt(GbtParams),
}

impl HyperParams {
    pub fn kind(&self) -> ModelKind {
        match self {
            HyperParams::Logit(_) => ModelKind::Logit,
            HyperParams::Gbt(_) => ModelKind::Gbt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidHyperParams(m.to_string()));
        match self {
            HyperParams::Logit(p) => {
                if !(p.l2 >= 0.0) {
                    return bad("l2 must be non-negative");
                }
                if !(p.tolerance > 0.0) {
                    return bad("tolerance must be positive");
                }
            }
            HyperParams::Gbt(p) => {
                if !(p.learning_rate > 0.0 && p.learning_rate <= 1.0) {
                    return bad("learning rate must lie in (0, 1]");
                }
                if p.max_depth < 1 {
                    return bad("max depth must be at least 1");
                }
                if !(p.subsample > 0.0 && p.subsample <= 1.0) {
                    return bad("subsample ratio must lie in (0, 1]");
                }
                if !(p.l2_leaf >= 0.0 && p.gamma >= 0.0 && p.min_child_weight >= 0.0) {
                    return bad("l2, gamma and min child weight must be non-negative");
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    /// Weights in original feature units; the intercept is `base_score`.
    Logit { weights: Vec<f64> },
    Gbt { trees: Vec<Tree> },
}

/// Training diagnostics: the loss after every iteration (logit) or after
/// every added tree (boosting, starting with the prior-only model).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub converged: bool,
    pub iterations: usize,
    pub loss_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub kind: ModelKind,
    pub params: ModelParams,
    /// Log-odds offset added to every margin.
    pub base_score: f64,
    pub training_schema: Vec<FeatureColumn>,
    pub hyper: HyperParams,
    pub diagnostics: Diagnostics,
}

impl Predictor for Model {
    fn n_features(&self) -> usize {
        self.training_schema.len()
    }

    fn margin(&self, row: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Logit { weights } => {
                self.base_score + weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>()
            }
            ModelParams::Gbt { trees } => self.base_score + trees.iter().map(|t| t.predict(row)).sum::<f64>(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SavedModel {
    schema_hash: String,
    model: Model,
}

impl Model {
    pub fn logit_weights(&self) -> Option<&[f64]> {
        match &self.params {
            ModelParams::Logit { weights } => Some(weights),
            ModelParams::Gbt { .. } => None,
        }
    }

    pub fn trees(&self) -> Option<&[Tree]> {
        match &self.params {
            ModelParams::Gbt { trees } => Some(trees),
            ModelParams::Logit { .. } => None,
        }
    }

    pub fn schema_hash(&self) -> String {
        schema_hash(&self.training_schema)
    }

    fn check_width(&self, row: &[f64]) -> Result<()> {
        if row.len() != self.n_features() {
            return Err(Error::WidthMismatch {
                expected: self.n_features(),
                got: row.len(),
            });
        }
        Ok(())
    }

    pub fn predict_margin(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        rows.iter()
            .map(|r| {
                self.check_width(r)?;
                Ok(self.margin(r))
            })
            .collect()
    }

    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
        Ok(self.predict_margin(rows)?.into_iter().map(sigmoid).collect())
    }

    /// Refuses matrices whose column schema differs from the training schema.
    pub fn check_schema(&self, columns: &[FeatureColumn]) -> Result<()> {
        if schema_hash(columns) != self.schema_hash() {
            return Err(Error::SchemaMismatch("matrix schema hash differs from the model's".into()));
        }
        Ok(())
    }

    pub fn predict_matrix_margin(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_schema(&x.columns)?;
        self.predict_margin(&x.rows)
    }

    pub fn predict_matrix_proba(&self, x: &FeatureMatrix) -> Result<Vec<f64>> {
        self.check_schema(&x.columns)?;
        self.predict_proba(&x.rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SavedModel {
            schema_hash: self.schema_hash(),
            model: self.clone(),
        })
        .expect("model serializes")
    }

    pub fn from_json(json: &str) -> Result<Model> {
        let saved: SavedModel = serde_json::from_str(json)?;
        if saved.model.schema_hash() != saved.schema_hash {
            return Err(Error::SchemaMismatch("stored schema hash does not match the model's columns".into()));
        }
        Ok(saved.model)
    }
}

pub fn train(x: &FeatureMatrix, hp: &HyperParams) -> Result<Model> {
    match hp {
        HyperParams::Logit(p) => train_logit(x, p),
        HyperParams::Gbt(p) => train_gbt(x, p),
    }
}

pub fn predict_proba(m: &Model, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    m.predict_proba(rows)
}

pub fn predict_margin(m: &Model, rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    m.predict_margin(rows)
}

/// Coefficient magnitudes (logit) or total split gain per feature (boosting).
pub fn intrinsic_importance(m: &Model) -> GlobalExplanation {
    let scores = match &m.params {
        ModelParams::Logit { weights } => weights.iter().map(|w| w.abs()).collect(),
        ModelParams::Gbt { trees } => {
            let mut gain = vec![0.0; m.n_features()];
            for t in trees {
                for n in &t.nodes {
                    if let Node::Split { feature, gain: g, .. } = n {
                        gain[*feature] += g;
                    }
                }
            }
            gain
        }
    };
    GlobalExplanation::new(
        GlobalMethod::Intrinsic,
        m.training_schema.iter().map(|c| c.name.clone()).collect(),
        scores,
        None,
    )
}

/// Shared input checks for both trainers.
pub(crate) fn check_training_data(x: &FeatureMatrix) -> Result<()> {
    x.validate()?;
    if x.n_rows() < 2 {
        return Err(Error::InvalidArgument("at least 2 rows are required".into()));
    }
    let pos = x.labels.iter().filter(|&&l| l).count();
    if pos == 0 || pos == x.n_rows() {
        return Err(Error::SingleClass);
    }
    if x.n_cols() == 0 {
        return Err(Error::DegenerateMatrix);
    }
    Ok(())
}

pub(crate) fn logloss(margins: &[f64], labels: &[bool]) -> f64 {
    margins
        .iter()
        .zip(labels)
        .map(|(&m, &y)| softplus(m) - if y { m } else { 0.0 })
        .sum::<f64>()
        / margins.len() as f64
}

/// `ln(1 + e^x)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
