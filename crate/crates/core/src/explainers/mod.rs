//! Model-agnostic explainers: permutation feature importance, accumulated
//! local effects, Shapley attributions (exact, kernel, linear) and LIME
//! surrogates, plus CSV/SVG plot-data emitters.
//!
//! Every attribution lives in margin (log-odds) space.

mod ale;
mod lime;
mod pfi;
pub mod plots;
mod shap;

use serde::{Deserialize, Serialize};

pub use ale::{ale_curve, ale_global_rank, AleExplainer, AleKind, ALECurve};
pub use lime::{lime_explain, LimeContext, LimeExplanation, LimeFeature, LimeParams};
pub use pfi::{pfi, pfi_with_permutation, DEFAULT_PFI_ITERATIONS};
pub use shap::{
    decision_path_data, sample_background, shap_dependence_data, shap_exact, shap_global, shap_kernel,
    shap_kernel_sampled, shap_linear, DecisionPathData, DecisionStep, DependenceData, DependencePoint,
    EXACT_FEATURE_LIMIT,
};

use crate::encoding::RowId;
use crate::util::descending_order;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalMethod {
    Pfi,
    ShapGlobal,
    AleEntropy,
    Intrinsic,
}

impl GlobalMethod {
    pub const ALL: [GlobalMethod; 4] = [
        GlobalMethod::Pfi,
        GlobalMethod::AleEntropy,
        GlobalMethod::ShapGlobal,
        GlobalMethod::Intrinsic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GlobalMethod::Pfi => "pfi",
            GlobalMethod::ShapGlobal => "shap_global",
            GlobalMethod::AleEntropy => "ale_entropy",
            GlobalMethod::Intrinsic => "intrinsic",
        }
    }
}

/// Ranked per-feature scores. `ranking[0]` is the most important feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalExplanation {
    pub method: GlobalMethod,
    pub feature_names: Vec<String>,
    pub scores: Vec<f64>,
    /// One row per iteration, one column per feature (PFI only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_iteration: Option<Vec<Vec<f64>>>,
    pub ranking: Vec<usize>,
}

impl GlobalExplanation {
    /// Ranks by descending score, ties in feature order.
    pub fn new(method: GlobalMethod, feature_names: Vec<String>, scores: Vec<f64>, per_iteration: Option<Vec<Vec<f64>>>) -> Self {
        let ranking = descending_order(&scores);
        GlobalExplanation {
            method,
            feature_names,
            scores,
            per_iteration,
            ranking,
        }
    }

    pub fn n_features(&self) -> usize {
        self.scores.len()
    }

    pub fn top_k(&self, k: usize) -> &[usize] {
        &self.ranking[..k.min(self.ranking.len())]
    }

    pub fn ranked_names(&self) -> Vec<&str> {
        self.ranking.iter().map(|&j| self.feature_names[j].as_str()).collect()
    }
}

/// Additive attribution of one row: `base_value + sum(phi) ~ predicted`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub phi: Vec<f64>,
    pub base_value: f64,
    pub predicted: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_id: Option<RowId>,
}

impl Attribution {
    pub fn local_accuracy_gap(&self) -> f64 {
        (self.base_value + self.phi.iter().sum::<f64>() - self.predicted).abs()
    }

    pub fn with_row_id(mut self, id: RowId) -> Self {
        self.row_id = Some(id);
        self
    }
}
