//! Random hyperparameter search scored by AUC on a temporal validation split.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{evaluate_auc, train, GbtParams, HyperParams, LogitParams, Model, Predictor};
use crate::encoding::FeatureMatrix;
use crate::error::{Error, Result};
use crate::util::derive_seed;

/// `l2` is drawn log-uniformly from `[l2_min, l2_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogitSpace {
    pub l2_min: f64,
    pub l2_max: f64,
    pub max_iters: usize,
    pub tolerance: f64,
}

impl Default for LogitSpace {
    fn default() -> Self {
        let p = LogitParams::default();
        LogitSpace {
            l2_min: 1e-4,
            l2_max: 10.0,
            max_iters: p.max_iters,
            tolerance: p.tolerance,
        }
    }
}

/// Integer ranges are inclusive; the learning rate is uniform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GbtSpace {
    pub n_trees: (usize, usize),
    pub max_depth: (usize, usize),
    pub learning_rate: (f64, f64),
    pub min_child_weight: f64,
    pub l2_leaf: f64,
    pub gamma: f64,
    pub subsample: f64,
}

impl Default for GbtSpace {
    fn default() -> Self {
        let p = GbtParams::default();
        GbtSpace {
            n_trees: (50, 300),
            max_depth: (2, 6),
            learning_rate: (0.05, 0.3),
            min_child_weight: p.min_child_weight,
            l2_leaf: p.l2_leaf,
            gamma: p.gamma,
            subsample: p.subsample,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchSpace {
    Logit(LogitSpace),
    Gbt(GbtSpace),
}

impl SearchSpace {
    fn check(&self) -> Result<()> {
        let empty = |m: &str| Err(Error::EmptySpace(m.to_string()));
        match self {
            SearchSpace::Logit(s) => {
                if !(s.l2_min > 0.0 && s.l2_min <= s.l2_max) {
                    return empty("l2 range must satisfy 0 < min <= max");
                }
            }
            SearchSpace::Gbt(s) => {
                if s.n_trees.0 > s.n_trees.1 || s.max_depth.0 > s.max_depth.1 {
                    return empty("integer range has min > max");
                }
                if !(s.learning_rate.0 <= s.learning_rate.1) {
                    return empty("learning rate range has min > max");
                }
            }
        }
        Ok(())
    }

    fn sample(&self, rng: &mut ChaCha8Rng, seed: u64) -> HyperParams {
        match self {
            SearchSpace::Logit(s) => {
                let (lo, hi) = (s.l2_min.ln(), s.l2_max.ln());
                let l2 = if lo == hi { s.l2_min } else { rng.random_range(lo..=hi).exp() };
                HyperParams::Logit(LogitParams {
                    l2,
                    max_iters: s.max_iters,
                    tolerance: s.tolerance,
                })
            }
            SearchSpace::Gbt(s) => {
                let (lo, hi) = s.learning_rate;
                HyperParams::Gbt(GbtParams {
                    n_trees: rng.random_range(s.n_trees.0..=s.n_trees.1),
                    max_depth: rng.random_range(s.max_depth.0..=s.max_depth.1),
                    learning_rate: if lo == hi { lo } else { rng.random_range(lo..=hi) },
                    min_child_weight: s.min_child_weight,
                    l2_leaf: s.l2_leaf,
                    gamma: s.gamma,
                    subsample: s.subsample,
                    seed,
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub params: HyperParams,
    pub val_auc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: HyperParams,
    pub trials: Vec<Trial>,
}

impl SearchOutcome {
    pub fn best_auc(&self) -> f64 {
        self.trials
            .iter()
            .find(|t| t.params == self.best)
            .map_or(f64::NAN, |t| t.val_auc)
    }
}

/// Splits rows into (fit, validation): the validation part holds every row of
/// the last `val_ratio` fraction of cases, taken in row order.
pub fn validation_split(x: &FeatureMatrix, val_ratio: f64) -> (FeatureMatrix, FeatureMatrix) {
    let mut seen = HashSet::new();
    let cases: Vec<&str> = x
        .row_ids
        .iter()
        .map(|r| r.case_id.as_str())
        .filter(|c| seen.insert(*c))
        .collect();
    let n_val = ((cases.len() as f64 * val_ratio).ceil() as usize).clamp(1, cases.len().saturating_sub(1).max(1));
    let val_cases: HashSet<&str> = cases[cases.len() - n_val..].iter().copied().collect();
    let (val, fit): (Vec<usize>, Vec<usize>) =
        (0..x.n_rows()).partition(|&i| val_cases.contains(x.row_ids[i].case_id.as_str()));
    (x.select(&fit), x.select(&val))
}

fn two_classes(x: &FeatureMatrix) -> bool {
    x.labels.iter().any(|&l| l) && x.labels.iter().any(|&l| !l)
}

fn score(model: &Model, x: &FeatureMatrix) -> Result<f64> {
    let scores: Vec<f64> = x.rows.iter().map(|r| model.margin(r)).collect();
    evaluate_auc(&scores, &x.labels)
}

/// Samples `budget` configurations and returns the one with the highest
/// validation AUC (first sampled wins ties). When either side of the split
/// misses a class the configurations are scored on the full matrix instead.
pub fn random_search(
    x: &FeatureMatrix,
    space: &SearchSpace,
    budget: usize,
    val_ratio: f64,
    seed: u64,
) -> Result<SearchOutcome> {
    space.check()?;
    if budget == 0 {
        return Err(Error::InvalidArgument("search budget must be at least 1".into()));
    }
    if !(val_ratio > 0.0 && val_ratio < 1.0) {
        return Err(Error::InvalidArgument("validation ratio must lie in (0, 1)".into()));
    }
    let (fit, val) = validation_split(x, val_ratio);
    let (fit, val) = if two_classes(&fit) && two_classes(&val) {
        (fit, val)
    } else {
        (x.clone(), x.clone())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["random_search"]));
    let mut trials = Vec::with_capacity(budget);
    for t in 0..budget {
        let params = space.sample(&mut rng, derive_seed(seed, &["trial", &t.to_string()]));
        let model = train(&fit, &params)?;
        trials.push(Trial {
            params,
            val_auc: score(&model, &val)?,
        });
    }
    let mut best = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.val_auc > trials[best].val_auc {
            best = i;
        }
    }
    Ok(SearchOutcome {
        best: trials[best].params,
        trials,
    })
}
