//! LIME: a weighted ridge surrogate fit on perturbations of one row.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::encoding::FeatureMatrix;
use crate::error::{Error, Result};
use crate::models::Predictor;
use crate::util::{derive_seed, mean, solve_spd, std_dev};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LimeParams {
    pub k: usize,
    pub n_samples: usize,
    /// Defaults to `0.75 * sqrt(M)` on standardized features.
    pub kernel_width: Option<f64>,
    pub ridge_alpha: f64,
}

impl Default for LimeParams {
    fn default() -> Self {
        LimeParams {
            k: 10,
            n_samples: 5000,
            kernel_width: None,
            ridge_alpha: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeFeature {
    pub index: usize,
    pub name: String,
    /// Probability change per unit of the feature, in original units.
    pub coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeExplanation {
    pub top_features: Vec<LimeFeature>,
    pub intercept: f64,
    pub surrogate_r2: f64,
    pub seed: u64,
    pub n_features: usize,
    pub predicted_proba: f64,
}

impl LimeExplanation {
    pub fn feature_names(&self) -> Vec<&str> {
        self.top_features.iter().map(|f| f.name.as_str()).collect()
    }
}

/// Training-set statistics that drive the perturbations.
#[derive(Debug, Clone)]
pub struct LimeContext {
    names: Vec<String>,
    means: Vec<f64>,
    stds: Vec<f64>,
    /// Sorted training values for discrete columns, resampled uniformly.
    empirical: Vec<Option<Vec<f64>>>,
}

impl LimeContext {
    pub fn new(x_train: &FeatureMatrix) -> Result<Self> {
        if x_train.n_rows() == 0 {
            return Err(Error::EmptyBucket);
        }
        let mut means = Vec::new();
        let mut stds = Vec::new();
        let mut empirical = Vec::new();
        for (j, col) in x_train.columns.iter().enumerate() {
            let mut v = x_train.column(j);
            means.push(mean(&v));
            stds.push(std_dev(&v));
            empirical.push(col.encoding_kind.is_discrete().then(|| {
                v.sort_by(f64::total_cmp);
                v
            }));
        }
        Ok(LimeContext {
            names: x_train.column_names(),
            means,
            stds,
            empirical,
        })
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn explain(&self, model: &dyn Predictor, row: &[f64], params: &LimeParams, seed: u64) -> Result<LimeExplanation> {
        let m = self.n_features();
        if row.len() != m || model.n_features() != m {
            return Err(Error::WidthMismatch {
                expected: m,
                got: row.len(),
            });
        }
        if params.k == 0 {
            return Err(Error::InvalidArgument("LIME needs k >= 1".into()));
        }
        let needed = 10 * params.k;
        if params.n_samples < needed {
            return Err(Error::InsufficientSamples {
                needed,
                got: params.n_samples,
            });
        }
        let active: Vec<usize> = (0..m).filter(|&j| self.stds[j] > 0.0).collect();
        if active.is_empty() {
            return Err(Error::DegeneratePerturbations);
        }
        let width = params.kernel_width.unwrap_or(0.75 * (m as f64).sqrt());
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["lime"]));
        let n = params.n_samples;
        // standardized samples over the active columns
        let mut z = DMatrix::<f64>::zeros(n, active.len());
        let mut y = DVector::<f64>::zeros(n);
        let mut w = DVector::<f64>::zeros(n);
        let mut sample = row.to_vec();
        for i in 0..n {
            for (j, s) in sample.iter_mut().enumerate() {
                *s = match &self.empirical[j] {
                    Some(values) => values[rng.random_range(0..values.len())],
                    None => self.means[j] + self.stds[j] * rng.sample::<f64, _>(StandardNormal),
                };
            }
            let mut d2 = 0.0;
            for (c, &j) in active.iter().enumerate() {
                let zs = (sample[j] - self.means[j]) / self.stds[j];
                z[(i, c)] = zs;
                let d = (sample[j] - row[j]) / self.stds[j];
                d2 += d * d;
            }
            y[i] = model.proba(&sample);
            w[i] = (-d2 / (width * width)).exp();
        }
        if w.sum() <= 0.0 {
            return Err(Error::DegeneratePerturbations);
        }
        let all: Vec<usize> = (0..active.len()).collect();
        let full = ridge(&z, &y, &w, &all, params.ridge_alpha)?;
        let mut order = all.clone();
        order.sort_by(|&a, &b| full.beta[b].abs().total_cmp(&full.beta[a].abs()).then(a.cmp(&b)));
        order.truncate(params.k.min(active.len()));
        order.sort_unstable();
        let fit = ridge(&z, &y, &w, &order, params.ridge_alpha)?;
        let mut intercept = fit.intercept;
        let mut top_features: Vec<LimeFeature> = order
            .iter()
            .zip(&fit.beta)
            .map(|(&c, &b)| {
                let j = active[c];
                intercept -= b * self.means[j] / self.stds[j];
                LimeFeature {
                    index: j,
                    name: self.names[j].clone(),
                    coefficient: b / self.stds[j],
                }
            })
            .collect();
        top_features.sort_by(|a, b| {
            (b.coefficient * self.stds[b.index])
                .abs()
                .total_cmp(&(a.coefficient * self.stds[a.index]).abs())
                .then(a.index.cmp(&b.index))
        });
        Ok(LimeExplanation {
            top_features,
            intercept,
            surrogate_r2: fit.r2,
            seed,
            n_features: m,
            predicted_proba: model.proba(row),
        })
    }
}

struct RidgeFit {
    beta: Vec<f64>,
    intercept: f64,
    r2: f64,
}

/// Weighted ridge on the selected columns with an unpenalized intercept.
fn ridge(z: &DMatrix<f64>, y: &DVector<f64>, w: &DVector<f64>, cols: &[usize], alpha: f64) -> Result<RidgeFit> {
    let n = z.nrows();
    let p = cols.len();
    let sw = w.sum();
    let ybar = w.dot(y) / sw;
    let xbar: Vec<f64> = cols.iter().map(|&c| w.dot(&z.column(c)) / sw).collect();
    let mut xtx = DMatrix::<f64>::identity(p, p) * alpha;
    let mut xty = DVector::<f64>::zeros(p);
    let mut xc = vec![0.0; p];
    for i in 0..n {
        for (a, &c) in cols.iter().enumerate() {
            xc[a] = z[(i, c)] - xbar[a];
        }
        let yc = y[i] - ybar;
        for a in 0..p {
            xty[a] += w[i] * xc[a] * yc;
            for b in a..p {
                xtx[(a, b)] += w[i] * xc[a] * xc[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            xtx[(a, b)] = xtx[(b, a)];
        }
    }
    let beta: Vec<f64> = solve_spd(xtx, xty).ok_or(Error::DegeneratePerturbations)?.iter().copied().collect();
    let intercept = ybar - beta.iter().zip(&xbar).map(|(b, x)| b * x).sum::<f64>();
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..n {
        let pred = intercept + cols.iter().zip(&beta).map(|(&c, b)| b * z[(i, c)]).sum::<f64>();
        ss_res += w[i] * (y[i] - pred).powi(2);
        ss_tot += w[i] * (y[i] - ybar).powi(2);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(RidgeFit { beta, intercept, r2 })
}

pub fn lime_explain(
    model: &dyn Predictor,
    row: &[f64],
    x_train: &FeatureMatrix,
    params: &LimeParams,
    seed: u64,
) -> Result<LimeExplanation> {
    LimeContext::new(x_train)?.explain(model, row, params, seed)
}
