//! Shapley attributions for the interventional value function
//! `v(S) = mean_b f(x_S, b_{-S})` over a background set `b`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Attribution, GlobalExplanation, GlobalMethod};
use crate::encoding::FeatureMatrix;
use crate::error::{Error, Result};
use crate::models::{Model, Predictor};
use crate::util::{derive_seed, mean, pearson, solve_spd};

/// Largest feature count accepted by [`shap_exact`].
pub const EXACT_FEATURE_LIMIT: usize = 12;

/// Seeded subsample of at most `max_rows` rows, without replacement.
pub fn sample_background(x: &FeatureMatrix, max_rows: usize, seed: u64) -> Vec<Vec<f64>> {
    let n = x.n_rows();
    if n <= max_rows {
        return x.rows.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["background"]));
    let mut idx = sample(&mut rng, n, max_rows).into_vec();
    idx.sort_unstable();
    idx.into_iter().map(|i| x.rows[i].clone()).collect()
}

struct ValueFn<'a> {
    model: &'a dyn Predictor,
    row: &'a [f64],
    background: &'a [Vec<f64>],
    scratch: Vec<f64>,
}

impl<'a> ValueFn<'a> {
    fn new(model: &'a dyn Predictor, row: &'a [f64], background: &'a [Vec<f64>]) -> Result<Self> {
        if background.is_empty() {
            return Err(Error::EmptyBackground);
        }
        let m = model.n_features();
        if row.len() != m || background.iter().any(|b| b.len() != m) {
            return Err(Error::WidthMismatch {
                expected: m,
                got: row.len(),
            });
        }
        Ok(ValueFn {
            model,
            row,
            background,
            scratch: vec![0.0; m],
        })
    }

    fn eval(&mut self, in_coalition: impl Fn(usize) -> bool) -> f64 {
        let mut total = 0.0;
        for b in self.background {
            for (j, s) in self.scratch.iter_mut().enumerate() {
                *s = if in_coalition(j) { self.row[j] } else { b[j] };
            }
            total += self.model.margin(&self.scratch);
        }
        total / self.background.len() as f64
    }

    fn mask(&mut self, mask: u64) -> f64 {
        self.eval(|j| mask >> j & 1 == 1)
    }
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Brute-force Shapley values over all `2^M` coalitions.
pub fn shap_exact(model: &dyn Predictor, row: &[f64], background: &[Vec<f64>]) -> Result<Attribution> {
    let m = model.n_features();
    if m > EXACT_FEATURE_LIMIT {
        return Err(Error::TooManyFeatures {
            features: m,
            limit: EXACT_FEATURE_LIMIT,
        });
    }
    let mut vf = ValueFn::new(model, row, background)?;
    let values: Vec<f64> = (0..1u64 << m).map(|mask| vf.mask(mask)).collect();
    let ln_m = ln_factorial(m);
    let weight: Vec<f64> = (0..m)
        .map(|s| (ln_factorial(s) + ln_factorial(m - s - 1) - ln_m).exp())
        .collect();
    let mut phi = vec![0.0; m];
    for (mask, &v) in values.iter().enumerate() {
        let size = (mask as u64).count_ones() as usize;
        for (j, p) in phi.iter_mut().enumerate() {
            if mask >> j & 1 == 0 {
                *p += weight[size] * (values[mask | 1 << j] - v);
            }
        }
    }
    Ok(Attribution {
        phi,
        base_value: values[0],
        predicted: model.margin(row),
        row_id: None,
    })
}

/// Kernel SHAP. Enumerates every coalition when `2^M <= n_samples` (exact),
/// otherwise samples paired coalitions as in [`shap_kernel_sampled`].
pub fn shap_kernel(
    model: &dyn Predictor,
    row: &[f64],
    background: &[Vec<f64>],
    n_samples: usize,
    seed: u64,
) -> Result<Attribution> {
    let m = model.n_features();
    if m < 31 && (1usize << m) <= n_samples {
        let coalitions = (1..(1u64 << m) - 1)
            .map(|mask| {
                let z: Vec<bool> = (0..m).map(|j| mask >> j & 1 == 1).collect();
                let s = mask.count_ones() as usize;
                (z, shapley_kernel(m, s))
            })
            .collect();
        kernel_fit(model, row, background, coalitions)
    } else {
        shap_kernel_sampled(model, row, background, n_samples, seed)
    }
}

fn shapley_kernel(m: usize, s: usize) -> f64 {
    let ln_binom = ln_factorial(m) - ln_factorial(s) - ln_factorial(m - s);
    (m - 1) as f64 / (ln_binom.exp() * s as f64 * (m - s) as f64)
}

/// Kernel SHAP on `n_samples` sampled coalitions. Sizes are drawn in
/// proportion to their total kernel mass and each draw is paired with its
/// complement, so every sampled coalition carries equal weight.
pub fn shap_kernel_sampled(
    model: &dyn Predictor,
    row: &[f64],
    background: &[Vec<f64>],
    n_samples: usize,
    seed: u64,
) -> Result<Attribution> {
    let m = model.n_features();
    let needed = 2 * m + 2;
    if n_samples < needed {
        return Err(Error::InsufficientSamples {
            needed,
            got: n_samples,
        });
    }
    if m < 2 {
        return kernel_fit(model, row, background, Vec::new());
    }
    let size_mass: Vec<f64> = (1..m).map(|s| (m - 1) as f64 / (s * (m - s)) as f64).collect();
    let total: f64 = size_mass.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &["kernel_shap"]));
    let mut counts: BTreeMap<Vec<bool>, f64> = BTreeMap::new();
    for _ in 0..n_samples / 2 {
        let mut u = rng.random::<f64>() * total;
        let mut s = m - 1;
        for (k, &w) in size_mass.iter().enumerate() {
            if u < w {
                s = k + 1;
                break;
            }
            u -= w;
        }
        let mut z = vec![false; m];
        for j in sample(&mut rng, m, s) {
            z[j] = true;
        }
        let complement: Vec<bool> = z.iter().map(|b| !b).collect();
        *counts.entry(z).or_insert(0.0) += 1.0;
        *counts.entry(complement).or_insert(0.0) += 1.0;
    }
    kernel_fit(model, row, background, counts.into_iter().collect())
}

/// Weighted least squares over coalitions with `phi_0 = v(empty)` and
/// `phi_0 + sum(phi) = v(full)` imposed by eliminating the last feature.
fn kernel_fit(
    model: &dyn Predictor,
    row: &[f64],
    background: &[Vec<f64>],
    coalitions: Vec<(Vec<bool>, f64)>,
) -> Result<Attribution> {
    let m = model.n_features();
    if m == 0 {
        return Err(Error::InvalidArgument("model has no features".into()));
    }
    let mut vf = ValueFn::new(model, row, background)?;
    let v0 = vf.eval(|_| false);
    let predicted = model.margin(row);
    let delta = predicted - v0;
    if m == 1 {
        return Ok(Attribution {
            phi: vec![delta],
            base_value: v0,
            predicted,
            row_id: None,
        });
    }
    let p = m - 1;
    let mut ata = DMatrix::<f64>::zeros(p, p);
    let mut atb = DVector::<f64>::zeros(p);
    let mut a = vec![0.0; p];
    for (z, w) in &coalitions {
        let y = vf.eval(|j| z[j]) - v0;
        let last = f64::from(u8::from(z[p]));
        for (j, aj) in a.iter_mut().enumerate() {
            *aj = f64::from(u8::from(z[j])) - last;
        }
        let target = y - last * delta;
        for i in 0..p {
            if a[i] == 0.0 {
                continue;
            }
            atb[i] += w * a[i] * target;
            for k in 0..p {
                ata[(i, k)] += w * a[i] * a[k];
            }
        }
    }
    let solved = solve_spd(ata.clone(), atb.clone()).filter(|s| s.iter().all(|v| v.is_finite()));
    let sol = match solved {
        Some(s) => s,
        None => {
            let ridge = 1e-8 * (ata.trace() / p as f64).max(1e-12);
            let reg = ata + DMatrix::identity(p, p) * ridge;
            solve_spd(reg, atb).ok_or(Error::DegeneratePerturbations)?
        }
    };
    let mut phi: Vec<f64> = sol.iter().copied().collect();
    phi.push(delta - phi.iter().sum::<f64>());
    Ok(Attribution {
        phi,
        base_value: v0,
        predicted,
        row_id: None,
    })
}

/// Closed form for logistic regression: `phi_j = w_j (x_j - mean_j)`.
pub fn shap_linear(model: &Model, row: &[f64], background: &[Vec<f64>]) -> Result<Attribution> {
    let w = model
        .logit_weights()
        .ok_or(Error::WrongModelKind { expected: "logit" })?;
    if background.is_empty() {
        return Err(Error::EmptyBackground);
    }
    if row.len() != w.len() {
        return Err(Error::WidthMismatch {
            expected: w.len(),
            got: row.len(),
        });
    }
    let means: Vec<f64> = (0..w.len())
        .map(|j| background.iter().map(|b| b[j]).sum::<f64>() / background.len() as f64)
        .collect();
    let phi = w.iter().zip(row).zip(&means).map(|((w, x), m)| w * (x - m)).collect();
    let base = model.base_score + w.iter().zip(&means).map(|(w, m)| w * m).sum::<f64>();
    Ok(Attribution {
        phi,
        base_value: base,
        predicted: model.margin(row),
        row_id: None,
    })
}

/// Mean |phi| per feature.
pub fn shap_global(attrs: &[Attribution], feature_names: &[String]) -> Result<GlobalExplanation> {
    if attrs.is_empty() {
        return Err(Error::InvalidArgument("at least one attribution is required".into()));
    }
    let m = feature_names.len();
    if attrs.iter().any(|a| a.phi.len() != m) {
        return Err(Error::SchemaMismatch("attribution width differs from feature count".into()));
    }
    let scores = (0..m)
        .map(|j| attrs.iter().map(|a| a.phi[j].abs()).sum::<f64>() / attrs.len() as f64)
        .collect();
    Ok(GlobalExplanation::new(
        GlobalMethod::ShapGlobal,
        feature_names.to_vec(),
        scores,
        None,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependencePoint {
    pub value: f64,
    pub shap: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interaction_value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DependenceData {
    pub feature_index: usize,
    pub feature_name: String,
    pub interaction_index: Option<usize>,
    pub interaction_name: Option<String>,
    pub points: Vec<DependencePoint>,
}

impl DependenceData {
    /// R^2 of a least-squares line through the (value, shap) points.
    pub fn linear_r2(&self) -> f64 {
        let xs: Vec<f64> = self.points.iter().map(|p| p.value).collect();
        let ys: Vec<f64> = self.points.iter().map(|p| p.shap).collect();
        if ys.iter().all(|&y| y == ys[0]) {
            return 1.0;
        }
        let r = pearson(&xs, &ys);
        r * r
    }
}

const DEPENDENCE_BINS: usize = 10;

/// Dependence-plot triples for `feature`. Without an explicit `interaction`
/// the column most correlated (in absolute value) with the within-bin
/// residuals of `phi_feature` is chosen.
pub fn shap_dependence_data(
    attrs: &[Attribution],
    x: &FeatureMatrix,
    feature: usize,
    interaction: Option<usize>,
) -> Result<DependenceData> {
    if attrs.len() != x.n_rows() {
        return Err(Error::SchemaMismatch("attributions do not cover the matrix rows".into()));
    }
    let m = x.n_cols();
    if feature >= m || interaction.is_some_and(|k| k >= m) || attrs.iter().any(|a| a.phi.len() != m) {
        return Err(Error::SchemaMismatch("feature index outside the attribution width".into()));
    }
    let xs = x.column(feature);
    if xs.iter().all(|&v| v == xs[0]) {
        return Err(Error::ConstantFeature(feature));
    }
    let phis: Vec<f64> = attrs.iter().map(|a| a.phi[feature]).collect();
    let chosen = match interaction {
        Some(k) => Some(k),
        None => {
            let resid = binned_residuals(&xs, &phis);
            let mut best: Option<(usize, f64)> = None;
            for k in (0..m).filter(|&k| k != feature) {
                let col = x.column(k);
                if col.iter().all(|&v| v == col[0]) {
                    continue;
                }
                let r = pearson(&col, &resid).abs();
                if best.is_none_or(|(_, b)| r > b) {
                    best = Some((k, r));
                }
            }
            best.map(|(k, _)| k)
        }
    };
    let names = x.column_names();
    let points = (0..x.n_rows())
        .map(|i| DependencePoint {
            value: xs[i],
            shap: phis[i],
            interaction_value: chosen.map(|k| x.rows[i][k]),
        })
        .collect();
    Ok(DependenceData {
        feature_index: feature,
        feature_name: names[feature].clone(),
        interaction_index: chosen,
        interaction_name: chosen.map(|k| names[k].clone()),
        points,
    })
}

fn binned_residuals(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut edges: Vec<f64> = (1..DEPENDENCE_BINS)
        .map(|k| sorted[((k as f64 / DEPENDENCE_BINS as f64) * (n - 1) as f64).round() as usize])
        .collect();
    edges.dedup();
    let bin = |v: f64| edges.partition_point(|&e| e < v);
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (&x, &y) in xs.iter().zip(ys) {
        groups.entry(bin(x)).or_default().push(y);
    }
    let means: BTreeMap<usize, f64> = groups.iter().map(|(k, v)| (*k, mean(v))).collect();
    xs.iter().zip(ys).map(|(&x, &y)| y - means[&bin(x)]).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionStep {
    /// `None` for the merged step of features below the top-N cut.
    pub feature_index: Option<usize>,
    pub label: String,
    pub phi: f64,
    pub cumulative: f64,
}

/// Cumulative path from the base value through features in ascending |phi|.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionPathData {
    pub base_value: f64,
    pub predicted: f64,
    pub steps: Vec<DecisionStep>,
}

impl DecisionPathData {
    pub fn endpoint(&self) -> f64 {
        self.steps.last().map_or(self.base_value, |s| s.cumulative)
    }
}

/// Features with exactly zero attribution contribute no step; all but the
/// `top_n` largest are merged into one leading `others` step.
pub fn decision_path_data(attr: &Attribution, feature_names: &[String], top_n: usize) -> DecisionPathData {
    let mut idx: Vec<usize> = (0..attr.phi.len()).filter(|&j| attr.phi[j] != 0.0).collect();
    idx.sort_by(|&a, &b| attr.phi[a].abs().total_cmp(&attr.phi[b].abs()).then(a.cmp(&b)));
    let merged = idx.len().saturating_sub(top_n);
    let mut steps = Vec::new();
    let mut cum = attr.base_value;
    if merged > 0 {
        let phi: f64 = idx[..merged].iter().map(|&j| attr.phi[j]).sum();
        cum += phi;
        steps.push(DecisionStep {
            feature_index: None,
            label: format!("others ({merged})"),
            phi,
            cumulative: cum,
        });
    }
    for &j in &idx[merged..] {
        cum += attr.phi[j];
        steps.push(DecisionStep {
            feature_index: Some(j),
            label: feature_names.get(j).cloned().unwrap_or_else(|| format!("x{j}")),
            phi: attr.phi[j],
            cumulative: cum,
        });
    }
    DecisionPathData {
        base_value: attr.base_value,
        predicted: attr.predicted,
        steps,
    }
}
