use serde::{Deserialize, Serialize};

use super::{GlobalExplanation, GlobalMethod};
use crate::encoding::FeatureMatrix;
use crate::error::{Error, Result};
use crate::models::Predictor;

const ENTROPY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AleKind {
    /// Quantile bins; `effects[k]` is the centered value at `edges[k]`.
    Numeric,
    /// Columns taking only the values 0 and 1, evaluated at exactly 0 and 1.
    Binary,
}

/// First-order ALE curve in margin space.
///
/// Numeric curves have `edges.len() == effects.len() == bin_counts.len() + 1`;
/// binary curves carry one count per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ALECurve {
    pub feature_index: usize,
    pub feature_name: String,
    pub kind: AleKind,
    pub edges: Vec<f64>,
    pub effects: Vec<f64>,
    pub bin_counts: Vec<usize>,
}

impl ALECurve {
    /// Per-bin |effect| (bin midpoint for numeric curves, point value for
    /// binary ones) paired with the bin's row count.
    fn weighted_magnitudes(&self) -> Vec<f64> {
        match self.kind {
            AleKind::Numeric => self
                .bin_counts
                .iter()
                .enumerate()
                .map(|(k, &c)| c as f64 * (0.5 * (self.effects[k] + self.effects[k + 1])).abs())
                .collect(),
            AleKind::Binary => self
                .bin_counts
                .iter()
                .zip(&self.effects)
                .map(|(&c, e)| c as f64 * e.abs())
                .collect(),
        }
    }

    /// Count-weighted mean of the curve, which centering drives to zero.
    pub fn centering_residual(&self) -> f64 {
        let n: usize = self.bin_counts.iter().sum();
        let s: f64 = match self.kind {
            AleKind::Numeric => self
                .bin_counts
                .iter()
                .enumerate()
                .map(|(k, &c)| c as f64 * 0.5 * (self.effects[k] + self.effects[k + 1]))
                .sum(),
            AleKind::Binary => self.bin_counts.iter().zip(&self.effects).map(|(&c, e)| c as f64 * e).sum(),
        };
        s / n.max(1) as f64
    }

    pub fn is_flat(&self) -> bool {
        self.effects.iter().all(|&e| e == 0.0)
    }

    /// Shannon entropy of the normalized weighted |effects|; 0 for flat curves.
    pub fn entropy(&self) -> f64 {
        let w = self.weighted_magnitudes();
        let total: f64 = w.iter().sum();
        if total <= ENTROPY_EPS {
            return 0.0;
        }
        -w.iter()
            .map(|&x| x / total)
            .filter(|&p| p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Grid {
    Constant,
    Binary,
    Numeric(Vec<f64>),
}

/// Precomputed quantile grids for every column of a matrix.
#[derive(Debug, Clone)]
pub struct AleExplainer {
    n_bins: usize,
    names: Vec<String>,
    grids: Vec<Grid>,
}

fn grid_for(column: &mut [f64], n_bins: usize) -> Grid {
    column.sort_by(f64::total_cmp);
    let (lo, hi) = (column[0], column[column.len() - 1]);
    if lo == hi {
        return Grid::Constant;
    }
    if column.iter().all(|&v| v == 0.0 || v == 1.0) {
        return Grid::Binary;
    }
    let n = column.len();
    let mut edges: Vec<f64> = (0..=n_bins)
        .map(|k| column[((k as f64 / n_bins as f64) * (n - 1) as f64).round() as usize])
        .collect();
    edges.dedup();
    Grid::Numeric(edges)
}

impl AleExplainer {
    pub fn new(x: &FeatureMatrix, n_bins: usize) -> Result<Self> {
        if n_bins < 2 {
            return Err(Error::InvalidArgument("ALE needs at least 2 bins".into()));
        }
        if x.n_rows() == 0 {
            return Err(Error::EmptyBucket);
        }
        let grids = (0..x.n_cols()).map(|j| grid_for(&mut x.column(j), n_bins)).collect();
        Ok(AleExplainer {
            n_bins,
            names: x.column_names(),
            grids,
        })
    }

    pub fn n_bins(&self) -> usize {
        self.n_bins
    }

    pub fn is_constant(&self, j: usize) -> bool {
        self.grids[j] == Grid::Constant
    }

    pub fn curve(&self, model: &dyn Predictor, x: &FeatureMatrix, j: usize) -> Result<ALECurve> {
        if j >= self.grids.len() {
            return Err(Error::InvalidArgument(format!("feature index {j} out of range")));
        }
        if x.n_cols() != self.grids.len() || x.n_cols() != model.n_features() {
            return Err(Error::WidthMismatch {
                expected: self.grids.len(),
                got: x.n_cols(),
            });
        }
        let mut scratch = vec![0.0; x.n_cols()];
        let mut eval = |row: &[f64], v: f64| {
            scratch.copy_from_slice(row);
            scratch[j] = v;
            model.margin(&scratch)
        };
        let (kind, edges, uncentered, counts) = match &self.grids[j] {
            Grid::Constant => return Err(Error::ConstantFeature(j)),
            Grid::Binary => {
                let mut diff = 0.0;
                let mut ones = 0;
                for r in &x.rows {
                    diff += eval(r, 1.0) - eval(r, 0.0);
                    ones += usize::from(r[j] == 1.0);
                }
                let n = x.n_rows();
                (AleKind::Binary, vec![0.0, 1.0], vec![0.0, diff / n as f64], vec![n - ones, ones])
            }
            Grid::Numeric(edges) => {
                let nb = edges.len() - 1;
                let mut sums = vec![0.0; nb];
                let mut counts = vec![0usize; nb];
                for r in &x.rows {
                    let v = r[j];
                    let k = edges[1..].partition_point(|&e| e < v).min(nb - 1);
                    sums[k] += eval(r, edges[k + 1]) - eval(r, edges[k]);
                    counts[k] += 1;
                }
                let mut acc = vec![0.0; nb + 1];
                for k in 0..nb {
                    let step = if counts[k] > 0 { sums[k] / counts[k] as f64 } else { 0.0 };
                    acc[k + 1] = acc[k] + step;
                }
                (AleKind::Numeric, edges.clone(), acc, counts)
            }
        };
        let mut curve = ALECurve {
            feature_index: j,
            feature_name: self.names[j].clone(),
            kind,
            edges,
            effects: uncentered,
            bin_counts: counts,
        };
        let shift = curve.centering_residual();
        if shift != 0.0 {
            for e in &mut curve.effects {
                *e -= shift;
            }
        }
        Ok(curve)
    }

    /// Curves for every non-constant column.
    pub fn curves(&self, model: &dyn Predictor, x: &FeatureMatrix) -> Result<Vec<ALECurve>> {
        (0..self.grids.len())
            .filter(|&j| !self.is_constant(j))
            .map(|j| self.curve(model, x, j))
            .collect()
    }
}

pub fn ale_curve(model: &dyn Predictor, x: &FeatureMatrix, feature: usize, n_bins: usize) -> Result<ALECurve> {
    AleExplainer::new(x, n_bins)?.curve(model, x, feature)
}

/// Ranks features by curve entropy. Features that are flat or have no curve
/// score 0 and come last, in feature order.
pub fn ale_global_rank(curves: &[ALECurve], feature_names: &[String]) -> GlobalExplanation {
    let m = feature_names.len();
    let mut scores = vec![0.0; m];
    let mut flat = vec![true; m];
    for c in curves {
        if c.feature_index < m {
            scores[c.feature_index] = c.entropy();
            flat[c.feature_index] = c.is_flat();
        }
    }
    let mut ranking: Vec<usize> = (0..m).collect();
    ranking.sort_by(|&a, &b| {
        flat[a]
            .cmp(&flat[b])
            .then(scores[b].total_cmp(&scores[a]))
            .then(a.cmp(&b))
    });
    GlobalExplanation {
        method: GlobalMethod::AleEntropy,
        feature_names: feature_names.to_vec(),
        scores,
        per_iteration: None,
        ranking,
    }
}
