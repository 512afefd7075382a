//! Second-order gradient boosting on the logistic loss with exact greedy
//! splits. A split of a node with gradient/hessian sums `(G, H)` into
//! `(G_L, H_L)` and `(G_R, H_R)` has gain
//! `0.5 * [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - gamma`, and leaves
//! carry `-learning_rate * G/(H+l)`.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_training_data, logloss, Diagnostics, GbtParams, HyperParams, Model, ModelKind, ModelParams};
use crate::encoding::FeatureMatrix;
use crate::error::Result;
use crate::util::{derive_seed, sigmoid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Leaf {
        value: f64,
        cover: f64,
    },
    /// Rows with `x[feature] < threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        gain: f64,
        cover: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { value, .. } => return *value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => i = if row[*feature] < *threshold { *left } else { *right },
            }
        }
    }
}

pub(crate) fn split_gain(gl: f64, hl: f64, gr: f64, hr: f64, lambda: f64, gamma: f64) -> f64 {
    let g = gl + gr;
    let h = hl + hr;
    0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - g * g / (h + lambda)) - gamma
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    grad: &'a [f64],
    hess: &'a [f64],
    hp: &'a GbtParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl Builder<'_> {
    fn build(&mut self, rows: &[usize], depth: usize) -> usize {
        let g: f64 = rows.iter().map(|&i| self.grad[i]).sum();
        let h: f64 = rows.iter().map(|&i| self.hess[i]).sum();
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            value: -self.hp.learning_rate * g / (h + self.hp.l2_leaf),
            cover: h,
        });
        if depth >= self.hp.max_depth || rows.len() < 2 {
            return id;
        }
        let Some(best) = self.best_split(rows, g, h) else {
            return id;
        };
        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            rows.iter().partition(|&&i| self.x.rows[i][best.feature] < best.threshold);
        let left = self.build(&left_rows, depth + 1);
        let right = self.build(&right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: best.feature,
            threshold: best.threshold,
            gain: best.gain,
            cover: h,
            left,
            right,
        };
        id
    }

    fn best_split(&self, rows: &[usize], g: f64, h: f64) -> Option<BestSplit> {
        let lambda = self.hp.l2_leaf;
        let mut best: Option<BestSplit> = None;
        let mut order = rows.to_vec();
        for f in 0..self.x.n_cols() {
            let val = |i: usize| self.x.rows[i][f];
            order.sort_by(|&a, &b| val(a).total_cmp(&val(b)).then(a.cmp(&b)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..order.len() - 1 {
                let i = order[k];
                gl += self.grad[i];
                hl += self.hess[i];
                let (lo, hi) = (val(i), val(order[k + 1]));
                if lo == hi {
                    continue;
                }
                let hr = h - hl;
                if hl < self.hp.min_child_weight || hr < self.hp.min_child_weight {
                    continue;
                }
                let gain = split_gain(gl, hl, g - gl, hr, lambda, self.hp.gamma);
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    let mut threshold = 0.5 * (lo + hi);
                    if threshold <= lo {
                        threshold = hi;
                    }
                    best = Some(BestSplit {
                        feature: f,
                        threshold,
                        gain,
                    });
                }
            }
        }
        best
    }
}

pub fn train_gbt(x: &FeatureMatrix, hp: &GbtParams) -> Result<Model> {
    HyperParams::Gbt(*hp).validate()?;
    check_training_data(x)?;
    let n = x.n_rows();
    let prior = (x.labels.iter().filter(|&&l| l).count() as f64 / n as f64).clamp(1e-6, 1.0 - 1e-6);
    let base_score = (prior / (1.0 - prior)).ln();
    let mut margins = vec![base_score; n];
    let mut trees = Vec::with_capacity(hp.n_trees);
    let mut diagnostics = Diagnostics {
        converged: true,
        iterations: 0,
        loss_history: vec![logloss(&margins, &x.labels)],
    };
    let n_sample = ((hp.subsample * n as f64).ceil() as usize).clamp(1, n);
    for t in 0..hp.n_trees {
        let grad: Vec<f64> = margins
            .iter()
            .zip(&x.labels)
            .map(|(&m, &y)| sigmoid(m) - if y { 1.0 } else { 0.0 })
            .collect();
        let hess: Vec<f64> = margins
            .iter()
            .map(|&m| {
                let p = sigmoid(m);
                (p * (1.0 - p)).max(1e-16)
            })
            .collect();
        let rows: Vec<usize> = if n_sample == n {
            (0..n).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(hp.seed, &["subsample", &t.to_string()]));
            let mut idx = sample(&mut rng, n, n_sample).into_vec();
            idx.sort_unstable();
            idx
        };
        let mut builder = Builder {
            x,
            grad: &grad,
            hess: &hess,
            hp,
            nodes: Vec::new(),
        };
        builder.build(&rows, 0);
        let tree = Tree { nodes: builder.nodes };
        for (m, r) in margins.iter_mut().zip(&x.rows) {
            *m += tree.predict(r);
        }
        trees.push(tree);
        diagnostics.iterations = t + 1;
        diagnostics.loss_history.push(logloss(&margins, &x.labels));
    }
    Ok(Model {
        kind: ModelKind::Gbt,
        params: ModelParams::Gbt { trees },
        base_score,
        training_schema: x.columns.clone(),
        hyper: HyperParams::Gbt(*hp),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::models::{intrinsic_importance, train_logit, LogitParams, Predictor};

    /// Label = (a > 0.5) XOR (b > 0.5) on uniform points. An exactly
    /// balanced XOR table has zero gain at the root, so points are random.
    pub(crate) fn xor_matrix(n: usize) -> FeatureMatrix {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            rows.push(vec![a, b]);
            labels.push((a > 0.5) != (b > 0.5));
        }
        FeatureMatrix::from_rows(rows, labels).unwrap()
    }

    fn accuracy(m: &Model, x: &FeatureMatrix) -> f64 {
        x.rows
            .iter()
            .zip(&x.labels)
            .filter(|(r, &l)| (m.proba(r) >= 0.5) == l)
            .count() as f64
            / x.n_rows() as f64
    }

    #[test]
    fn xor_separates_only_with_trees() {
        let x = xor_matrix(400);
        let gbt = train_gbt(&x, &GbtParams { max_depth: 2, n_trees: 100, learning_rate: 0.3, ..GbtParams::default() }).unwrap();
        assert!(accuracy(&gbt, &x) >= 0.95);
        let lr = train_logit(&x, &LogitParams::default()).unwrap();
        assert!(accuracy(&lr, &x) <= 0.6);
    }

    #[test]
    fn zero_trees_predicts_prior() {
        let x = xor_matrix(30);
        let m = train_gbt(&x, &GbtParams { n_trees: 0, ..GbtParams::default() }).unwrap();
        let prior = x.labels.iter().filter(|&&l| l).count() as f64 / 30.0;
        assert!((m.base_score - (prior / (1.0 - prior)).ln()).abs() < 1e-12);
        assert!(x.rows.iter().all(|r| m.margin(r) == m.base_score));
    }

    #[test]
    fn seeded_training_is_deterministic() {
        let x = xor_matrix(60);
        let hp = GbtParams { subsample: 0.6, seed: 42, ..GbtParams::default() };
        assert_eq!(train_gbt(&x, &hp).unwrap(), train_gbt(&x, &hp).unwrap());
    }

    #[test]
    fn margin_is_base_plus_leaf_sum() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i % 7) as f64, (i % 5) as f64]).collect();
        let labels: Vec<bool> = (0..40).map(|i| i % 7 > 3).collect();
        let x = FeatureMatrix::from_rows(rows, labels).unwrap();
        let m = train_gbt(&x, &GbtParams { n_trees: 2, ..GbtParams::default() }).unwrap();
        let row = &x.rows[5];
        // walk each stored tree by hand
        let mut total = m.base_score;
        for t in m.trees().unwrap() {
            let mut i = 0;
            total += loop {
                match &t.nodes[i] {
                    Node::Leaf { value, .. } => break *value,
                    Node::Split { feature, threshold, left, right, .. } => {
                        i = if row[*feature] < *threshold { *left } else { *right }
                    }
                }
            };
        }
        assert_eq!(total, m.margin(row));
    }

    #[test]
    fn stored_gain_matches_formula() {
        let x = FeatureMatrix::from_rows(
            (0..10).map(|i| vec![i as f64, 0.0]).collect(),
            (0..10).map(|i| i >= 6).collect(),
        )
        .unwrap();
        let hp = GbtParams { n_trees: 1, max_depth: 1, l2_leaf: 1.0, ..GbtParams::default() };
        let m = train_gbt(&x, &hp).unwrap();
        let Node::Split { feature, threshold, gain, .. } = m.trees().unwrap()[0].nodes[0].clone() else {
            panic!("expected a split");
        };
        assert_eq!(feature, 0);
        // recompute G/H sums at the prior margin
        let p = 0.4;
        let (mut gl, mut hl, mut gr, mut hr) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for i in 0..10 {
            let g = p - if i >= 6 { 1.0 } else { 0.0 };
            let h = p * (1.0 - p);
            if (i as f64) < threshold {
                gl += g;
                hl += h;
            } else {
                gr += g;
                hr += h;
            }
        }
        let expected = 0.5 * (gl * gl / (hl + 1.0) + gr * gr / (hr + 1.0) - (gl + gr).powi(2) / (hl + hr + 1.0));
        assert!((gain - expected).abs() < 1e-12, "{gain} vs {expected}");
        let imp = intrinsic_importance(&m);
        assert_eq!(imp.scores[1], 0.0);
        assert_eq!(imp.ranking, vec![0, 1]);
    }

    #[test]
    fn training_loss_never_increases() {
        let rows: Vec<Vec<f64>> = (0..200).map(|i| vec![(i % 17) as f64, ((i * 7) % 11) as f64]).collect();
        let labels: Vec<bool> = (0..200).map(|i| (i % 17) + ((i * 7) % 11) > 12).collect();
        let x = FeatureMatrix::from_rows(rows, labels).unwrap();
        let m = train_gbt(&x, &GbtParams { learning_rate: 0.05, gamma: 0.0, n_trees: 50, ..GbtParams::default() }).unwrap();
        let h = &m.diagnostics.loss_history;
        assert!(h.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        for t in m.trees().unwrap() {
            for n in &t.nodes {
                if let Node::Split { gain, .. } = n {
                    assert!(*gain >= 0.0);
                }
            }
        }
    }

    #[test]
    fn single_class_is_rejected() {
        let x = FeatureMatrix::from_rows(vec![vec![0.0], vec![1.0]], vec![false, false]).unwrap();
        assert!(matches!(train_gbt(&x, &GbtParams::default()), Err(Error::SingleClass)));
    }
}
