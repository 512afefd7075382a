use nalgebra::{DMatrix, DVector};

use super::{check_training_data, logloss, Diagnostics, HyperParams, LogitParams, Model, ModelKind, ModelParams};
use crate::encoding::FeatureMatrix;
use crate::error::{Error, Result};
use crate::util::{sigmoid, solve_spd};

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Full-batch damped Newton on the mean negative log-likelihood plus
/// `l2 / 2 * |w|^2`, fitted on standardized columns (constant columns get a
/// zero weight). Weights are reported in original units.
pub fn train_logit(x: &FeatureMatrix, hp: &LogitParams) -> Result<Model> {
    HyperParams::Logit(*hp).validate()?;
    check_training_data(x)?;
    let n = x.n_rows();
    let m = x.n_cols();

    let mut means = vec![0.0; m];
    let mut stds = vec![0.0; m];
    for j in 0..m {
        let col = x.column(j);
        means[j] = crate::util::mean(&col);
        stds[j] = crate::util::std_dev(&col);
    }
    let active: Vec<usize> = (0..m).filter(|&j| stds[j] > 1e-12).collect();
    if active.is_empty() {
        return Err(Error::DegenerateMatrix);
    }
    let p = active.len();
    let z: Vec<Vec<f64>> = x
        .rows
        .iter()
        .map(|r| active.iter().map(|&j| (r[j] - means[j]) / stds[j]).collect())
        .collect();
    let y: Vec<f64> = x.labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();

    // theta = [beta_0 .. beta_{p-1}, intercept]
    let objective = |theta: &[f64]| -> f64 {
        let margins: Vec<f64> = z.iter().map(|r| dot(r, &theta[..p]) + theta[p]).collect();
        logloss(&margins, &x.labels) + 0.5 * hp.l2 * theta[..p].iter().map(|b| b * b).sum::<f64>()
    };

    let prior = y.iter().sum::<f64>() / n as f64;
    let mut theta = vec![0.0; p + 1];
    theta[p] = (prior / (1.0 - prior)).ln();
    let mut loss = objective(&theta);
    let mut diagnostics = Diagnostics {
        loss_history: vec![loss],
        ..Diagnostics::default()
    };

    for it in 0..hp.max_iters {
        let mut grad = vec![0.0; p + 1];
        let mut hess = DMatrix::<f64>::zeros(p + 1, p + 1);
        for (r, &yi) in z.iter().zip(&y) {
            let mu = sigmoid(dot(r, &theta[..p]) + theta[p]);
            let resid = mu - yi;
            let w = mu * (1.0 - mu);
            for a in 0..p {
                grad[a] += resid * r[a];
                let wa = w * r[a];
                if wa != 0.0 {
                    for b in a..p {
                        hess[(a, b)] += wa * r[b];
                    }
                }
                hess[(a, p)] += wa;
            }
            grad[p] += resid;
            hess[(p, p)] += w;
        }
        let inv_n = 1.0 / n as f64;
        for a in 0..=p {
            grad[a] *= inv_n;
            if a < p {
                grad[a] += hp.l2 * theta[a];
            }
            for b in a..=p {
                let v = hess[(a, b)] * inv_n + if a == b && a < p { hp.l2 } else { 0.0 };
                hess[(a, b)] = v;
                hess[(b, a)] = v;
            }
        }
        let gnorm = grad.iter().fold(0.0f64, |acc, g| acc.max(g.abs()));
        if gnorm < hp.tolerance {
            diagnostics.converged = true;
            diagnostics.iterations = it;
            break;
        }
        for a in 0..=p {
            hess[(a, a)] += 1e-10;
        }
        let g = DVector::from_vec(grad.clone());
        let dir = match solve_spd(hess, -g) {
            Some(d) if d.iter().all(|v| v.is_finite()) => d,
            _ => DVector::from_vec(grad.iter().map(|v| -v).collect()),
        };
        let slope: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..MAX_HALVINGS {
            let cand: Vec<f64> = theta.iter().zip(dir.iter()).map(|(t, d)| t + step * d).collect();
            let cand_loss = objective(&cand);
            if cand_loss <= loss + ARMIJO * step * slope {
                theta = cand;
                loss = cand_loss;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        diagnostics.iterations = it + 1;
        diagnostics.loss_history.push(loss);
        if !accepted {
            break;
        }
    }

    let mut weights = vec![0.0; m];
    let mut intercept = theta[p];
    for (k, &j) in active.iter().enumerate() {
        weights[j] = theta[k] / stds[j];
        intercept -= theta[k] * means[j] / stds[j];
    }
    Ok(Model {
        kind: ModelKind::Logit,
        params: ModelParams::Logit { weights },
        base_score: intercept,
        training_schema: x.columns.clone(),
        hyper: HyperParams::Logit(*hp),
        diagnostics,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
