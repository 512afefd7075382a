use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GlobalExplanation, GlobalMethod};
use crate::encoding::FeatureMatrix;
use crate::error::{Error, Result};
use crate::models::{evaluate_auc, Predictor};
use crate::util::{derive_seed, mean};

pub const DEFAULT_PFI_ITERATIONS: usize = 10;

/// Importance of feature `j` = mean over `n_iter` seeded permutations of
/// `AUC(original) - AUC(column j permuted)`.
pub fn pfi(model: &dyn Predictor, x: &FeatureMatrix, n_iter: usize, seed: u64) -> Result<GlobalExplanation> {
    pfi_with_permutation(model, x, n_iter, |feature, iter, n| {
        let mut perm: Vec<usize> = (0..n).collect();
        let s = derive_seed(seed, &["pfi", &feature.to_string(), &iter.to_string()]);
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(s));
        perm
    })
}

/// PFI with caller-supplied row permutations `permutation(feature, iter, n_rows)`.
pub fn pfi_with_permutation(
    model: &dyn Predictor,
    x: &FeatureMatrix,
    n_iter: usize,
    mut permutation: impl FnMut(usize, usize, usize) -> Vec<usize>,
) -> Result<GlobalExplanation> {
    if n_iter == 0 {
        return Err(Error::InvalidArgument("PFI needs at least one iteration".into()));
    }
    if x.n_cols() != model.n_features() {
        return Err(Error::WidthMismatch {
            expected: model.n_features(),
            got: x.n_cols(),
        });
    }
    let n = x.n_rows();
    let base: Vec<f64> = x.rows.iter().map(|r| model.margin(r)).collect();
    let base_auc = evaluate_auc(&base, &x.labels)?;
    let m = x.n_cols();
    let mut per_iteration = vec![vec![0.0; m]; n_iter];
    let mut scratch = vec![0.0; m];
    let mut scores = vec![0.0; n];
    for j in 0..m {
        for (it, row) in per_iteration.iter_mut().enumerate() {
            let perm = permutation(j, it, n);
            if perm.len() != n {
                return Err(Error::InvalidArgument("permutation length differs from row count".into()));
            }
            for (i, r) in x.rows.iter().enumerate() {
                scratch.copy_from_slice(r);
                scratch[j] = x.rows[perm[i]][j];
                scores[i] = model.margin(&scratch);
            }
            row[j] = base_auc - evaluate_auc(&scores, &x.labels)?;
        }
    }
    let importance = (0..m)
        .map(|j| mean(&per_iteration.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect();
    Ok(GlobalExplanation::new(
        GlobalMethod::Pfi,
        x.column_names(),
        importance,
        Some(per_iteration),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn signal_and_dummy(n: usize) -> FeatureMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let s: f64 = rng.random();
            let d: f64 = rng.random();
            rows.push(vec![s, d]);
            labels.push(s > 0.5);
        }
        FeatureMatrix::from_rows(rows, labels).unwrap()
    }

    #[test]
    fn identity_permutation_gives_zero() {
        let x = signal_and_dummy(200);
        let model = (2usize, |r: &[f64]| r[0] + 0.1 * r[1]);
        let g = pfi_with_permutation(&model, &x, 1, |_, _, n| (0..n).collect()).unwrap();
        assert_eq!(g.scores, vec![0.0, 0.0]);
        assert_eq!(g.per_iteration.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn null_and_perfect_feature() {
        let x = signal_and_dummy(2000);
        let model = (2usize, |r: &[f64]| 10.0 * (r[0] - 0.5));
        let g = pfi(&model, &x, 10, 3).unwrap();
        assert!(g.scores[1].abs() <= 0.01);
        assert!((g.scores[0] - 0.5).abs() <= 0.05, "{}", g.scores[0]);
        assert_eq!(g.ranking, vec![0, 1]);
        assert_eq!(g.per_iteration.unwrap().len(), 10);
    }

    #[test]
    fn single_class_is_rejected() {
        let x = FeatureMatrix::from_rows(vec![vec![0.0], vec![1.0]], vec![true, true]).unwrap();
        let model = (1usize, |r: &[f64]| r[0]);
        assert!(matches!(pfi(&model, &x, 2, 0), Err(Error::SingleClass)));
    }
}
