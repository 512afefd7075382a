//! Stability of explanations across repeated runs.
//!
//! * VSI: mean pairwise Jaccard similarity of the LIME top-K feature sets, in percent.
//! * CSI: share of features common to every run whose coefficients keep one
//!   sign and a coefficient of variation `std / (|mean| + 1e-12)` at most the
//!   threshold, in percent.
//! * Run consistency of two global explanations: top-K Jaccard and Spearman
//!   correlation over the union of both top-K sets, absent features taking
//!   rank `|union| + 1`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explainers::{GlobalExplanation, LimeExplanation};
use crate::util::{mean, pearson, std_dev};

pub const DEFAULT_CV_THRESHOLD: f64 = 0.5;
pub const DEFAULT_LIME_RUNS: usize = 10;

const CV_EPS: f64 = 1e-12;

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn check_runs(runs: &[LimeExplanation]) -> Result<()> {
    if runs.len() < 2 {
        return Err(Error::InvalidArgument("stability needs at least 2 runs".into()));
    }
    if runs.iter().any(|r| r.n_features != runs[0].n_features) {
        return Err(Error::SchemaMismatch("runs explain different feature spaces".into()));
    }
    Ok(())
}

fn top_set(run: &LimeExplanation, k: usize) -> BTreeSet<&str> {
    run.top_features.iter().take(k).map(|f| f.name.as_str()).collect()
}

/// Variable stability index in `[0, 100]`.
pub fn vsi(runs: &[LimeExplanation], k: usize) -> Result<f64> {
    check_runs(runs)?;
    let sets: Vec<BTreeSet<&str>> = runs.iter().map(|r| top_set(r, k)).collect();
    let mut total = 0.0;
    let mut pairs = 0;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            total += jaccard(&sets[i], &sets[j]);
            pairs += 1;
        }
    }
    Ok(100.0 * total / pairs as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientStats {
    pub feature: String,
    pub mean: f64,
    pub std: f64,
    pub stable: bool,
}

fn coefficient_stats(runs: &[LimeExplanation], cv_threshold: f64) -> Vec<CoefficientStats> {
    let mut by_feature: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in runs {
        for f in &r.top_features {
            by_feature.entry(&f.name).or_default().push(f.coefficient);
        }
    }
    by_feature
        .into_iter()
        .filter(|(_, c)| c.len() == runs.len())
        .map(|(name, c)| {
            let m = mean(&c);
            let s = std_dev(&c);
            let same_sign = c.iter().all(|&v| v > 0.0) || c.iter().all(|&v| v < 0.0) || c.iter().all(|&v| v == 0.0);
            CoefficientStats {
                feature: name.to_string(),
                mean: m,
                std: s,
                stable: same_sign && s / (m.abs() + CV_EPS) <= cv_threshold,
            }
        })
        .collect()
}

/// Coefficient stability index in `[0, 100]`; 0 when no feature is common to all runs.
pub fn csi(runs: &[LimeExplanation]) -> Result<f64> {
    csi_with_threshold(runs, DEFAULT_CV_THRESHOLD)
}

pub fn csi_with_threshold(runs: &[LimeExplanation], cv_threshold: f64) -> Result<f64> {
    check_runs(runs)?;
    Ok(csi_from_stats(&coefficient_stats(runs, cv_threshold)))
}

fn csi_from_stats(stats: &[CoefficientStats]) -> f64 {
    if stats.is_empty() {
        return 0.0;
    }
    100.0 * stats.iter().filter(|s| s.stable).count() as f64 / stats.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub vsi: f64,
    pub csi: f64,
    pub runs: usize,
    pub k: usize,
    pub coefficient_stats: Vec<CoefficientStats>,
}

pub fn stability_report(runs: &[LimeExplanation], k: usize, cv_threshold: f64) -> Result<StabilityReport> {
    let v = vsi(runs, k)?;
    let stats = coefficient_stats(runs, cv_threshold);
    Ok(StabilityReport {
        vsi: v,
        csi: csi_from_stats(&stats),
        runs: runs.len(),
        k,
        coefficient_stats: stats,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub jaccard_top_k: f64,
    /// Spearman correlation over the union of both top-K sets.
    pub spearman_union: f64,
    /// Spearman correlation over the complete rankings.
    pub spearman_full: f64,
    pub top_k: usize,
}

fn rank_correlation(a: &[f64], b: &[f64]) -> f64 {
    if a == b {
        return 1.0;
    }
    pearson(a, b)
}

/// Compares two explanations of the same feature universe.
pub fn global_run_consistency(a: &GlobalExplanation, b: &GlobalExplanation, top_k: usize) -> Result<ConsistencyReport> {
    if a.feature_names != b.feature_names {
        return Err(Error::SchemaMismatch("explanations cover different features".into()));
    }
    let ta = a.top_k(top_k);
    let tb = b.top_k(top_k);
    let sa: BTreeSet<usize> = ta.iter().copied().collect();
    let sb: BTreeSet<usize> = tb.iter().copied().collect();
    let union: Vec<usize> = sa.union(&sb).copied().collect();
    let absent = (union.len() + 1) as f64;
    let rank_in = |top: &[usize], f: usize| top.iter().position(|&x| x == f).map_or(absent, |p| (p + 1) as f64);
    let ra: Vec<f64> = union.iter().map(|&f| rank_in(ta, f)).collect();
    let rb: Vec<f64> = union.iter().map(|&f| rank_in(tb, f)).collect();
    let full = |g: &GlobalExplanation| {
        let mut r = vec![0.0; g.n_features()];
        for (p, &f) in g.ranking.iter().enumerate() {
            r[f] = (p + 1) as f64;
        }
        r
    };
    Ok(ConsistencyReport {
        jaccard_top_k: jaccard(&sa, &sb),
        spearman_union: rank_correlation(&ra, &rb),
        spearman_full: rank_correlation(&full(a), &full(b)),
        top_k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explainers::{GlobalMethod, LimeFeature};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(features: &[(&str, f64)]) -> LimeExplanation {
        LimeExplanation {
            top_features: features
                .iter()
                .enumerate()
                .map(|(i, (n, c))| LimeFeature {
                    index: i,
                    name: n.to_string(),
                    coefficient: *c,
                })
                .collect(),
            intercept: 0.0,
            surrogate_r2: 1.0,
            seed: 0,
            n_features: 20,
            predicted_proba: 0.5,
        }
    }

    #[test]
    fn vsi_cases() {
        let a = run(&[("a", 1.0), ("b", 1.0)]);
        assert_eq!(vsi(&[a.clone(), a.clone()], 2).unwrap(), 100.0);
        let d = run(&[("c", 1.0), ("d", 1.0)]);
        assert_eq!(vsi(&[a.clone(), d], 2).unwrap(), 0.0);
        // pairwise Jaccards 1.0, 0.5, 0.5
        let r1 = run(&[("a", 1.0), ("b", 1.0), ("c", 1.0)]);
        let r3 = run(&[("a", 1.0), ("b", 1.0), ("d", 1.0)]);
        let r4 = run(&[("a", 1.0), ("c", 1.0), ("b", 1.0)]);
        let v = vsi(&[r1, r4, r3], 3).unwrap();
        assert!((v - 200.0 / 3.0).abs() < 1e-9);
        let mut other = a.clone();
        other.n_features = 3;
        assert!(vsi(&[a, other], 2).is_err());
    }

    #[test]
    fn vsi_three_run_mean() {
        let r1 = run(&[("a", 1.0), ("b", 1.0)]);
        let r2 = run(&[("a", 1.0), ("b", 1.0)]);
        let r3 = run(&[("a", 1.0), ("c", 1.0)]);
        // Jaccards: (r1,r2)=1, (r1,r3)=1/3, (r2,r3)=1/3
        assert!((vsi(&[r1, r2, r3], 2).unwrap() - 100.0 * (1.0 + 2.0 / 3.0) / 3.0).abs() < 1e-9);
    }

    #[test]
    fn csi_cases() {
        let a = run(&[("a", 1.0), ("b", -2.0)]);
        assert_eq!(csi(&[a.clone(), a.clone()]).unwrap(), 100.0);
        let flipped = run(&[("a", -1.0), ("b", -2.0)]);
        let rep = stability_report(&[a.clone(), flipped], 2, 0.5).unwrap();
        assert_eq!(rep.csi, 50.0);
        assert!(!rep.coefficient_stats.iter().find(|s| s.feature == "a").unwrap().stable);
        let disjoint = run(&[("c", 1.0)]);
        assert_eq!(csi(&[a, disjoint]).unwrap(), 0.0);
    }

    fn global(order: &[usize], m: usize) -> GlobalExplanation {
        let mut scores = vec![0.0; m];
        for (p, &f) in order.iter().enumerate() {
            scores[f] = (m - p) as f64;
        }
        GlobalExplanation::new(GlobalMethod::Pfi, (0..m).map(|j| format!("f{j}")).collect(), scores, None)
    }

    #[test]
    fn consistency_extremes() {
        let a = global(&[0, 1, 2, 3, 4], 5);
        let r = global_run_consistency(&a, &a, 3).unwrap();
        assert_eq!((r.jaccard_top_k, r.spearman_union), (1.0, 1.0));
        let rev = global(&[2, 1, 0, 3, 4], 5);
        let r = global_run_consistency(&a, &rev, 3).unwrap();
        assert_eq!(r.jaccard_top_k, 1.0);
        assert!((r.spearman_union + 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_rankings_null_distribution() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut within_full = 0;
        let mut union_sum = 0.0;
        for _ in 0..1000 {
            let mut a: Vec<usize> = (0..50).collect();
            let mut b = a.clone();
            a.shuffle(&mut rng);
            b.shuffle(&mut rng);
            let r = global_run_consistency(&global(&a, 50), &global(&b, 50), 10).unwrap();
            within_full += usize::from(r.spearman_full.abs() <= 0.5);
            union_sum += r.spearman_union;
        }
        assert!(within_full >= 950);
        // features present in only one top-K set pair a high rank with the
        // shared absent rank, which pulls the union statistic negative
        assert!(union_sum / 1000.0 < -0.5);
    }
}
