use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::CellId;
use crate::error::{Error, Result};

/// Serializes every timed section so concurrent cells do not skew each other.
static TIMING_LOCK: Mutex<()> = Mutex::new(());

/// Runs `f` while holding the timing lock and returns its result with the
/// elapsed monotonic seconds.
pub fn timed_exclusive<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let _guard = TIMING_LOCK.lock().unwrap_or_else(|p| p.into_inner());
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

/// An explainer split into a setup phase (background, grids, perturbation
/// statistics) and a score computation phase.
pub trait Timeable {
    fn is_prepared(&self) -> bool {
        true
    }

    fn setup(&mut self) -> Result<()>;

    fn compute(&mut self) -> Result<()>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub cell: CellId,
    pub bucket: String,
    pub prefix_len: usize,
    /// Means over the repetitions, in seconds.
    pub setup_s: f64,
    pub compute_s: f64,
    pub total_s: f64,
    pub repetitions: usize,
    /// `[setup_s, compute_s]` per repetition.
    pub trials: Vec<[f64; 2]>,
}

/// Where a timing belongs: the cell plus the bucket inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct TimingTarget {
    pub cell: CellId,
    pub bucket: String,
    pub prefix_len: usize,
}

/// Times `repetitions` runs of setup then compute and reports the means.
/// The job keeps the state of the final repetition.
pub fn time_explainer(target: TimingTarget, job: &mut dyn Timeable, repetitions: usize) -> Result<TimingRecord> {
    if !job.is_prepared() {
        return Err(Error::CellNotPrepared(target.cell.slug()));
    }
    if repetitions == 0 {
        return Err(Error::InvalidArgument("at least one repetition is required".into()));
    }
    let mut trials = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let _guard = TIMING_LOCK.lock().unwrap_or_else(|p| p.into_inner());
        let t0 = Instant::now();
        job.setup()?;
        let t1 = Instant::now();
        job.compute()?;
        let t2 = Instant::now();
        trials.push([(t1 - t0).as_secs_f64(), (t2 - t1).as_secs_f64()]);
    }
    let n = repetitions as f64;
    let setup_s = trials.iter().map(|t| t[0]).sum::<f64>() / n;
    let compute_s = trials.iter().map(|t| t[1]).sum::<f64>() / n;
    Ok(TimingRecord {
        cell: target.cell,
        bucket: target.bucket,
        prefix_len: target.prefix_len,
        setup_s,
        compute_s,
        total_s: setup_s + compute_s,
        repetitions,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::Method;
    use crate::bucketing::BucketingStrategy;
    use crate::encoding::EncodingStrategy;
    use crate::models::ModelKind;

    struct Noop {
        ready: bool,
        calls: usize,
    }

    impl Timeable for Noop {
        fn is_prepared(&self) -> bool {
            self.ready
        }

        fn setup(&mut self) -> Result<()> {
            Ok(())
        }

        fn compute(&mut self) -> Result<()> {
            self.calls += 1;
            Ok(())
        }
    }

    fn target() -> TimingTarget {
        TimingTarget {
            cell: CellId {
                dataset: "d".into(),
                variant: "k1_g1".into(),
                bucketing: BucketingStrategy::Single,
                encoding: EncodingStrategy::Aggregation,
                model: ModelKind::Logit,
                method: Method::Pfi,
            },
            bucket: "ALL".into(),
            prefix_len: 1,
        }
    }

    #[test]
    fn noop_record_is_consistent() {
        let mut job = Noop { ready: true, calls: 0 };
        let r = time_explainer(target(), &mut job, 3).unwrap();
        assert_eq!(job.calls, 3);
        assert_eq!(r.trials.len(), 3);
        assert!(r.setup_s >= 0.0 && r.compute_s >= 0.0);
        assert!((r.total_s - r.setup_s - r.compute_s).abs() < 1e-12);
        let mean_compute = r.trials.iter().map(|t| t[1]).sum::<f64>() / 3.0;
        assert_eq!(r.compute_s, mean_compute);
    }

    #[test]
    fn unprepared_cell_rejected() {
        let mut job = Noop { ready: false, calls: 0 };
        assert!(matches!(time_explainer(target(), &mut job, 1), Err(Error::CellNotPrepared(_))));
    }
}
