//! Explanation workbench for predictive process monitoring (PPM).
//!
//! The crate covers the whole offline/online outcome-prediction workflow and
//! the model-agnostic explainers that sit on top of it:
//!
//! * [`eventlog`] parses, labels, summarizes, splits and synthesizes event logs.
//! * [`prefixing`] truncates traces into a prefix log (optionally gap-based).
//! * [`bucketing`] groups prefixes and routes running cases to a bucket.
//! * [`encoding`] turns a bucket into a numeric [`encoding::FeatureMatrix`].
//! * [`models`] trains L2 logistic regression and second-order boosted trees.
//! * [`explainers`] implements permutation importance, ALE, SHAP and LIME.
//! * [`stability`] measures run-to-run agreement of explanations.
//! * [`bench`] runs seeded experiment grids and writes report artifacts.
//! * [`cli`] binds everything to the `ppm-xai` command line.
//!
//! Every stochastic step takes an explicit seed. See the `examples/`
//! directory of this crate for one runnable program per capability.

pub mod bench;
pub mod bucketing;
pub mod cli;
pub mod encoding;
pub mod error;
pub mod eventlog;
pub mod explainers;
pub mod models;
pub mod prefixing;
pub mod stability;
pub(crate) mod util;

pub use error::{Error, Result};
