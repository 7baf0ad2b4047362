//! Noise-robust binary classification with clinically weighted risk metrics.
//!
//! The crate studies what label noise does to a high-stakes screening
//! classifier and what the standard noisy-label defenses buy back. It
//! provides:
//!
//! - [`data`]: synthetic two-class generators with controllable overlap and
//!   prevalence, symmetric label-noise injection that retains ground truth,
//!   and CSV ingestion/dumping.
//! - [`nnet`]: a small feed-forward classifier with hand-derived gradients,
//!   a cost-sensitive cross-entropy that up-weights the minority class, SGD
//!   with momentum, and cosine learning-rate annealing.
//! - [`selection`]: clean-sample selection via a two-component Gaussian
//!   mixture over per-sample losses, small-loss ranking with a forget-rate
//!   schedule, and class-uniform selection.
//! - [`semisup`]: mixmatch-style machinery (augmentation, co-refinement,
//!   co-guessing, sharpening, mixup) and the combined objective.
//! - [`metrics`]: sensitivity, specificity, balanced accuracy, F1, exact
//!   AUC, prediction-collapse detection, and cost-weighted global risk with
//!   configurable cost scenarios.
//! - [`harness`]: experiment configs, five training methods with optional
//!   cost-sensitive variants, seeded deterministic runs, a parallel sweep
//!   driver, JSONL persistence, and report emitters.
//!
//! Every stochastic step derives its stream from a single run seed, so any
//! result can be reproduced from its config alone.

// Validation throughout writes `!(x > 0.0)` rather than `x <= 0.0` so that
// NaN fails closed; the negation is load-bearing.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod data;
pub mod error;
pub mod harness;
pub mod metrics;
pub mod nnet;
pub mod rng;
pub mod selection;
pub mod semisup;

pub use error::{Error, Result};
