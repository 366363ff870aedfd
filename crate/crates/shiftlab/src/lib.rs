//! Desk-scale distribution-shift experiments.
//!
//! The crate builds a synthetic shape-classification benchmark with six
//! controlled nuisance shifts, pre-trains a small classifier under
//! mask-level copy-paste augmentation, adapts it on the unlabeled test set
//! by treating pseudo-labels as noisy labels, and fuses models with an
//! entropy-guided adaptive ensemble at inference time.
//!
//! Modules mirror the pipeline stages:
//!
//! - [`imaging`]: image/mask containers, warps, color ops, compositing
//! - [`augment`]: copy-paste, weather simulation, CutMix, policies
//! - [`synthbench`]: the synthetic benchmark generator and its on-disk form
//! - [`train`]: the classifier, gradients, SGD and the pre-training loop
//! - [`ttt`]: test-time training with periodically refreshed noisy labels
//! - [`infer`]: TenCrop, entropy-gated ensembling, metrics
//! - [`config`] / [`runner`]: the experiment configuration and commands

pub mod augment;
pub mod config;
pub mod error;
pub mod exec;
pub mod imaging;
pub mod infer;
pub mod rng;
pub mod runner;
pub mod synthbench;
pub mod train;
pub mod ttt;

pub use error::{Error, Result};
