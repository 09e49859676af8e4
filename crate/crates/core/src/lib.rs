//! Hierarchical dialogue-act classification for inquiry/answer dialogues.
//!
//! The pipeline: [`corpus`] parses and validates annotated dialogues,
//! [`features`] encodes each utterance with its context, [`svm`] trains
//! binary linear SVMs by sequential minimal optimization, [`multiclass`]
//! composes them one-vs-one with pairwise coupling, and [`hierarchy`]
//! predicts a main category first and then the act, weighting act
//! posteriors by an act-transition prior. [`eval`] scores predictions and
//! runs cross-validation; [`synth`] generates labeled corpora.

#[cfg(feature = "cli")]
pub mod cli;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod hierarchy;
pub mod multiclass;
pub mod sparse;
pub mod synth;
pub mod svm;

pub use error::{Error, Result};
