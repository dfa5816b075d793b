//! Synthetic code-comment datasets and the models that score them.
//!
//! The pipeline: a rule-based [`grammar`] for one-line C statements and their
//! comments, a seeded [`generator`] that only emits valid samples, CSV
//! [`dataset`] handling, hashed n-gram [`features`], SMOTE [`balance`],
//! three classifier families in [`models`], and repeated stratified
//! cross-validation in [`evaluation`]. The [`cli`] module backs the
//! `commentlab` binary.
//!
//! All randomness comes from explicit `u64` seeds; see [`rng`].

pub mod balance;
pub mod cli;
pub mod dataset;
pub mod evaluation;
pub mod features;
pub mod generator;
pub mod grammar;
pub mod models;
pub mod rng;
