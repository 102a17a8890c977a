//! Grammatical error correction as per-error-type classification.
//!
//! Training examples are generated from clean text: every target site
//! (article slot, preposition, verb, noun) is labeled with the form that
//! actually appears. Each error type gets a classifier that encodes the
//! left and right context with separate GRUs plus attention, and the
//! correction pipeline applies the five classifiers in a fixed order,
//! replacing a word only when the model is confident it is wrong.

pub mod classifier;
pub mod corpus;
pub mod datagen;
pub mod eval;
pub mod linguistics;
pub mod neural;
pub mod pipeline;
pub mod toy;
