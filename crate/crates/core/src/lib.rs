//! Measures sentence-level overlap between large text corpora and
//! pronoun-resolution test sets.
//!
//! The pieces, bottom to top:
//!
//! - [`text`]: sentence splitting, tokenization, coarse tagging.
//! - [`index`]: positional inverted indexes over sentences, one per corpus,
//!   with deterministic on-disk persistence.
//! - [`schema`]: parsing test instances into a predicate/content-word
//!   skeleton and compiling retrieval queries from it.
//! - [`retrieval`]: proximity-filtered BM25 scoring of those queries across
//!   one or more indexes.
//! - [`analysis`]: overlap-based test-set partitions, subset accuracies,
//!   significance tests, and overlap curves.
//! - [`pipeline`]: construction of new test instances from raw comment
//!   dumps (clean, filter, perturb, merge annotations).
//!
//! Everything is deterministic by construction: the same inputs and
//! configuration produce byte-identical outputs, with no dependence on wall
//! clock, process ids, or map iteration order.

pub mod analysis;
pub mod fsio;
pub mod index;
pub mod lexicon;
pub mod pipeline;
pub mod retrieval;
pub mod schema;
pub mod synth;
pub mod text;
