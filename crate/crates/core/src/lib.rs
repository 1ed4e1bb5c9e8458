//! Allocation-only analytics core for geotagged crisis tweet corpora.
//!
//! Everything here is pure computation over in-memory values: corpus
//! cleanup and geo-localization, text normalization, lexicon sentiment,
//! bigram statistics, collapsed Gibbs LDA with coherence-driven model
//! selection, and weighted mention-graph analytics. File formats and the
//! command line live in the `crisisnet` crate.

#![no_std]

extern crate alloc;

mod math;

pub mod ingest;
pub mod netgraph;
pub mod ngrams;
pub mod sentiment;
pub mod textprep;
pub mod topics;

pub use chrono::NaiveDate as Day;
