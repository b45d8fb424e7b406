//! Audience-persona knowledge pipeline for argument quality assessment.
//!
//! The crate covers the full path from raw debate corpora to evaluated
//! classifiers:
//!
//! - [`corpus`]: ingest, validate, filter, and split debate data into a
//!   canonical instance format.
//! - [`knowledge`]: elicit multi-dimensional audience personae (and other
//!   knowledge sources) from a completion client, with caching and retries.
//! - [`template`]: assemble knowledge, context, and argument into a prompt
//!   with a block of continuous slots, plus the label-word verbalizer.
//! - [`tuner`]: train a continuous soft prompt against a frozen backbone,
//!   predict through the verbalizer, and evaluate.
//! - [`zeroshot`]: multiple-choice prompting harness for hosted models.
//! - [`metrics`]: classification metrics, context-length buckets, paired
//!   t-test, and multi-rater agreement statistics.
//! - [`synth`]: synthetic corpora for tests and demos.

pub mod corpus;
pub mod knowledge;
pub mod metrics;
pub mod seed;
pub mod synth;
pub mod template;
pub mod tuner;
pub mod zeroshot;
