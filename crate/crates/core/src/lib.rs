//! Screening, topic modeling, evaluation, collaboration networks and
//! summarization for bibliographic corpora.

pub mod embedding;
pub mod eval;
pub mod ingest;
pub mod network;
pub mod pipeline;
pub mod summarize;
pub mod textprep;
pub mod topics;
