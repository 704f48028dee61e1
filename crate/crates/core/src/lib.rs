//! Unsupervised normalization of noisy text.
//!
//! `varnorm` groups the noisy surface forms of a word (OCR confusions,
//! dropped vowels, stretched letters, truncations) into non-overlapping
//! clusters and rewrites a corpus so that every member of a cluster is
//! replaced by one canonical word. Candidates are found lexically with a
//! bigram longest-common-subsequence ratio, linked through skip-gram
//! embedding similarity and document co-occurrence, and fragmented with
//! Louvain community detection.
//!
//! Three reference normalizers ([`baselines`]) and an evaluation kit
//! ([`evalkit`]) with synthetic noise injection and B-cubed scoring are
//! included so the method can be compared head to head.

pub mod baselines;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod evalkit;
pub mod graph;
pub mod normmap;
pub mod simstring;
pub mod unsupclean;

pub use corpus::{build_corpus, tokenize, CooccurrenceIndex, Corpus, Document, TokenizeConfig};
pub use embeddings::{train_skipgram, EmbeddingModel, TrainConfig};
pub use error::{Error, Result};
pub use graph::{louvain, modularity, Partition, VariantGraph};
pub use normmap::{NormalizationMap, VariantCluster};
pub use unsupclean::{build_normalization_map, CleanLexiconSource, NormalizerConfig};
