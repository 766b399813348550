//! Comparative quintuple extraction toolkit.
//!
//! A comparative review sentence is annotated with quintuples
//! `(subject, object, aspect, predicate, label)`. This crate covers every
//! step around a sequence-to-sequence extractor except the neural network
//! itself:
//!
//! - [`corpus`]: data model, tokenizer, JSON Lines corpora, dataset statistics
//! - [`augment`]: element-order permutations and single-role training views
//! - [`template`]: prompts, the marker grammar, and a total parser for outputs
//! - [`decoding`]: allowed-token sets and greedy constrained decoding over a
//!   pluggable [`decoding::Generator`], with oracle, corrupting and external
//!   generators
//! - [`postprocess`]: span mapping, tuple validation, error taxonomy
//! - [`metrics`]: exact / proportional / binary matching, element and label scores
//! - [`pipeline`]: per-sentence decode-and-recover glue used by the CLI
//!
//! ```
//! use coqe::corpus::{load_corpus, LabelScheme};
//! use coqe::pipeline::{decode_corpus, DecodeSettings, GeneratorSpec};
//! use coqe::metrics::{evaluate_tuples, MatchMode, Predictions};
//!
//! let line = r#"{"id":"1","text":"iphone has a better battery than galaxy","quintuples":[{"subject":[0],"object":[6],"aspect":[4],"predicate":[3],"label":"COM+"}]}"#;
//! let corpus = load_corpus(line.as_bytes(), &LabelScheme::vcom()).unwrap();
//! let run = decode_corpus(&corpus, &GeneratorSpec::Oracle, &DecodeSettings::default()).unwrap();
//! let preds = Predictions::from_decoded(&run);
//! let scores = evaluate_tuples(&corpus, &preds, MatchMode::EXACT_Q5).unwrap();
//! assert_eq!(scores.prf.f1, 1.0);
//! ```

pub mod augment;
pub mod cli;
pub mod corpus;
pub mod decoding;
pub mod metrics;
pub mod pipeline;
pub mod postprocess;
pub mod synth;
pub mod template;
