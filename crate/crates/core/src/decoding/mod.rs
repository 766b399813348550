//! Constrained greedy decoding over a pluggable generator.
//!
//! At every step the generator scores each token of the [`AllowedSet`] and
//! the decoder takes the argmax, so nothing outside the set can be emitted.
//! Ties go to the token listed first in the set's canonical order.

mod external;
mod reference;

use std::collections::HashMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{LabelScheme, Role, Sentence};
use crate::template::TargetGrammar;

pub use external::{Endpoint, ExternalClient, ExternalGenerator, GenerationMode};
pub use reference::{CorruptingGenerator, CorruptionConfig, OracleGenerator};

/// Tokens the decoder may emit for one sentence.
///
/// Canonical order: sentence tokens by position, then the five markers, the
/// scheme's labels, `;`, `[UNK]`, `none`, and end-of-sequence. Duplicates
/// keep their first position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllowedSet {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
    sentence_tokens: usize,
}

impl AllowedSet {
    fn push(&mut self, tok: &str) {
        if !self.index.contains_key(tok) {
            self.index.insert(tok.to_string(), self.tokens.len());
            self.tokens.push(tok.to_string());
        }
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn position(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Whether the token came from the sentence itself.
    pub fn is_sentence_token(&self, token: &str) -> bool {
        self.position(token)
            .is_some_and(|p| p < self.sentence_tokens)
    }
}

pub fn build_allowed_set(sentence: &Sentence, scheme: &LabelScheme) -> AllowedSet {
    let mut set = AllowedSet {
        tokens: Vec::new(),
        index: HashMap::new(),
        sentence_tokens: 0,
    };
    for w in sentence.words() {
        set.push(w);
    }
    set.sentence_tokens = set.tokens.len();
    for r in Role::ALL {
        set.push(TargetGrammar::marker(r));
    }
    for l in scheme.labels() {
        set.push(l);
    }
    for s in [
        TargetGrammar::SEPARATOR,
        TargetGrammar::MISSING,
        TargetGrammar::NONE,
        TargetGrammar::EOS,
    ] {
        set.push(s);
    }
    set
}

/// Scores for the allowed tokens at one step.
pub type Scores = HashMap<String, f64>;

/// A step-wise scorer: given the input and the tokens emitted so far, score
/// every allowed token (and nothing else) with a finite number.
pub trait Generator {
    fn step(
        &mut self,
        input: &str,
        prefix: &[String],
        allowed: &AllowedSet,
    ) -> Result<Scores, DecodeError>;
}

/// A generator that returns a whole output string, bypassing step-wise
/// constraints.
pub trait FreeGenerator {
    fn generate(&mut self, input: &str) -> Result<String, DecodeError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Eos,
    MaxLen,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    #[default]
    Step,
    Free,
}

impl std::str::FromStr for DecodeMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "step" => Ok(DecodeMode::Step),
            "free" => Ok(DecodeMode::Free),
            other => Err(format!("unknown decode mode {other:?}")),
        }
    }
}

/// Output of one decode. In step mode every output token is in the allowed
/// set that was used; free-mode output is unconstrained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub input_text: String,
    pub output_tokens: Vec<String>,
    pub output_text: String,
    pub step_count: usize,
    pub terminated_by: Termination,
    #[serde(default)]
    pub mode: DecodeMode,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecodeError {
    #[error("step {step}: protocol violation{}: {detail}", fmt_id(.request_id))]
    ProtocolViolation {
        step: usize,
        request_id: Option<String>,
        detail: String,
    },
    #[error("request {request_id}: no response within {timeout:?}")]
    Timeout {
        request_id: String,
        timeout: Duration,
    },
    #[error("request {request_id}: malformed response: {detail}")]
    Malformed { request_id: String, detail: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("generator configuration: {0}")]
    Config(String),
}

fn fmt_id(id: &Option<String>) -> String {
    id.as_ref()
        .map(|i| format!(" (request {i})"))
        .unwrap_or_default()
}

/// Default step budget: eight times a ten-token tuple, five tuples, capped
/// at 256.
pub const DEFAULT_MAX_LEN: usize = {
    let budget = 8 * 10 * 5;
    if budget > 256 {
        256
    } else {
        budget
    }
};

fn check_scores(step: usize, scores: &Scores, allowed: &AllowedSet) -> Result<(), DecodeError> {
    let violation = |detail: String| DecodeError::ProtocolViolation {
        step,
        request_id: None,
        detail,
    };
    if let Some(extra) = scores.keys().find(|k| !allowed.contains(k)) {
        return Err(violation(format!("score for disallowed token {extra:?}")));
    }
    for tok in allowed.tokens() {
        match scores.get(tok) {
            None => return Err(violation(format!("no score for allowed token {tok:?}"))),
            Some(s) if !s.is_finite() => {
                return Err(violation(format!("non-finite score {s} for {tok:?}")))
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// Greedy argmax decoding restricted to `allowed`.
pub fn constrained_decode<G: Generator + ?Sized>(
    generator: &mut G,
    input: &str,
    allowed: &AllowedSet,
    max_len: usize,
) -> Result<GenerationRecord, DecodeError> {
    if max_len == 0 {
        return Err(DecodeError::Config("max_len must be at least 1".into()));
    }
    let mut prefix: Vec<String> = Vec::new();
    let mut terminated_by = Termination::MaxLen;
    for step in 0..max_len {
        let scores = generator.step(input, &prefix, allowed)?;
        check_scores(step, &scores, allowed)?;
        let mut best: Option<(&str, f64)> = None;
        for tok in allowed.tokens() {
            let s = scores[tok];
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((tok, s));
            }
        }
        let (tok, _) = best.expect("allowed set is never empty");
        if tok == TargetGrammar::EOS {
            terminated_by = Termination::Eos;
            break;
        }
        prefix.push(tok.to_string());
    }
    Ok(GenerationRecord {
        input_text: input.to_string(),
        output_text: prefix.join(" "),
        step_count: prefix.len(),
        output_tokens: prefix,
        terminated_by,
        mode: DecodeMode::Step,
    })
}

/// Asks a free generator for a complete output.
pub fn free_decode<G: FreeGenerator + ?Sized>(
    generator: &mut G,
    input: &str,
) -> Result<GenerationRecord, DecodeError> {
    let output_text = generator.generate(input)?;
    let output_tokens: Vec<String> = output_text.split_whitespace().map(String::from).collect();
    Ok(GenerationRecord {
        input_text: input.to_string(),
        step_count: output_tokens.len(),
        output_tokens,
        output_text,
        terminated_by: Termination::Eos,
        mode: DecodeMode::Free,
    })
}
