//! Reference generators that replay a gold target, optionally corrupted.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AllowedSet, DecodeError, FreeGenerator, Generator, Scores};
use crate::augment::TrainingExample;
use crate::corpus::Role;
use crate::template::{parse_view, TargetGrammar, View};

fn check_allowed(tokens: &[String], allowed: &AllowedSet) -> Result<(), DecodeError> {
    match tokens.iter().find(|t| !allowed.contains(t)) {
        Some(t) => Err(DecodeError::Config(format!(
            "target token {t:?} is not in the allowed set"
        ))),
        None => Ok(()),
    }
}

fn replay(tokens: &[String], prefix: &[String], allowed: &AllowedSet) -> Scores {
    let next = tokens
        .get(prefix.len())
        .map_or(TargetGrammar::EOS, String::as_str);
    allowed
        .tokens()
        .iter()
        .map(|t| (t.clone(), if t == next { 1.0 } else { 0.0 }))
        .collect()
}

/// Scores the next gold token 1 and everything else 0.
#[derive(Debug, Clone)]
pub struct OracleGenerator {
    tokens: Vec<String>,
}

impl OracleGenerator {
    pub fn new(gold: &TrainingExample, allowed: &AllowedSet) -> Result<Self, DecodeError> {
        let tokens: Vec<String> = gold.target.split_whitespace().map(String::from).collect();
        check_allowed(&tokens, allowed)?;
        Ok(Self { tokens })
    }
}

impl Generator for OracleGenerator {
    fn step(
        &mut self,
        _: &str,
        prefix: &[String],
        allowed: &AllowedSet,
    ) -> Result<Scores, DecodeError> {
        Ok(replay(&self.tokens, prefix, allowed))
    }
}

impl FreeGenerator for OracleGenerator {
    fn generate(&mut self, _: &str) -> Result<String, DecodeError> {
        Ok(self.tokens.join(" "))
    }
}

/// Per-tuple probabilities of each synthetic generation error.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct CorruptionConfig {
    /// Replace one present element with `[UNK]`.
    pub drop_element: f64,
    /// Swap two element blocks so the markers come out of order.
    pub swap_markers: f64,
    /// Replace one element word with an allowed token absent from the sentence.
    pub substitute_word: f64,
    /// Cut the output inside this tuple and stop.
    pub truncate: f64,
}

impl CorruptionConfig {
    pub fn validate(&self) -> Result<(), DecodeError> {
        for (name, p) in [
            ("drop_element", self.drop_element),
            ("swap_markers", self.swap_markers),
            ("substitute_word", self.substitute_word),
            ("truncate", self.truncate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(DecodeError::Config(format!(
                    "{name} probability {p} is outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

struct Block {
    role: Role,
    words: Vec<String>,
}

impl Block {
    fn present(&self) -> bool {
        self.words != [TargetGrammar::MISSING]
    }
}

/// Replays a gold target after applying seeded corruptions to each tuple.
/// Every emitted token is still drawn from the allowed set.
#[derive(Debug, Clone)]
pub struct CorruptingGenerator {
    tokens: Vec<String>,
}

impl CorruptingGenerator {
    pub fn new(
        gold: &TrainingExample,
        allowed: &AllowedSet,
        noise: &CorruptionConfig,
        seed: u64,
    ) -> Result<Self, DecodeError> {
        noise.validate()?;
        let view = View::parse_name(&gold.view).unwrap_or_else(View::canonical);
        let parsed = parse_view(&gold.target, &view);
        if !parsed.is_clean() {
            return Err(DecodeError::Config(format!(
                "gold target {:?} does not parse under {view}",
                gold.target
            )));
        }
        let roles = view.roles();
        let mut tuples: Vec<Vec<Block>> = parsed
            .tuples
            .iter()
            .map(|t| {
                roles
                    .iter()
                    .map(|&role| Block {
                        role,
                        words: t
                            .get(role)
                            .unwrap_or(TargetGrammar::MISSING)
                            .split_whitespace()
                            .map(String::from)
                            .collect(),
                    })
                    .collect()
            })
            .collect();

        let candidates: Vec<&String> = allowed
            .tokens()
            .iter()
            .filter(|t| {
                !allowed.is_sentence_token(t)
                    && !TargetGrammar::is_reserved_in_span(t)
                    && *t != TargetGrammar::EOS
            })
            .collect();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cut: Option<(usize, usize)> = None;
        for (ti, tuple) in tuples.iter_mut().enumerate() {
            let (sub, drop, swap, trunc) = (
                rng.gen::<f64>() < noise.substitute_word,
                rng.gen::<f64>() < noise.drop_element,
                rng.gen::<f64>() < noise.swap_markers,
                rng.gen::<f64>() < noise.truncate,
            );
            let elements: Vec<usize> = (0..tuple.len())
                .filter(|&k| tuple[k].role != Role::Label)
                .collect();
            if sub {
                let present: Vec<usize> = elements
                    .iter()
                    .copied()
                    .filter(|&k| tuple[k].present())
                    .collect();
                if let (Some(&k), Some(&replacement)) =
                    (present.choose(&mut rng), candidates.choose(&mut rng))
                {
                    let w = rng.gen_range(0..tuple[k].words.len());
                    tuple[k].words[w] = (*replacement).clone();
                }
            }
            if drop {
                let present: Vec<usize> = elements
                    .iter()
                    .copied()
                    .filter(|&k| tuple[k].present())
                    .collect();
                if let Some(&k) = present.choose(&mut rng) {
                    tuple[k].words = vec![TargetGrammar::MISSING.to_string()];
                }
            }
            if swap && elements.len() >= 2 {
                let picked: Vec<usize> = elements.choose_multiple(&mut rng, 2).copied().collect();
                tuple.swap(picked[0], picked[1]);
            }
            if trunc && cut.is_none() {
                let len: usize = tuple.iter().map(|b| 1 + b.words.len()).sum();
                cut = Some((ti, rng.gen_range(1..len)));
            }
        }

        let mut tokens = Vec::new();
        for (ti, tuple) in tuples.iter().enumerate() {
            if ti > 0 {
                tokens.push(TargetGrammar::SEPARATOR.to_string());
            }
            let start = tokens.len();
            for b in tuple {
                tokens.push(TargetGrammar::marker(b.role).to_string());
                tokens.extend(b.words.iter().cloned());
            }
            if let Some((ct, keep)) = cut {
                if ct == ti {
                    tokens.truncate(start + keep);
                    break;
                }
            }
        }
        if parsed.tuples.is_empty() {
            tokens = vec![TargetGrammar::NONE.to_string()];
        }
        check_allowed(&tokens, allowed)?;
        Ok(Self { tokens })
    }

    /// The corrupted target this generator replays.
    pub fn target(&self) -> String {
        self.tokens.join(" ")
    }
}

impl Generator for CorruptingGenerator {
    fn step(
        &mut self,
        _: &str,
        prefix: &[String],
        allowed: &AllowedSet,
    ) -> Result<Scores, DecodeError> {
        Ok(replay(&self.tokens, prefix, allowed))
    }
}

impl FreeGenerator for CorruptingGenerator {
    fn generate(&mut self, _: &str) -> Result<String, DecodeError> {
        Ok(self.target())
    }
}
