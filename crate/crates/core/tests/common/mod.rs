#![allow(dead_code)]

use std::collections::HashMap;

use coqe::corpus::{
    Corpus, ElementSpan, LabelScheme, LabeledSentence, Quintuple, Role, Sentence, Split,
    TokenizerConfig,
};
use coqe::decoding::{AllowedSet, DecodeError, Generator, Scores};
use coqe::template::TargetGrammar;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Repeats, punctuation, non-ASCII and the word `none` on purpose.
pub const VOCAB: &[&str] = &[
    "the", "phone", "camera", "is", "better", "than", "a", "b", "lens", "sharper", ",", ".", "!",
    "none", "x1", "S", "điện", "thoại", "tốt", "hơn", "(", ")",
];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_span(rng: &mut ChaCha8Rng, len: usize) -> Option<ElementSpan> {
    if rng.gen_bool(0.3) {
        return None;
    }
    let k = rng.gen_range(1..=len.min(3));
    let idx: Vec<usize> = rand::seq::index::sample(rng, len, k).into_vec();
    Some(ElementSpan::from_unsorted(idx).expect("distinct indices"))
}

pub fn random_quintuple(rng: &mut ChaCha8Rng, len: usize, scheme: &LabelScheme) -> Quintuple {
    loop {
        let spans: Vec<Option<ElementSpan>> = (0..4).map(|_| random_span(rng, len)).collect();
        let label = scheme.label(scheme.labels().choose(rng).unwrap()).unwrap();
        if let Ok(q) = Quintuple::new(
            spans[0].clone(),
            spans[1].clone(),
            spans[2].clone(),
            spans[3].clone(),
            label,
        ) {
            return q;
        }
    }
}

pub fn random_labeled(rng: &mut ChaCha8Rng, id: &str, scheme: &LabelScheme) -> LabeledSentence {
    let n = rng.gen_range(1..=12);
    let words: Vec<&str> = (0..n).map(|_| *VOCAB.choose(rng).unwrap()).collect();
    let sentence = Sentence::new(id, words.join(" "), &TokenizerConfig::default());
    assert_eq!(sentence.len(), n);
    let k = rng.gen_range(0..=3);
    let quintuples = (0..k).map(|_| random_quintuple(rng, n, scheme)).collect();
    LabeledSentence {
        sentence,
        quintuples,
    }
}

pub fn random_corpus(seed: u64, n: usize, scheme: &LabelScheme) -> Corpus {
    let mut r = rng(seed);
    let items = (0..n)
        .map(|i| random_labeled(&mut r, &format!("r{i}"), scheme))
        .collect();
    Corpus::new(scheme.clone(), items, Split::Unsplit).unwrap()
}

/// Scores every allowed token at random; `</s>` wins more often as the
/// prefix grows.
pub struct RandomScorer {
    pub rng: ChaCha8Rng,
}

impl Generator for RandomScorer {
    fn step(
        &mut self,
        _input: &str,
        prefix: &[String],
        allowed: &AllowedSet,
    ) -> Result<Scores, DecodeError> {
        let mut scores: Scores = allowed
            .tokens()
            .iter()
            .map(|t| (t.clone(), self.rng.gen_range(-5.0..5.0)))
            .collect();
        *scores.get_mut(TargetGrammar::EOS).unwrap() += prefix.len() as f64 * 0.3;
        Ok(scores)
    }
}

/// Wraps a generator and applies `a * s + b` to every score.
pub struct Affine<G> {
    pub inner: G,
    pub a: f64,
    pub b: f64,
}

impl<G: Generator> Generator for Affine<G> {
    fn step(
        &mut self,
        input: &str,
        prefix: &[String],
        allowed: &AllowedSet,
    ) -> Result<Scores, DecodeError> {
        let s = self.inner.step(input, prefix, allowed)?;
        Ok(s.into_iter()
            .map(|(k, v)| (k, self.a * v + self.b))
            .collect())
    }
}

pub fn spans_of(q: &Quintuple) -> HashMap<Role, Option<ElementSpan>> {
    Role::ELEMENTS
        .iter()
        .map(|&r| (r, q.span(r).cloned()))
        .collect()
}
