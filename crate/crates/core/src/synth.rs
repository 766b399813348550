//! Seeded synthetic corpora for tests, examples and benchmarks.
//!
//! Every element word occurs exactly once in its sentence, so surface
//! forms map back to the annotated indices without ambiguity. Spans may be
//! multi-word and predicates may be non-contiguous.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    Corpus, ElementSpan, LabelScheme, LabeledSentence, Quintuple, Sentence, Split, TokenizerConfig,
};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub sentences: usize,
    /// Share of sentences with at least one quintuple.
    pub comparative_ratio: f64,
    /// Share of comparative sentences with two or three quintuples.
    pub multi_ratio: f64,
    pub scheme: LabelScheme,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            sentences: 100,
            comparative_ratio: 0.6,
            multi_ratio: 0.35,
            scheme: LabelScheme::vcom(),
            seed: 0,
        }
    }
}

const NAMES: &[&[&str]] = &[
    &["iphone"],
    &["galaxy"],
    &["pixel"],
    &["xperia"],
    &["nokia"],
    &["oneplus"],
    &["redmi"],
    &["oppo"],
    &["vivo"],
    &["honor"],
    &["moto"],
    &["zenfone"],
    &["huawei"],
    &["realme"],
    &["galaxy", "note"],
    &["pixel", "pro"],
    &["redmi", "max"],
    &["nokia", "lumia"],
];

const ASPECTS: &[&[&str]] = &[
    &["battery"],
    &["screen"],
    &["camera"],
    &["price"],
    &["design"],
    &["speaker"],
    &["charger"],
    &["keyboard"],
    &["processor"],
    &["storage"],
    &["weight"],
    &["software"],
    &["battery", "life"],
    &["build", "quality"],
    &["front", "camera"],
    &["night", "mode"],
];

const PREDICATES: &[&[&str]] = &[
    &["better"],
    &["worse"],
    &["faster"],
    &["cheaper"],
    &["brighter"],
    &["sharper"],
    &["smoother"],
    &["heavier"],
    &["lighter"],
    &["more", "durable"],
    &["less", "noisy"],
    &["much", "slower"],
];

/// Two-part predicates placed around the object.
const SPLIT_PREDICATES: &[(&str, &str)] = &[
    ("beats", "easily"),
    ("outperforms", "clearly"),
    ("trails", "badly"),
    ("matches", "exactly"),
    ("rivals", "comfortably"),
];

const NON_COMPARATIVE: &[&str] = &[
    "i bought this phone last week .",
    "the delivery took three days .",
    "my sister uses it every day .",
    "the box contains a cable and a manual .",
    "customer service answered quickly .",
    "it arrived in a blue package .",
    "we compared nothing at all today .",
    "the store was closed on sunday .",
];

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    tokens: Vec<String>,
    used: Vec<&'static str>,
}

impl Builder<'_> {
    fn draw(&mut self, pool: &[&'static [&'static str]]) -> &'static [&'static str] {
        loop {
            let item = *pool.choose(self.rng).expect("non-empty pool");
            if item.iter().all(|w| !self.used.contains(w)) {
                self.used.extend_from_slice(item);
                return item;
            }
        }
    }

    fn filler(&mut self, words: &str) {
        self.tokens
            .extend(words.split_whitespace().map(String::from));
    }

    fn element(&mut self, words: &[&str]) -> Vec<usize> {
        let start = self.tokens.len();
        self.tokens.extend(words.iter().map(|w| w.to_string()));
        (start..self.tokens.len()).collect()
    }

    /// One clause; returns (S, O, A, P) index lists, empty when absent.
    fn clause(&mut self) -> [Vec<usize>; 4] {
        match self.rng.gen_range(0..5) {
            0 => {
                let (s, p, o, a) = (
                    self.draw(NAMES),
                    self.draw(PREDICATES),
                    self.draw(NAMES),
                    self.draw(ASPECTS),
                );
                let s = self.element(s);
                self.filler("is");
                let p = self.element(p);
                self.filler("than");
                let o = self.element(o);
                self.filler("in terms of");
                let a = self.element(a);
                [s, o, a, p]
            }
            1 => {
                let (a, s, p, o) = (
                    self.draw(ASPECTS),
                    self.draw(NAMES),
                    self.draw(PREDICATES),
                    self.draw(NAMES),
                );
                self.filler("the");
                let a = self.element(a);
                self.filler("of");
                let s = self.element(s);
                self.filler("is");
                let p = self.element(p);
                self.filler("than");
                let o = self.element(o);
                [s, o, a, p]
            }
            2 => {
                let (s, o, a) = (self.draw(NAMES), self.draw(NAMES), self.draw(ASPECTS));
                let (p0, p1) = loop {
                    let pair = *SPLIT_PREDICATES.choose(self.rng).expect("non-empty pool");
                    if !self.used.contains(&pair.0) && !self.used.contains(&pair.1) {
                        self.used.extend([pair.0, pair.1]);
                        break pair;
                    }
                };
                let s = self.element(s);
                let mut p = self.element(&[p0]);
                let o = self.element(o);
                p.extend(self.element(&[p1]));
                self.filler("on");
                let a = self.element(a);
                [s, o, a, p]
            }
            3 => {
                let (s, p, a) = (self.draw(NAMES), self.draw(PREDICATES), self.draw(ASPECTS));
                let s = self.element(s);
                self.filler("has a");
                let p = self.element(p);
                let a = self.element(a);
                self.filler("than the rest");
                [s, vec![], a, p]
            }
            _ => {
                let (a, p, o) = (self.draw(ASPECTS), self.draw(PREDICATES), self.draw(NAMES));
                self.filler("its");
                let a = self.element(a);
                self.filler("is");
                let p = self.element(p);
                self.filler("than");
                let o = self.element(o);
                [vec![], o, a, p]
            }
        }
    }
}

fn span(v: Vec<usize>) -> Option<ElementSpan> {
    (!v.is_empty()).then(|| ElementSpan::new(v).expect("increasing indices"))
}

fn comparative(
    rng: &mut ChaCha8Rng,
    id: String,
    n_tuples: usize,
    scheme: &LabelScheme,
) -> LabeledSentence {
    let mut b = Builder {
        rng,
        tokens: Vec::new(),
        used: Vec::new(),
    };
    let mut quintuples = Vec::with_capacity(n_tuples);
    for k in 0..n_tuples {
        if k > 0 {
            b.filler(if k == 1 { ", while" } else { ", and" });
        }
        let [s, o, a, p] = b.clause();
        let label = scheme
            .labels()
            .choose(b.rng)
            .and_then(|l| scheme.label(l))
            .expect("non-empty scheme");
        quintuples.push(
            Quintuple::new(span(s), span(o), span(a), span(p), label).expect("clause has elements"),
        );
    }
    b.filler(".");
    let raw = b.tokens.join(" ");
    let sentence = Sentence::new(id, raw, &TokenizerConfig::default());
    debug_assert_eq!(sentence.words().collect::<Vec<_>>(), b.tokens);
    LabeledSentence {
        sentence,
        quintuples,
    }
}

/// Builds a corpus; the same config always yields the same corpus.
pub fn synthesize(config: &SynthConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut items = Vec::with_capacity(config.sentences);
    for i in 0..config.sentences {
        let id = format!("syn-{i:05}");
        if rng.gen_bool(config.comparative_ratio.clamp(0.0, 1.0)) {
            let n = if rng.gen_bool(config.multi_ratio.clamp(0.0, 1.0)) {
                rng.gen_range(2..=3)
            } else {
                1
            };
            items.push(comparative(&mut rng, id, n, &config.scheme));
        } else {
            let raw = *NON_COMPARATIVE.choose(&mut rng).expect("non-empty pool");
            items.push(LabeledSentence {
                sentence: Sentence::new(id, raw, &TokenizerConfig::default()),
                quintuples: Vec::new(),
            });
        }
    }
    Corpus::new(config.scheme.clone(), items, Split::Unsplit).expect("synthetic corpus is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn deterministic() {
        let c = SynthConfig {
            sentences: 50,
            seed: 3,
            ..Default::default()
        };
        assert_eq!(synthesize(&c), synthesize(&c));
    }

    #[test]
    fn element_words_are_unique_in_their_sentence() {
        let corpus = synthesize(&SynthConfig {
            sentences: 400,
            seed: 11,
            ..Default::default()
        });
        for item in &corpus.items {
            let mut freq: HashMap<&str, usize> = HashMap::new();
            for w in item.sentence.words() {
                *freq.entry(w).or_default() += 1;
            }
            for q in &item.quintuples {
                for role in crate::corpus::Role::ELEMENTS {
                    for &i in q.span(role).map(|s| s.indices()).unwrap_or(&[]) {
                        let w = item.sentence.words().nth(i).unwrap();
                        assert_eq!(freq[w], 1, "{w:?} repeated in {:?}", item.sentence.raw);
                    }
                }
            }
        }
    }

    #[test]
    fn shape_covers_the_interesting_cases() {
        let corpus = synthesize(&SynthConfig {
            sentences: 1000,
            seed: 5,
            ..Default::default()
        });
        let comparative: Vec<_> = corpus.items.iter().filter(|i| i.is_comparative()).collect();
        let multi = comparative
            .iter()
            .filter(|i| i.quintuples.len() > 1)
            .count();
        assert!(
            multi * 4 >= comparative.len(),
            "{multi} of {}",
            comparative.len()
        );
        let all: Vec<&Quintuple> = comparative.iter().flat_map(|i| &i.quintuples).collect();
        let non_contiguous = all
            .iter()
            .filter_map(|q| q.predicate.as_ref())
            .any(|p| p.last() - p.first() + 1 > p.len());
        assert!(non_contiguous);
        assert!(all
            .iter()
            .any(|q| q.subject.as_ref().is_some_and(|s| s.len() > 1)));
        assert!(all.iter().any(|q| q.object.is_none()));
        assert!(corpus.items.iter().any(|i| !i.is_comparative()));
    }
}
