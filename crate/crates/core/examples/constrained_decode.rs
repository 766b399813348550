//! Greedy constrained decoding with the reference generators, plus a
//! hand-written generator that always prefers an out-of-vocabulary word.

use coqe::augment::example_for;
use coqe::corpus::{load_corpus, LabelScheme};
use coqe::decoding::{
    build_allowed_set, constrained_decode, AllowedSet, CorruptingGenerator, CorruptionConfig,
    DecodeError, Generator, OracleGenerator, Scores,
};
use coqe::template::{Prompter, View};

/// Scores tokens by length; `</s>` wins after eight steps.
struct Lengthy;

impl Generator for Lengthy {
    fn step(
        &mut self,
        _: &str,
        prefix: &[String],
        allowed: &AllowedSet,
    ) -> Result<Scores, DecodeError> {
        Ok(allowed
            .tokens()
            .iter()
            .map(|t| {
                let s = if t == "</s>" && prefix.len() >= 8 {
                    1e9
                } else {
                    t.len() as f64
                };
                (t.clone(), s)
            })
            .collect())
    }
}

fn main() {
    let line = r#"{"id":"s1","text":"galaxy charges faster than iphone","quintuples":[{"subject":[0],"object":[4],"predicate":[2],"label":"COM+"}]}"#;
    let corpus = load_corpus(line.as_bytes(), &LabelScheme::vcom()).unwrap();
    let item = &corpus.items[0];
    let example = example_for(item, &View::canonical(), &Prompter::default());
    let allowed = build_allowed_set(&item.sentence, &corpus.scheme);
    println!(
        "allowed ({}): {}",
        allowed.len(),
        allowed.tokens().join(" ")
    );

    let mut oracle = OracleGenerator::new(&example, &allowed).unwrap();
    let rec = constrained_decode(&mut oracle, &example.input, &allowed, 64).unwrap();
    println!(
        "oracle:    {}  ({} steps, {:?})",
        rec.output_text, rec.step_count, rec.terminated_by
    );

    let noise = CorruptionConfig {
        swap_markers: 1.0,
        substitute_word: 1.0,
        ..Default::default()
    };
    for seed in 0..3 {
        let mut g = CorruptingGenerator::new(&example, &allowed, &noise, seed).unwrap();
        let rec = constrained_decode(&mut g, &example.input, &allowed, 64).unwrap();
        println!("corrupt {seed}: {}", rec.output_text);
    }

    let rec = constrained_decode(&mut Lengthy, &example.input, &allowed, 64).unwrap();
    println!("lengthy:   {}", rec.output_text);
}
