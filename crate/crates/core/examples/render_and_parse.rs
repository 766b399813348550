//! Serialize quintuples, parse them back, and parse some broken outputs.

use coqe::augment::ElementOrder;
use coqe::corpus::{ElementSpan, LabelScheme, Quintuple, Sentence, TokenizerConfig};
use coqe::template::{parse_generated, render_prompt, render_target, PromptStyle};

fn main() {
    let sentence = Sentence::new(
        "s",
        "Canon is better than Nikon in low light",
        &TokenizerConfig::default(),
    );
    let span = |v: Vec<usize>| Some(ElementSpan::new(v).unwrap());
    let q = Quintuple::new(
        span(vec![0]),
        span(vec![4]),
        span(vec![6, 7]),
        span(vec![2]),
        LabelScheme::camera().label("BETTER").unwrap(),
    )
    .unwrap();

    let order: ElementOrder = "PAOS".parse().unwrap();
    println!(
        "prompt: {}",
        render_prompt(&sentence, order, PromptStyle::Prefix)
    );
    let target = render_target(std::slice::from_ref(&q), &sentence, order);
    println!("target: {target}");
    let parsed = parse_generated(&target, order);
    println!("parsed: {:?}\n", parsed.tuples[0]);

    for broken in [
        "",
        "blah blah",
        "[P] better [O] Nikon [A] low light [S] Canon [L] BETTER",
        "[P] better [A] low light [S] Canon [L] BETTER",
        "[P] better [A] low light [O] Nikon [S] Canon [L] BETTER ; trailing words",
    ] {
        let out = parse_generated(broken, order);
        let kinds: Vec<&str> = out.diagnostics.iter().map(|d| d.kind.name()).collect();
        println!(
            "{broken:?}\n  tuples: {}  diagnostics: {kinds:?}",
            out.tuples.len()
        );
    }
}
