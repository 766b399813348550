//! Run the corrupting generator at increasing rates and tally error types.

use coqe::decoding::CorruptionConfig;
use coqe::pipeline::{decode_corpus, DecodeSettings, GeneratorSpec};
use coqe::synth::{synthesize, SynthConfig};

fn main() {
    let corpus = synthesize(&SynthConfig {
        sentences: 300,
        seed: 9,
        ..Default::default()
    });
    println!(
        "{:>5}  {:>6} {:>6} {:>6} {:>6} {:>6}",
        "rate", "order", "miss", "hall", "empty", "label"
    );
    for rate in [0.0, 0.1, 0.3, 0.6, 1.0] {
        let noise = CorruptionConfig {
            drop_element: rate,
            swap_markers: rate,
            substitute_word: rate,
            truncate: rate / 2.0,
        };
        let run = decode_corpus(
            &corpus,
            &GeneratorSpec::Corrupt(noise),
            &DecodeSettings::default(),
        )
        .unwrap();
        let r = run.report;
        println!(
            "{rate:>5.1}  {:>6} {:>6} {:>6} {:>6} {:>6}",
            r.wrong_marker_order,
            r.missing_marker,
            r.hallucination,
            r.empty_after_validation,
            r.invalid_label
        );
    }
}
