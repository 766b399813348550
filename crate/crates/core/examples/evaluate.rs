//! Score perturbed predictions under every match mode.

use coqe::corpus::Role;
use coqe::metrics::{evaluate, MatchMode, Predictions};
use coqe::synth::{synthesize, SynthConfig};

fn main() {
    let corpus = synthesize(&SynthConfig {
        sentences: 200,
        seed: 1,
        ..Default::default()
    });
    let mut preds = Predictions::from_gold(&corpus);
    // shorten every multi-word aspect and drop every third object
    for (n, q) in preds.0.values_mut().flatten().enumerate() {
        if let Some(a) = q.aspect.as_ref().filter(|a| a.len() > 1) {
            q.aspect = Some(coqe::corpus::ElementSpan::new(vec![a.first()]).unwrap());
        }
        if n % 3 == 0 && q.span(Role::Subject).is_some() {
            q.object = None;
        }
    }
    let report = evaluate(&corpus, &preds, &MatchMode::ALL).unwrap();
    print!("{}", report.to_table());
}
