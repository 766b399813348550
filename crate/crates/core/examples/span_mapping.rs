//! Map generated surface forms back to token positions.

use coqe::corpus::{LabelScheme, Role, Sentence, TokenizerConfig};
use coqe::postprocess::{map_to_spans, validate_tuple};
use coqe::template::RawQuintuple;

fn main() {
    let sentence = Sentence::new(
        "s",
        "the lens of A is sharper than the lens of B",
        &TokenizerConfig::default(),
    );
    let mut raw = RawQuintuple::default();
    raw.set(Role::Subject, Some("A".into()));
    raw.set(Role::Object, Some("B".into()));
    raw.set(Role::Aspect, Some("lens amazing".into()));
    raw.set(Role::Predicate, Some("sharper".into()));
    raw.set(Role::Label, Some("COM+".into()));

    let mapped = map_to_spans(&raw, &sentence).unwrap();
    for role in Role::ELEMENTS {
        println!(
            "{:<9} {:?}",
            role.name(),
            mapped.span(role).map(|s| s.indices().to_vec())
        );
    }
    println!("dropped   {:?}", mapped.dropped_words);
    println!(
        "validated {:?}",
        validate_tuple(&mapped, &LabelScheme::vcom()).map(|q| q.to_record())
    );
    println!(
        "unknown   {:?}",
        validate_tuple(&mapped, &LabelScheme::camera()).err()
    );
}
