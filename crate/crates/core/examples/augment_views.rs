//! Expand one sentence into its order-permuted and single-role examples.

use coqe::augment::{augment_corpus, default_orders, enumerate_orders};
use coqe::corpus::{load_corpus, LabelScheme};
use coqe::template::Prompter;

fn main() {
    let line = r#"{"id":"s1","text":"the pixel has a sharper lens than the iphone","quintuples":[{"subject":[1],"object":[8],"aspect":[5],"predicate":[4],"label":"COM+"}]}"#;
    let corpus = load_corpus(line.as_bytes(), &LabelScheme::vcom()).unwrap();

    println!(
        "all {} orders: {}",
        enumerate_orders().len(),
        enumerate_orders()
            .iter()
            .map(|o| o.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );

    let examples = augment_corpus(&corpus, &default_orders(), true, &Prompter::default()).unwrap();
    for ex in &examples {
        println!("{:<14} {}", ex.view, ex.input);
        println!("{:<14} -> {}", "", ex.target);
    }
}
