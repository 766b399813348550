//! Load a corpus and print the dataset statistics table.
//!
//! `cargo run --example corpus_stats [path.jsonl] [camera|vcom]`
//! Without arguments a synthetic corpus is used.

use std::fs::File;
use std::io::BufReader;

use coqe::corpus::{corpus_stats, load_corpus, LabelScheme};
use coqe::synth::{synthesize, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scheme = args
        .get(1)
        .and_then(|s| LabelScheme::by_name(s))
        .unwrap_or_else(LabelScheme::vcom);
    let (title, corpus) = match args.first() {
        Some(path) => (
            path.clone(),
            load_corpus(BufReader::new(File::open(path)?), &scheme)?,
        ),
        None => (
            "synthetic".to_string(),
            synthesize(&SynthConfig {
                sentences: 500,
                scheme,
                ..Default::default()
            }),
        ),
    };
    let stats = corpus_stats(&corpus);
    print!("{}", stats.to_table(&title));
    println!("\nlabel distribution:");
    for (label, n) in &stats.label_distribution {
        println!("  {label:<10} {n}");
    }
    Ok(())
}
