//! Drive decoding through an external process speaking the JSON Lines
//! protocol. The stand-in generator here is a small Python script that
//! always answers `none`; point `--endpoint` of the CLI at a real model
//! server the same way.

use std::time::Duration;

use coqe::decoding::{DecodeMode, Endpoint, ExternalClient};
use coqe::pipeline::{decode_corpus, DecodeSettings, GeneratorSpec};
use coqe::synth::{synthesize, SynthConfig};

const SCRIPT: &str = r#"
import json, sys
for line in sys.stdin:
    req = json.loads(line)
    if "allowed" in req:
        want = "none" if not req["prefix"] else "</s>"
        reply = {"id": req["id"], "scores": {t: float(t == want) for t in req["allowed"]}}
    else:
        reply = {"id": req["id"], "output": "none"}
    print(json.dumps(reply), flush=True)
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("coqe-example");
    std::fs::create_dir_all(&dir)?;
    let script = dir.join("none_generator.py");
    std::fs::write(&script, SCRIPT)?;

    let endpoint: Endpoint = format!("exec:python3 {}", script.display()).parse()?;
    let client = ExternalClient::connect(&endpoint, Duration::from_secs(10))?;
    let corpus = synthesize(&SynthConfig {
        sentences: 5,
        seed: 3,
        ..Default::default()
    });
    for mode in [DecodeMode::Step, DecodeMode::Free] {
        let settings = DecodeSettings {
            mode,
            ..Default::default()
        };
        let run = decode_corpus(&corpus, &GeneratorSpec::External(client.clone()), &settings)?;
        for p in &run.predictions {
            println!(
                "{mode:?} {} -> {:?} ({} steps)",
                p.sentence_id, p.record.output_text, p.record.step_count
            );
        }
    }
    Ok(())
}
