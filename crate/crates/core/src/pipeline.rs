//! Decode-and-recover over a whole corpus.

use std::collections::BTreeMap;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::{example_for, TrainingExample};
use crate::corpus::{Corpus, LabeledSentence, Quintuple};
use crate::decoding::{
    build_allowed_set, constrained_decode, free_decode, CorruptingGenerator, CorruptionConfig,
    DecodeError, DecodeMode, ExternalClient, ExternalGenerator, GenerationRecord, OracleGenerator,
    DEFAULT_MAX_LEN,
};
use crate::metrics::Predictions;
use crate::postprocess::{postprocess, ErrorReport, Rejection};
use crate::template::{parse_view, FormatError, Prompter, View};

/// Which generator produces outputs.
#[derive(Debug, Clone)]
pub enum GeneratorSpec {
    /// Replays the gold target.
    Oracle,
    /// Replays the gold target with seeded corruptions.
    Corrupt(CorruptionConfig),
    External(ExternalClient),
}

#[derive(Debug, Clone)]
pub struct DecodeSettings {
    pub prompter: Prompter,
    pub max_len: usize,
    pub mode: DecodeMode,
    pub seed: u64,
}

impl Default for DecodeSettings {
    fn default() -> Self {
        Self {
            prompter: Prompter::default(),
            max_len: DEFAULT_MAX_LEN,
            mode: DecodeMode::Step,
            seed: 0,
        }
    }
}

/// Everything produced for one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub sentence_id: String,
    pub record: GenerationRecord,
    pub quintuples: Vec<Quintuple>,
    pub rejections: Vec<Rejection>,
    pub diagnostics: Vec<FormatError>,
    pub errors: ErrorReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeRun {
    /// In corpus order.
    pub predictions: Vec<Prediction>,
    pub report: ErrorReport,
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("sentence {sentence_id:?}: {source}")]
    Decode {
        sentence_id: String,
        #[source]
        source: DecodeError,
    },
    #[error("predictions line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("predictions line {line}: sentence {id:?} listed twice")]
    DuplicateId { line: usize, id: String },
    #[error("reading predictions: {0}")]
    Io(#[from] std::io::Error),
}

/// Seed for the sentence at `index`, independent of scheduling.
pub fn sentence_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn generate(
    item: &LabeledSentence,
    example: &TrainingExample,
    spec: &GeneratorSpec,
    settings: &DecodeSettings,
    seed: u64,
    scheme: &crate::corpus::LabelScheme,
) -> Result<GenerationRecord, DecodeError> {
    let allowed = build_allowed_set(&item.sentence, scheme);
    let input = example.input.as_str();
    match (spec, settings.mode) {
        (GeneratorSpec::Oracle, DecodeMode::Step) => {
            let mut g = OracleGenerator::new(example, &allowed)?;
            constrained_decode(&mut g, input, &allowed, settings.max_len)
        }
        (GeneratorSpec::Oracle, DecodeMode::Free) => {
            let mut g = OracleGenerator::new(example, &allowed)?;
            free_decode(&mut g, input)
        }
        (GeneratorSpec::Corrupt(noise), DecodeMode::Step) => {
            let mut g = CorruptingGenerator::new(example, &allowed, noise, seed)?;
            constrained_decode(&mut g, input, &allowed, settings.max_len)
        }
        (GeneratorSpec::Corrupt(noise), DecodeMode::Free) => {
            let mut g = CorruptingGenerator::new(example, &allowed, noise, seed)?;
            free_decode(&mut g, input)
        }
        (GeneratorSpec::External(client), mode) => {
            let mut g = ExternalGenerator::new(client.clone(), mode);
            match mode {
                DecodeMode::Step => constrained_decode(&mut g, input, &allowed, settings.max_len),
                DecodeMode::Free => free_decode(&mut g, input),
            }
        }
    }
}

/// Decodes one sentence under the canonical view and recovers its quintuples.
pub fn decode_sentence(
    item: &LabeledSentence,
    scheme: &crate::corpus::LabelScheme,
    spec: &GeneratorSpec,
    settings: &DecodeSettings,
    seed: u64,
) -> Result<Prediction, DecodeError> {
    let view = View::canonical();
    let example = example_for(item, &view, &settings.prompter);
    let record = generate(item, &example, spec, settings, seed, scheme)?;
    let parse = parse_view(&record.output_text, &view);
    let post = postprocess(&parse, &item.sentence, scheme);
    Ok(Prediction {
        sentence_id: item.sentence.id.clone(),
        record,
        quintuples: post.quintuples,
        rejections: post.rejections,
        diagnostics: parse.diagnostics,
        errors: post.report,
    })
}

/// Decodes every sentence in parallel. Any failure stops the run; with
/// several failing sentences, which one is reported is unspecified.
pub fn decode_corpus(
    corpus: &Corpus,
    spec: &GeneratorSpec,
    settings: &DecodeSettings,
) -> Result<DecodeRun, PipelineError> {
    let predictions: Vec<Prediction> = corpus
        .items
        .par_iter()
        .enumerate()
        .map(|(i, item)| {
            decode_sentence(
                item,
                &corpus.scheme,
                spec,
                settings,
                sentence_seed(settings.seed, i),
            )
            .map_err(|source| PipelineError::Decode {
                sentence_id: item.sentence.id.clone(),
                source,
            })
        })
        .collect::<Result<_, _>>()?;
    let report = predictions.iter().map(|p| p.errors).sum();
    Ok(DecodeRun {
        predictions,
        report,
    })
}

impl Predictions {
    pub fn from_decoded(run: &DecodeRun) -> Self {
        Self(
            run.predictions
                .iter()
                .map(|p| (p.sentence_id.clone(), p.quintuples.clone()))
                .collect(),
        )
    }
}

#[derive(Deserialize)]
struct PredictionLine {
    #[serde(alias = "id")]
    sentence_id: String,
    #[serde(default)]
    quintuples: Vec<Quintuple>,
}

/// Reads predictions from JSON Lines holding `sentence_id` (or `id`) and
/// `quintuples`; decode output and corpus files both qualify.
pub fn load_predictions<R: BufRead>(reader: R) -> Result<Predictions, PipelineError> {
    let mut map = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionLine =
            serde_json::from_str(&line).map_err(|e| PipelineError::Malformed {
                line: n,
                message: e.to_string(),
            })?;
        if map
            .insert(rec.sentence_id.clone(), rec.quintuples)
            .is_some()
        {
            return Err(PipelineError::DuplicateId {
                line: n,
                id: rec.sentence_id,
            });
        }
    }
    Ok(Predictions(map))
}
