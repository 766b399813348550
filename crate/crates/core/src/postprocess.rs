//! Ties generated surface forms back to token positions and tallies
//! generation errors.
//!
//! The predicate is placed first, at its earliest occurrence. Every other
//! element takes the occurrence whose span midpoint lies nearest to the
//! predicate's midpoint (earliest on ties). Without a predicate the first
//! resolvable of subject, object, aspect anchors instead. Words that do not
//! occur in the sentence are dropped and reported.

use std::ops::AddAssign;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ElementSpan, LabelScheme, Quintuple, Role, Sentence};
use crate::template::{FormatErrorKind, ParseOutcome, RawQuintuple};

/// A generated tuple placed on the sentence, before label validation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappedQuintuple {
    pub subject: Option<ElementSpan>,
    pub object: Option<ElementSpan>,
    pub aspect: Option<ElementSpan>,
    pub predicate: Option<ElementSpan>,
    pub label: Option<String>,
    /// Words removed because they do not occur in the sentence.
    pub dropped_words: Vec<(Role, String)>,
}

impl MappedQuintuple {
    pub fn span(&self, role: Role) -> Option<&ElementSpan> {
        match role {
            Role::Subject => self.subject.as_ref(),
            Role::Object => self.object.as_ref(),
            Role::Aspect => self.aspect.as_ref(),
            Role::Predicate => self.predicate.as_ref(),
            Role::Label => None,
        }
    }

    fn set(&mut self, role: Role, span: Option<ElementSpan>) {
        match role {
            Role::Subject => self.subject = span,
            Role::Object => self.object = span,
            Role::Aspect => self.aspect = span,
            Role::Predicate => self.predicate = span,
            Role::Label => {}
        }
    }
}

/// No element of the tuple could be placed on the sentence.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("tuple has no element that occurs in the sentence")]
pub struct Unmappable {
    pub dropped_words: Vec<(Role, String)>,
}

pub type MapResult = Result<MappedQuintuple, Unmappable>;

enum Candidates {
    /// Every contiguous occurrence of the word sequence.
    Contiguous(Vec<ElementSpan>),
    /// Occurrences of each surviving word, resolved one word at a time.
    PerWord(Vec<Vec<usize>>),
}

struct Resolution {
    candidates: Option<Candidates>,
    dropped: Vec<String>,
}

fn contiguous_matches(words: &[&str], sentence: &Sentence) -> Vec<ElementSpan> {
    let toks: Vec<&str> = sentence.words().collect();
    if words.is_empty() || words.len() > toks.len() {
        return Vec::new();
    }
    (0..=toks.len() - words.len())
        .filter(|&i| toks[i..i + words.len()] == *words)
        .map(|i| ElementSpan::new((i..i + words.len()).collect()).expect("increasing"))
        .collect()
}

fn resolve(payload: &str, sentence: &Sentence) -> Resolution {
    let words: Vec<&str> = payload.split_whitespace().collect();
    let hits = contiguous_matches(&words, sentence);
    if !hits.is_empty() {
        return Resolution {
            candidates: Some(Candidates::Contiguous(hits)),
            dropped: Vec::new(),
        };
    }
    let (kept, dropped): (Vec<&str>, Vec<&str>) = words
        .iter()
        .partition(|w| sentence.words().any(|t| t == **w));
    let dropped = dropped.into_iter().map(String::from).collect();
    if kept.is_empty() {
        return Resolution {
            candidates: None,
            dropped,
        };
    }
    let hits = contiguous_matches(&kept, sentence);
    let candidates = if hits.is_empty() {
        Candidates::PerWord(
            kept.iter()
                .map(|w| {
                    sentence
                        .tokens
                        .iter()
                        .filter(|t| t.text == *w)
                        .map(|t| t.index)
                        .collect()
                })
                .collect(),
        )
    } else {
        Candidates::Contiguous(hits)
    };
    Resolution {
        candidates: Some(candidates),
        dropped,
    }
}

fn nearest<T>(items: &[T], key: impl Fn(&T) -> f64, anchor: Option<f64>) -> &T {
    let Some(a) = anchor else { return &items[0] };
    let mut best = &items[0];
    let mut best_d = (key(best) - a).abs();
    for it in &items[1..] {
        let d = (key(it) - a).abs();
        if d < best_d {
            best = it;
            best_d = d;
        }
    }
    best
}

fn choose(candidates: &Candidates, anchor: Option<f64>) -> ElementSpan {
    match candidates {
        Candidates::Contiguous(spans) => nearest(spans, ElementSpan::midpoint, anchor).clone(),
        Candidates::PerWord(occurrences) => ElementSpan::from_unsorted(
            occurrences
                .iter()
                .map(|occ| *nearest(occ, |&i| i as f64, anchor))
                .collect(),
        )
        .expect("every kept word has an occurrence"),
    }
}

/// Places a raw tuple on the sentence.
pub fn map_to_spans(raw: &RawQuintuple, sentence: &Sentence) -> MapResult {
    let mut resolutions: Vec<(Role, Resolution)> = Vec::new();
    let mut dropped_words = Vec::new();
    for role in Role::ELEMENTS {
        if let Some(payload) = raw.get(role) {
            let r = resolve(payload, sentence);
            dropped_words.extend(r.dropped.iter().map(|w| (role, w.clone())));
            resolutions.push((role, r));
        }
    }

    let anchor_role = [Role::Predicate, Role::Subject, Role::Object, Role::Aspect]
        .into_iter()
        .find(|role| {
            resolutions
                .iter()
                .any(|(r, res)| r == role && res.candidates.is_some())
        });
    let Some(anchor_role) = anchor_role else {
        return Err(Unmappable { dropped_words });
    };

    let mut out = MappedQuintuple {
        label: raw.label.clone(),
        dropped_words,
        ..Default::default()
    };
    let anchor_span = resolutions
        .iter()
        .find(|(r, _)| *r == anchor_role)
        .and_then(|(_, res)| res.candidates.as_ref())
        .map(|c| choose(c, None))
        .expect("anchor resolves");
    let anchor = Some(anchor_span.midpoint());
    out.set(anchor_role, Some(anchor_span));
    for (role, res) in &resolutions {
        if *role == anchor_role {
            continue;
        }
        out.set(*role, res.candidates.as_ref().map(|c| choose(c, anchor)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason", content = "detail")]
pub enum Rejection {
    #[error("tuple has no label")]
    MissingLabel,
    #[error("label {0:?} is not in the scheme")]
    UnknownLabel(String),
    #[error("all four elements are absent")]
    EmptyTuple,
}

/// Accepts a mapped tuple whose label is in the scheme and which keeps at
/// least one element.
pub fn validate_tuple(
    mapped: &MappedQuintuple,
    scheme: &LabelScheme,
) -> Result<Quintuple, Rejection> {
    let name = mapped.label.as_deref().ok_or(Rejection::MissingLabel)?;
    let label = scheme
        .label(name)
        .ok_or_else(|| Rejection::UnknownLabel(name.to_string()))?;
    Quintuple::new(
        mapped.subject.clone(),
        mapped.object.clone(),
        mapped.aspect.clone(),
        mapped.predicate.clone(),
        label,
    )
    .map_err(|_| Rejection::EmptyTuple)
}

/// Error counts for one generation or, summed, for a whole run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ErrorReport {
    pub missing_marker: usize,
    pub wrong_marker_order: usize,
    pub duplicate_marker: usize,
    pub trailing_garbage: usize,
    pub empty_output: usize,
    pub nonsense: usize,
    /// Tuples with at least one element word absent from the sentence.
    pub hallucination: usize,
    /// Tuples left with no element after dropping absent words.
    pub empty_after_validation: usize,
    /// Tuples rejected for a missing or unknown label.
    pub invalid_label: usize,
}

impl ErrorReport {
    pub fn format_count(&self, kind: FormatErrorKind) -> usize {
        match kind {
            FormatErrorKind::MissingMarker => self.missing_marker,
            FormatErrorKind::WrongMarkerOrder => self.wrong_marker_order,
            FormatErrorKind::DuplicateMarker => self.duplicate_marker,
            FormatErrorKind::TrailingGarbage => self.trailing_garbage,
            FormatErrorKind::EmptyOutput => self.empty_output,
            FormatErrorKind::Nonsense => self.nonsense,
        }
    }

    fn format_slot(&mut self, kind: FormatErrorKind) -> &mut usize {
        match kind {
            FormatErrorKind::MissingMarker => &mut self.missing_marker,
            FormatErrorKind::WrongMarkerOrder => &mut self.wrong_marker_order,
            FormatErrorKind::DuplicateMarker => &mut self.duplicate_marker,
            FormatErrorKind::TrailingGarbage => &mut self.trailing_garbage,
            FormatErrorKind::EmptyOutput => &mut self.empty_output,
            FormatErrorKind::Nonsense => &mut self.nonsense,
        }
    }

    pub fn total_diagnostics(&self) -> usize {
        FormatErrorKind::ALL
            .iter()
            .map(|k| self.format_count(*k))
            .sum()
    }

    pub fn is_clean(&self) -> bool {
        *self == Self::default()
    }

    /// `(name, count)` for every counter, in display order.
    pub fn entries(&self) -> Vec<(&'static str, usize)> {
        let mut v: Vec<(&'static str, usize)> = FormatErrorKind::ALL
            .iter()
            .map(|k| (k.name(), self.format_count(*k)))
            .collect();
        v.push(("hallucination", self.hallucination));
        v.push(("empty_after_validation", self.empty_after_validation));
        v.push(("invalid_label", self.invalid_label));
        v
    }

    pub fn to_table(&self) -> String {
        let entries = self.entries();
        let width = entries.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
        let mut s = String::from("Generation errors\n");
        for (name, n) in entries {
            s.push_str(&format!("  {name:<width$}  {n}\n"));
        }
        s
    }
}

impl AddAssign for ErrorReport {
    fn add_assign(&mut self, o: Self) {
        self.missing_marker += o.missing_marker;
        self.wrong_marker_order += o.wrong_marker_order;
        self.duplicate_marker += o.duplicate_marker;
        self.trailing_garbage += o.trailing_garbage;
        self.empty_output += o.empty_output;
        self.nonsense += o.nonsense;
        self.hallucination += o.hallucination;
        self.empty_after_validation += o.empty_after_validation;
        self.invalid_label += o.invalid_label;
    }
}

impl std::iter::Sum for ErrorReport {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |mut a, b| {
            a += b;
            a
        })
    }
}

/// Tallies format diagnostics, hallucinated words and discarded tuples.
pub fn classify_errors(
    parse: &ParseOutcome,
    mapped: &[MapResult],
    scheme: &LabelScheme,
) -> ErrorReport {
    let mut report = ErrorReport::default();
    for d in &parse.diagnostics {
        *report.format_slot(d.kind) += 1;
    }
    for m in mapped {
        match m {
            Ok(m) => {
                if !m.dropped_words.is_empty() {
                    report.hallucination += 1;
                }
                match validate_tuple(m, scheme) {
                    Err(Rejection::MissingLabel | Rejection::UnknownLabel(_)) => {
                        report.invalid_label += 1
                    }
                    Err(Rejection::EmptyTuple) => report.empty_after_validation += 1,
                    Ok(_) => {}
                }
            }
            Err(u) => {
                if !u.dropped_words.is_empty() {
                    report.hallucination += 1;
                }
                report.empty_after_validation += 1;
            }
        }
    }
    report
}

/// Everything recovered from one parsed generation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Postprocessed {
    pub quintuples: Vec<Quintuple>,
    pub rejections: Vec<Rejection>,
    pub report: ErrorReport,
}

/// Maps, validates and classifies every tuple of a parse.
pub fn postprocess(
    parse: &ParseOutcome,
    sentence: &Sentence,
    scheme: &LabelScheme,
) -> Postprocessed {
    let mapped: Vec<MapResult> = parse
        .tuples
        .iter()
        .map(|t| map_to_spans(t, sentence))
        .collect();
    let report = classify_errors(parse, &mapped, scheme);
    let mut out = Postprocessed {
        report,
        ..Default::default()
    };
    for m in &mapped {
        match m
            .as_ref()
            .map_err(|_| Rejection::EmptyTuple)
            .and_then(|m| validate_tuple(m, scheme))
        {
            Ok(q) => out.quintuples.push(q),
            Err(r) => out.rejections.push(r),
        }
    }
    out
}
