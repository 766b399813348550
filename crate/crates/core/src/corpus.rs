//! Data model for comparative sentences and their quintuples.
//!
//! A [`Sentence`] carries its raw text plus positional tokens. Quintuple
//! elements are [`ElementSpan`]s: strictly increasing token indices into the
//! owning sentence, so an element may skip interior words. Corpora are read
//! from and written to a JSON Lines format (see [`load_corpus`]).

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::template::TargetGrammar;

/// A token with its position in the sentence and its byte range in the raw text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub index: usize,
    /// Byte offset, so `&raw[char_start..char_end] == text`.
    pub char_start: usize,
    pub char_end: usize,
}

/// Built-in tokenizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    /// Peel leading and trailing punctuation off each whitespace chunk,
    /// one character per token.
    pub split_punctuation: bool,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        Self {
            split_punctuation: true,
        }
    }
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Splits `raw` on whitespace and, when configured, peels punctuation off the
/// edges of every chunk. Interior punctuation (`don't`, `e.g`) stays attached.
///
/// Offsets are byte offsets into `raw`.
pub fn tokenize(raw: &str, config: &TokenizerConfig) -> Vec<Token> {
    let mut pieces: Vec<(usize, usize)> = Vec::new();
    let mut chunk_start = None;
    for (i, c) in raw.char_indices() {
        match (c.is_whitespace(), chunk_start) {
            (true, Some(s)) => {
                pieces.push((s, i));
                chunk_start = None;
            }
            (false, None) => chunk_start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = chunk_start {
        pieces.push((s, raw.len()));
    }

    let mut out = Vec::new();
    let push = |start: usize, end: usize, out: &mut Vec<Token>| {
        out.push(Token {
            text: raw[start..end].to_string(),
            index: out.len(),
            char_start: start,
            char_end: end,
        });
    };
    for (start, end) in pieces {
        if !config.split_punctuation {
            push(start, end, &mut out);
            continue;
        }
        let chunk = &raw[start..end];
        let chars: Vec<(usize, char)> = chunk.char_indices().collect();
        let mut lo = 0;
        while lo < chars.len() && is_punct(chars[lo].1) {
            lo += 1;
        }
        let mut hi = chars.len();
        while hi > lo && is_punct(chars[hi - 1].1) {
            hi -= 1;
        }
        let offset = |k: usize| start + chars.get(k).map_or(chunk.len(), |(b, _)| *b);
        for k in 0..lo {
            push(offset(k), offset(k + 1), &mut out);
        }
        if lo < hi {
            push(offset(lo), offset(hi), &mut out);
        }
        for k in hi.max(lo)..chars.len() {
            push(offset(k), offset(k + 1), &mut out);
        }
    }
    out
}

/// A review sentence with positional tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub id: String,
    pub raw: String,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(id: impl Into<String>, raw: impl Into<String>, config: &TokenizerConfig) -> Self {
        let raw = raw.into();
        let tokens = tokenize(&raw, config);
        Self {
            id: id.into(),
            raw,
            tokens,
        }
    }

    /// Builds a sentence from externally produced tokens, locating each one in
    /// `raw` left to right.
    pub fn from_pretokenized(
        id: impl Into<String>,
        raw: impl Into<String>,
        words: &[String],
    ) -> Result<Self, String> {
        let raw = raw.into();
        let mut tokens = Vec::with_capacity(words.len());
        let mut cursor = 0;
        for (index, word) in words.iter().enumerate() {
            if word.is_empty() || word.chars().any(char::is_whitespace) {
                return Err(format!(
                    "token {index} ({word:?}) is empty or contains whitespace"
                ));
            }
            let found = raw[cursor..]
                .find(word.as_str())
                .ok_or_else(|| format!("token {index} ({word:?}) not found in text"))?;
            let start = cursor + found;
            let end = start + word.len();
            tokens.push(Token {
                text: word.clone(),
                index,
                char_start: start,
                char_end: end,
            });
            cursor = end;
        }
        Ok(Self {
            id: id.into(),
            raw,
            tokens,
        })
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }
}

/// One of the five quintuple roles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    #[serde(rename = "S")]
    Subject,
    #[serde(rename = "O")]
    Object,
    #[serde(rename = "A")]
    Aspect,
    #[serde(rename = "P")]
    Predicate,
    #[serde(rename = "L")]
    Label,
}

impl Role {
    /// The four span-valued roles, in canonical order.
    pub const ELEMENTS: [Role; 4] = [Role::Subject, Role::Object, Role::Aspect, Role::Predicate];
    pub const ALL: [Role; 5] = [
        Role::Subject,
        Role::Object,
        Role::Aspect,
        Role::Predicate,
        Role::Label,
    ];

    pub fn letter(self) -> char {
        match self {
            Role::Subject => 'S',
            Role::Object => 'O',
            Role::Aspect => 'A',
            Role::Predicate => 'P',
            Role::Label => 'L',
        }
    }

    pub fn from_letter(c: char) -> Option<Role> {
        Role::ALL
            .into_iter()
            .find(|r| r.letter() == c.to_ascii_uppercase())
    }

    pub fn name(self) -> &'static str {
        match self {
            Role::Subject => "subject",
            Role::Object => "object",
            Role::Aspect => "aspect",
            Role::Predicate => "predicate",
            Role::Label => "label",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Strictly increasing, non-empty token indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct ElementSpan(Vec<usize>);

impl ElementSpan {
    pub fn new(indices: Vec<usize>) -> Result<Self, SpanError> {
        if indices.is_empty() {
            return Err(SpanError::Empty);
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SpanError::NotIncreasing);
        }
        Ok(Self(indices))
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Result<Self, SpanError> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn first(&self) -> usize {
        self.0[0]
    }

    pub fn last(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn midpoint(&self) -> f64 {
        (self.first() + self.last()) as f64 / 2.0
    }

    pub fn overlap(&self, other: &ElementSpan) -> usize {
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

impl<'de> Deserialize<'de> for ElementSpan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        ElementSpan::new(v).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanError {
    #[error("span is empty")]
    Empty,
    #[error("span indices are not strictly increasing")]
    NotIncreasing,
}

/// Space-joined token texts at the span's indices.
pub fn element_surface(sentence: &Sentence, span: &ElementSpan) -> String {
    span.indices()
        .iter()
        .map(|&i| sentence.tokens[i].text.as_str())
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// The closed set of comparison labels a corpus may use.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelScheme {
    pub name: String,
    labels: Vec<String>,
}

impl LabelScheme {
    pub fn new(name: impl Into<String>, labels: Vec<String>) -> Result<Self, String> {
        if labels.is_empty() {
            return Err("label scheme has no labels".into());
        }
        let mut seen = HashSet::new();
        for l in &labels {
            if l.is_empty() || l.chars().any(char::is_whitespace) {
                return Err(format!("label {l:?} is empty or contains whitespace"));
            }
            if TargetGrammar::is_structural(l) {
                return Err(format!("label {l:?} collides with a grammar symbol"));
            }
            if !seen.insert(l.as_str()) {
                return Err(format!("duplicate label {l:?}"));
            }
        }
        Ok(Self {
            name: name.into(),
            labels,
        })
    }

    /// English camera reviews: four comparison types.
    pub fn camera() -> Self {
        Self::new(
            "camera",
            ["BETTER", "WORSE", "EQUAL", "DIFFERENT"]
                .map(String::from)
                .to_vec(),
        )
        .expect("built-in scheme is valid")
    }

    /// Vietnamese reviews: eight comparison types.
    pub fn vcom() -> Self {
        Self::new(
            "vcom",
            ["COM", "COM+", "COM-", "SUP", "SUP+", "SUP-", "EQL", "DIF"]
                .map(String::from)
                .to_vec(),
        )
        .expect("built-in scheme is valid")
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "camera" => Some(Self::camera()),
            "vcom" => Some(Self::vcom()),
            _ => None,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn contains(&self, name: &str) -> bool {
        self.labels.iter().any(|l| l == name)
    }

    pub fn label(&self, name: &str) -> Option<Label> {
        self.contains(name).then(|| Label(name.to_string()))
    }
}

/// `(subject, object, aspect, predicate, label)`; at least one span is present.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Quintuple {
    pub subject: Option<ElementSpan>,
    pub object: Option<ElementSpan>,
    pub aspect: Option<ElementSpan>,
    pub predicate: Option<ElementSpan>,
    pub label: Label,
}

impl Quintuple {
    pub fn new(
        subject: Option<ElementSpan>,
        object: Option<ElementSpan>,
        aspect: Option<ElementSpan>,
        predicate: Option<ElementSpan>,
        label: Label,
    ) -> Result<Self, QuintupleError> {
        let q = Self {
            subject,
            object,
            aspect,
            predicate,
            label,
        };
        if Role::ELEMENTS.iter().all(|r| q.span(*r).is_none()) {
            return Err(QuintupleError::AllAbsent);
        }
        Ok(q)
    }

    /// The span for an element role; always `None` for [`Role::Label`].
    pub fn span(&self, role: Role) -> Option<&ElementSpan> {
        match role {
            Role::Subject => self.subject.as_ref(),
            Role::Object => self.object.as_ref(),
            Role::Aspect => self.aspect.as_ref(),
            Role::Predicate => self.predicate.as_ref(),
            Role::Label => None,
        }
    }

    pub fn span_mut(&mut self, role: Role) -> Option<&mut Option<ElementSpan>> {
        match role {
            Role::Subject => Some(&mut self.subject),
            Role::Object => Some(&mut self.object),
            Role::Aspect => Some(&mut self.aspect),
            Role::Predicate => Some(&mut self.predicate),
            Role::Label => None,
        }
    }

    pub fn max_index(&self) -> Option<usize> {
        Role::ELEMENTS
            .iter()
            .filter_map(|r| self.span(*r).map(ElementSpan::last))
            .max()
    }

    pub fn to_record(&self) -> QuintupleRecord {
        QuintupleRecord {
            subject: self.subject.as_ref().map(|s| s.indices().to_vec()),
            object: self.object.as_ref().map(|s| s.indices().to_vec()),
            aspect: self.aspect.as_ref().map(|s| s.indices().to_vec()),
            predicate: self.predicate.as_ref().map(|s| s.indices().to_vec()),
            label: self.label.as_str().to_string(),
        }
    }
}

impl Serialize for Quintuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quintuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let r = QuintupleRecord::deserialize(d)?;
        let span = |v: Option<Vec<usize>>| {
            v.map(ElementSpan::new)
                .transpose()
                .map_err(D::Error::custom)
        };
        Quintuple::new(
            span(r.subject)?,
            span(r.object)?,
            span(r.aspect)?,
            span(r.predicate)?,
            Label(r.label),
        )
        .map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuintupleError {
    #[error("all four elements are absent")]
    AllAbsent,
}

/// A sentence and its gold quintuples; comparative iff the list is non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSentence {
    pub sentence: Sentence,
    pub quintuples: Vec<Quintuple>,
}

impl LabeledSentence {
    pub fn is_comparative(&self) -> bool {
        !self.quintuples.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Dev,
    Test,
    #[default]
    Unsplit,
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "train" => Ok(Split::Train),
            "dev" => Ok(Split::Dev),
            "test" => Ok(Split::Test),
            "unsplit" => Ok(Split::Unsplit),
            other => Err(format!("unknown split {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub scheme: LabelScheme,
    pub items: Vec<LabeledSentence>,
    pub split: Split,
}

impl Corpus {
    /// Validates ids, labels and spans of already-built items.
    pub fn new(
        scheme: LabelScheme,
        items: Vec<LabeledSentence>,
        split: Split,
    ) -> Result<Self, CorpusError> {
        let mut ids = HashSet::new();
        for (n, item) in items.iter().enumerate() {
            let id = &item.sentence.id;
            if !ids.insert(id.clone()) {
                return Err(CorpusError::DuplicateId {
                    line: n + 1,
                    id: id.clone(),
                });
            }
            for q in &item.quintuples {
                if !scheme.contains(q.label.as_str()) {
                    return Err(CorpusError::UnknownLabel {
                        line: n + 1,
                        id: id.clone(),
                        label: q.label.to_string(),
                        scheme: scheme.name.clone(),
                    });
                }
                check_spans(n + 1, &item.sentence, q)?;
            }
        }
        Ok(Self {
            scheme,
            items,
            split,
        })
    }

    pub fn get(&self, id: &str) -> Option<&LabeledSentence> {
        self.items.iter().find(|i| i.sentence.id == id)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

fn check_spans(line: usize, sentence: &Sentence, q: &Quintuple) -> Result<(), CorpusError> {
    for role in Role::ELEMENTS {
        let Some(span) = q.span(role) else { continue };
        if let Some(&bad) = span.indices().iter().find(|&&i| i >= sentence.len()) {
            return Err(CorpusError::SpanOutOfRange {
                line,
                id: sentence.id.clone(),
                role,
                index: bad,
                len: sentence.len(),
            });
        }
        if let Some(&i) = span
            .indices()
            .iter()
            .find(|&&i| TargetGrammar::is_reserved_in_span(&sentence.tokens[i].text))
        {
            return Err(CorpusError::ReservedToken {
                line,
                id: sentence.id.clone(),
                token: sentence.tokens[i].text.clone(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("read error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: malformed record: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line} (id {id:?}): {role} span index {index} out of range for {len} tokens")]
    SpanOutOfRange {
        line: usize,
        id: String,
        role: Role,
        index: usize,
        len: usize,
    },
    #[error("line {line} (id {id:?}): label {label:?} is not in scheme {scheme:?}")]
    UnknownLabel {
        line: usize,
        id: String,
        label: String,
        scheme: String,
    },
    #[error("line {line} (id {id:?}): duplicate sentence id")]
    DuplicateId { line: usize, id: String },
    #[error("line {line} (id {id:?}): invalid quintuple: {message}")]
    InvalidQuintuple {
        line: usize,
        id: String,
        message: String,
    },
    #[error("line {line} (id {id:?}): {message}")]
    Tokens {
        line: usize,
        id: String,
        message: String,
    },
    #[error("line {line} (id {id:?}): element contains reserved token {token:?}")]
    ReservedToken {
        line: usize,
        id: String,
        token: String,
    },
}

impl CorpusError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CorpusError::Io(_) => None,
            CorpusError::Malformed { line, .. }
            | CorpusError::SpanOutOfRange { line, .. }
            | CorpusError::UnknownLabel { line, .. }
            | CorpusError::DuplicateId { line, .. }
            | CorpusError::InvalidQuintuple { line, .. }
            | CorpusError::Tokens { line, .. }
            | CorpusError::ReservedToken { line, .. } => Some(*line),
        }
    }
}

/// One quintuple in the corpus file format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuintupleRecord {
    #[serde(default)]
    pub subject: Option<Vec<usize>>,
    #[serde(default)]
    pub object: Option<Vec<usize>>,
    #[serde(default)]
    pub aspect: Option<Vec<usize>>,
    #[serde(default)]
    pub predicate: Option<Vec<usize>>,
    pub label: String,
}

impl QuintupleRecord {
    fn span(&self, role: Role) -> Option<&Vec<usize>> {
        match role {
            Role::Subject => self.subject.as_ref(),
            Role::Object => self.object.as_ref(),
            Role::Aspect => self.aspect.as_ref(),
            Role::Predicate => self.predicate.as_ref(),
            Role::Label => None,
        }
    }
}

/// One line of the corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SentenceRecord {
    pub id: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<String>>,
    #[serde(default)]
    pub quintuples: Vec<QuintupleRecord>,
}

impl SentenceRecord {
    pub fn from_labeled(item: &LabeledSentence) -> Self {
        Self {
            id: item.sentence.id.clone(),
            text: item.sentence.raw.clone(),
            tokens: Some(item.sentence.words().map(String::from).collect()),
            quintuples: item.quintuples.iter().map(Quintuple::to_record).collect(),
        }
    }
}

/// Converts a parsed record into a validated [`LabeledSentence`].
pub fn labeled_from_record(
    record: SentenceRecord,
    line: usize,
    scheme: &LabelScheme,
    tokenizer: &TokenizerConfig,
) -> Result<LabeledSentence, CorpusError> {
    let sentence = match &record.tokens {
        Some(words) => {
            Sentence::from_pretokenized(&record.id, &record.text, words).map_err(|message| {
                CorpusError::Tokens {
                    line,
                    id: record.id.clone(),
                    message,
                }
            })?
        }
        None => Sentence::new(&record.id, &record.text, tokenizer),
    };
    if let Some(t) = sentence
        .tokens
        .iter()
        .find(|t| TargetGrammar::is_marker_like(&t.text))
    {
        return Err(CorpusError::ReservedToken {
            line,
            id: record.id,
            token: t.text.clone(),
        });
    }
    let mut quintuples = Vec::with_capacity(record.quintuples.len());
    for qr in &record.quintuples {
        let label = scheme
            .label(&qr.label)
            .ok_or_else(|| CorpusError::UnknownLabel {
                line,
                id: record.id.clone(),
                label: qr.label.clone(),
                scheme: scheme.name.clone(),
            })?;
        let mut spans: [Option<ElementSpan>; 4] = Default::default();
        for (slot, role) in spans.iter_mut().zip(Role::ELEMENTS) {
            let Some(indices) = qr.span(role) else {
                continue;
            };
            if let Some(&bad) = indices.iter().find(|&&i| i >= sentence.len()) {
                return Err(CorpusError::SpanOutOfRange {
                    line,
                    id: record.id.clone(),
                    role,
                    index: bad,
                    len: sentence.len(),
                });
            }
            let span =
                ElementSpan::new(indices.clone()).map_err(|e| CorpusError::InvalidQuintuple {
                    line,
                    id: record.id.clone(),
                    message: format!("{role} span: {e}"),
                })?;
            *slot = Some(span);
        }
        let [subject, object, aspect, predicate] = spans;
        let q = Quintuple::new(subject, object, aspect, predicate, label).map_err(|e| {
            CorpusError::InvalidQuintuple {
                line,
                id: record.id.clone(),
                message: e.to_string(),
            }
        })?;
        check_spans(line, &sentence, &q)?;
        quintuples.push(q);
    }
    Ok(LabeledSentence {
        sentence,
        quintuples,
    })
}

/// Reads a JSON Lines corpus. Blank lines are skipped; the first bad record
/// aborts the load with its 1-based line number.
pub fn load_corpus<R: BufRead>(source: R, scheme: &LabelScheme) -> Result<Corpus, CorpusError> {
    load_corpus_with(source, scheme, &TokenizerConfig::default(), Split::Unsplit)
}

pub fn load_corpus_with<R: BufRead>(
    source: R,
    scheme: &LabelScheme,
    tokenizer: &TokenizerConfig,
    split: Split,
) -> Result<Corpus, CorpusError> {
    let mut items = Vec::new();
    let mut seen = HashSet::new();
    for (n, line) in source.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SentenceRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed {
                line: line_no,
                message: e.to_string(),
            })?;
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId {
                line: line_no,
                id: record.id,
            });
        }
        items.push(labeled_from_record(record, line_no, scheme, tokenizer)?);
    }
    Ok(Corpus {
        scheme: scheme.clone(),
        items,
        split,
    })
}

/// Writes the corpus in the same JSON Lines format, always including tokens.
pub fn write_corpus<W: Write>(corpus: &Corpus, mut out: W) -> std::io::Result<()> {
    for item in &corpus.items {
        serde_json::to_writer(&mut out, &SentenceRecord::from_labeled(item))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Per-role element counts: unique lowercased surface forms and raw mentions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ElementCounts {
    pub unique: usize,
    pub mentions: usize,
}

/// Corpus statistics in the layout of the usual dataset table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub sentence_count: usize,
    pub non_comparative_count: usize,
    pub comparative_count: usize,
    pub multi_comparative_count: usize,
    pub quintuple_count: usize,
    pub multi_over_com: f64,
    pub com_over_total: f64,
    pub quintuples_per_comparative_sentence: f64,
    pub subject: ElementCounts,
    pub object: ElementCounts,
    pub aspect: ElementCounts,
    pub predicate: ElementCounts,
    pub label_type_count: usize,
    pub label_distribution: BTreeMap<String, usize>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let sentence_count = corpus.items.len();
    let comparative_count = corpus.items.iter().filter(|i| i.is_comparative()).count();
    let multi_comparative_count = corpus
        .items
        .iter()
        .filter(|i| i.quintuples.len() >= 2)
        .count();
    let quintuple_count: usize = corpus.items.iter().map(|i| i.quintuples.len()).sum();

    let mut forms: [HashSet<String>; 4] = Default::default();
    let mut mentions = [0usize; 4];
    let mut label_distribution: BTreeMap<String, usize> = corpus
        .scheme
        .labels()
        .iter()
        .map(|l| (l.clone(), 0))
        .collect();
    for item in &corpus.items {
        for q in &item.quintuples {
            *label_distribution.entry(q.label.to_string()).or_default() += 1;
            for (k, role) in Role::ELEMENTS.into_iter().enumerate() {
                if let Some(span) = q.span(role) {
                    mentions[k] += 1;
                    forms[k].insert(element_surface(&item.sentence, span).to_lowercase());
                }
            }
        }
    }
    let counts = |k: usize| ElementCounts {
        unique: forms[k].len(),
        mentions: mentions[k],
    };
    StatsReport {
        sentence_count,
        non_comparative_count: sentence_count - comparative_count,
        comparative_count,
        multi_comparative_count,
        quintuple_count,
        multi_over_com: ratio(multi_comparative_count, comparative_count),
        com_over_total: ratio(comparative_count, sentence_count),
        quintuples_per_comparative_sentence: ratio(quintuple_count, comparative_count),
        subject: counts(0),
        object: counts(1),
        aspect: counts(2),
        predicate: counts(3),
        label_type_count: corpus.scheme.labels().len(),
        label_distribution,
    }
}

impl StatsReport {
    /// Two-column plain-text table.
    pub fn to_table(&self, title: &str) -> String {
        let rows: Vec<(String, String)> = vec![
            ("Sentences".into(), self.sentence_count.to_string()),
            ("#Non-com".into(), self.non_comparative_count.to_string()),
            ("#Com".into(), self.comparative_count.to_string()),
            (
                "#Multi-com".into(),
                self.multi_comparative_count.to_string(),
            ),
            (
                "#Multi-com/#Com".into(),
                format!("{:.2}%", self.multi_over_com * 100.0),
            ),
            (
                "#Com/Sentences".into(),
                format!("{:.2}%", self.com_over_total * 100.0),
            ),
            (
                "#Quintuples per Sent".into(),
                format!("{:.2}", self.quintuples_per_comparative_sentence),
            ),
            (
                "Subject entities".into(),
                format!(
                    "{} ({} mentions)",
                    self.subject.unique, self.subject.mentions
                ),
            ),
            (
                "Object entities".into(),
                format!("{} ({} mentions)", self.object.unique, self.object.mentions),
            ),
            (
                "Aspect entities".into(),
                format!("{} ({} mentions)", self.aspect.unique, self.aspect.mentions),
            ),
            (
                "Predicate entities".into(),
                format!(
                    "{} ({} mentions)",
                    self.predicate.unique, self.predicate.mentions
                ),
            ),
            ("Label types".into(), self.label_type_count.to_string()),
        ];
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut s = format!("{title}\n");
        for (k, v) in rows {
            s.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(tokens: &[Token]) -> Vec<&str> {
        tokens.iter().map(|t| t.text.as_str()).collect()
    }

    #[test]
    fn whitespace_split() {
        let toks = tokenize("Camera A is better", &TokenizerConfig::default());
        assert_eq!(texts(&toks), ["Camera", "A", "is", "better"]);
        assert_eq!(
            toks.iter().map(|t| t.index).collect::<Vec<_>>(),
            [0, 1, 2, 3]
        );
        assert_eq!((toks[1].char_start, toks[1].char_end), (7, 8));
    }

    #[test]
    fn empty_input() {
        assert!(tokenize("", &TokenizerConfig::default()).is_empty());
        assert!(tokenize("   \t", &TokenizerConfig::default()).is_empty());
    }

    #[test]
    fn punctuation_is_peeled() {
        let toks = tokenize("better, cheaper!", &TokenizerConfig::default());
        assert_eq!(texts(&toks), ["better", ",", "cheaper", "!"]);
        let toks = tokenize("(don't) e.g.", &TokenizerConfig::default());
        assert_eq!(texts(&toks), ["(", "don't", ")", "e.g", "."]);
        let toks = tokenize("[S] ...", &TokenizerConfig::default());
        assert_eq!(texts(&toks), ["[", "S", "]", ".", ".", "."]);
    }

    #[test]
    fn punctuation_kept_when_disabled() {
        let cfg = TokenizerConfig {
            split_punctuation: false,
        };
        assert_eq!(
            texts(&tokenize("better, cheaper!", &cfg)),
            ["better,", "cheaper!"]
        );
    }

    #[test]
    fn offsets_slice_raw() {
        let raw = "Máy ảnh  này tốt hơn, rõ ràng!";
        for t in tokenize(raw, &TokenizerConfig::default()) {
            assert_eq!(&raw[t.char_start..t.char_end], t.text);
        }
    }

    #[test]
    fn surface_joins_in_index_order() {
        let s = Sentence::new("x", "battery life", &TokenizerConfig::default());
        let span = ElementSpan::new(vec![0, 1]).unwrap();
        assert_eq!(element_surface(&s, &span), "battery life");
        assert_eq!(
            element_surface(&s, &ElementSpan::new(vec![1]).unwrap()),
            "life"
        );
        let s = Sentence::new("y", "A beats B", &TokenizerConfig::default());
        assert_eq!(
            element_surface(&s, &ElementSpan::new(vec![0, 2]).unwrap()),
            "A B"
        );
    }

    #[test]
    fn span_invariants() {
        assert_eq!(ElementSpan::new(vec![]), Err(SpanError::Empty));
        assert_eq!(ElementSpan::new(vec![2, 2]), Err(SpanError::NotIncreasing));
        assert_eq!(ElementSpan::new(vec![3, 1]), Err(SpanError::NotIncreasing));
        let a = ElementSpan::new(vec![1, 2, 5]).unwrap();
        let b = ElementSpan::new(vec![2, 5, 6]).unwrap();
        assert_eq!(a.overlap(&b), 2);
        assert_eq!(a.midpoint(), 3.0);
    }

    #[test]
    fn all_absent_quintuple_rejected() {
        let l = LabelScheme::vcom().label("COM").unwrap();
        assert_eq!(
            Quintuple::new(None, None, None, None, l),
            Err(QuintupleError::AllAbsent)
        );
    }

    const ONE: &str = r#"{"id":"s1","text":"iphone has better battery than galaxy","quintuples":[{"subject":[0],"object":[5],"aspect":[3],"predicate":[2],"label":"COM+"}]}"#;

    #[test]
    fn loads_single_record() {
        let c = load_corpus(ONE.as_bytes(), &LabelScheme::vcom()).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c.items[0].is_comparative());
        assert_eq!(c.items[0].sentence.len(), 6);
    }

    #[test]
    fn out_of_range_span_names_record() {
        let src = r#"{"id":"bad","text":"a b c d e","quintuples":[{"aspect":[99],"label":"COM"}]}"#;
        let err = load_corpus(src.as_bytes(), &LabelScheme::vcom()).unwrap_err();
        match err {
            CorpusError::SpanOutOfRange { id, index, len, .. } => {
                assert_eq!((id.as_str(), index, len), ("bad", 99, 5));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_label_rejected() {
        let src = r#"{"id":"b","text":"a b","quintuples":[{"subject":[0],"label":"BEST"}]}"#;
        let err = load_corpus(src.as_bytes(), &LabelScheme::vcom()).unwrap_err();
        assert!(matches!(err, CorpusError::UnknownLabel { ref label, .. } if label == "BEST"));
    }

    #[test]
    fn malformed_line_reports_number() {
        let src = format!("{ONE}\n\n{{not json\n");
        let err = load_corpus(src.as_bytes(), &LabelScheme::vcom()).unwrap_err();
        assert_eq!(err.line(), Some(3));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let src = format!("{ONE}\n{ONE}\n");
        let err = load_corpus(src.as_bytes(), &LabelScheme::vcom()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateId { line: 2, .. }));
    }

    #[test]
    fn empty_and_unsorted_spans_rejected() {
        for bad in [r#"[]"#, r#"[2,1]"#] {
            let src = format!(
                r#"{{"id":"b","text":"a b c","quintuples":[{{"subject":{bad},"label":"COM"}}]}}"#
            );
            let err = load_corpus(src.as_bytes(), &LabelScheme::vcom()).unwrap_err();
            assert!(
                matches!(err, CorpusError::InvalidQuintuple { .. }),
                "{bad}: {err}"
            );
        }
        let src = r#"{"id":"b","text":"a b c","quintuples":[{"label":"COM"}]}"#;
        assert!(matches!(
            load_corpus(src.as_bytes(), &LabelScheme::vcom()),
            Err(CorpusError::InvalidQuintuple { .. })
        ));
    }

    #[test]
    fn pretokenized_tokens_override() {
        let src = r#"{"id":"p","text":"battery-life rocks","tokens":["battery","-","life","rocks"],"quintuples":[]}"#;
        let c = load_corpus(src.as_bytes(), &LabelScheme::camera()).unwrap();
        let s = &c.items[0].sentence;
        assert_eq!(
            s.words().collect::<Vec<_>>(),
            ["battery", "-", "life", "rocks"]
        );
        assert_eq!((s.tokens[2].char_start, s.tokens[2].char_end), (8, 12));

        let src = r#"{"id":"p","text":"abc","tokens":["xyz"],"quintuples":[]}"#;
        assert!(matches!(
            load_corpus(src.as_bytes(), &LabelScheme::camera()),
            Err(CorpusError::Tokens { .. })
        ));
    }

    #[test]
    fn reserved_tokens_rejected() {
        let src = r#"{"id":"r","text":"a [S] b","tokens":["a","[S]","b"],"quintuples":[]}"#;
        assert!(matches!(
            load_corpus(src.as_bytes(), &LabelScheme::camera()),
            Err(CorpusError::ReservedToken { .. })
        ));
        let src =
            r#"{"id":"r","text":"good ; bad","quintuples":[{"predicate":[1],"label":"BETTER"}]}"#;
        assert!(matches!(
            load_corpus(src.as_bytes(), &LabelScheme::camera()),
            Err(CorpusError::ReservedToken { .. })
        ));
    }

    #[test]
    fn write_then_reload_is_identity() {
        let src = format!(
            "{ONE}\n{}\n",
            r#"{"id":"s2","text":"nothing to compare here.","quintuples":[]}"#
        );
        let c = load_corpus(src.as_bytes(), &LabelScheme::vcom()).unwrap();
        let mut buf = Vec::new();
        write_corpus(&c, &mut buf).unwrap();
        let again = load_corpus(buf.as_slice(), &LabelScheme::vcom()).unwrap();
        assert_eq!(c, again);
    }

    fn synthetic_four() -> Corpus {
        let lines = [
            r#"{"id":"1","text":"A is better than B","quintuples":[{"subject":[0],"object":[4],"predicate":[2],"label":"COM+"}]}"#,
            r#"{"id":"2","text":"A beats B and C beats D","quintuples":[{"subject":[0],"object":[2],"predicate":[1],"label":"COM+"},{"subject":[4],"object":[6],"predicate":[5],"label":"COM+"}]}"#,
            r#"{"id":"3","text":"nice photo","quintuples":[]}"#,
            r#"{"id":"4","text":"so so","quintuples":[]}"#,
        ];
        load_corpus(lines.join("\n").as_bytes(), &LabelScheme::vcom()).unwrap()
    }

    #[test]
    fn stats_on_synthetic_four() {
        let s = corpus_stats(&synthetic_four());
        assert_eq!(s.sentence_count, 4);
        assert_eq!(s.comparative_count, 2);
        assert_eq!(s.non_comparative_count, 2);
        assert_eq!(s.multi_comparative_count, 1);
        assert_eq!(s.com_over_total, 0.5);
        assert_eq!(s.multi_over_com, 0.5);
        assert_eq!(s.quintuples_per_comparative_sentence, 1.5);
        // "A" appears twice as a subject mention but is one form.
        assert_eq!(
            s.subject,
            ElementCounts {
                unique: 2,
                mentions: 3
            }
        );
        assert_eq!(
            s.predicate,
            ElementCounts {
                unique: 2,
                mentions: 3
            }
        );
        assert_eq!(s.label_type_count, 8);
        assert_eq!(s.label_distribution["COM+"], 3);
    }

    #[test]
    fn stats_on_empty_corpus() {
        let c = load_corpus("".as_bytes(), &LabelScheme::camera()).unwrap();
        let s = corpus_stats(&c);
        assert_eq!(s.sentence_count, 0);
        assert_eq!(s.com_over_total, 0.0);
        assert_eq!(s.label_type_count, 4);
    }
}
