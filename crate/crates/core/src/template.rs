//! Prompt rendering and the marker grammar for serialized quintuples.
//!
//! A target is a `;`-separated list of tuples. Each tuple is the view's
//! markers in order, each followed by the element's surface form or `[UNK]`:
//!
//! ```text
//! target  := "none" | tuple (" ; " tuple)*
//! tuple   := (marker " " payload)+          markers in view order, [L] last
//! marker  := "[S]" | "[O]" | "[A]" | "[P]" | "[L]"
//! payload := "[UNK]" | word (" " word)*
//! ```
//!
//! [`parse_view`] is total: anything that deviates from the grammar becomes a
//! [`FormatError`] diagnostic while whatever tuples can be salvaged are kept.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::augment::ElementOrder;
use crate::corpus::{element_surface, Quintuple, Role, Sentence};

/// Reserved symbols of the target grammar.
#[derive(Debug, Clone, Copy, Default)]
pub struct TargetGrammar;

impl TargetGrammar {
    pub const SEPARATOR: &'static str = ";";
    pub const MISSING: &'static str = "[UNK]";
    pub const NONE: &'static str = "none";
    pub const EOS: &'static str = "</s>";

    pub fn marker(role: Role) -> &'static str {
        match role {
            Role::Subject => "[S]",
            Role::Object => "[O]",
            Role::Aspect => "[A]",
            Role::Predicate => "[P]",
            Role::Label => "[L]",
        }
    }

    pub fn marker_role(token: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| Self::marker(*r) == token)
    }

    /// Tokens that may never appear as sentence tokens.
    pub fn is_marker_like(token: &str) -> bool {
        Self::marker_role(token).is_some() || token == Self::MISSING || token == Self::EOS
    }

    /// Tokens that may appear in a sentence but never inside an element.
    pub fn is_reserved_in_span(token: &str) -> bool {
        Self::is_marker_like(token) || token == Self::SEPARATOR
    }

    /// Every grammar symbol, including the none-word.
    pub fn is_structural(token: &str) -> bool {
        Self::is_reserved_in_span(token) || token == Self::NONE
    }
}

/// What a target serializes: full quintuples in some element order, or a
/// single role.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum View {
    Quintuple(ElementOrder),
    Single(Role),
}

impl View {
    pub fn canonical() -> Self {
        View::Quintuple(ElementOrder::canonical())
    }

    /// Marker sequence of one tuple.
    pub fn roles(&self) -> Vec<Role> {
        match self {
            View::Quintuple(order) => {
                let mut r = order.roles().to_vec();
                r.push(Role::Label);
                r
            }
            View::Single(role) => vec![*role],
        }
    }

    pub fn name(&self) -> String {
        match self {
            View::Quintuple(order) => format!("order:{order}"),
            View::Single(role) => format!("single:{role}"),
        }
    }

    pub fn parse_name(s: &str) -> Option<Self> {
        if let Some(rest) = s.strip_prefix("order:") {
            return rest.parse().ok().map(View::Quintuple);
        }
        let rest = s.strip_prefix("single:")?;
        let mut chars = rest.chars();
        let role = Role::from_letter(chars.next()?)?;
        chars.next().is_none().then_some(View::Single(role))
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PromptStyle {
    #[default]
    Prefix,
    Suffix,
}

impl std::str::FromStr for PromptStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "prefix" => Ok(PromptStyle::Prefix),
            "suffix" => Ok(PromptStyle::Suffix),
            other => Err(format!("unknown prompt style {other:?}")),
        }
    }
}

/// Words used to spell out the instruction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleLexicon {
    pub instruction: String,
    /// Names for S, O, A, P, L in that order.
    pub names: [String; 5],
}

impl RoleLexicon {
    pub fn english() -> Self {
        Self {
            instruction: "extract".into(),
            names: ["subject", "object", "aspect", "predicate", "label"].map(String::from),
        }
    }

    pub fn vietnamese() -> Self {
        Self {
            instruction: "trích xuất".into(),
            names: ["chủ thể", "đối tượng", "khía cạnh", "vị từ", "nhãn"].map(String::from),
        }
    }

    pub fn name(&self, role: Role) -> &str {
        let k = Role::ALL.iter().position(|r| *r == role).unwrap_or(0);
        &self.names[k]
    }
}

impl Default for RoleLexicon {
    fn default() -> Self {
        Self::english()
    }
}

/// Builds prompted inputs for a given placement and lexicon.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prompter {
    pub style: PromptStyle,
    pub lexicon: RoleLexicon,
}

impl Prompter {
    pub fn new(style: PromptStyle, lexicon: RoleLexicon) -> Self {
        Self { style, lexicon }
    }

    pub fn instruction(&self, view: &View) -> String {
        let mut parts = vec![self.lexicon.instruction.as_str()];
        parts.extend(view.roles().into_iter().map(|r| self.lexicon.name(r)));
        parts.join(" ")
    }

    pub fn render(&self, sentence: &Sentence, view: &View) -> String {
        let instruction = self.instruction(view);
        match self.style {
            PromptStyle::Prefix => format!("{instruction} : {}", sentence.raw),
            PromptStyle::Suffix => format!("{} : {instruction}", sentence.raw),
        }
    }
}

/// English prompt naming the element order, placed before or after the sentence.
pub fn render_prompt(sentence: &Sentence, order: ElementOrder, style: PromptStyle) -> String {
    Prompter::new(style, RoleLexicon::english()).render(sentence, &View::Quintuple(order))
}

/// A generated quintuple before it is tied back to token positions.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawQuintuple {
    pub subject: Option<String>,
    pub object: Option<String>,
    pub aspect: Option<String>,
    pub predicate: Option<String>,
    pub label: Option<String>,
}

impl RawQuintuple {
    pub fn get(&self, role: Role) -> Option<&str> {
        match role {
            Role::Subject => self.subject.as_deref(),
            Role::Object => self.object.as_deref(),
            Role::Aspect => self.aspect.as_deref(),
            Role::Predicate => self.predicate.as_deref(),
            Role::Label => self.label.as_deref(),
        }
    }

    pub fn set(&mut self, role: Role, value: Option<String>) {
        let slot = match role {
            Role::Subject => &mut self.subject,
            Role::Object => &mut self.object,
            Role::Aspect => &mut self.aspect,
            Role::Predicate => &mut self.predicate,
            Role::Label => &mut self.label,
        };
        *slot = value;
    }

    /// Surface forms of a gold quintuple.
    pub fn from_quintuple(q: &Quintuple, sentence: &Sentence) -> Self {
        let surface = |role| q.span(role).map(|s| element_surface(sentence, s));
        Self {
            subject: surface(Role::Subject),
            object: surface(Role::Object),
            aspect: surface(Role::Aspect),
            predicate: surface(Role::Predicate),
            label: Some(q.label.to_string()),
        }
    }

    /// Keeps only the roles a view serializes.
    pub fn project(&self, view: &View) -> Self {
        let mut out = Self::default();
        for role in view.roles() {
            out.set(role, self.get(role).map(String::from));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatErrorKind {
    /// A marker, or the payload after it, is missing.
    MissingMarker,
    /// Markers out of the declared order, or a marker the view does not use.
    WrongMarkerOrder,
    DuplicateMarker,
    /// Text not attached to any marker in an otherwise parsed output.
    TrailingGarbage,
    EmptyOutput,
    /// No marker at all, or an unreadable payload.
    Nonsense,
}

impl FormatErrorKind {
    pub const ALL: [FormatErrorKind; 6] = [
        FormatErrorKind::MissingMarker,
        FormatErrorKind::WrongMarkerOrder,
        FormatErrorKind::DuplicateMarker,
        FormatErrorKind::TrailingGarbage,
        FormatErrorKind::EmptyOutput,
        FormatErrorKind::Nonsense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FormatErrorKind::MissingMarker => "missing_marker",
            FormatErrorKind::WrongMarkerOrder => "wrong_marker_order",
            FormatErrorKind::DuplicateMarker => "duplicate_marker",
            FormatErrorKind::TrailingGarbage => "trailing_garbage",
            FormatErrorKind::EmptyOutput => "empty_output",
            FormatErrorKind::Nonsense => "nonsense",
        }
    }
}

/// A grammar deviation at a character offset of the parsed text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatError {
    pub kind: FormatErrorKind,
    pub position: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseOutcome {
    pub tuples: Vec<RawQuintuple>,
    pub diagnostics: Vec<FormatError>,
}

impl ParseOutcome {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Serializes surface-form tuples under a view; no tuples gives `none`.
pub fn render_raw(tuples: &[RawQuintuple], view: &View) -> String {
    if tuples.is_empty() {
        return TargetGrammar::NONE.to_string();
    }
    let roles = view.roles();
    let rendered: Vec<String> = tuples
        .iter()
        .map(|t| {
            roles
                .iter()
                .map(|r| {
                    format!(
                        "{} {}",
                        TargetGrammar::marker(*r),
                        t.get(*r).unwrap_or(TargetGrammar::MISSING)
                    )
                })
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    rendered.join(&format!(" {} ", TargetGrammar::SEPARATOR))
}

pub fn render_view(quintuples: &[Quintuple], sentence: &Sentence, view: &View) -> String {
    let raw: Vec<RawQuintuple> = quintuples
        .iter()
        .map(|q| RawQuintuple::from_quintuple(q, sentence))
        .collect();
    render_raw(&raw, view)
}

pub fn render_target(quintuples: &[Quintuple], sentence: &Sentence, order: ElementOrder) -> String {
    render_view(quintuples, sentence, &View::Quintuple(order))
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum LexKind {
    Marker(Role),
    Separator,
    Missing,
    Word(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Lexeme {
    kind: LexKind,
    pos: usize,
}

const SPECIALS: [&str; 7] = ["[S]", "[O]", "[A]", "[P]", "[L]", "[UNK]", ";"];

fn special_at(chars: &[char], i: usize) -> Option<(&'static str, usize)> {
    SPECIALS.into_iter().find_map(|s| {
        let n = s.chars().count();
        (i + n <= chars.len() && chars[i..i + n].iter().copied().eq(s.chars())).then_some((s, n))
    })
}

/// Splits text into grammar symbols and words. Symbols are recognized even
/// when glued to neighbouring words.
fn lex(text: &str) -> Vec<Lexeme> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_whitespace() {
            i += 1;
            continue;
        }
        if let Some((sym, n)) = special_at(&chars, i) {
            let kind = match sym {
                ";" => LexKind::Separator,
                "[UNK]" => LexKind::Missing,
                m => LexKind::Marker(TargetGrammar::marker_role(m).expect("marker")),
            };
            out.push(Lexeme { kind, pos: i });
            i += n;
            continue;
        }
        let start = i;
        while i < chars.len() && !chars[i].is_whitespace() && special_at(&chars, i).is_none() {
            i += 1;
        }
        out.push(Lexeme {
            kind: LexKind::Word(chars[start..i].iter().collect()),
            pos: start,
        });
    }
    out
}

/// Canonical spacing of `text` as the grammar sees it: symbols and words
/// joined by single spaces. A clean parse re-renders to exactly this.
pub fn normalize_spacing(text: &str) -> String {
    lex(text)
        .iter()
        .map(|l| match &l.kind {
            LexKind::Marker(r) => TargetGrammar::marker(*r).to_string(),
            LexKind::Separator => TargetGrammar::SEPARATOR.to_string(),
            LexKind::Missing => TargetGrammar::MISSING.to_string(),
            LexKind::Word(w) => w.clone(),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn parse_generated(text: &str, order: ElementOrder) -> ParseOutcome {
    parse_view(text, &View::Quintuple(order))
}

/// Best-effort parse of generated text under a view.
pub fn parse_view(text: &str, view: &View) -> ParseOutcome {
    let lexemes = lex(text);
    let mut out = ParseOutcome::default();
    if lexemes.is_empty() {
        out.diagnostics.push(FormatError {
            kind: FormatErrorKind::EmptyOutput,
            position: 0,
        });
        return out;
    }
    if let [Lexeme {
        kind: LexKind::Word(w),
        ..
    }] = lexemes.as_slice()
    {
        if w == TargetGrammar::NONE {
            return out;
        }
    }

    // (start position, lexemes) per segment
    let mut segments: Vec<(usize, Vec<&Lexeme>)> = vec![(0, Vec::new())];
    for lx in &lexemes {
        if lx.kind == LexKind::Separator {
            segments.push((lx.pos, Vec::new()));
        } else {
            segments.last_mut().expect("non-empty").1.push(lx);
        }
    }
    let multi = segments.len() > 1;
    let end_pos = text.chars().count();
    let expected = view.roles();

    for (k, (sep_pos, seg)) in segments.iter().enumerate() {
        let seg_end = segments.get(k + 1).map_or(end_pos, |(p, _)| *p);
        let has_marker = seg.iter().any(|l| matches!(l.kind, LexKind::Marker(_)));
        if !has_marker {
            let position = seg.first().map_or(*sep_pos, |l| l.pos);
            let kind = if multi {
                FormatErrorKind::TrailingGarbage
            } else {
                FormatErrorKind::Nonsense
            };
            out.diagnostics.push(FormatError { kind, position });
            continue;
        }
        if let Some(first) = seg.first() {
            if !matches!(first.kind, LexKind::Marker(_)) {
                out.diagnostics.push(FormatError {
                    kind: FormatErrorKind::TrailingGarbage,
                    position: first.pos,
                });
            }
        }
        if let Some(t) = parse_segment(seg, &expected, seg_end, &mut out.diagnostics) {
            out.tuples.push(t);
        }
    }
    out
}

fn parse_segment(
    seg: &[&Lexeme],
    expected: &[Role],
    seg_end: usize,
    diags: &mut Vec<FormatError>,
) -> Option<RawQuintuple> {
    let mut tuple = RawQuintuple::default();
    let mut seen: Vec<(Role, usize)> = Vec::new();
    let start = seg
        .iter()
        .position(|l| matches!(l.kind, LexKind::Marker(_)))?;
    let mut i = start;
    while i < seg.len() {
        let LexKind::Marker(role) = seg[i].kind else {
            unreachable!("loop always stops on a marker")
        };
        let marker_pos = seg[i].pos;
        let mut j = i + 1;
        while j < seg.len() && !matches!(seg[j].kind, LexKind::Marker(_)) {
            j += 1;
        }
        let payload = &seg[i + 1..j];
        i = j;

        if !expected.contains(&role) {
            diags.push(FormatError {
                kind: FormatErrorKind::WrongMarkerOrder,
                position: marker_pos,
            });
            continue;
        }
        if seen.iter().any(|(r, _)| *r == role) {
            diags.push(FormatError {
                kind: FormatErrorKind::DuplicateMarker,
                position: marker_pos,
            });
            continue;
        }
        seen.push((role, marker_pos));
        tuple.set(role, read_payload(payload, marker_pos, diags));
    }

    // Order: each recorded marker must rank after the previous one.
    let rank = |r: Role| expected.iter().position(|e| *e == r).unwrap_or(usize::MAX);
    if let Some(w) = seen.windows(2).find(|w| rank(w[1].0) < rank(w[0].0)) {
        diags.push(FormatError {
            kind: FormatErrorKind::WrongMarkerOrder,
            position: w[1].1,
        });
    }
    for role in expected {
        if !seen.iter().any(|(r, _)| r == role) {
            diags.push(FormatError {
                kind: FormatErrorKind::MissingMarker,
                position: seg_end,
            });
        }
    }
    (!seen.is_empty()).then_some(tuple)
}

fn read_payload(
    payload: &[&Lexeme],
    marker_pos: usize,
    diags: &mut Vec<FormatError>,
) -> Option<String> {
    match payload {
        [] => {
            diags.push(FormatError {
                kind: FormatErrorKind::MissingMarker,
                position: marker_pos,
            });
            None
        }
        [Lexeme {
            kind: LexKind::Missing,
            ..
        }] => None,
        _ => {
            let mut words = Vec::with_capacity(payload.len());
            for lx in payload {
                match &lx.kind {
                    LexKind::Word(w) => words.push(w.as_str()),
                    _ => diags.push(FormatError {
                        kind: FormatErrorKind::Nonsense,
                        position: lx.pos,
                    }),
                }
            }
            (!words.is_empty()).then(|| words.join(" "))
        }
    }
}
