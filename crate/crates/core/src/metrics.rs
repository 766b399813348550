//! Tuple matching and evaluation reports.
//!
//! Three strategies score a predicted tuple against a gold one:
//!
//! - exact: every considered element identical
//! - proportional: every considered element overlaps; the score is the
//!   share of gold tokens recovered, `Σ|g∩p| / Σ|g|`
//! - binary: every considered element overlaps
//!
//! Q4 considers the four spans, Q5 adds the label as a one-token element
//! that matches only when equal. An element absent on both sides is skipped;
//! absent on exactly one side makes the whole tuple score 0.
//!
//! Set-level scores come from a one-to-one assignment maximizing the summed
//! pair scores, exhaustive for small sets and Kuhn-Munkres above that.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, ElementSpan, Quintuple, Role};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    Exact,
    Proportional,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arity {
    Q4,
    Q5,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchMode {
    pub strategy: Strategy,
    pub arity: Arity,
}

impl MatchMode {
    pub const EXACT_Q4: MatchMode = MatchMode::new(Strategy::Exact, Arity::Q4);
    pub const EXACT_Q5: MatchMode = MatchMode::new(Strategy::Exact, Arity::Q5);
    pub const PROPORTIONAL_Q4: MatchMode = MatchMode::new(Strategy::Proportional, Arity::Q4);
    pub const PROPORTIONAL_Q5: MatchMode = MatchMode::new(Strategy::Proportional, Arity::Q5);
    pub const BINARY_Q4: MatchMode = MatchMode::new(Strategy::Binary, Arity::Q4);
    pub const BINARY_Q5: MatchMode = MatchMode::new(Strategy::Binary, Arity::Q5);

    pub const ALL: [MatchMode; 6] = [
        Self::EXACT_Q4,
        Self::EXACT_Q5,
        Self::PROPORTIONAL_Q4,
        Self::PROPORTIONAL_Q5,
        Self::BINARY_Q4,
        Self::BINARY_Q5,
    ];

    pub const fn new(strategy: Strategy, arity: Arity) -> Self {
        Self { strategy, arity }
    }
}

impl fmt::Display for MatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.strategy {
            Strategy::Exact => "E",
            Strategy::Proportional => "P",
            Strategy::Binary => "B",
        };
        let a = match self.arity {
            Arity::Q4 => "Q4",
            Arity::Q5 => "Q5",
        };
        write!(f, "{s}-{a}")
    }
}

/// Parses a comma-separated list such as `E-Q5,B-Q4`. A bare strategy
/// letter expands to both arities.
pub fn parse_modes(spec: &str) -> Result<Vec<MatchMode>, String> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let up = part.to_ascii_uppercase();
        let (s, a) = up
            .split_once('-')
            .map_or((up.as_str(), None), |(s, a)| (s, Some(a)));
        let strategy = match s {
            "E" => Strategy::Exact,
            "P" => Strategy::Proportional,
            "B" => Strategy::Binary,
            _ => return Err(format!("unknown match strategy in {part:?}")),
        };
        let arities = match a {
            None => vec![Arity::Q4, Arity::Q5],
            Some("Q4") => vec![Arity::Q4],
            Some("Q5") => vec![Arity::Q5],
            Some(_) => return Err(format!("unknown arity in {part:?}")),
        };
        for arity in arities {
            let m = MatchMode::new(strategy, arity);
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    if out.is_empty() {
        return Err("no match modes given".into());
    }
    Ok(out)
}

impl FromStr for MatchMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_modes(s)?.as_slice() {
            [m] => Ok(*m),
            _ => Err(format!("{s:?} names more than one mode")),
        }
    }
}

/// `matched / total`; exact and binary scores are always `0/1` or `1/1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MatchScore {
    pub matched: u32,
    pub total: u32,
}

impl MatchScore {
    pub const ZERO: MatchScore = MatchScore {
        matched: 0,
        total: 1,
    };
    pub const ONE: MatchScore = MatchScore {
        matched: 1,
        total: 1,
    };

    pub fn value(&self) -> f64 {
        self.matched as f64 / self.total as f64
    }

    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.matched as u64, self.total as u64)
    }

    pub fn is_zero(&self) -> bool {
        self.matched == 0
    }
}

/// Scores one predicted tuple against one gold tuple of the same sentence.
pub fn tuple_match(gold: &Quintuple, pred: &Quintuple, mode: MatchMode) -> MatchScore {
    let mut matched = 0usize;
    let mut total = 0usize;
    let mut all_exact = true;
    for role in Role::ELEMENTS {
        match (gold.span(role), pred.span(role)) {
            (None, None) => {}
            (Some(_), None) | (None, Some(_)) => return MatchScore::ZERO,
            (Some(g), Some(p)) => {
                let common = g.overlap(p);
                if common == 0 {
                    return MatchScore::ZERO;
                }
                all_exact &= g == p;
                matched += common;
                total += g.len();
            }
        }
    }
    if mode.arity == Arity::Q5 {
        if gold.label != pred.label {
            return MatchScore::ZERO;
        }
        matched += 1;
        total += 1;
    }
    match mode.strategy {
        Strategy::Exact if all_exact => MatchScore::ONE,
        Strategy::Exact => MatchScore::ZERO,
        Strategy::Binary => MatchScore::ONE,
        Strategy::Proportional => MatchScore {
            matched: matched as u32,
            total: total as u32,
        },
    }
}

/// One-to-one pairing of gold and predicted tuples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    /// `(gold index, predicted index, score)`, only pairs with a non-zero score.
    pub pairs: Vec<(usize, usize, MatchScore)>,
    pub total: Ratio<u64>,
}

impl Assignment {
    pub fn total_f64(&self) -> f64 {
        *self.total.numer() as f64 / *self.total.denom() as f64
    }
}

/// Sets with at most this many tuples per side are assigned exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 6;

pub fn score_matrix(
    gold: &[Quintuple],
    pred: &[Quintuple],
    mode: MatchMode,
) -> Vec<Vec<MatchScore>> {
    gold.iter()
        .map(|g| pred.iter().map(|p| tuple_match(g, p, mode)).collect())
        .collect()
}

fn finish(scores: &[Vec<MatchScore>], mut pairs: Vec<(usize, usize)>) -> Assignment {
    pairs.sort_unstable();
    let pairs: Vec<(usize, usize, MatchScore)> = pairs
        .into_iter()
        .map(|(i, j)| (i, j, scores[i][j]))
        .filter(|(_, _, s)| !s.is_zero())
        .collect();
    let total = pairs
        .iter()
        .fold(Ratio::from_integer(0), |acc, (_, _, s)| acc + s.ratio());
    Assignment { pairs, total }
}

/// Tries every one-to-one assignment; the first optimum found wins.
pub fn assign_exhaustive(scores: &[Vec<MatchScore>]) -> Assignment {
    let n = scores.len();
    let m = scores.first().map_or(0, Vec::len);
    let mut used = vec![false; m];
    let mut current = Vec::new();
    let mut best: (Ratio<u64>, Vec<(usize, usize)>) = (Ratio::from_integer(0), Vec::new());

    fn go(
        i: usize,
        acc: Ratio<u64>,
        scores: &[Vec<MatchScore>],
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        best: &mut (Ratio<u64>, Vec<(usize, usize)>),
    ) {
        if i == scores.len() {
            if acc > best.0 {
                *best = (acc, current.clone());
            }
            return;
        }
        for j in 0..used.len() {
            if used[j] || scores[i][j].is_zero() {
                continue;
            }
            used[j] = true;
            current.push((i, j));
            go(
                i + 1,
                acc + scores[i][j].ratio(),
                scores,
                used,
                current,
                best,
            );
            current.pop();
            used[j] = false;
        }
        go(i + 1, acc, scores, used, current, best);
    }

    if n > 0 && m > 0 {
        go(
            0,
            Ratio::from_integer(0),
            scores,
            &mut used,
            &mut current,
            &mut best,
        );
    }
    finish(scores, best.1)
}

/// Integer weights proportional to the scores: exact when the common
/// denominator is small, otherwise scaled by 2^40.
fn integer_weights(scores: &[Vec<MatchScore>]) -> Vec<Vec<i64>> {
    let lcm = scores
        .iter()
        .flatten()
        .filter(|s| !s.is_zero())
        .try_fold(1u64, |acc, s| {
            let d = s.total as u64;
            let l = acc / num_integer_gcd(acc, d) * d;
            (l <= 1 << 40).then_some(l)
        });
    scores
        .iter()
        .map(|row| {
            row.iter()
                .map(|s| match lcm {
                    Some(l) => (s.matched as u64 * (l / s.total as u64)) as i64,
                    None => (s.value() * (1u64 << 40) as f64).round() as i64,
                })
                .collect()
        })
        .collect()
}

fn num_integer_gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Maximum-weight assignment by Kuhn-Munkres.
pub fn assign_optimal(scores: &[Vec<MatchScore>]) -> Assignment {
    let n = scores.len();
    let m = scores.first().map_or(0, Vec::len);
    if n == 0 || m == 0 {
        return finish(scores, Vec::new());
    }
    let w = integer_weights(scores);
    let pairs = if n <= m {
        let matrix = Matrix::from_rows(w).expect("rectangular");
        let (_, cols) = kuhn_munkres(&matrix);
        cols.into_iter().enumerate().collect()
    } else {
        let transposed: Vec<Vec<i64>> = (0..m).map(|j| (0..n).map(|i| w[i][j]).collect()).collect();
        let matrix = Matrix::from_rows(transposed).expect("rectangular");
        let (_, rows) = kuhn_munkres(&matrix);
        rows.into_iter().enumerate().map(|(j, i)| (i, j)).collect()
    };
    finish(scores, pairs)
}

pub fn match_sets(gold: &[Quintuple], pred: &[Quintuple], mode: MatchMode) -> Assignment {
    match_sets_with(gold, pred, mode, EXHAUSTIVE_LIMIT)
}

pub fn match_sets_with(
    gold: &[Quintuple],
    pred: &[Quintuple],
    mode: MatchMode,
    exhaustive_limit: usize,
) -> Assignment {
    let scores = score_matrix(gold, pred, mode);
    if gold.len() <= exhaustive_limit && pred.len() <= exhaustive_limit {
        assign_exhaustive(&scores)
    } else {
        assign_optimal(&scores)
    }
}

/// Precision, recall and their harmonic mean; every ratio with a zero
/// denominator is 0.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl Prf {
    pub fn from_counts(correct: f64, predicted: usize, gold: usize) -> Self {
        let precision = if predicted == 0 {
            0.0
        } else {
            correct / predicted as f64
        };
        let recall = if gold == 0 {
            0.0
        } else {
            correct / gold as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Self {
            precision,
            recall,
            f1,
        }
    }
}

/// Predicted quintuples keyed by sentence id.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predictions(pub BTreeMap<String, Vec<Quintuple>>);

impl Predictions {
    /// Gold quintuples of every sentence, as if predicted perfectly.
    pub fn from_gold(corpus: &Corpus) -> Self {
        Self(
            corpus
                .items
                .iter()
                .map(|i| (i.sentence.id.clone(), i.quintuples.clone()))
                .collect(),
        )
    }

    pub fn get(&self, id: &str) -> &[Quintuple] {
        self.0.get(id).map_or(&[], Vec::as_slice)
    }

    pub fn insert(&mut self, id: impl Into<String>, tuples: Vec<Quintuple>) {
        self.0.insert(id.into(), tuples);
    }

    fn check_ids(&self, corpus: &Corpus) -> Result<(), EvalError> {
        let ids: std::collections::HashSet<&str> = corpus
            .items
            .iter()
            .map(|i| i.sentence.id.as_str())
            .collect();
        match self.0.keys().find(|k| !ids.contains(k.as_str())) {
            Some(k) => Err(EvalError::UnknownSentence(k.clone())),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("prediction for unknown sentence id {0:?}")]
    UnknownSentence(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TupleScores {
    pub mode: MatchMode,
    pub gold: usize,
    pub predicted: usize,
    pub correct: f64,
    #[serde(flatten)]
    pub prf: Prf,
}

pub fn evaluate_tuples(
    corpus: &Corpus,
    predictions: &Predictions,
    mode: MatchMode,
) -> Result<TupleScores, EvalError> {
    predictions.check_ids(corpus)?;
    let (mut gold, mut predicted, mut correct) = (0, 0, 0.0);
    for item in &corpus.items {
        let pred = predictions.get(&item.sentence.id);
        gold += item.quintuples.len();
        predicted += pred.len();
        correct += match_sets(&item.quintuples, pred, mode).total_f64();
    }
    Ok(TupleScores {
        mode,
        gold,
        predicted,
        correct,
        prf: Prf::from_counts(correct, predicted, gold),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementScore {
    pub role: Role,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
    #[serde(flatten)]
    pub prf: Prf,
}

/// Per-element exact extraction scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementReport {
    pub per_element: Vec<ElementScore>,
    /// Mean over elements with at least one gold or predicted mention.
    pub macro_f1: f64,
    pub micro: Prf,
}

fn span_counts(tuples: &[Quintuple], role: Role) -> HashMap<&ElementSpan, usize> {
    let mut m = HashMap::new();
    for q in tuples {
        if let Some(s) = q.span(role) {
            *m.entry(s).or_insert(0) += 1;
        }
    }
    m
}

pub fn evaluate_cee(
    corpus: &Corpus,
    predictions: &Predictions,
) -> Result<ElementReport, EvalError> {
    predictions.check_ids(corpus)?;
    let mut per_element = Vec::with_capacity(4);
    for role in Role::ELEMENTS {
        let (mut gold, mut predicted, mut correct) = (0, 0, 0);
        for item in &corpus.items {
            let g = span_counts(&item.quintuples, role);
            let p = span_counts(predictions.get(&item.sentence.id), role);
            gold += g.values().sum::<usize>();
            predicted += p.values().sum::<usize>();
            correct += p
                .iter()
                .map(|(span, n)| (*n).min(g.get(span).copied().unwrap_or(0)))
                .sum::<usize>();
        }
        per_element.push(ElementScore {
            role,
            gold,
            predicted,
            correct,
            prf: Prf::from_counts(correct as f64, predicted, gold),
        });
    }
    let active: Vec<f64> = per_element
        .iter()
        .filter(|e| e.gold + e.predicted > 0)
        .map(|e| e.prf.f1)
        .collect();
    let macro_f1 = if active.is_empty() {
        0.0
    } else {
        active.iter().sum::<f64>() / active.len() as f64
    };
    let (g, p, c) = per_element.iter().fold((0, 0, 0), |(g, p, c), e| {
        (g + e.gold, p + e.predicted, c + e.correct)
    });
    Ok(ElementReport {
        per_element,
        macro_f1,
        micro: Prf::from_counts(c as f64, p, g),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelScore {
    pub label: String,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
    #[serde(flatten)]
    pub prf: Prf,
}

/// Per-label scores; a prediction counts for its label only when it matches
/// a gold quintuple exactly (Q5).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub per_label: Vec<LabelScore>,
    /// Mean over every label of the scheme, absent labels scoring 0.
    pub macro_f1: f64,
    /// Mean over labels that occur in the gold data.
    pub macro_f1_present: f64,
}

pub fn evaluate_cpc(corpus: &Corpus, predictions: &Predictions) -> Result<LabelReport, EvalError> {
    predictions.check_ids(corpus)?;
    let labels = corpus.scheme.labels();
    let mut counts: HashMap<&str, (usize, usize, usize)> =
        labels.iter().map(|l| (l.as_str(), (0, 0, 0))).collect();
    for item in &corpus.items {
        let pred = predictions.get(&item.sentence.id);
        for q in &item.quintuples {
            if let Some(c) = counts.get_mut(q.label.as_str()) {
                c.0 += 1;
            }
        }
        for q in pred {
            if let Some(c) = counts.get_mut(q.label.as_str()) {
                c.1 += 1;
            }
        }
        for (i, _, _) in match_sets(&item.quintuples, pred, MatchMode::EXACT_Q5).pairs {
            if let Some(c) = counts.get_mut(item.quintuples[i].label.as_str()) {
                c.2 += 1;
            }
        }
    }
    let per_label: Vec<LabelScore> = labels
        .iter()
        .map(|l| {
            let (gold, predicted, correct) = counts[l.as_str()];
            LabelScore {
                label: l.clone(),
                gold,
                predicted,
                correct,
                prf: Prf::from_counts(correct as f64, predicted, gold),
            }
        })
        .collect();
    let mean = |xs: Vec<f64>| {
        if xs.is_empty() {
            0.0
        } else {
            xs.iter().sum::<f64>() / xs.len() as f64
        }
    };
    let macro_f1 = mean(per_label.iter().map(|s| s.prf.f1).collect());
    let macro_f1_present = mean(
        per_label
            .iter()
            .filter(|s| s.gold > 0)
            .map(|s| s.prf.f1)
            .collect(),
    );
    Ok(LabelReport {
        per_label,
        macro_f1,
        macro_f1_present,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tuples: Vec<TupleScores>,
    pub elements: ElementReport,
    pub labels: LabelReport,
    pub gold_tuples: usize,
    pub predicted_tuples: usize,
}

pub fn evaluate(
    corpus: &Corpus,
    predictions: &Predictions,
    modes: &[MatchMode],
) -> Result<EvalReport, EvalError> {
    let tuples = modes
        .iter()
        .map(|m| evaluate_tuples(corpus, predictions, *m))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(EvalReport {
        tuples,
        elements: evaluate_cee(corpus, predictions)?,
        labels: evaluate_cpc(corpus, predictions)?,
        gold_tuples: corpus.items.iter().map(|i| i.quintuples.len()).sum(),
        predicted_tuples: predictions.0.values().map(Vec::len).sum(),
    })
}

fn pct(x: f64) -> String {
    format!("{:.2}", x * 100.0)
}

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let width: Vec<usize> = (0..cols)
        .map(|c| {
            rows.iter()
                .map(|r| r[c].len())
                .chain([header[c].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let line = |cells: &[String]| {
        cells
            .iter()
            .enumerate()
            .map(|(c, s)| {
                if c == 0 {
                    format!("{s:<w$}", w = width[c])
                } else {
                    format!("{s:>w$}", w = width[c])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header);
    out.push('\n');
    out.push_str(&"-".repeat(out.len() - 1));
    out.push('\n');
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

impl EvalReport {
    /// Plain-text tables: tuple scores, per-element F1, per-label F1.
    pub fn to_table(&self) -> String {
        let hdr = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let tuple_rows: Vec<Vec<String>> = self
            .tuples
            .iter()
            .map(|t| {
                vec![
                    t.mode.to_string(),
                    pct(t.prf.precision),
                    pct(t.prf.recall),
                    pct(t.prf.f1),
                ]
            })
            .collect();
        let mut s = String::from("Tuple extraction\n");
        s.push_str(&table(&hdr(&["Mode", "P", "R", "F1"]), &tuple_rows));

        s.push_str("\nElement extraction, exact F1\n");
        let mut header = vec![String::new()];
        let mut row = vec!["F1".to_string()];
        for e in &self.elements.per_element {
            header.push(e.role.name().to_string());
            row.push(pct(e.prf.f1));
        }
        header.extend(["macro".to_string(), "micro".to_string()]);
        row.extend([pct(self.elements.macro_f1), pct(self.elements.micro.f1)]);
        s.push_str(&table(&header, &[row]));

        s.push_str("\nComparison label, exact F1\n");
        let mut header = vec![String::new()];
        let mut row = vec!["F1".to_string()];
        for l in &self.labels.per_label {
            header.push(l.label.clone());
            row.push(pct(l.prf.f1));
        }
        header.push("macro".to_string());
        row.push(pct(self.labels.macro_f1));
        s.push_str(&table(&header, &[row]));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{load_corpus, LabelScheme};

    fn span(v: &[usize]) -> Option<ElementSpan> {
        (!v.is_empty()).then(|| ElementSpan::new(v.to_vec()).unwrap())
    }

    fn q(s: &[usize], o: &[usize], a: &[usize], p: &[usize], l: &str) -> Quintuple {
        Quintuple::new(
            span(s),
            span(o),
            span(a),
            span(p),
            LabelScheme::vcom().label(l).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn identical_tuples_score_one() {
        let g = q(&[0], &[4], &[2, 3], &[1], "COM+");
        for m in MatchMode::ALL {
            assert_eq!(tuple_match(&g, &g, m).value(), 1.0, "{m}");
        }
    }

    #[test]
    fn proportional_worked_case() {
        let g = q(&[0], &[5], &[2, 3], &[1], "COM+");
        let p = q(&[0], &[5], &[2], &[1], "COM+");
        let prop = tuple_match(&g, &p, MatchMode::PROPORTIONAL_Q5);
        assert_eq!((prop.matched, prop.total), (5, 6));
        assert_eq!(tuple_match(&g, &p, MatchMode::BINARY_Q5), MatchScore::ONE);
        assert_eq!(tuple_match(&g, &p, MatchMode::EXACT_Q5), MatchScore::ZERO);
        let prop4 = tuple_match(&g, &p, MatchMode::PROPORTIONAL_Q4);
        assert_eq!((prop4.matched, prop4.total), (4, 5));
    }

    #[test]
    fn one_sided_absence_scores_zero() {
        let g = q(&[0], &[5], &[2], &[1], "COM+");
        let p = q(&[0], &[], &[2], &[1], "COM+");
        for m in MatchMode::ALL {
            assert!(tuple_match(&g, &p, m).is_zero(), "{m}");
        }
        // both absent: skipped
        let g2 = q(&[0], &[], &[2], &[1], "COM+");
        assert_eq!(tuple_match(&g2, &p, MatchMode::EXACT_Q5), MatchScore::ONE);
    }

    #[test]
    fn label_only_matters_for_q5() {
        let g = q(&[0], &[], &[], &[1], "COM+");
        let p = q(&[0], &[], &[], &[1], "COM-");
        assert!(tuple_match(&g, &p, MatchMode::EXACT_Q5).is_zero());
        assert_eq!(tuple_match(&g, &p, MatchMode::EXACT_Q4), MatchScore::ONE);
    }

    #[test]
    fn set_matching_basics() {
        let a = q(&[0], &[], &[], &[1], "COM+");
        let b = q(&[3], &[], &[], &[4], "EQL");
        let asg = match_sets(
            &[a.clone(), b.clone()],
            &[b.clone(), a.clone()],
            MatchMode::EXACT_Q5,
        );
        assert_eq!(asg.total, Ratio::from_integer(2));
        let c = q(&[2], &[], &[], &[4], "EQL");
        let asg = match_sets(
            std::slice::from_ref(&a),
            &[c, a.clone()],
            MatchMode::EXACT_Q5,
        );
        assert_eq!(asg.total, Ratio::from_integer(1));
        assert_eq!(asg.pairs, vec![(0, 1, MatchScore::ONE)]);
        assert_eq!(
            match_sets(&[a], &[], MatchMode::EXACT_Q5).total,
            Ratio::from_integer(0)
        );
    }

    #[test]
    fn greedy_trap_is_solved_optimally() {
        // g0 overlaps both predictions, g1 only the first one.
        let g0 = q(&[0, 1], &[], &[], &[5], "COM");
        let g1 = q(&[2], &[], &[], &[5], "COM");
        let p0 = q(&[1, 2], &[], &[], &[5], "COM");
        let p1 = q(&[0], &[], &[], &[5], "COM");
        let (g, p) = (vec![g0, g1], vec![p0, p1]);
        for limit in [0, EXHAUSTIVE_LIMIT] {
            let asg = match_sets_with(&g, &p, MatchMode::BINARY_Q5, limit);
            assert_eq!(asg.total, Ratio::from_integer(2), "limit {limit}");
        }
    }

    #[test]
    fn prf_edge_cases() {
        assert_eq!(Prf::from_counts(0.0, 0, 3), Prf::default());
        let p = Prf::from_counts(1.0, 2, 1);
        assert_eq!((p.precision, p.recall), (0.5, 1.0));
        assert!((p.f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(parse_modes("E,P,B").unwrap().len(), 6);
        assert_eq!(
            parse_modes("e-q5, B-Q4").unwrap(),
            [MatchMode::EXACT_Q5, MatchMode::BINARY_Q4]
        );
        assert!(parse_modes("X-Q5").is_err());
        assert!(parse_modes("").is_err());
        assert_eq!(
            "P-Q4".parse::<MatchMode>().unwrap(),
            MatchMode::PROPORTIONAL_Q4
        );
        for m in MatchMode::ALL {
            assert_eq!(m.to_string().parse::<MatchMode>().unwrap(), m);
        }
    }

    fn corpus() -> Corpus {
        let lines = [
            r#"{"id":"1","text":"A is better than B","quintuples":[{"subject":[0],"object":[4],"predicate":[2],"label":"COM+"}]}"#,
            r#"{"id":"2","text":"C and D are the same","quintuples":[{"subject":[0],"object":[2],"predicate":[5],"label":"EQL"},{"subject":[2],"object":[0],"predicate":[5],"label":"EQL"}]}"#,
            r#"{"id":"3","text":"nice","quintuples":[]}"#,
        ];
        load_corpus(lines.join("\n").as_bytes(), &LabelScheme::vcom()).unwrap()
    }

    #[test]
    fn gold_against_gold_is_perfect() {
        let c = corpus();
        let r = evaluate(&c, &Predictions::from_gold(&c), &MatchMode::ALL).unwrap();
        assert!(r.tuples.iter().all(|t| t.prf.f1 == 1.0));
        assert_eq!(r.elements.macro_f1, 1.0);
        assert_eq!(r.elements.micro.f1, 1.0);
        assert_eq!(r.labels.macro_f1_present, 1.0);
        // six of eight labels never occur
        assert_eq!(r.labels.macro_f1, 2.0 / 8.0);
    }

    #[test]
    fn stripped_objects_zero_object_f1() {
        let c = corpus();
        let mut p = Predictions::from_gold(&c);
        for tuples in p.0.values_mut() {
            for t in tuples {
                t.object = None;
            }
        }
        let r = evaluate_cee(&c, &p).unwrap();
        let obj = r
            .per_element
            .iter()
            .find(|e| e.role == Role::Object)
            .unwrap();
        assert_eq!(obj.prf.f1, 0.0);
        assert!((r.macro_f1 - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn duplicate_spans_lower_precision() {
        let c = corpus();
        let mut p = Predictions::from_gold(&c);
        let dup = p.0["1"][0].clone();
        p.0.get_mut("1").unwrap().push(dup);
        let r = evaluate_cee(&c, &p).unwrap();
        let subj = &r.per_element[0];
        assert_eq!((subj.correct, subj.predicted, subj.gold), (3, 4, 3));
    }

    #[test]
    fn relabeling_hurts_other_labels() {
        let c = corpus();
        let mut p = Predictions::from_gold(&c);
        for tuples in p.0.values_mut() {
            for t in tuples {
                t.label = LabelScheme::vcom().label("COM+").unwrap();
            }
        }
        let r = evaluate_cpc(&c, &p).unwrap();
        let get = |l: &str| r.per_label.iter().find(|s| s.label == l).unwrap().prf;
        assert!((get("COM+").precision - 1.0 / 3.0).abs() < 1e-12);
        assert_eq!(get("EQL").recall, 0.0);
    }

    #[test]
    fn unknown_prediction_id_rejected() {
        let c = corpus();
        let mut p = Predictions::default();
        p.insert("nope", vec![]);
        assert_eq!(
            evaluate_tuples(&c, &p, MatchMode::EXACT_Q5),
            Err(EvalError::UnknownSentence("nope".into()))
        );
    }

    #[test]
    fn missing_sentences_count_against_recall() {
        let c = corpus();
        let mut p = Predictions::default();
        p.insert("1", c.items[0].quintuples.clone());
        let t = evaluate_tuples(&c, &p, MatchMode::EXACT_Q5).unwrap();
        assert_eq!((t.correct, t.predicted, t.gold), (1.0, 1, 3));
        assert_eq!(t.prf.precision, 1.0);
        assert!((t.prf.recall - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn table_lists_every_mode() {
        let c = corpus();
        let r = evaluate(&c, &Predictions::from_gold(&c), &MatchMode::ALL).unwrap();
        let t = r.to_table();
        for m in MatchMode::ALL {
            assert!(t.contains(&m.to_string()));
        }
        assert!(t.contains("COM+"));
    }
}
