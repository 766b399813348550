//! Multi-view training data: element-order permutations of comparative
//! sentences plus single-role extraction tasks.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, LabeledSentence, Role};
use crate::template::{render_view, Prompter, View};

/// A permutation of subject, object, aspect and predicate. The label is
/// always serialized last and never takes part in the permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementOrder([Role; 4]);

impl ElementOrder {
    pub fn new(roles: [Role; 4]) -> Result<Self, OrderError> {
        for r in roles {
            if r == Role::Label {
                return Err(OrderError::LabelPermuted);
            }
        }
        let distinct: HashSet<Role> = roles.into_iter().collect();
        if distinct.len() != 4 {
            return Err(OrderError::Repeated);
        }
        Ok(Self(roles))
    }

    /// `(S, O, A, P)`.
    pub fn canonical() -> Self {
        Self(Role::ELEMENTS)
    }

    pub fn roles(&self) -> [Role; 4] {
        self.0
    }

    /// Rotation by `k` places: `(S,O,A,P)` rotated once is `(O,A,P,S)`.
    pub fn rotated(&self, k: usize) -> Self {
        let mut r = self.0;
        r.rotate_left(k % 4);
        Self(r)
    }

    pub fn reversed(&self) -> Self {
        let mut r = self.0;
        r.reverse();
        Self(r)
    }
}

impl fmt::Display for ElementOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in self.0 {
            write!(f, "{}", r.letter())?;
        }
        Ok(())
    }
}

impl FromStr for ElementOrder {
    type Err = OrderError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let roles: Vec<Role> = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, ',' | '(' | ')' | ' '))
            .map(|c| Role::from_letter(c).ok_or(OrderError::BadLetter(c)))
            .collect::<Result<_, _>>()?;
        let roles: [Role; 4] = roles.try_into().map_err(|_| OrderError::Length)?;
        Self::new(roles)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("an element order has exactly four roles")]
    Length,
    #[error("a role appears twice")]
    Repeated,
    #[error("the label is always last and cannot be permuted")]
    LabelPermuted,
    #[error("unknown role letter {0:?}")]
    BadLetter(char),
}

/// All 24 orders, lexicographic by role letter; the first is `(A,O,P,S)`.
pub fn enumerate_orders() -> Vec<ElementOrder> {
    fn permute(rest: &mut Vec<Role>, acc: &mut Vec<Role>, out: &mut Vec<ElementOrder>) {
        if rest.is_empty() {
            out.push(ElementOrder(acc.clone().try_into().expect("four roles")));
            return;
        }
        for i in 0..rest.len() {
            let r = rest.remove(i);
            acc.push(r);
            permute(rest, acc, out);
            acc.pop();
            rest.insert(i, r);
        }
    }
    let mut letters = Role::ELEMENTS.to_vec();
    letters.sort_by_key(|r| r.letter());
    let mut out = Vec::with_capacity(24);
    permute(&mut letters, &mut Vec::new(), &mut out);
    out
}

/// The canonical order, its three rotations, and its reversal.
pub fn default_orders() -> Vec<ElementOrder> {
    let c = ElementOrder::canonical();
    vec![c, c.rotated(1), c.rotated(2), c.rotated(3), c.reversed()]
}

/// Parses a comma-separated order list; `all` and `default` are shorthands.
pub fn parse_orders(spec: &str) -> Result<Vec<ElementOrder>, OrderError> {
    match spec.trim().to_ascii_lowercase().as_str() {
        "all" => Ok(enumerate_orders()),
        "default" => Ok(default_orders()),
        _ => spec.split(',').map(str::parse).collect(),
    }
}

/// One supervised `(input, target)` pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub input: String,
    pub target: String,
    pub sentence_id: String,
    pub view: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AugmentError {
    #[error("no element orders given")]
    NoOrders,
    #[error("element order {0} listed twice")]
    DuplicateOrder(ElementOrder),
    #[error("sentence {0:?} has no quintuples; single-role targets need a comparative sentence")]
    NonComparative(String),
}

/// Prompted example for one view of a sentence.
pub fn example_for(item: &LabeledSentence, view: &View, prompter: &Prompter) -> TrainingExample {
    TrainingExample {
        input: prompter.render(&item.sentence, view),
        target: render_view(&item.quintuples, &item.sentence, view),
        sentence_id: item.sentence.id.clone(),
        view: view.name(),
    }
}

/// Target holding only one role's surface forms, one segment per quintuple.
pub fn single_task_target(item: &LabeledSentence, role: Role) -> Result<String, AugmentError> {
    if !item.is_comparative() {
        return Err(AugmentError::NonComparative(item.sentence.id.clone()));
    }
    Ok(render_view(
        &item.quintuples,
        &item.sentence,
        &View::Single(role),
    ))
}

/// Expands a corpus into training examples.
///
/// A comparative sentence yields one example per order, then (when asked)
/// one per single-role task in S, O, A, P, L order. A non-comparative
/// sentence yields exactly one canonical-order example with target `none`.
pub fn augment_corpus(
    corpus: &Corpus,
    orders: &[ElementOrder],
    include_single_tasks: bool,
    prompter: &Prompter,
) -> Result<Vec<TrainingExample>, AugmentError> {
    if orders.is_empty() {
        return Err(AugmentError::NoOrders);
    }
    let mut seen = HashSet::new();
    for o in orders {
        if !seen.insert(*o) {
            return Err(AugmentError::DuplicateOrder(*o));
        }
    }
    let per_comparative = orders.len() + if include_single_tasks { 5 } else { 0 };
    let mut out = Vec::with_capacity(corpus.len() * per_comparative);
    for item in &corpus.items {
        if !item.is_comparative() {
            out.push(example_for(item, &View::canonical(), prompter));
            continue;
        }
        for o in orders {
            out.push(example_for(item, &View::Quintuple(*o), prompter));
        }
        if include_single_tasks {
            for role in Role::ALL {
                out.push(example_for(item, &View::Single(role), prompter));
            }
        }
    }
    Ok(out)
}

/// Canonical-order examples only, one per sentence (for dev and test data).
pub fn render_examples(corpus: &Corpus, prompter: &Prompter) -> Vec<TrainingExample> {
    corpus
        .items
        .iter()
        .map(|item| example_for(item, &View::canonical(), prompter))
        .collect()
}
