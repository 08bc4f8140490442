//! Syntactically co-safe LTL over single-letter observations.
//!
//! Every observed state carries exactly one of: a region label, the empty
//! observation, or the target `D`. Formulas are kept in negation normal
//! form with negation only on atoms.

mod dfa;
mod parser;
mod semantics;

pub use dfa::{to_dfa, to_dfa_unminimized, Dfa, DfaError};
pub use parser::{parse_formula, ParseError, ParseErrorKind};
pub use semantics::word_satisfies;

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;

/// One observation symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    Region(usize),
    Empty,
    TargetD,
}

/// Region labels in index order; letters are `Region(0..k)`, `Empty`,
/// `TargetD`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new(labels: Vec<String>) -> Self {
        Alphabet { labels }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len() + 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, l: Letter) -> Option<usize> {
        match l {
            Letter::Region(i) if i < self.labels.len() => Some(i),
            Letter::Region(_) => None,
            Letter::Empty => Some(self.labels.len()),
            Letter::TargetD => Some(self.labels.len() + 1),
        }
    }

    pub fn letter(&self, idx: usize) -> Letter {
        let k = self.labels.len();
        match idx {
            i if i < k => Letter::Region(i),
            i if i == k => Letter::Empty,
            _ => Letter::TargetD,
        }
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.len()).map(|i| self.letter(i)).collect()
    }

    pub fn letter_name(&self, l: Letter) -> String {
        match l {
            Letter::Region(i) => self
                .labels
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("#{i}")),
            Letter::Empty => "_".into(),
            Letter::TargetD => "D".into(),
        }
    }
}

/// Atomic proposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prop {
    Region(usize),
    D,
}

impl Prop {
    pub fn holds(self, l: Letter) -> bool {
        match (self, l) {
            (Prop::Region(i), Letter::Region(j)) => i == j,
            (Prop::D, Letter::TargetD) => true,
            _ => false,
        }
    }
}

/// scLTL formula in negation normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Prop),
    NotAtom(Prop),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::False, _) | (_, Formula::False) => Formula::False,
            (Formula::True, x) | (x, Formula::True) => x,
            (a, b) => Formula::And(Box::new(a), Box::new(b)),
        }
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (Formula::True, _) | (_, Formula::True) => Formula::True,
            (Formula::False, x) | (x, Formula::False) => x,
            (a, b) => Formula::Or(Box::new(a), Box::new(b)),
        }
    }

    pub fn next(a: Formula) -> Formula {
        match a {
            Formula::True | Formula::False => a,
            a => Formula::Next(Box::new(a)),
        }
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        match (a, b) {
            (_, Formula::True) => Formula::True,
            (_, Formula::False) => Formula::False,
            (Formula::False, b) => b,
            (Formula::True, b) => Formula::eventually(b),
            (a, b) => Formula::Until(Box::new(a), Box::new(b)),
        }
    }

    pub fn eventually(a: Formula) -> Formula {
        match a {
            Formula::True | Formula::False => a,
            a => Formula::Eventually(Box::new(a)),
        }
    }

    /// Text form using the alphabet's labels; parses back to an equal AST.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        struct R<'a>(&'a Formula, &'a Alphabet);
        impl fmt::Display for R<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let atom = |p: &Prop| match p {
                    Prop::Region(i) => self.1.letter_name(Letter::Region(*i)),
                    Prop::D => "D".into(),
                };
                match self.0 {
                    Formula::True => write!(f, "true"),
                    Formula::False => write!(f, "false"),
                    Formula::Atom(p) => write!(f, "{}", atom(p)),
                    Formula::NotAtom(p) => write!(f, "!{}", atom(p)),
                    Formula::And(a, b) => write!(f, "({} & {})", R(a, self.1), R(b, self.1)),
                    Formula::Or(a, b) => write!(f, "({} | {})", R(a, self.1), R(b, self.1)),
                    Formula::Next(a) => write!(f, "X {}", R(a, self.1)),
                    Formula::Until(a, b) => write!(f, "({} U {})", R(a, self.1), R(b, self.1)),
                    Formula::Eventually(a) => write!(f, "F {}", R(a, self.1)),
                }
            }
        }
        R(self, alphabet).to_string()
    }
}

/// Disjunction of conjunctions of literals. A literal is an atom, a negated
/// atom, or a formula headed by a temporal operator. `{}` is false and
/// `{{}}` is true.
pub(crate) type Clause = BTreeSet<Formula>;
pub(crate) type Dnf = BTreeSet<Clause>;

pub(crate) fn dnf_true() -> Dnf {
    BTreeSet::from([Clause::new()])
}

pub(crate) fn dnf(f: &Formula) -> Dnf {
    match f {
        Formula::True => dnf_true(),
        Formula::False => Dnf::new(),
        Formula::And(a, b) => dnf_and(&dnf(a), &dnf(b)),
        Formula::Or(a, b) => simplify(dnf(a).union(&dnf(b)).cloned().collect()),
        lit => simplify(BTreeSet::from([Clause::from([lit.clone()])])),
    }
}

pub(crate) fn dnf_and(a: &Dnf, b: &Dnf) -> Dnf {
    let mut out = Dnf::new();
    for x in a {
        for y in b {
            out.insert(x.union(y).cloned().collect());
        }
    }
    simplify(out)
}

/// Drop contradictory clauses and absorbed clauses. Two different positive
/// atoms contradict because each letter satisfies at most one atom.
pub(crate) fn simplify(d: Dnf) -> Dnf {
    let mut clauses: Vec<Clause> = d
        .into_iter()
        .filter_map(|c| {
            let pos: Vec<Prop> = c
                .iter()
                .filter_map(|l| match l {
                    Formula::Atom(p) => Some(*p),
                    _ => None,
                })
                .collect();
            if pos.len() > 1 {
                return None;
            }
            if let Some(p) = pos.first() {
                if c.contains(&Formula::NotAtom(*p)) {
                    return None;
                }
                // !q is implied by p for every q ≠ p
                let c: Clause = c
                    .into_iter()
                    .filter(|l| !matches!(l, Formula::NotAtom(_)))
                    .collect();
                return Some(c);
            }
            Some(c)
        })
        .collect();
    clauses.sort_by_key(BTreeSet::len);
    let mut kept: Vec<Clause> = Vec::new();
    for c in clauses {
        if !kept.iter().any(|k| k.is_subset(&c)) {
            kept.push(c);
        }
    }
    kept.into_iter().collect()
}

fn progress_literal(lit: &Formula, l: Letter) -> Dnf {
    match lit {
        Formula::Atom(p) => {
            if p.holds(l) {
                dnf_true()
            } else {
                Dnf::new()
            }
        }
        Formula::NotAtom(p) => {
            if p.holds(l) {
                Dnf::new()
            } else {
                dnf_true()
            }
        }
        Formula::Next(g) => dnf(g),
        Formula::Until(g, h) => {
            let stay = dnf_and(&progress_dnf(&dnf(g), l), &dnf(lit));
            simplify(progress_dnf(&dnf(h), l).union(&stay).cloned().collect())
        }
        Formula::Eventually(g) => {
            simplify(progress_dnf(&dnf(g), l).union(&dnf(lit)).cloned().collect())
        }
        other => progress_dnf(&dnf(other), l),
    }
}

pub(crate) fn progress_dnf(d: &Dnf, l: Letter) -> Dnf {
    let mut out = Dnf::new();
    for clause in d {
        let mut acc = dnf_true();
        for lit in clause {
            acc = dnf_and(&acc, &progress_literal(lit, l));
            if acc.is_empty() {
                break;
            }
        }
        out.extend(acc);
    }
    simplify(out)
}

pub(crate) fn dnf_to_formula(d: &Dnf) -> Formula {
    d.iter()
        .map(|c| c.iter().cloned().fold(Formula::True, Formula::and))
        .fold(Formula::False, Formula::or)
}

/// Obligation left after reading `l`: `l·w ⊨ f` iff `w ⊨ progress(f, l)`.
pub fn progress(f: &Formula, l: Letter) -> Formula {
    dnf_to_formula(&progress_dnf(&dnf(f), l))
}
