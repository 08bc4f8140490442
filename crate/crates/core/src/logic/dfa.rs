//! Good-prefix automata by formula progression, minimized with Moore's
//! partition refinement.

use super::{dnf, progress_dnf, Alphabet, Dnf, Formula, Letter};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DfaError {
    #[error("letter {0:?} is not in the alphabet")]
    UnknownLetter(Letter),
}

/// Complete deterministic automaton over an [`Alphabet`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dfa {
    pub alphabet: Alphabet,
    /// `delta[s][letter index]`
    pub delta: Vec<Vec<usize>>,
    pub init: usize,
    pub accepting: Vec<bool>,
}

impl Dfa {
    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn is_accepting(&self, s: usize) -> bool {
        self.accepting[s]
    }

    pub fn step(&self, s: usize, l: Letter) -> Result<usize, DfaError> {
        let i = self.alphabet.index(l).ok_or(DfaError::UnknownLetter(l))?;
        Ok(self.delta[s][i])
    }

    /// State reached after reading `prefix` from the initial state.
    pub fn run(&self, prefix: &[Letter]) -> Result<usize, DfaError> {
        prefix.iter().try_fold(self.init, |s, l| self.step(s, *l))
    }

    /// Whether some prefix of `prefix · tail^ω` is accepted.
    pub fn accepts_lasso(&self, prefix: &[Letter], tail: Letter) -> Result<bool, DfaError> {
        let mut s = self.init;
        if self.accepting[s] {
            return Ok(true);
        }
        for l in prefix {
            s = self.step(s, *l)?;
            if self.accepting[s] {
                return Ok(true);
            }
        }
        self.accepts_eventually(s, tail)
    }

    /// Following `tail` from `s` reaches an accepting state within
    /// `|states|` steps.
    pub fn accepts_eventually(&self, s: usize, tail: Letter) -> Result<bool, DfaError> {
        let mut s = s;
        for _ in 0..=self.num_states() {
            if self.accepting[s] {
                return Ok(true);
            }
            s = self.step(s, tail)?;
        }
        Ok(false)
    }

    /// Moore minimization; states are renumbered in breadth-first order from
    /// the initial state, which becomes state 0. Unreachable states vanish.
    pub fn minimized(&self) -> Dfa {
        let k = self.alphabet.len();
        let mut class: Vec<usize> = self.accepting.iter().map(|a| usize::from(*a)).collect();
        let mut count = 0;
        loop {
            let mut ids: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
            let next: Vec<usize> = (0..self.num_states())
                .map(|s| {
                    let sig = (class[s], self.delta[s].iter().map(|t| class[*t]).collect());
                    let n = ids.len();
                    *ids.entry(sig).or_insert(n)
                })
                .collect();
            let new_count = ids.len();
            class = next;
            if new_count == count {
                break;
            }
            count = new_count;
        }
        let mut order = vec![usize::MAX; count];
        let mut reps = Vec::new();
        let mut queue = VecDeque::from([self.init]);
        order[class[self.init]] = 0;
        reps.push(self.init);
        while let Some(s) = queue.pop_front() {
            for t in &self.delta[s] {
                let c = class[*t];
                if order[c] == usize::MAX {
                    order[c] = reps.len();
                    reps.push(*t);
                    queue.push_back(*t);
                }
            }
        }
        let delta = reps
            .iter()
            .map(|r| (0..k).map(|i| order[class[self.delta[*r][i]]]).collect())
            .collect();
        let accepting = reps.iter().map(|r| self.accepting[*r]).collect();
        Dfa {
            alphabet: self.alphabet.clone(),
            delta,
            init: 0,
            accepting,
        }
    }
}

/// Progression automaton before minimization: one state per distinct
/// normalized obligation reachable from `f`.
pub fn to_dfa_unminimized(f: &Formula, alphabet: &Alphabet) -> Dfa {
    let letters = alphabet.letters();
    let start = dnf(f);
    let mut index: HashMap<Dnf, usize> = HashMap::new();
    let mut states: Vec<Dnf> = Vec::new();
    let mut delta: Vec<Vec<usize>> = Vec::new();
    index.insert(start.clone(), 0);
    states.push(start);
    let mut at = 0;
    while at < states.len() {
        let cur = states[at].clone();
        let row = letters
            .iter()
            .map(|l| {
                let nxt = progress_dnf(&cur, *l);
                if let Some(&i) = index.get(&nxt) {
                    i
                } else {
                    let i = states.len();
                    index.insert(nxt.clone(), i);
                    states.push(nxt);
                    i
                }
            })
            .collect();
        delta.push(row);
        at += 1;
    }
    let accepting = states.iter().map(|d| d.iter().any(|c| c.is_empty())).collect();
    Dfa {
        alphabet: alphabet.clone(),
        delta,
        init: 0,
        accepting,
    }
}

/// Minimal complete DFA accepting exactly the good prefixes of `f`.
pub fn to_dfa(f: &Formula, alphabet: &Alphabet) -> Dfa {
    to_dfa_unminimized(f, alphabet).minimized()
}

#[cfg(test)]
mod tests {
    use super::super::{parse_formula, word_satisfies};
    use super::*;

    fn alpha() -> Alphabet {
        Alphabet::new(vec!["R1".into(), "R2".into(), "R3".into()])
    }

    fn dfa(s: &str, a: &Alphabet) -> Dfa {
        to_dfa(&parse_formula(s, a).unwrap(), a)
    }

    #[test]
    fn eventually_target_has_two_states() {
        let a = Alphabet::new(vec![]);
        let d = dfa("F D", &a);
        assert_eq!(d.num_states(), 2);
        assert!(d.accepts_eventually(d.init, Letter::TargetD).unwrap());
        assert!(!d.accepts_eventually(d.init, Letter::Empty).unwrap());
    }

    #[test]
    fn run_empty_prefix_is_init() {
        let d = dfa("F R1", &alpha());
        assert_eq!(d.run(&[]).unwrap(), d.init);
        assert!(!d.accepts_eventually(d.init, Letter::TargetD).unwrap());
    }

    #[test]
    fn until_accepts_at_target() {
        let d = dfa("R1 U D", &alpha());
        let w = [Letter::Region(0), Letter::Region(0), Letter::TargetD];
        assert!(!d.is_accepting(d.run(&w[..2]).unwrap()));
        assert!(d.is_accepting(d.run(&w).unwrap()));
    }

    #[test]
    fn unknown_letter_rejected() {
        let d = dfa("F D", &alpha());
        assert_eq!(d.step(0, Letter::Region(7)), Err(DfaError::UnknownLetter(Letter::Region(7))));
    }

    #[test]
    fn total_and_minimal_agree_on_short_words() {
        let a = alpha();
        let f = parse_formula("(!R2 U D) & F R1 & ((R3 -> X !R1) U D)", &a).unwrap();
        let raw = to_dfa_unminimized(&f, &a);
        let min = raw.minimized();
        assert!(min.num_states() <= raw.num_states());
        for d in [&raw, &min] {
            assert!(d.delta.iter().all(|r| r.len() == a.len() && r.iter().all(|t| *t < d.num_states())));
        }
        let letters = a.letters();
        for w in 0..letters.len().pow(4) {
            let word: Vec<Letter> = (0..4).map(|i| letters[(w / letters.len().pow(i)) % letters.len()]).collect();
            let (prefix, tail) = (&word[..3], word[3]);
            let oracle = word_satisfies(&f, prefix, tail);
            assert_eq!(raw.accepts_lasso(prefix, tail).unwrap(), oracle);
            assert_eq!(min.accepts_lasso(prefix, tail).unwrap(), oracle);
        }
    }
}
