//! Product of a quotient with a specification automaton, reachability
//! synthesis, and worst-case verification.
//!
//! A product step from `(q, s)` under `σ` goes to `(q′, δ(s, h(q)))` for
//! every `σ`-successor `q′`, so the automaton reads the label of the state
//! being left.

use crate::abstraction::QuotientTS;
use crate::geometry::Region;
use crate::logic::{Dfa, Letter};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("observation {0:?} of state {1} is not in the automaton alphabet")]
    AlphabetMismatch(Letter, usize),
    #[error("no class contains the point")]
    NotInDomain,
    #[error("class {0} is not in the satisfying set")]
    NotWinning(usize),
}

/// Reachable part of `T × A`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductAutomaton {
    /// `(quotient state, automaton state)` per product id.
    pub states: Vec<(usize, usize)>,
    pub index: HashMap<(usize, usize), usize>,
    /// `succ[p][input]`, sorted and deduplicated.
    pub succ: Vec<Vec<Vec<usize>>>,
    pub accepting: Vec<bool>,
    /// Product id of `(q, init)` for every quotient state `q`.
    pub initial: Vec<usize>,
    pub num_inputs: usize,
}

impl ProductAutomaton {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

pub fn build_product(t: &QuotientTS, d: &Dfa) -> Result<ProductAutomaton, AnalysisError> {
    let letter_idx: Vec<usize> = t
        .states
        .iter()
        .map(|s| d.alphabet.index(s.obs).ok_or(AnalysisError::AlphabetMismatch(s.obs, s.id)))
        .collect::<Result<_, _>>()?;
    let mut pa = ProductAutomaton {
        states: Vec::new(),
        index: HashMap::new(),
        succ: Vec::new(),
        accepting: Vec::new(),
        initial: Vec::new(),
        num_inputs: t.num_inputs(),
    };
    let intern = |pa: &mut ProductAutomaton, key: (usize, usize)| -> usize {
        if let Some(&i) = pa.index.get(&key) {
            return i;
        }
        let i = pa.states.len();
        pa.states.push(key);
        pa.index.insert(key, i);
        pa.accepting.push(d.is_accepting(key.1));
        i
    };
    for q in 0..t.num_states() {
        let i = intern(&mut pa, (q, d.init));
        pa.initial.push(i);
    }
    let mut at = 0;
    while at < pa.states.len() {
        let (q, s) = pa.states[at];
        let s2 = d.delta[s][letter_idx[q]];
        let mut row = Vec::with_capacity(t.num_inputs());
        for sigma in 0..t.num_inputs() {
            let mut v: Vec<usize> = t
                .successors(q, sigma)
                .iter()
                .map(|&q2| intern(&mut pa, (q2, s2)))
                .collect();
            v.sort_unstable();
            v.dedup();
            row.push(v);
        }
        pa.succ.push(row);
        at += 1;
    }
    Ok(pa)
}

/// Winning region of the reachability game toward the accepting states,
/// with a distance-decreasing choice.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    /// Steps to acceptance; `None` outside the winning set.
    pub dist: Vec<Option<usize>>,
    /// `(input, successor)` for winning non-accepting product states.
    pub choice: Vec<Option<(usize, usize)>>,
}

impl Strategy {
    pub fn is_winning(&self, p: usize) -> bool {
        self.dist[p].is_some()
    }
}

fn predecessors(pa: &ProductAutomaton) -> Vec<Vec<(usize, usize)>> {
    let mut pred = vec![Vec::new(); pa.len()];
    for (p, row) in pa.succ.iter().enumerate() {
        for (sigma, v) in row.iter().enumerate() {
            for &t in v {
                pred[t].push((p, sigma));
            }
        }
    }
    pred
}

/// Backward breadth-first search from the accepting states. An input is
/// usable once all of its successors are winning, so a nondeterministic
/// input never counts as control. Among inputs realizing the distance the
/// smallest input wins, then the smallest successor.
pub fn synthesize(pa: &ProductAutomaton) -> Strategy {
    let n = pa.len();
    let pred = predecessors(pa);
    let mut pending: Vec<Vec<usize>> = pa.succ.iter().map(|r| r.iter().map(Vec::len).collect()).collect();
    let mut dist: Vec<Option<usize>> = pa.accepting.iter().map(|&a| a.then_some(0)).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&p| pa.accepting[p]).collect();
    while let Some(t) = queue.pop_front() {
        let d = dist[t].expect("queued states are winning");
        for &(p, sigma) in &pred[t] {
            pending[p][sigma] -= 1;
            if pending[p][sigma] == 0 && dist[p].is_none() {
                dist[p] = Some(d + 1);
                queue.push_back(p);
            }
        }
    }
    let choice = (0..n)
        .map(|p| {
            let d = dist[p]?;
            if d == 0 {
                return None;
            }
            (0..pa.num_inputs).find_map(|sigma| {
                let v = &pa.succ[p][sigma];
                let ok = !v.is_empty() && v.iter().all(|t| matches!(dist[*t], Some(e) if e < d));
                if !ok {
                    return None;
                }
                let best = v
                    .iter()
                    .copied()
                    .filter(|t| dist[*t] == Some(d - 1))
                    .min_by_key(|t| pa.states[*t].0)?;
                Some((sigma, best))
            })
        })
        .collect();
    Strategy { dist, choice }
}

/// Classes whose initial product state satisfies `winning`, with the union
/// of their regions.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSet {
    pub states: Vec<usize>,
    pub region: Region,
}

impl InitialSet {
    pub fn contains_state(&self, q: usize) -> bool {
        self.states.binary_search(&q).is_ok()
    }
}

fn initial_set(pa: &ProductAutomaton, t: &QuotientTS, winning: impl Fn(usize) -> bool) -> InitialSet {
    let states: Vec<usize> = (0..t.num_states()).filter(|&q| winning(pa.initial[q])).collect();
    let dim = t.states.first().map_or(0, |s| s.region.dim());
    let cells = states
        .iter()
        .flat_map(|&q| t.states[q].region.cells().iter().cloned())
        .collect();
    InitialSet {
        states,
        region: Region::from_cells_unchecked(dim, cells),
    }
}

/// Union of the classes from which some switching satisfies the formula.
pub fn satisfying_initial_set(strategy: &Strategy, pa: &ProductAutomaton, t: &QuotientTS) -> InitialSet {
    initial_set(pa, t, |p| strategy.is_winning(p))
}

/// Inputs read off the strategy from `(q0, init)` until acceptance.
pub fn switching_sequence_from_state(q0: usize, strategy: &Strategy, pa: &ProductAutomaton) -> Result<Vec<usize>, AnalysisError> {
    let mut p = pa.initial[q0];
    if !strategy.is_winning(p) {
        return Err(AnalysisError::NotWinning(q0));
    }
    let mut out = Vec::new();
    while let Some((sigma, next)) = strategy.choice[p] {
        out.push(sigma);
        p = next;
    }
    Ok(out)
}

/// Open-loop switching sequence for a concrete initial state.
pub fn switching_sequence(x: &[f64], strategy: &Strategy, pa: &ProductAutomaton, t: &QuotientTS) -> Result<Vec<usize>, AnalysisError> {
    let q0 = t
        .states
        .iter()
        .find(|s| s.region.contains_point(x))
        .map(|s| s.id)
        .ok_or(AnalysisError::NotInDomain)?;
    switching_sequence_from_state(q0, strategy, pa)
}

/// Worst-case steps to acceptance; `None` is infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    pub j: Vec<Option<usize>>,
}

/// Least fixed point of `J(s) = 1 + max_{s→s′} J(s′)` with `J = 0` on
/// accepting states, by a backward worklist: a state is settled once all of
/// its successors are. States without successors keep `J = ∞`.
pub fn value_table(pa: &ProductAutomaton) -> ValueTable {
    let n = pa.len();
    let mut all_succ: Vec<Vec<usize>> = pa
        .succ
        .iter()
        .map(|row| {
            let mut v: Vec<usize> = row.iter().flatten().copied().collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let mut pred = vec![Vec::new(); n];
    for (p, v) in all_succ.iter().enumerate() {
        for &t in v {
            pred[t].push(p);
        }
    }
    // a state missing some input can never be shown safe under every switching
    let mut pending: Vec<usize> = all_succ
        .iter()
        .zip(&pa.succ)
        .map(|(v, row)| if row.iter().any(Vec::is_empty) { usize::MAX } else { v.len() })
        .collect();
    all_succ.clear();
    let mut j: Vec<Option<usize>> = pa.accepting.iter().map(|&a| a.then_some(0)).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&p| pa.accepting[p]).collect();
    while let Some(t) = queue.pop_front() {
        let v = j[t].expect("queued states are settled");
        for &p in &pred[t] {
            pending[p] -= 1;
            if pending[p] == 0 && j[p].is_none() {
                j[p] = Some(v + 1);
                queue.push_back(p);
            }
        }
    }
    ValueTable { j }
}

/// Value table of the product and the classes from which every switching
/// satisfies the formula. `pa` should be built from the arbitrary-switching
/// view, though any input set is treated adversarially.
pub fn verify_arbitrary(pa: &ProductAutomaton, t: &QuotientTS) -> (ValueTable, InitialSet) {
    let vt = value_table(pa);
    let set = initial_set(pa, t, |p| vt.j[p].is_some());
    (vt, set)
}
