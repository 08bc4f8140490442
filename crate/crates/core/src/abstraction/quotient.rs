use crate::geometry::{Region, Tolerances};
use crate::logic::Letter;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One equivalence class of the quotient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientState {
    pub id: usize,
    pub region: Region,
    pub slice: usize,
    pub obs: Letter,
}

/// Finite transition system over partition classes.
#[derive(Debug, Clone, PartialEq)]
pub struct QuotientTS {
    pub states: Vec<QuotientState>,
    /// Input names; the input index is the position here.
    pub sigma: Vec<String>,
    /// `(source, input, target)`, sorted.
    pub transitions: BTreeSet<(usize, usize, usize)>,
    pub d_state: usize,
    succ: Vec<Vec<Vec<usize>>>,
    by_slice: Vec<Vec<usize>>,
}

impl QuotientTS {
    pub fn new(
        states: Vec<QuotientState>,
        sigma: Vec<String>,
        transitions: BTreeSet<(usize, usize, usize)>,
        d_state: usize,
    ) -> Self {
        let mut succ = vec![vec![Vec::new(); sigma.len()]; states.len()];
        for &(q, s, t) in &transitions {
            succ[q][s].push(t);
        }
        let slices = states.iter().map(|s| s.slice + 1).max().unwrap_or(0);
        let mut by_slice = vec![Vec::new(); slices];
        for s in &states {
            by_slice[s.slice].push(s.id);
        }
        QuotientTS {
            states,
            sigma,
            transitions,
            d_state,
            succ,
            by_slice,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.sigma.len()
    }

    pub fn successors(&self, q: usize, sigma: usize) -> &[usize] {
        &self.succ[q][sigma]
    }

    pub fn states_in_slice(&self, slice: usize) -> &[usize] {
        self.by_slice.get(slice).map_or(&[], Vec::as_slice)
    }

    pub fn num_slices(&self) -> usize {
        self.by_slice.len()
    }

    /// State whose class contains `x`, searching only the given slice.
    pub fn locate_in_slice(&self, x: &[f64], slice: usize) -> Option<usize> {
        self.states_in_slice(slice)
            .iter()
            .copied()
            .find(|&q| self.states[q].region.contains_point(x))
    }

    /// `(state, input)` pairs without a successor.
    pub fn missing_transitions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for q in 0..self.num_states() {
            for s in 0..self.num_inputs() {
                if self.succ[q][s].is_empty() {
                    out.push((q, s));
                }
            }
        }
        out
    }

    /// Every transition leaving slice `i ≥ 1` enters a slice `j < i`.
    pub fn slice_wiring_violations(&self) -> Vec<(usize, usize, usize)> {
        self.transitions
            .iter()
            .copied()
            .filter(|&(q, _, t)| {
                let (i, j) = (self.states[q].slice, self.states[t].slice);
                i >= 1 && j >= i
            })
            .collect()
    }

    /// At most one successor per `(state, input)`.
    pub fn is_deterministic(&self) -> bool {
        self.succ.iter().all(|row| row.iter().all(|v| v.len() <= 1))
    }

    pub fn state_counts_per_slice(&self) -> Vec<usize> {
        self.by_slice.iter().map(Vec::len).collect()
    }

    /// Every class still has interior.
    pub fn regions_nonempty(&self, tol: &Tolerances) -> bool {
        self.states.iter().all(|s| {
            !s.region.is_empty()
                && s.region
                    .cells()
                    .iter()
                    .all(|c| c.is_empty(tol).map(|e| !e).unwrap_or(false))
        })
    }
}

/// Single-input view: the input labels are erased and the result may be
/// nondeterministic. A class lacking a successor for some input keeps no
/// transitions, so no run through it can be certified.
pub fn arbitrary_switching_view(t: &QuotientTS) -> QuotientTS {
    let transitions = t
        .transitions
        .iter()
        .filter(|&&(q, _, _)| t.succ[q].iter().all(|v| !v.is_empty()))
        .map(|&(q, _, r)| (q, 0, r))
        .collect();
    QuotientTS::new(t.states.clone(), vec!["eps".into()], transitions, t.d_state)
}
