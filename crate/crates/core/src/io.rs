//! JSON problem files, quotient dumps and result bundles.

use crate::abstraction::{Abstraction, ProblemSpec, QuotientState, QuotientTS, SpecError};
use crate::geometry::{Cell, Matrix, Polytope, Region, Tolerances};
use crate::logic::{Dfa, Letter};
use crate::lyapunov::{GammaSequence, PolyhedralLF};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("unsupported format_version {0}, expected {FORMAT_VERSION}")]
    Version(u32),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Invalid {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LyapunovFile {
    #[serde(rename = "L")]
    pub l: Vec<Vec<f64>>,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionFile {
    #[serde(rename = "H")]
    pub h_mat: Vec<Vec<f64>>,
    pub h: Vec<f64>,
}

/// On-disk problem description. Modes are indexed in name order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub n: usize,
    pub modes: BTreeMap<String, Vec<Vec<f64>>>,
    pub lyapunov: LyapunovFile,
    #[serde(rename = "gamma_X")]
    pub gamma_x: f64,
    #[serde(rename = "gamma_D")]
    pub gamma_d: f64,
    #[serde(default)]
    pub regions: BTreeMap<String, RegionFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
}

fn matrix(rows: &[Vec<f64>], cols: usize, path: &str) -> Result<Matrix, IoError> {
    if rows.is_empty() {
        return Err(invalid(path, "matrix has no rows"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(invalid(format!("{path}[{i}]"), format!("expected {cols} entries, got {}", r.len())));
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("{path}[{i}][{j}]"), "not a finite number"));
        }
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Ok(Matrix::from_row_slice(rows.len(), cols, &flat))
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Shape checks with key paths, then the semantic checks of
    /// [`ProblemSpec::new`].
    pub fn to_spec(&self, tol: &Tolerances) -> Result<ProblemSpec, IoError> {
        let n = self.n;
        if n == 0 {
            return Err(invalid("n", "must be positive"));
        }
        if self.modes.is_empty() {
            return Err(invalid("modes", "at least one mode is required"));
        }
        let mut modes = Vec::new();
        for (name, rows) in &self.modes {
            let path = format!("modes.{name}");
            if rows.len() != n {
                return Err(invalid(path, format!("expected {n} rows, got {}", rows.len())));
            }
            modes.push((name.clone(), matrix(rows, n, &path)?));
        }
        let l = matrix(&self.lyapunov.l, n, "lyapunov.L")?;
        let lf = PolyhedralLF::new(l, self.lyapunov.rho).map_err(|e| invalid("lyapunov", e.to_string()))?;
        if !(self.gamma_d.is_finite() && self.gamma_x.is_finite()) {
            return Err(invalid("gamma_X", "levels must be finite"));
        }
        let mut regions = Vec::new();
        for (label, r) in &self.regions {
            let path = format!("regions.{label}");
            if r.h_mat.len() != r.h.len() {
                return Err(invalid(path, format!("H has {} rows but h has {}", r.h_mat.len(), r.h.len())));
            }
            let hm = matrix(&r.h_mat, n, &format!("{path}.H"))?;
            let rows = (0..hm.nrows()).map(|i| hm.row(i).iter().copied().collect()).collect();
            let p = Polytope::new(rows, r.h.clone()).map_err(|e| invalid(&path, e.to_string()))?;
            regions.push((label.clone(), p));
        }
        Ok(ProblemSpec::new(
            n,
            modes,
            lf,
            self.gamma_x,
            self.gamma_d,
            regions,
            self.formula.clone(),
            tol,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateRecord {
    pub id: usize,
    pub slice: usize,
    pub obs: Letter,
    pub cells: Vec<Cell>,
}

/// Serialized quotient. Loading and re-serializing reproduces the same bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dump {
    pub format_version: u32,
    pub problem: ProblemFile,
    pub gammas: Vec<f64>,
    pub rho_certified: f64,
    pub initial_states: usize,
    pub d_state: usize,
    pub states: Vec<StateRecord>,
    pub transitions: Vec<[usize; 3]>,
    pub incomplete: Vec<[usize; 2]>,
}

impl Dump {
    pub fn new(problem: &ProblemFile, ab: &Abstraction) -> Self {
        let q = &ab.quotient;
        Dump {
            format_version: FORMAT_VERSION,
            problem: problem.clone(),
            gammas: ab.gammas.gammas.clone(),
            rho_certified: ab.certificate.rho_star,
            initial_states: ab.initial_states,
            d_state: q.d_state,
            states: q
                .states
                .iter()
                .map(|s| StateRecord {
                    id: s.id,
                    slice: s.slice,
                    obs: s.obs,
                    cells: s.region.cells().to_vec(),
                })
                .collect(),
            transitions: q.transitions.iter().map(|&(a, b, c)| [a, b, c]).collect(),
            incomplete: ab.incomplete.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let d: Dump = serde_json::from_str(text)?;
        if d.format_version != FORMAT_VERSION {
            return Err(IoError::Version(d.format_version));
        }
        for (i, s) in d.states.iter().enumerate() {
            if s.id != i {
                return Err(invalid(format!("states[{i}].id"), "ids must be 0..len in order"));
            }
        }
        let ns = d.states.len();
        if d.d_state >= ns {
            return Err(invalid("d_state", "out of range"));
        }
        let ni = d.problem.modes.len();
        for (k, t) in d.transitions.iter().enumerate() {
            if t[0] >= ns || t[2] >= ns || t[1] >= ni {
                return Err(invalid(format!("transitions[{k}]"), "index out of range"));
            }
        }
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn gamma_sequence(&self) -> GammaSequence {
        GammaSequence {
            gammas: self.gammas.clone(),
        }
    }

    pub fn quotient(&self) -> QuotientTS {
        let n = self.problem.n;
        let states = self
            .states
            .iter()
            .map(|s| QuotientState {
                id: s.id,
                region: Region::from_cells_unchecked(n, s.cells.clone()),
                slice: s.slice,
                obs: s.obs,
            })
            .collect();
        let transitions: BTreeSet<(usize, usize, usize)> =
            self.transitions.iter().map(|t| (t[0], t[1], t[2])).collect();
        QuotientTS::new(states, self.problem.modes.keys().cloned().collect(), transitions, self.d_state)
    }
}

/// Region as a list of cells, with the quotient classes it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub states: Vec<usize>,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuotientSummary {
    pub states: usize,
    pub transitions: usize,
    pub states_per_slice: Vec<usize>,
    pub incomplete: usize,
}

impl QuotientSummary {
    pub fn of(q: &QuotientTS) -> Self {
        QuotientSummary {
            states: q.num_states(),
            transitions: q.transitions.len(),
            states_per_slice: q.state_counts_per_slice(),
            incomplete: q.missing_transitions().len(),
        }
    }
}

/// One row of the feedback map on product states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub state: usize,
    pub dfa_state: usize,
    pub input: String,
    pub next_state: usize,
    pub next_dfa_state: usize,
}

/// Output of `synthesize` and `verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub format_version: u32,
    /// `"synthesis"` or `"verification"`.
    pub kind: String,
    pub formula: String,
    pub quotient: QuotientSummary,
    pub gammas: Vec<f64>,
    pub rho_certified: f64,
    pub dfa: Dfa,
    pub product_states: usize,
    pub initial_set: RegionRecord,
    pub strategy: Vec<StrategyEntry>,
    pub timing_ms: BTreeMap<String, f64>,
}

impl ResultBundle {
    pub fn from_json(text: &str) -> Result<Self, IoError> {
        let b: ResultBundle = serde_json::from_str(text)?;
        if b.format_version != FORMAT_VERSION {
            return Err(IoError::Version(b.format_version));
        }
        Ok(b)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    /// Indices of region cells that fail the emptiness test.
    pub fn empty_cells(&self, tol: &Tolerances) -> Vec<usize> {
        self.initial_set
            .cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_empty(tol).unwrap_or(true))
            .map(|(i, _)| i)
            .collect()
    }
}
