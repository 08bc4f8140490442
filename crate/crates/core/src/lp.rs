//! Dense two-phase simplex for the small linear programs behind every
//! geometric predicate.
//!
//! Problems have the shape `opt cᵀx` subject to `Ax ≤ b` with `x` free.
//! Free variables are split as `x = x⁺ − x⁻`, rows with a negative right-hand
//! side receive an artificial variable, and phase 1 drives the artificials to
//! zero. Pricing is Dantzig's rule; after a run of degenerate pivots the solver
//! switches to Bland's rule for the rest of the solve so it cannot cycle.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Unbounded,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; `±∞` when unbounded and NaN when infeasible.
    pub value: f64,
    /// Optimal point (empty unless `status == Optimal`).
    pub point: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("simplex did not terminate within {0} pivots")]
    IterationLimit(usize),
    #[error("non-finite coefficient in linear program")]
    NonFinite,
}

const PIVOT_TOL: f64 = 1e-11;
const COST_TOL: f64 = 1e-11;
const DEGENERATE_SWITCH: usize = 20;

/// Solve `opt cᵀx s.t. rows[i]·x ≤ rhs[i]`, `x ∈ ℝⁿ` free.
///
/// `a` is row-major with `rhs.len()` rows of length `c.len()`. `feas_tol`
/// bounds the residual infeasibility accepted at the end of phase 1.
pub fn solve(
    c: &[f64],
    a: &[f64],
    rhs: &[f64],
    sense: Sense,
    feas_tol: f64,
) -> Result<LpSolution, LpError> {
    let n = c.len();
    let m = rhs.len();
    if a.len() != n * m {
        return Err(LpError::Dimension {
            expected: n * m,
            got: a.len(),
        });
    }
    if c.iter().chain(a).chain(rhs).any(|v| !v.is_finite()) {
        return Err(LpError::NonFinite);
    }
    if m == 0 {
        return Ok(if c.iter().all(|&v| v == 0.0) {
            LpSolution {
                status: LpStatus::Optimal,
                value: 0.0,
                point: vec![0.0; n],
            }
        } else {
            unbounded(sense)
        });
    }
    let mut tab = Tableau::new(n, a, rhs);
    let scale = 1.0 + rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    if tab.n_art > 0 {
        tab.load_phase_one();
        match tab.run(false)? {
            Outcome::Optimal => {}
            // phase 1 is bounded below by zero
            Outcome::Unbounded => unreachable!("phase 1 objective is bounded"),
        }
        if tab.objective_value() < -feas_tol * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                value: f64::NAN,
                point: Vec::new(),
            });
        }
        tab.drive_out_artificials();
    }

    let signed: Vec<f64> = match sense {
        Sense::Maximize => c.to_vec(),
        Sense::Minimize => c.iter().map(|v| -v).collect(),
    };
    tab.load_phase_two(&signed);
    match tab.run(true)? {
        Outcome::Unbounded => Ok(unbounded(sense)),
        Outcome::Optimal => {
            let point = tab.point();
            let value = c.iter().zip(&point).map(|(ci, xi)| ci * xi).sum();
            Ok(LpSolution {
                status: LpStatus::Optimal,
                value,
                point,
            })
        }
    }
}

fn unbounded(sense: Sense) -> LpSolution {
    LpSolution {
        status: LpStatus::Unbounded,
        value: match sense {
            Sense::Maximize => f64::INFINITY,
            Sense::Minimize => f64::NEG_INFINITY,
        },
        point: Vec::new(),
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

/// Row 0 holds the negated reduced costs with the objective value in the
/// right-hand-side slot; rows `1..=m` hold the constraint rows.
struct Tableau {
    n: usize,
    m: usize,
    n_art: usize,
    width: usize,
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn new(n: usize, a: &[f64], rhs: &[f64]) -> Self {
        let m = rhs.len();
        let n_art = rhs.iter().filter(|&&v| v < 0.0).count();
        let cols = 2 * n + m + n_art;
        let width = cols + 1;
        let mut data = vec![0.0; (m + 1) * width];
        let mut basis = Vec::with_capacity(m);
        let mut art = 0;
        for i in 0..m {
            let row = &mut data[(i + 1) * width..(i + 2) * width];
            let sign = if rhs[i] < 0.0 { -1.0 } else { 1.0 };
            for j in 0..n {
                let v = a[i * n + j];
                row[j] = sign * v;
                row[n + j] = -sign * v;
            }
            row[2 * n + i] = sign;
            row[cols] = sign * rhs[i];
            if sign < 0.0 {
                let col = 2 * n + m + art;
                row[col] = 1.0;
                basis.push(col);
                art += 1;
            } else {
                basis.push(2 * n + i);
            }
        }
        Tableau {
            n,
            m,
            n_art,
            width,
            data,
            basis,
        }
    }

    fn cols(&self) -> usize {
        self.width - 1
    }

    fn is_artificial(&self, col: usize) -> bool {
        col >= 2 * self.n + self.m && col < self.cols()
    }

    fn objective_value(&self) -> f64 {
        self.data[self.cols()]
    }

    fn load_phase_one(&mut self) {
        let w = self.width;
        for j in 0..w {
            self.data[j] = 0.0;
        }
        for j in 2 * self.n + self.m..self.cols() {
            self.data[j] = 1.0;
        }
        self.canonicalize_cost_row();
    }

    fn load_phase_two(&mut self, c: &[f64]) {
        let w = self.width;
        for j in 0..w {
            self.data[j] = 0.0;
        }
        for (j, &cj) in c.iter().enumerate() {
            self.data[j] = -cj;
            self.data[self.n + j] = cj;
        }
        self.canonicalize_cost_row();
    }

    fn canonicalize_cost_row(&mut self) {
        let w = self.width;
        for i in 0..self.m {
            let col = self.basis[i];
            let f = self.data[col];
            if f != 0.0 {
                let (head, tail) = self.data.split_at_mut(w);
                let row = &tail[i * w..(i + 1) * w];
                for (h, r) in head.iter_mut().zip(row) {
                    *h -= f * r;
                }
            }
        }
    }

    fn run(&mut self, phase_two: bool) -> Result<Outcome, LpError> {
        let cols = self.cols();
        let limit = 200 * (self.m + cols) + 1000;
        let mut degenerate_run = 0usize;
        let mut bland = false;
        for _ in 0..limit {
            let entering = {
                let cost = &self.data[..cols];
                let mut best: Option<usize> = None;
                let mut best_val = -COST_TOL;
                for (j, &v) in cost.iter().enumerate() {
                    if phase_two && self.is_artificial(j) {
                        continue;
                    }
                    if v < best_val {
                        best = Some(j);
                        if bland {
                            break;
                        }
                        best_val = v;
                    }
                }
                best
            };
            let Some(e) = entering else {
                return Ok(Outcome::Optimal);
            };
            let w = self.width;
            let mut leave: Option<usize> = None;
            let mut best_ratio = f64::INFINITY;
            for i in 0..self.m {
                let coef = self.data[(i + 1) * w + e];
                if coef > PIVOT_TOL {
                    let ratio = self.data[(i + 1) * w + cols] / coef;
                    let better = match leave {
                        None => true,
                        Some(l) => {
                            ratio < best_ratio - 1e-14
                                || (ratio <= best_ratio + 1e-14 && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some(i);
                        best_ratio = ratio.min(best_ratio);
                    }
                }
            }
            let Some(r) = leave else {
                return Ok(Outcome::Unbounded);
            };
            if best_ratio <= 1e-14 {
                degenerate_run += 1;
                if degenerate_run >= DEGENERATE_SWITCH {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, e);
        }
        Err(LpError::IterationLimit(limit))
    }

    fn pivot(&mut self, r: usize, e: usize) {
        let w = self.width;
        let prow = (r + 1) * w;
        let p = self.data[prow + e];
        for j in 0..w {
            self.data[prow + j] /= p;
        }
        self.data[prow + e] = 1.0;
        for i in 0..=self.m {
            if i == r + 1 {
                continue;
            }
            let f = self.data[i * w + e];
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                let v = self.data[prow + j];
                if v != 0.0 {
                    self.data[i * w + j] -= f * v;
                }
            }
            self.data[i * w + e] = 0.0;
        }
        // clamp round-off on the right-hand side so ratio tests stay sane
        for i in 1..=self.m {
            let idx = i * w + w - 1;
            if self.data[idx] < 0.0 && self.data[idx] > -1e-13 {
                self.data[idx] = 0.0;
            }
        }
        self.basis[r] = e;
    }

    fn drive_out_artificials(&mut self) {
        let w = self.width;
        let structural = 2 * self.n + self.m;
        for i in 0..self.m {
            if !self.is_artificial(self.basis[i]) {
                continue;
            }
            let row = (i + 1) * w;
            let mut best: Option<usize> = None;
            let mut best_abs = 1e-9;
            for j in 0..structural {
                let v = self.data[row + j].abs();
                if v > best_abs {
                    best_abs = v;
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                self.pivot(i, j);
            }
        }
    }

    fn point(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.cols()];
        let w = self.width;
        for (i, &col) in self.basis.iter().enumerate() {
            y[col] = self.data[(i + 1) * w + w - 1];
        }
        (0..self.n).map(|j| y[j] - y[self.n + j]).collect()
    }
}
