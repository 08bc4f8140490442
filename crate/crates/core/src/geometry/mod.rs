//! Polytopes and bounded semi-linear sets in H-representation.
//!
//! A [`Cell`] is a conjunction of closed (`aᵀx ≤ b`) and strict (`aᵀx < b`)
//! linear inequalities, so it is convex but possibly missing some of its
//! facets. A [`Region`] is a finite disjoint union of cells. Every predicate
//! that needs more than point evaluation goes through the simplex in
//! [`crate::lp`].

mod cell;
mod polytope;
mod region;

pub use cell::{BoundingBox, Cell};
pub use polytope::Polytope;
pub use region::Region;

use crate::lp::{self, LpError, LpSolution, Sense};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense real matrix used for mode matrices and the Lyapunov weight matrix.
pub type Matrix = DMatrix<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("linear program failed: {0}")]
    Lp(#[from] LpError),
    #[error("set is unbounded")]
    Unbounded,
    #[error("degenerate input: {0}")]
    Degenerate(String),
}

/// Numerical tolerances shared by all geometric predicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Residual accepted when deciding LP feasibility.
    pub feas: f64,
    /// Minimum slack for a set to count as having interior.
    pub strict: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            feas: 1e-9,
            strict: 1e-8,
        }
    }
}

/// Coefficient tolerance for detecting duplicate rows after normalization.
pub const COEF_TOL: f64 = 1e-10;

/// `aᵀx ≤ b` (closed) or `aᵀx < b` (strict).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub a: Vec<f64>,
    pub b: f64,
    pub strict: bool,
}

impl LinearConstraint {
    pub fn closed(a: Vec<f64>, b: f64) -> Self {
        LinearConstraint {
            a,
            b,
            strict: false,
        }
    }

    pub fn strict(a: Vec<f64>, b: f64) -> Self {
        LinearConstraint { a, b, strict: true }
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.a.iter().zip(x).map(|(ai, xi)| ai * xi).sum()
    }

    /// `b − aᵀx`; positive inside.
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.b - self.eval(x)
    }

    pub fn holds(&self, x: &[f64]) -> bool {
        let v = self.eval(x);
        if self.strict {
            v < self.b
        } else {
            v <= self.b
        }
    }

    /// The complement half-space: `¬(aᵀx ≤ b)` is `−aᵀx < −b` and
    /// `¬(aᵀx < b)` is `−aᵀx ≤ −b`.
    pub fn negated(&self) -> Self {
        LinearConstraint {
            a: self.a.iter().map(|v| -v).collect(),
            b: -self.b,
            strict: !self.strict,
        }
    }

    fn is_zero_row(&self) -> bool {
        self.a.iter().all(|v| *v == 0.0)
    }

    /// Whether a zero row `0 ≤ b` (or `0 < b`) is satisfied everywhere.
    fn trivially_true(&self) -> bool {
        if self.strict {
            0.0 < self.b
        } else {
            0.0 <= self.b
        }
    }

    /// Rescale so that `‖a‖∞ = 1`. Zero rows are returned unchanged.
    pub fn normalized(&self) -> Self {
        let scale = self.a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return self.clone();
        }
        LinearConstraint {
            a: self.a.iter().map(|v| v / scale).collect(),
            b: self.b / scale,
            strict: self.strict,
        }
    }
}

/// Optimize a linear objective over the closed relaxation of `constraints`.
pub fn lp_optimize(
    objective: &[f64],
    constraints: &[LinearConstraint],
    sense: Sense,
    tol: &Tolerances,
) -> Result<LpSolution, GeometryError> {
    let n = objective.len();
    let mut a = Vec::with_capacity(n * constraints.len());
    let mut b = Vec::with_capacity(constraints.len());
    for c in constraints {
        if c.dim() != n {
            return Err(GeometryError::Dimension {
                expected: n,
                got: c.dim(),
            });
        }
        a.extend_from_slice(&c.a);
        b.push(c.b);
    }
    Ok(lp::solve(objective, &a, &b, sense, tol.feas)?)
}

/// `‖Lx‖∞`
pub fn inf_norm_of_product(l: &Matrix, x: &[f64]) -> f64 {
    (0..l.nrows())
        .map(|i| (0..l.ncols()).map(|j| l[(i, j)] * x[j]).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

/// `Ax` for a square or rectangular dense matrix.
pub fn mat_vec(a: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)] * x[j]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LpStatus;

    #[test]
    fn lp_box_extremum() {
        let tol = Tolerances::default();
        let cons = vec![
            LinearConstraint::closed(vec![1.0, 0.0], 1.0),
            LinearConstraint::closed(vec![-1.0, 0.0], 0.0),
            LinearConstraint::closed(vec![0.0, 1.0], 1.0),
            LinearConstraint::closed(vec![0.0, -1.0], 0.0),
        ];
        let s = lp_optimize(&[1.0, 0.0], &cons, Sense::Maximize, &tol).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lp_unbounded_halfline() {
        let tol = Tolerances::default();
        let cons = vec![LinearConstraint::closed(vec![-1.0], 0.0)];
        let s = lp_optimize(&[1.0], &cons, Sense::Maximize, &tol).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn lp_dimension_mismatch() {
        let tol = Tolerances::default();
        let cons = vec![LinearConstraint::closed(vec![1.0], 0.0)];
        assert!(matches!(
            lp_optimize(&[1.0, 0.0], &cons, Sense::Maximize, &tol),
            Err(GeometryError::Dimension { .. })
        ));
    }

    #[test]
    fn negation_flips_strictness() {
        let c = LinearConstraint::closed(vec![1.0, 2.0], 3.0);
        let n = c.negated();
        assert!(n.strict);
        assert_eq!(n.a, vec![-1.0, -2.0]);
        assert_eq!(n.negated(), c);
        let x = [1.0, 1.0];
        assert!(c.holds(&x) && !n.holds(&x));
    }
}
