use super::{
    lp_optimize, GeometryError, LinearConstraint, Matrix, Region, Tolerances, COEF_TOL,
};
use crate::lp::{self, LpStatus, Sense};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Convex semi-linear set: the conjunction of its constraints.
///
/// Constraints are kept normalized (`‖a‖∞ = 1`) and free of duplicate
/// hyperplanes. An empty constraint list is the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    dim: usize,
    constraints: Vec<LinearConstraint>,
}

/// Axis-aligned box `lo ≤ x ≤ hi`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn overlaps(&self, other: &BoundingBox, slack: f64) -> bool {
        self.lo
            .iter()
            .zip(&self.hi)
            .zip(other.lo.iter().zip(&other.hi))
            .all(|((l1, h1), (l2, h2))| *l1 <= h2 + slack && *l2 <= h1 + slack)
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    /// Upper bound of `aᵀx` over the box.
    pub fn max_dot(&self, a: &[f64]) -> f64 {
        a.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(ai, (l, h))| (ai * l).max(ai * h))
            .sum()
    }

    /// Interval-arithmetic enclosure of `{Ax | x ∈ box}`.
    pub fn linear_image(&self, a: &Matrix) -> BoundingBox {
        let n = a.nrows();
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        for i in 0..n {
            for j in 0..a.ncols() {
                let v = a[(i, j)];
                let (p, q) = (v * self.lo[j], v * self.hi[j]);
                lo[i] += p.min(q);
                hi[i] += p.max(q);
            }
        }
        BoundingBox { lo, hi }
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| *v >= l - slack && *v <= h + slack)
    }
}

impl Cell {
    /// The whole space ℝⁿ.
    pub fn whole(dim: usize) -> Self {
        Cell {
            dim,
            constraints: Vec::new(),
        }
    }

    pub fn new(dim: usize, constraints: Vec<LinearConstraint>) -> Result<Self, GeometryError> {
        let mut cell = Cell::whole(dim);
        for c in constraints {
            cell.push(c)?;
        }
        Ok(cell)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn has_strict(&self) -> bool {
        self.constraints.iter().any(|c| c.strict)
    }

    /// Add a constraint, normalizing it and merging it with an existing row
    /// on the same hyperplane direction.
    pub fn push(&mut self, c: LinearConstraint) -> Result<(), GeometryError> {
        if c.dim() != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                got: c.dim(),
            });
        }
        let c = c.normalized();
        if c.is_zero_row() {
            if !c.trivially_true() && !self.constraints.iter().any(|r| r.is_zero_row()) {
                // canonical unsatisfiable row 0 ≤ −1
                self.constraints
                    .push(LinearConstraint::closed(vec![0.0; self.dim], -1.0));
            }
            return Ok(());
        }
        for existing in self.constraints.iter_mut() {
            let same_dir = existing
                .a
                .iter()
                .zip(&c.a)
                .all(|(x, y)| (x - y).abs() <= COEF_TOL);
            if !same_dir {
                continue;
            }
            let eps = COEF_TOL * existing.b.abs().max(1.0);
            if (existing.b - c.b).abs() <= eps {
                existing.strict |= c.strict;
            } else if c.b < existing.b {
                *existing = c;
            }
            return Ok(());
        }
        self.constraints.push(c);
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.constraints.iter().all(|c| c.holds(x))
    }

    /// Smallest `b − aᵀx` over all rows (∞ for the whole space).
    pub fn min_slack(&self, x: &[f64]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.slack(x))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn intersect(&self, other: &Cell) -> Result<Cell, GeometryError> {
        if other.dim != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = self.clone();
        for c in &other.constraints {
            out.push(c.clone())?;
        }
        Ok(out)
    }

    /// `{x | Ax ∈ self}`: each row `(a, b)` becomes `(Aᵀa, b)`.
    pub fn preimage(&self, a: &Matrix) -> Result<Cell, GeometryError> {
        if a.nrows() != self.dim || a.ncols() != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                got: if a.nrows() != self.dim { a.nrows() } else { a.ncols() },
            });
        }
        let mut out = Cell::whole(self.dim);
        for c in &self.constraints {
            let row: Vec<f64> = (0..self.dim)
                .map(|j| (0..self.dim).map(|i| c.a[i] * a[(i, j)]).sum())
                .collect();
            out.push(LinearConstraint {
                a: row,
                b: c.b,
                strict: c.strict,
            })?;
        }
        Ok(out)
    }

    /// Row-major LP data for the closed relaxation, optionally with an extra
    /// slack column `t` appended (coefficient 1 on the rows selected by
    /// `with_slack`).
    fn lp_rows(&self, with_slack: Option<&dyn Fn(&LinearConstraint) -> bool>) -> (Vec<f64>, Vec<f64>) {
        let width = self.dim + usize::from(with_slack.is_some());
        let mut a = Vec::with_capacity(width * (self.constraints.len() + 2));
        let mut b = Vec::with_capacity(self.constraints.len() + 2);
        for c in &self.constraints {
            a.extend_from_slice(&c.a);
            if let Some(sel) = with_slack {
                a.push(if sel(c) { 1.0 } else { 0.0 });
            }
            b.push(c.b);
        }
        (a, b)
    }

    /// Maximize a slack `t ∈ [0, cap]` shared by the selected rows.
    /// Returns `None` when the closed relaxation is infeasible.
    fn max_slack(
        &self,
        select: &dyn Fn(&LinearConstraint) -> bool,
        cap: f64,
        tol: &Tolerances,
    ) -> Result<Option<(Vec<f64>, f64)>, GeometryError> {
        let n = self.dim;
        let (mut a, mut b) = self.lp_rows(Some(select));
        // t ≤ cap, −t ≤ 0
        a.extend(std::iter::repeat_n(0.0, n));
        a.push(1.0);
        b.push(cap);
        a.extend(std::iter::repeat_n(0.0, n));
        a.push(-1.0);
        b.push(0.0);
        let mut obj = vec![0.0; n + 1];
        obj[n] = 1.0;
        let sol = lp::solve(&obj, &a, &b, Sense::Maximize, tol.feas)?;
        match sol.status {
            LpStatus::Infeasible => Ok(None),
            LpStatus::Unbounded => Err(GeometryError::Unbounded),
            LpStatus::Optimal => {
                let t = sol.point[n];
                let mut x = sol.point;
                x.truncate(n);
                Ok(Some((x, t)))
            }
        }
    }

    /// True iff the cell contains no point.
    ///
    /// The closed relaxation is tested first; when it is feasible and the
    /// cell has strict rows, the strict rows must admit a common slack above
    /// `tol.strict`. Cells thinner than that are reported empty.
    pub fn is_empty(&self, tol: &Tolerances) -> Result<bool, GeometryError> {
        if self.constraints.is_empty() {
            return Ok(false);
        }
        if !self.has_strict() {
            let (a, b) = self.lp_rows(None);
            let obj = vec![0.0; self.dim];
            let sol = lp::solve(&obj, &a, &b, Sense::Maximize, tol.feas)?;
            return Ok(sol.status == LpStatus::Infeasible);
        }
        match self.max_slack(&|c: &LinearConstraint| c.strict, 1.0, tol)? {
            None => Ok(true),
            Some((_, t)) => Ok(t <= tol.strict),
        }
    }

    /// A point maximizing the common slack of all rows, with that slack.
    /// `None` if the closed relaxation is infeasible.
    pub fn interior_point(&self, tol: &Tolerances) -> Result<Option<(Vec<f64>, f64)>, GeometryError> {
        if self.constraints.is_empty() {
            return Ok(Some((vec![0.0; self.dim], f64::INFINITY)));
        }
        self.max_slack(&|_| true, 1e6, tol)
    }

    /// Full-dimensionality test: some point has slack above `tol.strict` in
    /// every row, closed ones included.
    pub fn has_interior(&self, tol: &Tolerances) -> Result<bool, GeometryError> {
        if self.constraints.is_empty() {
            return Ok(true);
        }
        Ok(matches!(
            self.max_slack(&|_| true, 1.0, tol)?,
            Some((_, t)) if t > tol.strict
        ))
    }

    /// `self ∖ other` as the standard disjoint decomposition: piece `i` keeps
    /// the first `i` rows of `other` and violates row `i`. Empty pieces are
    /// dropped.
    pub fn difference(&self, other: &Cell, tol: &Tolerances) -> Result<Region, GeometryError> {
        if other.dim != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut cells = Vec::new();
        let mut prefix = self.clone();
        for g in &other.constraints {
            let mut piece = prefix.clone();
            piece.push(g.negated())?;
            if !piece.is_empty(tol)? {
                cells.push(piece);
            }
            prefix.push(g.clone())?;
        }
        Ok(Region::from_cells_unchecked(self.dim, cells))
    }

    /// Drop rows that do not change the closed relaxation. Strict rows are
    /// only dropped when the rest of the cell stays strictly inside them.
    pub fn without_redundant(&self, tol: &Tolerances) -> Result<Cell, GeometryError> {
        let bbox = self.bounding_box(tol)?;
        let mut kept: Vec<LinearConstraint> = self.constraints.clone();
        let margin = 10.0 * tol.feas;
        let mut i = 0;
        while i < kept.len() {
            let c = kept[i].clone();
            let limit = if c.strict { c.b - margin } else { c.b + margin };
            if let Some(bb) = &bbox {
                if bb.max_dot(&c.a) < c.b - margin {
                    kept.remove(i);
                    continue;
                }
            }
            let others: Vec<LinearConstraint> = kept
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, r)| r.clone())
                .collect();
            let sol = lp_optimize(&c.a, &others, Sense::Maximize, tol)?;
            if sol.status == LpStatus::Optimal && sol.value <= limit {
                kept.remove(i);
            } else {
                i += 1;
            }
        }
        Ok(Cell {
            dim: self.dim,
            constraints: kept,
        })
    }

    /// Coordinate-wise extent of the closed relaxation. `None` when empty,
    /// [`GeometryError::Unbounded`] when some coordinate is unbounded.
    pub fn bounding_box(&self, tol: &Tolerances) -> Result<Option<BoundingBox>, GeometryError> {
        let n = self.dim;
        let mut lo = vec![0.0; n];
        let mut hi = vec![0.0; n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            for (sense, slot) in [(Sense::Maximize, &mut hi), (Sense::Minimize, &mut lo)] {
                let sol = lp_optimize(&e, &self.constraints, sense, tol)?;
                match sol.status {
                    LpStatus::Infeasible => return Ok(None),
                    LpStatus::Unbounded => return Err(GeometryError::Unbounded),
                    LpStatus::Optimal => slot[j] = sol.value,
                }
            }
            e[j] = 0.0;
        }
        Ok(Some(BoundingBox { lo, hi }))
    }

    pub fn is_bounded(&self, tol: &Tolerances) -> Result<bool, GeometryError> {
        match self.bounding_box(tol) {
            Ok(_) => Ok(true),
            Err(GeometryError::Unbounded) => Ok(false),
            Err(e) => Err(e),
        }
    }

    /// Draw `count` points by hit-and-run started at the interior point.
    /// Returns an empty vector when the cell has no interior.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        count: usize,
        tol: &Tolerances,
    ) -> Result<Vec<Vec<f64>>, GeometryError> {
        let Some((mut x, t)) = self.interior_point(tol)? else {
            return Ok(Vec::new());
        };
        if t <= tol.strict {
            return Ok(Vec::new());
        }
        let n = self.dim;
        let burn_in = 10 * n + 10;
        let thin = 3;
        let mut out = Vec::with_capacity(count);
        let mut step = 0usize;
        let mut dir = vec![0.0; n];
        while out.len() < count {
            for d in dir.iter_mut() {
                *d = StandardNormal.sample(rng);
            }
            let (mut lo, mut hi) = (-1e6f64, 1e6f64);
            for c in &self.constraints {
                let ad: f64 = c.a.iter().zip(&dir).map(|(p, q)| p * q).sum();
                let s = c.slack(&x);
                if ad > 1e-15 {
                    hi = hi.min(s / ad);
                } else if ad < -1e-15 {
                    lo = lo.max(s / ad);
                }
            }
            if hi > lo {
                let lambda = rng.gen_range(lo..hi);
                let cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + lambda * di).collect();
                if self.contains(&cand) {
                    x = cand;
                }
            }
            step += 1;
            if step > burn_in && step.is_multiple_of(thin) {
                out.push(x.clone());
            }
        }
        Ok(out)
    }
}
