//! Infinity-norm polyhedral Lyapunov functions `V(x) = ‖Lx‖∞`.
//!
//! Certification solves one LP per mode, row and sign. The Γ-sequence and
//! slices partition the annulus between the target set and the domain into
//! shells that every mode maps strictly inward.

use crate::geometry::{
    inf_norm_of_product, lp_optimize, mat_vec, Cell, GeometryError, LinearConstraint, Matrix,
    Polytope, Region, Tolerances,
};
use crate::lp::{LpStatus, Sense};
use rand::Rng;
use thiserror::Error;

/// Rank tolerance for `L`.
pub const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LyapunovError {
    #[error("L is {rows}x{cols}; need at least as many rows as columns")]
    Shape { rows: usize, cols: usize },
    #[error("L has rank {rank} < {n}")]
    RankDeficient { rank: usize, n: usize },
    #[error("mode {index} is {rows}x{cols}, expected {n}x{n}")]
    ModeShape {
        index: usize,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("contraction rate {0} is not in (0, 1)")]
    Rho(f64),
    #[error("need 0 < gamma_D < gamma_X, got gamma_D = {gamma_d}, gamma_X = {gamma_x}")]
    Gamma { gamma_d: f64, gamma_x: f64 },
    #[error("sublevel value must be positive, got {0}")]
    Level(f64),
    #[error("contraction LP unexpectedly {0:?}")]
    Lp(LpStatus),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// `V(x) = ‖Lx‖∞` together with a declared contraction rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralLF {
    l: Matrix,
    rho: f64,
}

impl PolyhedralLF {
    pub fn new(l: Matrix, rho: f64) -> Result<Self, LyapunovError> {
        check_weight_matrix(&l)?;
        if !(rho > 0.0 && rho < 1.0) {
            return Err(LyapunovError::Rho(rho));
        }
        Ok(PolyhedralLF { l, rho })
    }

    pub fn l(&self) -> &Matrix {
        &self.l
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.l.ncols()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        inf_norm_of_product(&self.l, x)
    }
}

/// Shape and full column rank of `L`.
pub fn check_weight_matrix(l: &Matrix) -> Result<(), LyapunovError> {
    let (rows, cols) = l.shape();
    if rows < cols || cols == 0 {
        return Err(LyapunovError::Shape { rows, cols });
    }
    let rank = l.clone().svd(false, false).rank(RANK_TOL);
    if rank < cols {
        return Err(LyapunovError::RankDeficient { rank, n: cols });
    }
    Ok(())
}

/// Outcome of certifying a set of modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Tight rate per mode: `max ‖L A x‖∞` over `‖Lx‖∞ ≤ 1`.
    pub per_mode: Vec<f64>,
    /// Maximum over modes.
    pub rho_star: f64,
    /// Maximizer for the worst mode, on the unit sublevel set.
    pub witness: Vec<f64>,
}

impl Certificate {
    /// Whether the declared rate is certified up to `slack`.
    pub fn certifies(&self, rho: f64, slack: f64) -> bool {
        self.rho_star <= rho + slack
    }
}

/// Tight contraction rate of each mode with respect to `‖L·‖∞`.
pub fn certify_contraction(
    l: &Matrix,
    modes: &[Matrix],
    tol: &Tolerances,
) -> Result<Certificate, LyapunovError> {
    check_weight_matrix(l)?;
    let n = l.ncols();
    let unit = unit_ball_constraints(l);
    let mut per_mode = Vec::with_capacity(modes.len());
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    for (index, a) in modes.iter().enumerate() {
        if a.nrows() != n || a.ncols() != n {
            return Err(LyapunovError::ModeShape {
                index,
                rows: a.nrows(),
                cols: a.ncols(),
                n,
            });
        }
        let la = l * a;
        let mut mode_best = 0.0f64;
        for j in 0..la.nrows() {
            let row: Vec<f64> = la.row(j).iter().copied().collect();
            let sol = lp_optimize(&row, &unit, Sense::Maximize, tol)?;
            if sol.status != LpStatus::Optimal {
                return Err(LyapunovError::Lp(sol.status));
            }
            // max |row·x| over a symmetric set equals max row·x
            let neg: Vec<f64> = row.iter().map(|v| -v).collect();
            let sol2 = lp_optimize(&neg, &unit, Sense::Maximize, tol)?;
            if sol2.status != LpStatus::Optimal {
                return Err(LyapunovError::Lp(sol2.status));
            }
            for s in [sol, sol2] {
                if s.value > mode_best {
                    mode_best = s.value;
                }
                if s.value > best.0 {
                    best = (s.value, s.point);
                }
            }
        }
        per_mode.push(mode_best);
    }
    let rho_star = per_mode.iter().copied().fold(0.0, f64::max);
    Ok(Certificate {
        per_mode,
        rho_star,
        witness: best.1,
    })
}

fn unit_ball_constraints(l: &Matrix) -> Vec<LinearConstraint> {
    sublevel_rows(l, 1.0)
}

fn sublevel_rows(l: &Matrix, gamma: f64) -> Vec<LinearConstraint> {
    let mut out = Vec::with_capacity(2 * l.nrows());
    for j in 0..l.nrows() {
        let row: Vec<f64> = l.row(j).iter().copied().collect();
        out.push(LinearConstraint::closed(row.clone(), gamma));
        out.push(LinearConstraint::closed(row.iter().map(|v| -v).collect(), gamma));
    }
    out
}

/// Levels `Γ₀ < Γ₁ < … < Γ_N` with `Γ₀ = Γ_D` and `Γ_N = Γ_X`.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaSequence {
    pub gammas: Vec<f64>,
}

impl GammaSequence {
    /// Number of shells outside `D`.
    pub fn n(&self) -> usize {
        self.gammas.len() - 1
    }

    pub fn gamma_d(&self) -> f64 {
        self.gammas[0]
    }

    pub fn gamma_x(&self) -> f64 {
        *self.gammas.last().expect("nonempty")
    }

    /// Index of the slice containing a point with Lyapunov value `v`, or
    /// `None` outside `X`.
    pub fn slice_of_value(&self, v: f64) -> Option<usize> {
        self.gammas.iter().position(|g| v <= *g)
    }
}

/// Geometric levels `Γ_{i+1} = Γ_i/ρ`, stopping at the first index whose
/// level reaches `Γ_X`; that last level is replaced by `Γ_X`.
pub fn gamma_sequence(gamma_d: f64, gamma_x: f64, rho: f64) -> Result<GammaSequence, LyapunovError> {
    if !(gamma_d > 0.0 && gamma_x > gamma_d && gamma_x.is_finite()) {
        return Err(LyapunovError::Gamma { gamma_d, gamma_x });
    }
    if !(rho > 0.0 && rho < 1.0) {
        return Err(LyapunovError::Rho(rho));
    }
    let level = |k: usize| (0..k).fold(gamma_d, |g, _| g / rho);
    let mut n = ((gamma_x / gamma_d).ln() / (1.0 / rho).ln()).ceil().max(1.0) as usize;
    while level(n) < gamma_x {
        n += 1;
    }
    while n > 1 && level(n - 1) >= gamma_x {
        n -= 1;
    }
    let mut gammas: Vec<f64> = (0..n).map(level).collect();
    gammas.push(gamma_x);
    Ok(GammaSequence { gammas })
}

/// `{x | ‖Lx‖∞ ≤ Γ}` as `2l` rows.
pub fn sublevel_polytope(l: &Matrix, gamma: f64) -> Result<Polytope, LyapunovError> {
    if gamma.is_nan() || gamma <= 0.0 {
        return Err(LyapunovError::Level(gamma));
    }
    let rows = sublevel_rows(l, gamma);
    Ok(Polytope::new(
        rows.iter().map(|c| c.a.clone()).collect(),
        rows.iter().map(|c| c.b).collect(),
    )?)
}

/// `S₀ = P_{Γ₀}` and `S_i = P_{Γ_i} ∖ P_{Γ_{i−1}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceSet {
    pub slices: Vec<Region>,
}

pub fn build_slices(
    l: &Matrix,
    gs: &GammaSequence,
    tol: &Tolerances,
) -> Result<SliceSet, LyapunovError> {
    let cells: Vec<Cell> = gs
        .gammas
        .iter()
        .map(|g| sublevel_polytope(l, *g).and_then(|p| Ok(p.to_cell()?)))
        .collect::<Result<_, _>>()?;
    let mut slices = vec![Region::from_cell(cells[0].clone(), tol)?];
    for i in 1..cells.len() {
        slices.push(cells[i].difference(&cells[i - 1], tol)?);
    }
    Ok(SliceSet { slices })
}

/// Counterexamples found by [`slice_transition_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct SliceCheck {
    pub checked: usize,
    pub violations: Vec<SliceViolation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceViolation {
    pub x: Vec<f64>,
    pub mode: usize,
    pub from: usize,
    pub to: Option<usize>,
}

impl SliceCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample each slice outside `D` and confirm every mode moves the sample to
/// a strictly lower slice. Samples are spread over the slice's cells.
pub fn slice_transition_check<R: Rng + ?Sized>(
    modes: &[Matrix],
    l: &Matrix,
    gs: &GammaSequence,
    samples_per_slice: usize,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<SliceCheck, LyapunovError> {
    let slices = build_slices(l, gs, tol)?;
    let mut out = SliceCheck {
        checked: 0,
        violations: Vec::new(),
    };
    for (i, slice) in slices.slices.iter().enumerate().skip(1) {
        let k = slice.cells().len().max(1);
        let per_cell = samples_per_slice.div_ceil(k);
        for cell in slice.cells() {
            for x in cell.sample(rng, per_cell, tol)? {
                for (mode, a) in modes.iter().enumerate() {
                    out.checked += 1;
                    let to = gs.slice_of_value(inf_norm_of_product(l, &mat_vec(a, &x)));
                    if !matches!(to, Some(j) if j < i) {
                        out.violations.push(SliceViolation {
                            x: x.clone(),
                            mode,
                            from: i,
                            to,
                        });
                    }
                }
            }
        }
    }
    Ok(out)
}
