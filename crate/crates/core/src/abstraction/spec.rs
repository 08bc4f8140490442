use crate::geometry::{Cell, GeometryError, Matrix, Polytope, Tolerances};
use crate::logic::{Alphabet, Letter};
use crate::lyapunov::{
    certify_contraction, gamma_sequence, sublevel_polytope, Certificate, GammaSequence,
    LyapunovError, PolyhedralLF,
};
use thiserror::Error;

/// Names a region label may not take.
pub const RESERVED_LABELS: [&str; 7] = ["D", "X", "F", "U", "G", "true", "false"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("no modes given")]
    NoModes,
    #[error("mode {name} is {rows}x{cols}, expected {n}x{n}")]
    ModeShape {
        name: String,
        rows: usize,
        cols: usize,
        n: usize,
    },
    #[error("L has {got} columns, expected {n}")]
    LyapunovShape { got: usize, n: usize },
    #[error("region label {0:?} is reserved or not an identifier")]
    BadLabel(String),
    #[error("region {label}: {reason}")]
    BadRegion { label: String, reason: String },
    #[error("region {label} is not contained in X")]
    RegionOutsideX { label: String },
    #[error("region {label} intersects D")]
    RegionMeetsD { label: String },
    #[error("regions {0} and {1} intersect")]
    RegionsOverlap(String, String),
    #[error("declared rate {rho} is not certified: rho* = {rho_star}")]
    Uncertified { rho: f64, rho_star: f64 },
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Validated switched system, Lyapunov function, domain and regions.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n: usize,
    pub mode_names: Vec<String>,
    pub modes: Vec<Matrix>,
    pub lf: PolyhedralLF,
    pub gamma_x: f64,
    pub gamma_d: f64,
    pub region_labels: Vec<String>,
    pub regions: Vec<Polytope>,
    pub formula: Option<String>,
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ProblemSpec {
    /// Check shapes, levels, and the region assumptions: every region is a
    /// bounded nonempty polytope inside `X`, disjoint from `D` and from the
    /// other regions. Contraction is checked separately by [`Self::certify`].
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        n: usize,
        modes: Vec<(String, Matrix)>,
        lf: PolyhedralLF,
        gamma_x: f64,
        gamma_d: f64,
        regions: Vec<(String, Polytope)>,
        formula: Option<String>,
        tol: &Tolerances,
    ) -> Result<Self, SpecError> {
        if modes.is_empty() {
            return Err(SpecError::NoModes);
        }
        for (name, a) in &modes {
            if a.nrows() != n || a.ncols() != n {
                return Err(SpecError::ModeShape {
                    name: name.clone(),
                    rows: a.nrows(),
                    cols: a.ncols(),
                    n,
                });
            }
        }
        if lf.dim() != n {
            return Err(SpecError::LyapunovShape { got: lf.dim(), n });
        }
        gamma_sequence(gamma_d, gamma_x, lf.rho())?;
        let x_cell = sublevel_polytope(lf.l(), gamma_x)?.to_cell()?;
        let d_cell = sublevel_polytope(lf.l(), gamma_d)?.to_cell()?;
        let mut cells: Vec<Cell> = Vec::new();
        for (label, p) in &regions {
            if !is_identifier(label) || RESERVED_LABELS.contains(&label.as_str()) {
                return Err(SpecError::BadLabel(label.clone()));
            }
            let bad = |reason: &str| SpecError::BadRegion {
                label: label.clone(),
                reason: reason.into(),
            };
            if p.dim() != n {
                return Err(bad("dimension does not match n"));
            }
            let cell = p.to_cell()?;
            if !cell.is_bounded(tol)? {
                return Err(bad("unbounded"));
            }
            if cell.is_empty(tol)? {
                return Err(bad("empty"));
            }
            for c in x_cell.constraints() {
                let sol = crate::geometry::lp_optimize(
                    &c.a,
                    cell.constraints(),
                    crate::lp::Sense::Maximize,
                    tol,
                )?;
                if sol.value > c.b + tol.feas * c.b.abs().max(1.0) {
                    return Err(SpecError::RegionOutsideX {
                        label: label.clone(),
                    });
                }
            }
            if !cell.intersect(&d_cell)?.is_empty(tol)? {
                return Err(SpecError::RegionMeetsD {
                    label: label.clone(),
                });
            }
            for (j, other) in cells.iter().enumerate() {
                if !cell.intersect(other)?.is_empty(tol)? {
                    return Err(SpecError::RegionsOverlap(regions[j].0.clone(), label.clone()));
                }
            }
            cells.push(cell);
        }
        let (mode_names, modes) = modes.into_iter().unzip();
        let (region_labels, regions) = regions.into_iter().unzip();
        Ok(ProblemSpec {
            n,
            mode_names,
            modes,
            lf,
            gamma_x,
            gamma_d,
            region_labels,
            regions,
            formula,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.region_labels.clone())
    }

    pub fn gammas(&self) -> GammaSequence {
        gamma_sequence(self.gamma_d, self.gamma_x, self.lf.rho()).expect("validated at construction")
    }

    pub fn certify(&self, tol: &Tolerances) -> Result<Certificate, SpecError> {
        Ok(certify_contraction(self.lf.l(), &self.modes, tol)?)
    }

    /// Certify and fail unless `ρ* ≤ ρ + rho_tol`.
    pub fn require_certified(&self, rho_tol: f64, tol: &Tolerances) -> Result<Certificate, SpecError> {
        let c = self.certify(tol)?;
        if !c.certifies(self.lf.rho(), rho_tol) {
            return Err(SpecError::Uncertified {
                rho: self.lf.rho(),
                rho_star: c.rho_star,
            });
        }
        Ok(c)
    }

    pub fn x_polytope(&self) -> Polytope {
        sublevel_polytope(self.lf.l(), self.gamma_x).expect("positive level")
    }

    pub fn d_polytope(&self) -> Polytope {
        sublevel_polytope(self.lf.l(), self.gamma_d).expect("positive level")
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("point with V(x) = {value} lies outside X (gamma_X = {gamma_x})")]
pub struct OutsideDomain {
    pub value: f64,
    pub gamma_x: f64,
}

/// Observation of a concrete state: `D` first, then the containing region,
/// else the empty observation.
pub fn observation_of(x: &[f64], spec: &ProblemSpec) -> Result<Letter, OutsideDomain> {
    let v = spec.lf.value(x);
    if v > spec.gamma_x {
        return Err(OutsideDomain {
            value: v,
            gamma_x: spec.gamma_x,
        });
    }
    if v <= spec.gamma_d {
        return Ok(Letter::TargetD);
    }
    Ok(spec
        .regions
        .iter()
        .position(|r| r.contains(x))
        .map_or(Letter::Empty, Letter::Region))
}
