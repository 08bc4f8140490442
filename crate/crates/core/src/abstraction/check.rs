//! Sampling validators for a finished quotient.

use super::quotient::QuotientTS;
use super::spec::{observation_of, ProblemSpec};
use crate::geometry::{mat_vec, GeometryError, Tolerances};
use crate::lyapunov::GammaSequence;
use rand::Rng;

/// State of `x`, looking first in the slice given by its Lyapunov value and
/// then in the neighbouring slices.
pub fn locate(t: &QuotientTS, spec: &ProblemSpec, gs: &GammaSequence, x: &[f64]) -> Option<usize> {
    let v = spec.lf.value(x);
    let k = gs.slice_of_value(v)?;
    let lo = k.saturating_sub(1);
    let hi = (k + 1).min(t.num_slices().saturating_sub(1));
    std::iter::once(k)
        .chain(lo..=hi)
        .find_map(|s| t.locate_in_slice(x, s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BisimViolation {
    pub state: usize,
    pub sigma: usize,
    pub x: Vec<f64>,
    pub expected: Option<usize>,
    pub found: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BisimReport {
    pub checked: usize,
    /// Samples within the boundary band, not judged.
    pub skipped: usize,
    pub violations: Vec<BisimViolation>,
}

/// For every class, input and `samples` points of the class: the class of
/// `A_σx` (or `D` for points of `D`) must be the unique `σ`-successor.
/// Points within `band` of a cell facet, of a level set, or of a facet of
/// the expected successor are skipped.
pub fn check_bisimulation<R: Rng + ?Sized>(
    t: &QuotientTS,
    spec: &ProblemSpec,
    gs: &GammaSequence,
    samples: usize,
    band: f64,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<BisimReport, GeometryError> {
    let mut rep = BisimReport::default();
    let near_level = |v: f64| gs.gammas.iter().any(|g| (v - g).abs() < band);
    for st in &t.states {
        let cells = st.region.cells();
        let per_cell = samples.div_ceil(cells.len().max(1));
        for cell in cells {
            for x in cell.sample(rng, per_cell, tol)? {
                if cell.min_slack(&x) < band {
                    rep.skipped += t.num_inputs();
                    continue;
                }
                for sigma in 0..t.num_inputs() {
                    let succ = t.successors(st.id, sigma);
                    let expected = if succ.len() == 1 { Some(succ[0]) } else { None };
                    let found = if st.id == t.d_state {
                        Some(t.d_state)
                    } else {
                        let y = mat_vec(&spec.modes[sigma], &x);
                        if near_level(spec.lf.value(&y)) {
                            rep.skipped += 1;
                            continue;
                        }
                        if let Some(e) = expected {
                            let near = t.states[e]
                                .region
                                .cells()
                                .iter()
                                .any(|c| c.min_slack(&y).abs() < band);
                            if near {
                                rep.skipped += 1;
                                continue;
                            }
                        }
                        locate(t, spec, gs, &y)
                    };
                    rep.checked += 1;
                    if expected.is_none() || found != expected {
                        rep.violations.push(BisimViolation {
                            state: st.id,
                            sigma,
                            x: x.clone(),
                            expected,
                            found,
                        });
                    }
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PartitionReport {
    pub checked: usize,
    /// Points in no class.
    pub uncovered: usize,
    /// Points in more than one class.
    pub overlapping: usize,
    /// Points whose class observation differs from [`observation_of`].
    pub mislabeled: usize,
}

/// Uniform samples of `X` (rejection from its bounding box): each must lie
/// in exactly one class, carrying that point's observation.
pub fn check_partition<R: Rng + ?Sized>(
    t: &QuotientTS,
    spec: &ProblemSpec,
    samples: usize,
    rng: &mut R,
    tol: &Tolerances,
) -> Result<PartitionReport, GeometryError> {
    let x_cell = spec.x_polytope().to_cell()?;
    let bb = x_cell.bounding_box(tol)?.ok_or(GeometryError::Unbounded)?;
    let mut rep = PartitionReport::default();
    while rep.checked < samples {
        let x: Vec<f64> = bb.lo.iter().zip(&bb.hi).map(|(l, h)| rng.gen_range(*l..*h)).collect();
        if !x_cell.contains(&x) {
            continue;
        }
        rep.checked += 1;
        let owners: Vec<usize> = t
            .states
            .iter()
            .filter(|s| s.region.contains_point(&x))
            .map(|s| s.id)
            .collect();
        match owners.len() {
            0 => rep.uncovered += 1,
            1 => {
                let obs = observation_of(&x, spec).expect("inside X");
                if t.states[owners[0]].obs != obs {
                    rep.mislabeled += 1;
                }
            }
            _ => rep.overlapping += 1,
        }
    }
    Ok(rep)
}
