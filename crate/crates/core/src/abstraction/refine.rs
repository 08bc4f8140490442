use super::quotient::{QuotientState, QuotientTS};
use super::spec::{ProblemSpec, SpecError};
use crate::geometry::{BoundingBox, Cell, GeometryError, Matrix, Region, Tolerances};
use crate::logic::Letter;
use crate::lyapunov::{build_slices, Certificate, GammaSequence, LyapunovError, SliceSet};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbstractionError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lyapunov(#[from] LyapunovError),
    #[error("refinement exceeded {0} states")]
    StateCap(usize),
    #[error("unknown input index {0}")]
    UnknownInput(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbstractionOptions {
    pub tol: Tolerances,
    /// Accepted excess of the certified rate over the declared one.
    pub rho_tol: f64,
    pub max_states: usize,
}

impl Default for AbstractionOptions {
    fn default() -> Self {
        AbstractionOptions {
            tol: Tolerances::default(),
            rho_tol: 1e-6,
            max_states: 1_000_000,
        }
    }
}

/// A cell with interior, stripped of redundant rows, with its bounding box.
fn tidy(cell: Cell, tol: &Tolerances) -> Result<Option<(Cell, BoundingBox)>, GeometryError> {
    if !cell.has_interior(tol)? {
        return Ok(None);
    }
    let cell = cell.without_redundant(tol)?;
    match cell.bounding_box(tol)? {
        Some(b) => Ok(Some((cell, b))),
        None => Ok(None),
    }
}

/// Bounding box, or the whole space when the cell is unbounded.
fn box_or_everything(c: &Cell, tol: &Tolerances) -> Result<BoundingBox, GeometryError> {
    match c.bounding_box(tol) {
        Ok(Some(b)) => Ok(b),
        Ok(None) | Err(GeometryError::Unbounded) => Ok(BoundingBox {
            lo: vec![f64::NEG_INFINITY; c.dim()],
            hi: vec![f64::INFINITY; c.dim()],
        }),
        Err(e) => Err(e),
    }
}

fn hull(boxes: &[BoundingBox]) -> BoundingBox {
    boxes[1..].iter().fold(boxes[0].clone(), |a, b| a.union(b))
}

/// Partition element under refinement.
#[derive(Debug, Clone)]
struct Block {
    cells: Vec<Cell>,
    boxes: Vec<BoundingBox>,
    bbox: BoundingBox,
    /// Interval image of `bbox` under each mode.
    images: Vec<BoundingBox>,
    slice: usize,
    obs: Letter,
    trans: Vec<Option<usize>>,
    order: usize,
}

/// Partition and transition relation while the abstraction is refined.
#[derive(Debug, Clone)]
pub struct Refinement {
    modes: Vec<Matrix>,
    tol: Tolerances,
    max_states: usize,
    blocks: Vec<Block>,
    by_slice: Vec<Vec<usize>>,
    d_block: usize,
    next_order: usize,
}

/// Outcome of one [`Refinement::refine_update`] call.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RefineStats {
    /// Blocks that received the transition without splitting.
    pub wired: usize,
    /// Blocks split into an inside and an outside part.
    pub split: usize,
}

/// `{x | A_σ x ∈ target}` as the union of cell preimages.
pub fn compute_pre(target: &Region, a: &Matrix, tol: &Tolerances) -> Result<Region, GeometryError> {
    target.preimage(a, tol)
}

impl Refinement {
    /// Initial partition: `D`, then per slice the parts of every region and
    /// of the filler `X ∖ (D ∪ ⋃R)`. Pieces without interior are dropped.
    pub fn new(spec: &ProblemSpec, slices: &SliceSet, opts: &AbstractionOptions) -> Result<Self, AbstractionError> {
        let tol = opts.tol;
        let mut r = Refinement {
            modes: spec.modes.clone(),
            tol,
            max_states: opts.max_states,
            blocks: Vec::new(),
            by_slice: vec![Vec::new(); slices.slices.len()],
            d_block: 0,
            next_order: 0,
        };
        let d_cells: Vec<(Cell, BoundingBox)> = slices.slices[0]
            .cells()
            .iter()
            .map(|c| Ok((c.clone(), c.bounding_box(&tol)?.ok_or(GeometryError::Unbounded)?)))
            .collect::<Result<_, GeometryError>>()?;
        r.d_block = r.push_block(d_cells, 0, Letter::TargetD)?;
        let region_cells: Vec<Cell> = spec
            .regions
            .iter()
            .map(|p| p.to_cell())
            .collect::<Result<_, _>>()?;
        for (i, slice) in slices.slices.iter().enumerate().skip(1) {
            for (j, rc) in region_cells.iter().enumerate() {
                let mut parts = Vec::new();
                for c in slice.cells() {
                    if let Some(t) = tidy(c.intersect(rc)?, &tol)? {
                        parts.push(t);
                    }
                }
                if !parts.is_empty() {
                    r.push_block(parts, i, Letter::Region(j))?;
                }
            }
            let mut rest = slice.clone();
            for rc in &region_cells {
                rest = rest.difference_cell(rc, &tol)?;
            }
            let mut parts = Vec::new();
            for c in rest.into_cells() {
                if let Some(t) = tidy(c, &tol)? {
                    parts.push(t);
                }
            }
            if !parts.is_empty() {
                r.push_block(parts, i, Letter::Empty)?;
            }
        }
        Ok(r)
    }

    fn push_block(
        &mut self,
        parts: Vec<(Cell, BoundingBox)>,
        slice: usize,
        obs: Letter,
    ) -> Result<usize, AbstractionError> {
        if self.blocks.len() >= self.max_states {
            return Err(AbstractionError::StateCap(self.max_states));
        }
        let id = self.blocks.len();
        let (cells, boxes): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
        let bbox = hull(&boxes);
        let images = self.modes.iter().map(|a| bbox.linear_image(a)).collect();
        self.blocks.push(Block {
            cells,
            boxes,
            bbox,
            images,
            slice,
            obs,
            trans: vec![None; self.modes.len()],
            order: self.next_order,
        });
        self.next_order += 1;
        self.by_slice[slice].push(id);
        Ok(id)
    }

    fn set_cells(&mut self, b: usize, parts: Vec<(Cell, BoundingBox)>) {
        let (cells, boxes): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
        let bbox = hull(&boxes);
        let blk = &mut self.blocks[b];
        blk.images = self.modes.iter().map(|a| bbox.linear_image(a)).collect();
        blk.cells = cells;
        blk.boxes = boxes;
        blk.bbox = bbox;
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks_in_slice(&self, slice: usize) -> &[usize] {
        &self.by_slice[slice]
    }

    /// Region of a block.
    pub fn region(&self, b: usize) -> Region {
        Region::from_cells_unchecked(self.blocks[b].cells[0].dim(), self.blocks[b].cells.clone())
    }

    pub fn transition(&self, b: usize, sigma: usize) -> Option<usize> {
        self.blocks[b].trans[sigma]
    }

    /// Split every block in a slice above `q`'s that meets `pre` and still
    /// lacks a `sigma` successor: the part inside `pre` gets `(·, sigma, q)`,
    /// the part outside keeps the old transitions. Blocks entirely inside are
    /// wired without splitting. `pre` must be `compute_pre(eq(q), A_sigma)`.
    pub fn refine_update(&mut self, pre: &Region, sigma: usize, q: usize) -> Result<RefineStats, AbstractionError> {
        if sigma >= self.modes.len() {
            return Err(AbstractionError::UnknownInput(sigma));
        }
        let tol = self.tol;
        let slack = 1e3 * tol.feas * self.blocks[q].bbox.hi.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let pre_boxes: Vec<BoundingBox> = pre
            .cells()
            .iter()
            .map(|p| box_or_everything(p, &tol))
            .collect::<Result<_, _>>()?;
        let target_bbox = self.blocks[q].bbox.clone();
        let lowest = self.blocks[q].slice + 1;
        let mut stats = RefineStats::default();
        for slice in lowest..self.by_slice.len() {
            let candidates = self.by_slice[slice].clone();
            for b in candidates {
                if self.blocks[b].trans[sigma].is_some()
                    || !self.blocks[b].images[sigma].overlaps(&target_bbox, slack)
                {
                    continue;
                }
                let mut inside = Vec::new();
                let mut outside = Vec::new();
                let blk = self.blocks[b].clone();
                for (c, cb) in blk.cells.iter().zip(&blk.boxes) {
                    let mut hits: Vec<&Cell> = Vec::new();
                    for (p, pb) in pre.cells().iter().zip(&pre_boxes) {
                        if !cb.overlaps(pb, slack) {
                            continue;
                        }
                        if let Some(t) = tidy(c.intersect(p)?, &tol)? {
                            inside.push(t);
                            hits.push(p);
                        }
                    }
                    if hits.is_empty() {
                        outside.push((c.clone(), cb.clone()));
                        continue;
                    }
                    let mut rest = Region::from_cells_unchecked(c.dim(), vec![c.clone()]);
                    for p in hits {
                        rest = rest.difference_cell(p, &tol)?;
                    }
                    for r in rest.into_cells() {
                        if let Some(t) = tidy(r, &tol)? {
                            outside.push(t);
                        }
                    }
                }
                if inside.is_empty() {
                    continue;
                }
                if outside.is_empty() {
                    self.blocks[b].trans[sigma] = Some(q);
                    stats.wired += 1;
                    continue;
                }
                let (obs, old) = (blk.obs, blk.trans.clone());
                let fresh = self.push_block(outside, slice, obs)?;
                self.blocks[fresh].trans = old;
                self.set_cells(b, inside);
                self.blocks[b].trans[sigma] = Some(q);
                stats.split += 1;
            }
        }
        Ok(stats)
    }

    /// Process slices `0..N` in order, refining against every state of the
    /// current slice and every input.
    pub fn run(&mut self) -> Result<(), AbstractionError> {
        let tol = self.tol;
        for i in 0..self.by_slice.len().saturating_sub(1) {
            let targets = self.by_slice[i].clone();
            for q in targets {
                let region = self.region(q);
                for sigma in 0..self.modes.len() {
                    let pre = compute_pre(&region, &self.modes[sigma], &tol)?;
                    self.refine_update(&pre, sigma, q)?;
                }
            }
        }
        Ok(())
    }

    /// Freeze into a quotient: ids ordered by (slice, creation order), the
    /// `D` class gets self-loops on every input.
    pub fn finish(self, sigma: Vec<String>) -> QuotientTS {
        let mut order: Vec<usize> = (0..self.blocks.len()).collect();
        order.sort_by_key(|&b| (self.blocks[b].slice, self.blocks[b].order));
        let mut id = vec![0; self.blocks.len()];
        for (new, &old) in order.iter().enumerate() {
            id[old] = new;
        }
        let mut transitions = BTreeSet::new();
        for (b, blk) in self.blocks.iter().enumerate() {
            for (s, t) in blk.trans.iter().enumerate() {
                if let Some(t) = t {
                    transitions.insert((id[b], s, id[*t]));
                }
            }
        }
        for s in 0..self.modes.len() {
            transitions.insert((id[self.d_block], s, id[self.d_block]));
        }
        let d_state = id[self.d_block];
        let mut blocks: Vec<Option<Block>> = self.blocks.into_iter().map(Some).collect();
        let states = order
            .iter()
            .enumerate()
            .map(|(new, &old)| {
                let blk = blocks[old].take().expect("each block once");
                QuotientState {
                    id: new,
                    region: Region::from_cells_unchecked(blk.cells[0].dim(), blk.cells),
                    slice: blk.slice,
                    obs: blk.obs,
                }
            })
            .collect();
        QuotientTS::new(states, sigma, transitions, d_state)
    }
}

/// Initial partition as quotient states without transitions.
pub fn initial_partition(spec: &ProblemSpec, slices: &SliceSet, opts: &AbstractionOptions) -> Result<Vec<QuotientState>, AbstractionError> {
    let r = Refinement::new(spec, slices, opts)?;
    let q = r.finish(spec.mode_names.clone());
    Ok(q.states)
}

/// Result of [`build_quotient`].
#[derive(Debug, Clone)]
pub struct Abstraction {
    pub quotient: QuotientTS,
    pub gammas: GammaSequence,
    pub certificate: Certificate,
    pub initial_states: usize,
    /// `(state, input)` pairs outside `D` left without a successor. Empty
    /// whenever the declared rate is truly contractive.
    pub incomplete: Vec<(usize, usize)>,
}

/// Certify, slice, build the initial partition and refine to a bisimulation
/// quotient.
pub fn build_quotient(spec: &ProblemSpec, opts: &AbstractionOptions) -> Result<Abstraction, AbstractionError> {
    let certificate = spec.require_certified(opts.rho_tol, &opts.tol)?;
    let gammas = spec.gammas();
    let slices = build_slices(spec.lf.l(), &gammas, &opts.tol)?;
    let mut r = Refinement::new(spec, &slices, opts)?;
    let initial_states = r.num_blocks();
    r.run()?;
    let quotient = r.finish(spec.mode_names.clone());
    let incomplete = quotient.missing_transitions();
    Ok(Abstraction {
        quotient,
        gammas,
        certificate,
        initial_states,
        incomplete,
    })
}
