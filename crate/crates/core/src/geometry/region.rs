use super::{BoundingBox, Cell, GeometryError, Matrix, Tolerances};
use serde::{Deserialize, Serialize};

/// Finite union of pairwise disjoint, nonempty cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    dim: usize,
    cells: Vec<Cell>,
}

impl Region {
    pub fn empty(dim: usize) -> Self {
        Region {
            dim,
            cells: Vec::new(),
        }
    }

    /// Single-cell region; empty if the cell is.
    pub fn from_cell(cell: Cell, tol: &Tolerances) -> Result<Self, GeometryError> {
        let dim = cell.dim();
        let cells = if cell.is_empty(tol)? { vec![] } else { vec![cell] };
        Ok(Region { dim, cells })
    }

    /// Build from cells the caller knows to be nonempty and disjoint.
    pub fn from_cells_unchecked(dim: usize, cells: Vec<Cell>) -> Self {
        Region { dim, cells }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<Cell> {
        self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn check_dim(&self, got: usize) -> Result<(), GeometryError> {
        if got != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                got,
            });
        }
        Ok(())
    }

    pub fn contains_point(&self, x: &[f64]) -> bool {
        self.cells.iter().any(|c| c.contains(x))
    }

    /// Index of the cell containing `x`, if any.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        self.cells.iter().position(|c| c.contains(x))
    }

    pub fn intersect_cell(&self, c: &Cell, tol: &Tolerances) -> Result<Region, GeometryError> {
        self.check_dim(c.dim())?;
        let mut cells = Vec::new();
        for cell in &self.cells {
            let i = cell.intersect(c)?;
            if !i.is_empty(tol)? {
                cells.push(i);
            }
        }
        Ok(Region::from_cells_unchecked(self.dim, cells))
    }

    pub fn intersect(&self, other: &Region, tol: &Tolerances) -> Result<Region, GeometryError> {
        self.check_dim(other.dim)?;
        let mut cells = Vec::new();
        for c in &other.cells {
            cells.extend(self.intersect_cell(c, tol)?.cells);
        }
        Ok(Region::from_cells_unchecked(self.dim, cells))
    }

    pub fn difference_cell(&self, c: &Cell, tol: &Tolerances) -> Result<Region, GeometryError> {
        self.check_dim(c.dim())?;
        let mut cells = Vec::new();
        for cell in &self.cells {
            cells.extend(cell.difference(c, tol)?.cells);
        }
        Ok(Region::from_cells_unchecked(self.dim, cells))
    }

    pub fn difference(&self, other: &Region, tol: &Tolerances) -> Result<Region, GeometryError> {
        self.check_dim(other.dim)?;
        let mut acc = self.clone();
        for c in &other.cells {
            if acc.is_empty() {
                break;
            }
            acc = acc.difference_cell(c, tol)?;
        }
        Ok(acc)
    }

    /// `{x | Ax ∈ self}`, cell by cell. Preimages of disjoint cells are
    /// disjoint; empty ones are dropped.
    pub fn preimage(&self, a: &Matrix, tol: &Tolerances) -> Result<Region, GeometryError> {
        let mut cells = Vec::new();
        for c in &self.cells {
            let p = c.preimage(a)?;
            if !p.is_empty(tol)? {
                cells.push(p);
            }
        }
        Ok(Region::from_cells_unchecked(self.dim, cells))
    }

    /// Append the cells of a region known to be disjoint from this one.
    pub fn extend_disjoint(&mut self, other: Region) -> Result<(), GeometryError> {
        self.check_dim(other.dim)?;
        self.cells.extend(other.cells);
        Ok(())
    }

    /// Pairwise intersection emptiness over all cell pairs.
    pub fn is_pairwise_disjoint(&self, tol: &Tolerances) -> Result<bool, GeometryError> {
        for i in 0..self.cells.len() {
            for j in i + 1..self.cells.len() {
                if !self.cells[i].intersect(&self.cells[j])?.is_empty(tol)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    pub fn bounding_box(&self, tol: &Tolerances) -> Result<Option<BoundingBox>, GeometryError> {
        let mut acc: Option<BoundingBox> = None;
        for c in &self.cells {
            if let Some(b) = c.bounding_box(tol)? {
                acc = Some(match acc {
                    None => b,
                    Some(a) => a.union(&b),
                });
            }
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LinearConstraint;

    fn interval(lo: f64, hi: f64) -> Cell {
        Cell::new(
            1,
            vec![
                LinearConstraint::closed(vec![1.0], hi),
                LinearConstraint::closed(vec![-1.0], -lo),
            ],
        )
        .unwrap()
    }

    #[test]
    fn intersect_with_empty_region() {
        let tol = Tolerances::default();
        let r = Region::empty(1);
        assert!(r.intersect_cell(&interval(0.0, 1.0), &tol).unwrap().is_empty());
    }

    #[test]
    fn difference_of_intervals() {
        let tol = Tolerances::default();
        let r = Region::from_cell(interval(0.0, 3.0), &tol).unwrap();
        let s = Region::from_cells_unchecked(1, vec![interval(1.0, 2.0)]);
        let d = r.difference(&s, &tol).unwrap();
        assert_eq!(d.cells().len(), 2);
        assert!(d.is_pairwise_disjoint(&tol).unwrap());
        for (x, inside) in [(0.5, true), (1.0, false), (1.5, false), (2.0, false), (2.5, true)] {
            assert_eq!(d.contains_point(&[x]), inside, "x = {x}");
        }
    }

    #[test]
    fn dimension_mismatch() {
        let tol = Tolerances::default();
        let r = Region::empty(2);
        assert!(matches!(
            r.intersect_cell(&interval(0.0, 1.0), &tol),
            Err(GeometryError::Dimension { .. })
        ));
    }
}
