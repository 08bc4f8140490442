use super::{Cell, GeometryError, LinearConstraint, Tolerances};
use serde::{Deserialize, Serialize};

/// Closed polytope `{x | Hx ≤ h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    #[serde(rename = "H")]
    pub rows: Vec<Vec<f64>>,
    #[serde(rename = "h")]
    pub rhs: Vec<f64>,
}

impl Polytope {
    pub fn new(rows: Vec<Vec<f64>>, rhs: Vec<f64>) -> Result<Self, GeometryError> {
        if rows.len() != rhs.len() {
            return Err(GeometryError::Dimension {
                expected: rows.len(),
                got: rhs.len(),
            });
        }
        if let Some(first) = rows.first() {
            let n = first.len();
            if let Some(bad) = rows.iter().find(|r| r.len() != n) {
                return Err(GeometryError::Dimension {
                    expected: n,
                    got: bad.len(),
                });
            }
        }
        Ok(Polytope { rows, rhs })
    }

    /// Axis box `lo ≤ x ≤ hi`.
    pub fn from_box(lo: &[f64], hi: &[f64]) -> Self {
        let n = lo.len();
        let mut rows = Vec::with_capacity(2 * n);
        let mut rhs = Vec::with_capacity(2 * n);
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            rows.push(e.clone());
            rhs.push(hi[j]);
            e[j] = -1.0;
            rows.push(e);
            rhs.push(-lo[j]);
        }
        Polytope { rows, rhs }
    }

    pub fn dim(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.rows
            .iter()
            .zip(&self.rhs)
            .all(|(r, b)| r.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() <= *b)
    }

    pub fn constraints(&self) -> Vec<LinearConstraint> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(r, b)| LinearConstraint::closed(r.clone(), *b))
            .collect()
    }

    pub fn to_cell(&self) -> Result<Cell, GeometryError> {
        Cell::new(self.dim(), self.constraints())
    }

    /// Bounded iff every axis direction has a finite optimum both ways.
    pub fn is_bounded(&self, tol: &Tolerances) -> Result<bool, GeometryError> {
        self.to_cell()?.is_bounded(tol)
    }

    /// Counterclockwise boundary vertices of a bounded, full-dimensional
    /// polytope in the plane.
    pub fn vertices_2d(&self, tol: &Tolerances) -> Result<Vec<[f64; 2]>, GeometryError> {
        if self.dim() != 2 {
            return Err(GeometryError::Dimension {
                expected: 2,
                got: self.dim(),
            });
        }
        if !self.is_bounded(tol)? {
            return Err(GeometryError::Unbounded);
        }
        let cell = self.to_cell()?;
        if !cell.has_interior(tol)? {
            return Err(GeometryError::Degenerate(
                "polytope has empty interior".into(),
            ));
        }
        let rows = cell.constraints();
        let scale = rows.iter().fold(1.0f64, |m, c| m.max(c.b.abs()));
        let eps = 1e3 * tol.feas * scale;
        let mut verts: Vec<[f64; 2]> = Vec::new();
        for i in 0..rows.len() {
            for j in i + 1..rows.len() {
                let (a, b) = (&rows[i], &rows[j]);
                let det = a.a[0] * b.a[1] - a.a[1] * b.a[0];
                if det.abs() < 1e-12 {
                    continue;
                }
                let x = (a.b * b.a[1] - a.a[1] * b.b) / det;
                let y = (a.a[0] * b.b - a.b * b.a[0]) / det;
                let p = [x, y];
                if rows.iter().all(|c| c.eval(&p) <= c.b + eps)
                    && !verts
                        .iter()
                        .any(|v| (v[0] - x).abs() <= eps && (v[1] - y).abs() <= eps)
                {
                    verts.push(p);
                }
            }
        }
        let cx = verts.iter().map(|v| v[0]).sum::<f64>() / verts.len() as f64;
        let cy = verts.iter().map(|v| v[1]).sum::<f64>() / verts.len() as f64;
        verts.sort_by(|p, q| {
            let ap = (p[1] - cy).atan2(p[0] - cx);
            let aq = (q[1] - cy).atan2(q[0] - cx);
            ap.total_cmp(&aq)
        });
        Ok(verts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_vertices_ccw() {
        let tol = Tolerances::default();
        let p = Polytope::from_box(&[0.0, 0.0], &[1.0, 1.0]);
        let v = p.vertices_2d(&tol).unwrap();
        assert_eq!(v.len(), 4);
        // signed area positive for counterclockwise order
        let area: f64 = (0..4)
            .map(|i| {
                let (a, b) = (v[i], v[(i + 1) % 4]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
            / 2.0;
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn segment_is_degenerate() {
        let tol = Tolerances::default();
        let p = Polytope::from_box(&[0.0, 0.0], &[1.0, 0.0]);
        assert!(matches!(p.vertices_2d(&tol), Err(GeometryError::Degenerate(_))));
    }

    #[test]
    fn halfplane_is_unbounded() {
        let tol = Tolerances::default();
        let p = Polytope::new(vec![vec![1.0, 0.0]], vec![1.0]).unwrap();
        assert!(!p.is_bounded(&tol).unwrap());
        assert!(matches!(p.vertices_2d(&tol), Err(GeometryError::Unbounded)));
    }

    #[test]
    fn wrong_dimension() {
        let tol = Tolerances::default();
        let p = Polytope::from_box(&[0.0; 3], &[1.0; 3]);
        assert!(matches!(p.vertices_2d(&tol), Err(GeometryError::Dimension { .. })));
    }

    #[test]
    fn row_count_mismatch() {
        assert!(Polytope::new(vec![vec![1.0]], vec![]).is_err());
    }
}
