//! Layered SVG drawing of planar problems.

use std::fmt::Write;
use swbisim::abstraction::ProblemSpec;
use swbisim::geometry::{Cell, GeometryError, Polytope, Tolerances};
use swbisim::lyapunov::sublevel_polytope;

const SIZE: f64 = 640.0;
const MARGIN: f64 = 20.0;
const REGION_COLORS: [&str; 6] = ["#e67e22", "#27ae60", "#2980b9", "#c0392b", "#16a085", "#7f8c8d"];

pub struct Figure {
    lo: [f64; 2],
    scale: f64,
    base: Vec<String>,
    highlights: Vec<String>,
    overlays: Vec<String>,
}

fn polytope_of(cell: &Cell) -> Result<Polytope, GeometryError> {
    Polytope::new(
        cell.constraints().iter().map(|c| c.a.clone()).collect(),
        cell.constraints().iter().map(|c| c.b).collect(),
    )
}

impl Figure {
    /// Base layers: `X`, the level sets, `D` and the regions.
    pub fn new(spec: &ProblemSpec, tol: &Tolerances) -> Result<Self, GeometryError> {
        let x = spec.x_polytope();
        let xv = x.vertices_2d(tol)?;
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for v in &xv {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        let mut fig = Figure {
            lo,
            scale: (SIZE - 2.0 * MARGIN) / span,
            base: Vec::new(),
            highlights: Vec::new(),
            overlays: Vec::new(),
        };
        fig.base.push(fig.polygon(&xv, "#fdfdfd", "#000000", 1.5));
        for g in spec.gammas().gammas.iter().skip(1).rev().skip(1) {
            let p = sublevel_polytope(spec.lf.l(), *g).map_err(|_| GeometryError::Unbounded)?;
            let v = p.vertices_2d(tol)?;
            fig.base.push(fig.polygon(&v, "none", "#bbbbbb", 0.7));
        }
        let dv = spec.d_polytope().vertices_2d(tol)?;
        fig.base.push(fig.polygon(&dv, "#f1c40f", "#000000", 1.0));
        for (i, r) in spec.regions.iter().enumerate() {
            let v = r.vertices_2d(tol)?;
            let color = REGION_COLORS[i % REGION_COLORS.len()];
            fig.base.push(fig.polygon(&v, color, "#000000", 1.0));
            let (cx, cy) = centroid(&v);
            let (px, py) = fig.map([cx, cy]);
            fig.base.push(format!(
                r#"<text x="{px:.2}" y="{py:.2}" font-size="12" text-anchor="middle">{}</text>"#,
                spec.region_labels[i]
            ));
        }
        Ok(fig)
    }

    fn map(&self, p: [f64; 2]) -> (f64, f64) {
        let x = MARGIN + (p[0] - self.lo[0]) * self.scale;
        let y = SIZE - MARGIN - (p[1] - self.lo[1]) * self.scale;
        (x, y)
    }

    fn polygon(&self, v: &[[f64; 2]], fill: &str, stroke: &str, width: f64) -> String {
        let mut pts = String::new();
        for p in v {
            let (x, y) = self.map(*p);
            let _ = write!(pts, "{x:.2},{y:.2} ");
        }
        format!(
            r#"<polygon points="{}" fill="{fill}" fill-opacity="0.6" stroke="{stroke}" stroke-width="{width}"/>"#,
            pts.trim_end()
        )
    }

    /// Fill the given cells; cells without interior are skipped.
    pub fn highlight(&mut self, cells: &[Cell], color: &str, tol: &Tolerances) -> Result<(), GeometryError> {
        for c in cells {
            match polytope_of(c)?.vertices_2d(tol) {
                Ok(v) => {
                    let s = self.polygon(&v, color, "none", 0.0);
                    self.highlights.push(s);
                }
                Err(GeometryError::Degenerate(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    pub fn trajectory(&mut self, xs: &[Vec<f64>]) {
        let mut pts = String::new();
        for x in xs {
            let (px, py) = self.map([x[0], x[1]]);
            let _ = write!(pts, "{px:.2},{py:.2} ");
            self.overlays.push(format!(r##"<circle cx="{px:.2}" cy="{py:.2}" r="2.5" fill="#000000"/>"##));
        }
        self.overlays.insert(
            0,
            format!(r##"<polyline points="{}" fill="none" stroke="#000000" stroke-width="1.2"/>"##, pts.trim_end()),
        );
    }

    pub fn render(&self) -> String {
        let mut s = format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        s.push('\n');
        for (name, layer) in [("base", &self.base), ("highlight", &self.highlights), ("overlay", &self.overlays)] {
            let _ = writeln!(s, r#"<g id="{name}">"#);
            for e in layer {
                let _ = writeln!(s, "{e}");
            }
            s.push_str("</g>\n");
        }
        s.push_str("</svg>\n");
        s
    }
}

fn centroid(v: &[[f64; 2]]) -> (f64, f64) {
    let n = v.len().max(1) as f64;
    (v.iter().map(|p| p[0]).sum::<f64>() / n, v.iter().map(|p| p[1]).sum::<f64>() / n)
}
