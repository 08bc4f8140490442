#![allow(dead_code)]

use swbisim::abstraction::ProblemSpec;
use swbisim::geometry::{mat_vec, Matrix, Polytope, Tolerances};
use swbisim::logic::{Formula, Letter};
use swbisim::lyapunov::PolyhedralLF;

pub const A1: [[f64; 2]; 2] = [[-0.65, 0.32], [-0.42, -0.92]];
pub const A2: [[f64; 2]; 2] = [[0.65, 0.32], [-0.42, -0.92]];
pub const L_ROWS: [[f64; 2]; 4] = [[-0.0625, 1.0], [0.6815, 1.0], [0.9947, 0.6868], [0.9947, -0.0678]];

pub fn mat2(m: [[f64; 2]; 2]) -> Matrix {
    Matrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

pub fn weight() -> Matrix {
    Matrix::from_row_slice(4, 2, &L_ROWS.concat())
}

pub fn modes() -> Vec<Matrix> {
    vec![mat2(A1), mat2(A2)]
}

pub fn boxed(lo: [f64; 2], hi: [f64; 2]) -> Polytope {
    Polytope::from_box(&lo, &hi)
}

pub fn spec_with(rho: f64, gamma_x: f64, regions: Vec<(&str, Polytope)>, formula: Option<&str>) -> ProblemSpec {
    ProblemSpec::new(
        2,
        vec![("a".into(), mat2(A1)), ("b".into(), mat2(A2))],
        PolyhedralLF::new(weight(), rho).unwrap(),
        gamma_x,
        5.063,
        regions.into_iter().map(|(l, p)| (l.to_string(), p)).collect(),
        formula.map(str::to_string),
        &Tolerances::default(),
    )
    .unwrap()
}

/// Example dynamics with `Γ_X` lowered so that four shells remain, and one box region.
pub fn reduced_spec() -> ProblemSpec {
    spec_with(0.9401, 6.4, vec![("R1", boxed([3.75, 2.35], [4.05, 2.65]))], None)
}

pub fn three_region_spec() -> ProblemSpec {
    spec_with(
        0.94,
        10.0,
        vec![
            ("R1", boxed([6.0, -3.0], [8.0, -1.0])),
            ("R2", boxed([-8.0, 1.0], [-6.0, 3.0])),
            ("R3", boxed([-3.0, 6.0], [-1.0, 8.0])),
        ],
        Some("(!R2 U D) & F R1 & ((R3 -> X !R1) U D)"),
    )
}

/// Observation of a point, computed directly from the problem data.
pub fn observe(spec: &ProblemSpec, x: &[f64]) -> Letter {
    if spec.lf.value(x) <= spec.gamma_d {
        return Letter::TargetD;
    }
    for (i, r) in spec.regions.iter().enumerate() {
        if r.contains(x) {
            return Letter::Region(i);
        }
    }
    Letter::Empty
}

/// Observations of the embedded run: `x` moves by the chosen mode outside
/// `D` and stays put inside it.
pub fn run_word(spec: &ProblemSpec, x0: &[f64], seq: &[usize]) -> Vec<Letter> {
    let mut x = x0.to_vec();
    let mut w = vec![observe(spec, &x)];
    for &s in seq {
        if spec.lf.value(&x) > spec.gamma_d {
            x = mat_vec(&spec.modes[s], &x);
        }
        w.push(observe(spec, &x));
    }
    w
}

/// Satisfaction of a finite run whose last observation repeats forever.
pub fn run_satisfies(
    sat: impl Fn(&Formula, &[Letter], Letter) -> bool,
    f: &Formula,
    word: &[Letter],
) -> bool {
    let (last, prefix) = word.split_last().expect("nonempty");
    sat(f, prefix, *last)
}

/// All input sequences of length `h` over `k` inputs, lowest index first.
pub fn sequences(k: usize, h: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = k.pow(h as u32);
    (0..total).map(move |mut code| {
        let mut s = vec![0; h];
        for slot in s.iter_mut().rev() {
            *slot = code % k;
            code /= k;
        }
        s
    })
}

/// Uniform point of `X` by rejection from a box that contains it.
pub fn sample_x<R: rand::Rng>(spec: &ProblemSpec, rng: &mut R, half_width: f64) -> Vec<f64> {
    loop {
        let x = vec![rng.gen_range(-half_width..half_width), rng.gen_range(-half_width..half_width)];
        if spec.lf.value(&x) <= spec.gamma_x {
            return x;
        }
    }
}

use rand::Rng;
use swbisim::geometry::{Cell, LinearConstraint};

/// Random cell inside `[-2, 2]^dim` cut by up to four random halfspaces,
/// each strict with probability one half.
pub fn random_cell<R: Rng>(rng: &mut R, dim: usize) -> Cell {
    let mut cs = Vec::new();
    for k in 0..dim {
        let mut e = vec![0.0; dim];
        e[k] = 1.0;
        cs.push(LinearConstraint::closed(e.clone(), 2.0));
        e[k] = -1.0;
        cs.push(LinearConstraint::closed(e, 2.0));
    }
    for _ in 0..rng.gen_range(1..=4) {
        let a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b = rng.gen_range(-0.5..1.0);
        cs.push(if rng.gen_bool(0.5) {
            LinearConstraint::strict(a, b)
        } else {
            LinearConstraint::closed(a, b)
        });
    }
    Cell::new(dim, cs).unwrap()
}

/// Distance of `x` from the nearest facet hyperplane of `c`, in units of the row norm.
pub fn facet_distance(c: &Cell, x: &[f64]) -> f64 {
    c.constraints()
        .iter()
        .map(|k| k.slack(x).abs() / k.a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300))
        .fold(f64::INFINITY, f64::min)
}

/// Vertices of `{x ∈ R² | ‖Lx‖∞ ≤ 1}` by intersecting every pair of facet
/// lines and keeping the feasible intersections.
pub fn unit_ball_vertices_2d(l: &Matrix) -> Vec<[f64; 2]> {
    let mut rows = Vec::new();
    for j in 0..l.nrows() {
        rows.push([l[(j, 0)], l[(j, 1)]]);
        rows.push([-l[(j, 0)], -l[(j, 1)]]);
    }
    let mut out = Vec::new();
    for i in 0..rows.len() {
        for k in i + 1..rows.len() {
            let (a, b) = (rows[i], rows[k]);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let v = [(b[1] - a[1]) / det, (a[0] - b[0]) / det];
            if rows.iter().all(|r| r[0] * v[0] + r[1] * v[1] <= 1.0 + 1e-9) {
                out.push(v);
            }
        }
    }
    out
}

/// `max ‖LAx‖∞ / ‖Lx‖∞` over the ball's vertices.
pub fn rate_by_vertices(l: &Matrix, a: &Matrix) -> f64 {
    let la = l * a;
    unit_ball_vertices_2d(l)
        .iter()
        .map(|v| swbisim::geometry::inf_norm_of_product(&la, v))
        .fold(0.0, f64::max)
}

/// `max ‖LAx‖∞ / ‖Lx‖∞` over `count` equally spaced directions.
pub fn rate_by_grid(l: &Matrix, a: &Matrix, count: usize) -> f64 {
    let la = l * a;
    (0..count)
        .map(|k| {
            let t = std::f64::consts::TAU * k as f64 / count as f64;
            let x = [t.cos(), t.sin()];
            swbisim::geometry::inf_norm_of_product(&la, &x) / swbisim::geometry::inf_norm_of_product(l, &x)
        })
        .fold(0.0, f64::max)
}
