use super::{Formula, Letter};

/// Truth of `f` on the word `prefix · tail^ω`.
///
/// Positions past the prefix are indistinguishable, so position
/// `prefix.len()` stands for the whole constant suffix. Each subformula is
/// tabulated over positions `0..=p` bottom-up.
pub fn word_satisfies(f: &Formula, prefix: &[Letter], tail: Letter) -> bool {
    let word: Vec<Letter> = prefix.iter().copied().chain(std::iter::once(tail)).collect();
    table(f, &word)[0]
}

fn table(f: &Formula, w: &[Letter]) -> Vec<bool> {
    let p = w.len() - 1;
    match f {
        Formula::True => vec![true; w.len()],
        Formula::False => vec![false; w.len()],
        Formula::Atom(a) => w.iter().map(|l| a.holds(*l)).collect(),
        Formula::NotAtom(a) => w.iter().map(|l| !a.holds(*l)).collect(),
        Formula::And(a, b) => zip(table(a, w), table(b, w), |x, y| x && y),
        Formula::Or(a, b) => zip(table(a, w), table(b, w), |x, y| x || y),
        Formula::Next(a) => {
            let t = table(a, w);
            (0..=p).map(|k| t[(k + 1).min(p)]).collect()
        }
        Formula::Until(a, b) => {
            let (g, h) = (table(a, w), table(b, w));
            let mut u = vec![false; w.len()];
            // on the suffix, g U h holds iff h does
            u[p] = h[p];
            for k in (0..p).rev() {
                u[k] = h[k] || (g[k] && u[k + 1]);
            }
            u
        }
        Formula::Eventually(a) => {
            let g = table(a, w);
            let mut u = g.clone();
            for k in (0..p).rev() {
                u[k] = u[k] || u[k + 1];
            }
            u
        }
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, op: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| op(x, y)).collect()
}
