use crate::svg;
use crate::GlobalOpts;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::time::Instant;
use swbisim::abstraction::{
    arbitrary_switching_view, build_quotient, AbstractionError, AbstractionOptions, ProblemSpec,
    QuotientTS, SpecError,
};
use swbisim::analysis::{
    build_product, satisfying_initial_set, switching_sequence, synthesize, verify_arbitrary,
};
use swbisim::geometry::{mat_vec, Tolerances};
use swbisim::io::{
    Dump, IoError, ProblemFile, QuotientSummary, RegionRecord, ResultBundle, StrategyEntry,
    FORMAT_VERSION,
};
use swbisim::logic::{parse_formula, to_dfa, word_satisfies, Dfa, Formula, Letter};
use swbisim::lyapunov::{slice_transition_check, GammaSequence};

/// Failure with its process exit code.
#[derive(Debug)]
pub enum CliError {
    /// A check ran and did not pass.
    Failed(String),
    Input(String),
    Specification(String),
    Internal(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Failed(_) => 1,
            CliError::Input(_) => 2,
            CliError::Specification(_) => 3,
            CliError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Failed(m) | CliError::Input(m) | CliError::Specification(m) | CliError::Internal(m) => {
                write!(f, "{m}")
            }
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Spec(SpecError::Geometry(g)) => CliError::Internal(g.to_string()),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<AbstractionError> for CliError {
    fn from(e: AbstractionError) -> Self {
        match e {
            AbstractionError::Spec(SpecError::Uncertified { rho, rho_star }) => CliError::Input(format!(
                "declared rate {rho} is not certified (rho* = {rho_star}); raise --rho-tol to proceed"
            )),
            e => CliError::Internal(e.to_string()),
        }
    }
}

fn internal(e: impl fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

fn tolerances(o: &GlobalOpts) -> Tolerances {
    Tolerances {
        feas: o.tol_feas,
        strict: o.tol_strict,
    }
}

fn options(o: &GlobalOpts) -> AbstractionOptions {
    AbstractionOptions {
        tol: tolerances(o),
        rho_tol: o.rho_tol,
        max_states: o.max_states,
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path, tol: &Tolerances) -> Result<(ProblemFile, ProblemSpec), CliError> {
    let pf = ProblemFile::from_json(&read(path)?)?;
    let spec = pf.to_spec(tol)?;
    Ok((pf, spec))
}

/// A quotient together with the data it was built from.
struct Loaded {
    spec: ProblemSpec,
    quotient: QuotientTS,
    gammas: GammaSequence,
    rho_star: f64,
}

fn is_dump(text: &str) -> bool {
    serde_json::from_str::<serde_json::Value>(text)
        .ok()
        .and_then(|v| v.get("format_version").cloned())
        .is_some()
}

/// Read a dump, or build the quotient from a problem file.
fn load_quotient(path: &Path, o: &GlobalOpts) -> Result<Loaded, CliError> {
    let text = read(path)?;
    let tol = tolerances(o);
    if is_dump(&text) {
        let d = Dump::from_json(&text)?;
        let spec = d.problem.to_spec(&tol)?;
        return Ok(Loaded {
            quotient: d.quotient(),
            gammas: d.gamma_sequence(),
            rho_star: d.rho_certified,
            spec,
        });
    }
    let pf = ProblemFile::from_json(&text)?;
    let spec = pf.to_spec(&tol)?;
    let ab = build_quotient(&spec, &options(o))?;
    Ok(Loaded {
        spec,
        quotient: ab.quotient,
        gammas: ab.gammas,
        rho_star: ab.certificate.rho_star,
    })
}

fn formula_text(explicit: Option<&str>, spec: &ProblemSpec) -> Result<String, CliError> {
    explicit
        .map(str::to_string)
        .or_else(|| spec.formula.clone())
        .ok_or_else(|| CliError::Specification("no formula given (use --formula or the problem's \"formula\")".into()))
}

fn compile(text: &str, spec: &ProblemSpec) -> Result<(Formula, Dfa), CliError> {
    let alphabet = spec.alphabet();
    let f = parse_formula(text, &alphabet).map_err(|e| CliError::Specification(format!("formula: {e}")))?;
    let d = to_dfa(&f, &alphabet);
    Ok((f, d))
}

pub fn check(path: &Path, o: &GlobalOpts) -> Result<(), CliError> {
    let tol = tolerances(o);
    let (_, spec) = load_problem(path, &tol)?;
    println!("rank check: L is {}x{} with full column rank", spec.lf.l().nrows(), spec.n);
    let cert = spec.certify(&tol).map_err(internal)?;
    for (name, r) in spec.mode_names.iter().zip(&cert.per_mode) {
        println!("rho* for mode {name}: {r:.10}");
    }
    let rho = spec.lf.rho();
    println!("rho* = {:.10}, declared rho = {rho}", cert.rho_star);
    let gs = spec.gammas();
    println!("N = {}", gs.n());
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    let sc = slice_transition_check(&spec.modes, spec.lf.l(), &gs, o.samples, &mut rng, &tol).map_err(internal)?;
    println!(
        "slice descent sampling: {} checks, {} counterexamples",
        sc.checked,
        sc.violations.len()
    );
    if cert.certifies(rho, o.rho_tol) {
        println!("rho* <= {rho}: PASS");
        Ok(())
    } else {
        println!("rho* <= {rho}: FAIL (excess {:.3e}, allowed {:.1e})", cert.rho_star - rho, o.rho_tol);
        Err(CliError::Failed("contraction rate not certified".into()))
    }
}

pub fn abstract_cmd(path: &Path, out: Option<&Path>, o: &GlobalOpts) -> Result<(), CliError> {
    let tol = tolerances(o);
    let (pf, spec) = load_problem(path, &tol)?;
    let t0 = Instant::now();
    let ab = build_quotient(&spec, &options(o))?;
    let elapsed = t0.elapsed();
    let q = &ab.quotient;
    println!("N = {}", ab.gammas.n());
    println!("rho* = {:.10}", ab.certificate.rho_star);
    println!("initial partition: {} states", ab.initial_states);
    for (i, c) in q.state_counts_per_slice().iter().enumerate() {
        println!("slice {i}: {c} states");
    }
    println!("states: {}", q.num_states());
    println!("transitions: {}", q.transitions.len());
    if !ab.incomplete.is_empty() {
        println!("states without a successor for some input: {}", ab.incomplete.len());
    }
    println!("wall time: {:.3} s", elapsed.as_secs_f64());
    if let Some(out) = out {
        write(out, &Dump::new(&pf, &ab).to_json())?;
    }
    Ok(())
}

pub fn analyze(
    input: &Path,
    formula: Option<&str>,
    out: Option<&Path>,
    universal: bool,
    o: &GlobalOpts,
) -> Result<(), CliError> {
    let mut timing = BTreeMap::new();
    let t0 = Instant::now();
    let ld = load_quotient(input, o)?;
    timing.insert("load".to_string(), t0.elapsed().as_secs_f64() * 1e3);
    let text = formula_text(formula, &ld.spec)?;
    let t1 = Instant::now();
    let (_, dfa) = compile(&text, &ld.spec)?;
    timing.insert("automaton".to_string(), t1.elapsed().as_secs_f64() * 1e3);
    let t2 = Instant::now();
    let q = &ld.quotient;
    let (pa, set, strategy) = if universal {
        let pa = build_product(&arbitrary_switching_view(q), &dfa).map_err(internal)?;
        let (_, set) = verify_arbitrary(&pa, q);
        (pa, set, Vec::new())
    } else {
        let pa = build_product(q, &dfa).map_err(internal)?;
        let st = synthesize(&pa);
        let set = satisfying_initial_set(&st, &pa, q);
        let entries = (0..pa.len())
            .filter_map(|p| {
                let (sigma, next) = st.choice[p]?;
                let ((qs, ds), (qn, dn)) = (pa.states[p], pa.states[next]);
                Some(StrategyEntry {
                    state: qs,
                    dfa_state: ds,
                    input: q.sigma[sigma].clone(),
                    next_state: qn,
                    next_dfa_state: dn,
                })
            })
            .collect();
        (pa, set, entries)
    };
    timing.insert("analysis".to_string(), t2.elapsed().as_secs_f64() * 1e3);
    let kind = if universal { "verification" } else { "synthesis" };
    println!("formula: {text}");
    println!("automaton states: {}", dfa.num_states());
    println!("product states: {}", pa.len());
    println!(
        "{kind}: {} of {} classes in the initial set",
        set.states.len(),
        q.num_states()
    );
    if let Some(out) = out {
        let bundle = ResultBundle {
            format_version: FORMAT_VERSION,
            kind: kind.into(),
            formula: text,
            quotient: QuotientSummary::of(q),
            gammas: ld.gammas.gammas.clone(),
            rho_certified: ld.rho_star,
            dfa,
            product_states: pa.len(),
            initial_set: RegionRecord {
                states: set.states,
                cells: set.region.cells().to_vec(),
            },
            strategy,
            timing_ms: timing,
        };
        write(out, &bundle.to_json())?;
    }
    Ok(())
}

fn parse_point(s: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::Input(format!("point {s:?}: {e}")))?;
    if v.len() != n {
        return Err(CliError::Input(format!("point {s:?} has {} coordinates, expected {n}", v.len())));
    }
    Ok(v)
}

fn parse_sequence(s: &str, names: &[String]) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            names
                .iter()
                .position(|n| n == t)
                .ok_or_else(|| CliError::Input(format!("unknown mode {t:?}")))
        })
        .collect()
}

/// Trajectory of the embedding system: points inside `D` stay put.
fn trajectory(spec: &ProblemSpec, x0: &[f64], seq: &[usize]) -> Vec<Vec<f64>> {
    let mut xs = vec![x0.to_vec()];
    for &s in seq {
        let x = xs.last().expect("nonempty");
        let next = if spec.lf.value(x) <= spec.gamma_d {
            x.clone()
        } else {
            mat_vec(&spec.modes[s], x)
        };
        xs.push(next);
    }
    xs
}

fn synthesized_sequence(ld: &Loaded, formula: Option<&str>, x0: &[f64]) -> Result<Vec<usize>, CliError> {
    let text = formula_text(formula, &ld.spec)?;
    let (_, dfa) = compile(&text, &ld.spec)?;
    let pa = build_product(&ld.quotient, &dfa).map_err(internal)?;
    let st = synthesize(&pa);
    let mut seq = switching_sequence(x0, &st, &pa, &ld.quotient)
        .map_err(|e| CliError::Failed(format!("no satisfying sequence: {e}")))?;
    // the prefix is already good; pad with the first mode until D is reached
    for _ in 0..=ld.gammas.n() {
        let xs = trajectory(&ld.spec, x0, &seq);
        if ld.spec.lf.value(xs.last().expect("nonempty")) <= ld.spec.gamma_d {
            break;
        }
        seq.push(0);
    }
    Ok(seq)
}

fn observe(spec: &ProblemSpec, x: &[f64]) -> Result<Letter, CliError> {
    swbisim::abstraction::observation_of(x, spec).map_err(|e| CliError::Input(e.to_string()))
}

pub fn simulate(
    input: &Path,
    x0: &str,
    sequence: Option<&str>,
    formula: Option<&str>,
    o: &GlobalOpts,
) -> Result<(), CliError> {
    let ld = load_quotient(input, o)?;
    let spec = &ld.spec;
    let x0 = parse_point(x0, spec.n)?;
    let seq = match sequence {
        Some(s) => parse_sequence(s, &spec.mode_names)?,
        None => synthesized_sequence(&ld, formula, &x0)?,
    };
    let xs = trajectory(spec, &x0, &seq);
    let alphabet = spec.alphabet();
    let mut word = Vec::new();
    for (k, x) in xs.iter().enumerate() {
        let obs = observe(spec, x)?;
        word.push(obs);
        let input = seq.get(k).map_or("-", |s| spec.mode_names[*s].as_str());
        let coords: Vec<String> = x.iter().map(|v| format!("{v:.6}")).collect();
        println!(
            "k={k} x=({}) V={:.6} obs={} next={input}",
            coords.join(", "),
            spec.lf.value(x),
            alphabet.letter_name(obs)
        );
    }
    if let Some(text) = formula.map(str::to_string).or_else(|| spec.formula.clone()) {
        let (f, _) = compile(&text, spec)?;
        // the last observation is taken to repeat forever, which is exact once D is reached
        let tail = *word.last().expect("nonempty");
        if tail != Letter::TargetD {
            println!("trajectory ends outside D; its last observation is taken to repeat");
        }
        let ok = word_satisfies(&f, &word[..word.len() - 1], tail);
        println!("word satisfies formula: {ok}");
        if !ok {
            return Err(CliError::Failed("trajectory does not satisfy the formula".into()));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn plot(
    input: &Path,
    out: &Path,
    slice: Option<usize>,
    bundle: Option<&Path>,
    traj: Option<&str>,
    sequence: Option<&str>,
    formula: Option<&str>,
    o: &GlobalOpts,
) -> Result<(), CliError> {
    let tol = tolerances(o);
    let text = read(input)?;
    let (spec, dump) = if is_dump(&text) {
        let d = Dump::from_json(&text)?;
        (d.problem.to_spec(&tol)?, Some(d))
    } else {
        (ProblemFile::from_json(&text)?.to_spec(&tol)?, None)
    };
    if spec.n != 2 {
        return Err(CliError::Input(format!("plotting needs n = 2, got {}", spec.n)));
    }
    let mut fig = svg::Figure::new(&spec, &tol).map_err(internal)?;
    if let Some(k) = slice {
        let gs = spec.gammas();
        if k > gs.n() {
            return Err(CliError::Input(format!("slice {k} out of range 0..={}", gs.n())));
        }
        let region = match &dump {
            Some(d) => {
                let q = d.quotient();
                let cells = q
                    .states_in_slice(k)
                    .iter()
                    .flat_map(|&s| q.states[s].region.cells().to_vec())
                    .collect();
                swbisim::geometry::Region::from_cells_unchecked(2, cells)
            }
            None => swbisim::lyapunov::build_slices(spec.lf.l(), &gs, &tol)
                .map_err(internal)?
                .slices[k]
                .clone(),
        };
        fig.highlight(region.cells(), "#8e44ad", &tol).map_err(internal)?;
    }
    if let Some(b) = bundle {
        let rb = ResultBundle::from_json(&read(b)?)?;
        fig.highlight(&rb.initial_set.cells, "#8e44ad", &tol).map_err(internal)?;
    }
    if let Some(p) = traj {
        let x0 = parse_point(p, 2)?;
        let seq = match sequence {
            Some(s) => parse_sequence(s, &spec.mode_names)?,
            None => {
                let ld = match dump {
                    Some(ref d) => Loaded {
                        quotient: d.quotient(),
                        gammas: d.gamma_sequence(),
                        rho_star: d.rho_certified,
                        spec: spec.clone(),
                    },
                    None => load_quotient(input, o)?,
                };
                synthesized_sequence(&ld, formula, &x0)?
            }
        };
        fig.trajectory(&trajectory(&spec, &x0, &seq));
    }
    write(out, &fig.render())?;
    Ok(())
}
