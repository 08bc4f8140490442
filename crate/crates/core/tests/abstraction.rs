mod common;

use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use swbisim::abstraction::*;
use swbisim::geometry::{Matrix, Polytope, Tolerances};
use swbisim::logic::Letter;
use swbisim::lyapunov::PolyhedralLF;

fn single_mode_spec(a: Matrix, l: Matrix, rho: f64, gx: f64, gd: f64, regions: Vec<(String, Polytope)>) -> ProblemSpec {
    ProblemSpec::new(
        2,
        vec![("m".into(), a)],
        PolyhedralLF::new(l, rho).unwrap(),
        gx,
        gd,
        regions,
        None,
        &Tolerances::default(),
    )
    .unwrap()
}

#[test]
fn reduced_instance_counts() {
    let ab = build_quotient(&reduced_spec(), &AbstractionOptions::default()).unwrap();
    let q = &ab.quotient;
    assert_eq!(ab.gammas.n(), 4);
    assert_eq!(q.state_counts_per_slice(), vec![1, 2, 7, 15, 27]);
    assert_eq!(q.transitions.len(), 2 * (q.num_states() - 1) + 2);
    assert!(ab.incomplete.is_empty());
    assert!(q.is_deterministic());
    assert!(q.slice_wiring_violations().is_empty());
    assert!(q.regions_nonempty(&Tolerances::default()));
    assert_eq!(q.states[q.d_state].obs, Letter::TargetD);
    for s in 0..q.num_inputs() {
        assert_eq!(q.successors(q.d_state, s), &[q.d_state]);
    }
}

#[test]
fn reduced_instance_is_a_bisimulation() {
    let spec = reduced_spec();
    let tol = Tolerances::default();
    let ab = build_quotient(&spec, &AbstractionOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let rep = check_bisimulation(&ab.quotient, &spec, &ab.gammas, 200, 10.0 * tol.strict, &mut rng, &tol).unwrap();
    assert!(rep.violations.is_empty(), "{:?}", rep.violations.first());
    assert!(rep.checked > 0);
    let part = check_partition(&ab.quotient, &spec, 5000, &mut rng, &tol).unwrap();
    assert_eq!((part.uncovered, part.overlapping, part.mislabeled), (0, 0, 0));
}

#[test]
fn zero_mode_gives_one_state_per_slice() {
    let spec = single_mode_spec(Matrix::zeros(2, 2), weight(), 0.94, 10.0, 5.063, vec![]);
    let ab = build_quotient(&spec, &AbstractionOptions::default()).unwrap();
    let q = &ab.quotient;
    assert_eq!(q.num_states(), ab.gammas.n() + 1);
    for st in &q.states {
        assert_eq!(q.successors(st.id, 0), &[q.d_state]);
    }
}

#[test]
fn zero_mode_with_one_region_splits_its_slice() {
    // V ranges over [6.99, 7.21] on the box, inside the sixth shell
    let r = boxed([6.9, -2.1], [7.1, -1.9]);
    let spec = single_mode_spec(Matrix::zeros(2, 2), weight(), 0.94, 10.0, 5.063, vec![("R1".into(), r)]);
    let ab = build_quotient(&spec, &AbstractionOptions::default()).unwrap();
    let counts = ab.quotient.state_counts_per_slice();
    let mut expected = vec![1; 12];
    let lv = spec.lf.value(&[7.0, -2.0]);
    let k = ab.gammas.slice_of_value(lv).unwrap();
    expected[k] = 2;
    assert_eq!(counts, expected);
}

#[test]
fn exact_halving_gives_a_chain() {
    // box norm and A = I/2 map each shell exactly onto the one below
    let l = Matrix::identity(2, 2);
    let spec = single_mode_spec(Matrix::identity(2, 2) * 0.5, l, 0.5, 12.0, 1.0, vec![]);
    let ab = build_quotient(&spec, &AbstractionOptions::default()).unwrap();
    let q = &ab.quotient;
    assert_eq!(ab.gammas.gammas, vec![1.0, 2.0, 4.0, 8.0, 12.0]);
    assert_eq!(q.num_states(), 5);
    for st in &q.states {
        let next = q.successors(st.id, 0);
        assert_eq!(next.len(), 1);
        assert_eq!(q.states[next[0]].slice, st.slice.saturating_sub(1));
    }
}

#[test]
fn initial_partition_separates_labels() {
    let spec = reduced_spec();
    let opts = AbstractionOptions::default();
    let slices = swbisim::lyapunov::build_slices(spec.lf.l(), &spec.gammas(), &opts.tol).unwrap();
    let init = initial_partition(&spec, &slices, &opts).unwrap();
    assert_eq!(init.len(), build_quotient(&spec, &opts).unwrap().initial_states);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for st in &init {
        for cell in st.region.cells() {
            for x in cell.sample(&mut rng, 20, &opts.tol).unwrap() {
                if cell.min_slack(&x) > 1e-7 {
                    assert_eq!(observe(&spec, &x), st.obs);
                }
            }
        }
    }
}

#[test]
fn uncertified_rate_is_refused() {
    let spec = spec_with(0.94, 10.0, vec![], None);
    let err = build_quotient(&spec, &AbstractionOptions::default()).unwrap_err();
    assert!(matches!(err, AbstractionError::Spec(SpecError::Uncertified { .. })));
}

#[test]
fn state_cap_is_enforced() {
    let opts = AbstractionOptions {
        max_states: 10,
        ..AbstractionOptions::default()
    };
    assert!(matches!(build_quotient(&reduced_spec(), &opts), Err(AbstractionError::StateCap(_))));
}

#[test]
fn arbitrary_view_merges_inputs() {
    let ab = build_quotient(&reduced_spec(), &AbstractionOptions::default()).unwrap();
    let q = &ab.quotient;
    let v = arbitrary_switching_view(q);
    assert_eq!(v.num_inputs(), 1);
    for st in &q.states {
        let mut both: Vec<usize> = (0..2).flat_map(|s| q.successors(st.id, s).to_vec()).collect();
        both.sort_unstable();
        both.dedup();
        assert_eq!(v.successors(st.id, 0), both.as_slice());
    }
}

#[test]
fn region_validation() {
    let tol = Tolerances::default();
    let mk = |regions: Vec<(&str, Polytope)>| {
        ProblemSpec::new(
            2,
            vec![("a".into(), mat2(A1))],
            PolyhedralLF::new(weight(), 0.95).unwrap(),
            10.0,
            5.063,
            regions.into_iter().map(|(l, p)| (l.to_string(), p)).collect(),
            None,
            &tol,
        )
    };
    assert!(mk(vec![("R1", boxed([0.0, 0.0], [1.0, 1.0]))]).is_err());
    assert!(mk(vec![("R1", boxed([20.0, 0.0], [21.0, 1.0]))]).is_err());
    assert!(mk(vec![("D", boxed([6.0, -3.0], [8.0, -1.0]))]).is_err());
    assert!(mk(vec![("R1", boxed([6.0, -3.0], [8.0, -1.0])), ("R2", boxed([7.0, -2.0], [7.5, -1.5]))]).is_err());
    assert!(mk(vec![("R1", boxed([6.0, -3.0], [8.0, -1.0]))]).is_ok());
}

#[test]
fn observations() {
    let spec = three_region_spec();
    assert_eq!(observation_of(&[0.0, 0.0], &spec).unwrap(), Letter::TargetD);
    assert_eq!(observation_of(&[7.0, -2.0], &spec).unwrap(), Letter::Region(0));
    assert_eq!(observation_of(&[-7.0, 2.0], &spec).unwrap(), Letter::Region(1));
    assert_eq!(observation_of(&[-2.0, 7.0], &spec).unwrap(), Letter::Region(2));
    assert_eq!(observation_of(&[0.0, 7.0], &spec).unwrap(), Letter::Empty);
    assert!(observation_of(&[30.0, 0.0], &spec).is_err());
}
