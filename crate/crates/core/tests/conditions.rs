mod common;

use common::{random_matrix, random_system};
use cone_lpv::{analyze, Analysis, AnalyzeOptions, Matrix, Outcome, PolytopicSystem};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Spectral radius of a 2×2 matrix from its characteristic polynomial.
fn radius_2x2(a: &Matrix) -> f64 {
    let (p, q, r, s) = (a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
    let tr = p + s;
    let det = p * s - q * r;
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        ((tr.abs() + disc.sqrt()) / 2.0).abs()
    } else {
        det.sqrt()
    }
}

fn conclusive(o: Outcome) -> bool {
    matches!(o, Outcome::ExistenceProven | Outcome::NonexistenceProven)
}

#[test]
fn single_vertex_stability_matches_spectral_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let opts = AnalyzeOptions::default();
    let mut checked = 0;
    while checked < 100 {
        let (a, rho) = if checked % 2 == 0 {
            let v: f64 = rng.gen_range(-1.6..1.6);
            (Matrix::scalar(v), v.abs())
        } else {
            let m = random_matrix(&mut rng, 2, 2, 1.2);
            let rho = radius_2x2(&m);
            (m, rho)
        };
        if (rho - 1.0).abs() < 0.02 {
            continue;
        }
        let verdict = analyze(&PolytopicSystem::autonomous(vec![a]).unwrap(), Analysis::Stability, &opts).unwrap();
        let expected = if rho < 1.0 { Outcome::ExistenceProven } else { Outcome::NonexistenceProven };
        assert_eq!(verdict.outcome, expected, "spectral radius {rho}");
        checked += 1;
    }
}

#[test]
fn contraction_preserves_existence() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = AnalyzeOptions::default();
    let mut seen = 0;
    for _ in 0..60 {
        let system = random_system(&mut rng);
        if analyze(&system, Analysis::Stability, &opts).unwrap().outcome != Outcome::ExistenceProven {
            continue;
        }
        seen += 1;
        let shrunk = system.scaled(0.8).unwrap();
        assert_eq!(analyze(&shrunk, Analysis::Stability, &opts).unwrap().outcome, Outcome::ExistenceProven);
    }
    assert!(seen > 0);
}

#[test]
fn expansion_preserves_nonexistence() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let opts = AnalyzeOptions::default();
    for _ in 0..20 {
        let system = random_system(&mut rng);
        if analyze(&system, Analysis::Stability, &opts).unwrap().outcome != Outcome::NonexistenceProven {
            continue;
        }
        let grown = system.scaled(1.25).unwrap();
        assert_eq!(analyze(&grown, Analysis::Stability, &opts).unwrap().outcome, Outcome::NonexistenceProven);
    }
}

#[test]
fn full_output_is_always_detectable() {
    let opts = AnalyzeOptions::default();
    for a in [0.0, 0.9, 1.1, -3.0] {
        let system = PolytopicSystem::new(vec![Matrix::scalar(a)], None, Some(Matrix::identity(1))).unwrap();
        assert_eq!(analyze(&system, Analysis::Detectability, &opts).unwrap().outcome, Outcome::ExistenceProven);
    }
}

#[test]
fn full_input_meets_the_necessary_condition() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = AnalyzeOptions::default();
    for _ in 0..5 {
        let system = random_system(&mut rng).with_input(Matrix::identity(2)).unwrap();
        let v = analyze(&system, Analysis::Stabilizability, &opts).unwrap();
        assert_eq!(v.outcome, Outcome::NecessaryConditionFeasible);
    }
}

#[test]
fn hurwitz_singleton_has_cqlf() {
    let opts = AnalyzeOptions::default();
    let a = Matrix::from_rows(vec![vec![-1.0, 3.0], vec![0.0, -0.5]]).unwrap();
    let v = analyze(&PolytopicSystem::autonomous(vec![a]).unwrap(), Analysis::CtCqlf, &opts).unwrap();
    assert_eq!(v.outcome, Outcome::ExistenceProven);
    let b = Matrix::from_rows(vec![vec![0.1, 3.0], vec![0.0, -0.5]]).unwrap();
    let v = analyze(&PolytopicSystem::autonomous(vec![b]).unwrap(), Analysis::CtCqlf, &opts).unwrap();
    assert_eq!(v.outcome, Outcome::NonexistenceProven);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn vertex_order_does_not_change_the_outcome(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let system = random_system(&mut rng);
        let swapped = system.permuted(&[1, 0]).unwrap();
        let opts = AnalyzeOptions::default();
        let a = analyze(&system, Analysis::Stability, &opts).unwrap().outcome;
        let b = analyze(&swapped, Analysis::Stability, &opts).unwrap().outcome;
        if conclusive(a) && conclusive(b) {
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn never_both_alternatives(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let system = random_system(&mut rng);
        let opts = AnalyzeOptions::default();
        let v = analyze(&system, Analysis::Stability, &opts).unwrap();
        let other = match v.outcome {
            Outcome::ExistenceProven => cone_lpv::Side::Dual,
            Outcome::NonexistenceProven => cone_lpv::Side::Primal,
            _ => return Ok(()),
        };
        let problem = cone_lpv::build(&system, Analysis::Stability, other).unwrap();
        let r = cone_lpv::engine::solve(&problem, opts.solve).unwrap();
        prop_assert!(!r.is_feasible());
    }
}
