mod common;

use kpe_core::detect::{
    criterion_ghz, criterion_w, degree_dk, degree_dtilde, detect_report, dk_detects, dtilde_detects,
    functionals, ghz_margin, r_used, ElementAccessor,
};
use kpe_core::families::random::{ginibre_density, random_k_producible, rng};
use kpe_core::families::{element_oracle, make_state, Family, FamilySpec};
use kpe_core::qstate::QubitPermutation;
use rand::Rng;

#[test]
fn soundness_on_k_producible_states() {
    let mut r = rng(4242);
    for trial in 0..500 {
        let n = r.random_range(2..=6);
        let k = r.random_range(1..n);
        let (psi, partition) = random_k_producible(n, k, &mut r).unwrap();
        let rho = psi.to_density().unwrap();
        let mg = criterion_ghz(&rho, k).unwrap();
        let mw = criterion_w(&rho, k).unwrap();
        assert!(mg <= 1e-9 && mw <= 1e-9, "trial {trial} n={n} k={k} {partition}: {mg} {mw}");
        let dk = degree_dk(&rho).unwrap();
        let dt = degree_dtilde(&rho).unwrap();
        assert!(!dk_detects(dk, n, k), "trial {trial}: dk {dk}");
        assert!(!dtilde_detects(dt, k), "trial {trial}: dtilde {dt:?}");
    }
}

#[test]
fn dk_rule_agrees_with_ghz_criterion() {
    let mut r = rng(77);
    for _ in 0..200 {
        let n = r.random_range(2..=4);
        let rho = ginibre_density(n, &mut r).unwrap();
        let f = functionals(&rho).unwrap();
        for k in 1..n {
            let margin = ghz_margin(&f, n, k);
            if margin.abs() < 1e-6 {
                continue;
            }
            let fires = dk_detects(degree_dk(&rho).unwrap(), n, k);
            assert_eq!(fires, margin > 0.0, "n={n} k={k} r={}", r_used(n, k));
        }
    }
    // a GHZ-dominated state exercises the firing side as well
    let spec = FamilySpec::new(Family::Ghz, 4, 0.8).unwrap();
    let rho = make_state(&spec).unwrap();
    assert!(dk_detects(degree_dk(&rho).unwrap(), 4, 1));
    assert!(criterion_ghz(&rho, 1).unwrap() > 0.0);
}

#[test]
fn oracle_and_dense_reports_agree() {
    for n in 2..=8 {
        let ks: Vec<usize> = (1..n).collect();
        for family in [Family::Ghz, Family::W, Family::Dicke { excitations: 2.min(n) }] {
            for p in [0.0, 0.3, 0.7, 1.0] {
                let spec = FamilySpec::new(family.clone(), n, p).unwrap();
                let dense = detect_report(&make_state(&spec).unwrap(), &ks).unwrap();
                let oracle = detect_report(&element_oracle(&spec).unwrap(), &ks).unwrap();
                let (a, b) = (dense.functionals, oracle.functionals);
                for (x, y) in [(a.a, b.a), (a.b, b.b), (a.c, b.c), (a.d, b.d), (a.e, b.e)] {
                    assert!((x - y).abs() <= 1e-12, "{family} n={n} p={p}");
                }
                assert!(dense.dk == oracle.dk || (dense.dk - oracle.dk).abs() <= 1e-12);
                match (dense.dtilde, oracle.dtilde) {
                    (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-12),
                    (x, y) => assert_eq!(x, y),
                }
                assert_eq!(
                    dense.verdicts.iter().map(|v| v.detected).collect::<Vec<_>>(),
                    oracle.verdicts.iter().map(|v| v.detected).collect::<Vec<_>>()
                );
            }
        }
    }
}

#[test]
fn degrees_invariant_under_qubit_permutations() {
    let mut r = rng(31);
    let rho = ginibre_density(4, &mut r).unwrap();
    let base = functionals(&rho).unwrap();
    let dk = degree_dk(&rho).unwrap();
    let dt = degree_dtilde(&rho).unwrap().unwrap();
    for perm in QubitPermutation::all(4) {
        let p = rho.permute_qubits(&perm).unwrap();
        let f = functionals(&p).unwrap();
        assert!((f.b - base.b).abs() < 1e-12 && (f.c - base.c).abs() < 1e-12);
        assert!((degree_dk(&p).unwrap() - dk).abs() < 1e-12);
        assert!((degree_dtilde(&p).unwrap().unwrap() - dt).abs() < 1e-12);
    }
}

#[test]
fn noisy_w6_below_threshold_is_inconclusive_for_k5() {
    let spec = FamilySpec::new(Family::W, 6, 0.9).unwrap();
    let oracle = element_oracle(&spec).unwrap();
    assert!(criterion_w(&oracle, 5).unwrap() < 0.0);
    let spec = FamilySpec::new(Family::W, 6, 0.5).unwrap();
    let report = detect_report(&element_oracle(&spec).unwrap(), &[5]).unwrap();
    let v = report.verdict(5).unwrap();
    assert!(v.via_dtilde && v.detected);
}

#[test]
fn hermitian_access_spot_check() {
    let spec = FamilySpec::new(Family::W, 12, 0.4).unwrap();
    let oracle = element_oracle(&spec).unwrap();
    assert!(kpe_core::detect::hermiticity_spot_check(&oracle).unwrap() < 1e-10);
    assert_eq!(oracle.dim(), 4096);
}

#[test]
fn pure_accessor_matches_density() {
    let mut r = rng(55);
    for n in 2..=5 {
        let psi = kpe_core::families::random::haar_state(n, &mut r).unwrap();
        let a = functionals(&psi).unwrap();
        let b = functionals(&psi.to_density().unwrap()).unwrap();
        for (x, y) in [(a.a, b.a), (a.b, b.b), (a.c, b.c), (a.d, b.d), (a.e, b.e)] {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}
