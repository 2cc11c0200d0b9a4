mod common;

use common::{brute_force_ek, dicke, ghz, w};
use kpe_core::concurrence::ek_pure;
use kpe_core::families::random::{haar_local_unitaries, haar_state, random_k_producible, rng};
use kpe_core::qstate::QubitPermutation;
use rand::Rng;

#[test]
fn local_unitary_invariance() {
    let mut r = rng(2024);
    for trial in 0..100 {
        let n = 3 + trial % 3;
        let k = 1 + trial % (n - 1);
        let psi = haar_state(n, &mut r).unwrap();
        let rotated = psi.apply_local(&haar_local_unitaries(n, &mut r)).unwrap();
        let a = ek_pure(&psi, k).unwrap().value;
        let b = ek_pure(&rotated, k).unwrap().value;
        assert!((a - b).abs() < 1e-10, "trial {trial}: {a} vs {b}");
    }
}

#[test]
fn permutation_covariance() {
    let mut r = rng(7);
    for n in [3, 4] {
        let psi = haar_state(n, &mut r).unwrap();
        for k in 1..n {
            let base = ek_pure(&psi, k).unwrap().value;
            for perm in QubitPermutation::all(n) {
                let v = ek_pure(&psi.permute_qubits(&perm).unwrap(), k).unwrap().value;
                assert!((v - base).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn monotone_in_k() {
    let mut r = rng(11);
    for n in 2..=6 {
        for _ in 0..3 {
            let psi = haar_state(n, &mut r).unwrap();
            let values: Vec<f64> = (1..n).map(|k| ek_pure(&psi, k).unwrap().value).collect();
            assert!(values.windows(2).all(|v| v[1] <= v[0] + 1e-15), "n={n}: {values:?}");
        }
    }
}

#[test]
fn subadditive_on_products() {
    let mut r = rng(13);
    for trial in 0..50 {
        let m = if trial % 2 == 0 { 2 } else { 3 };
        let psi = haar_state(2, &mut r).unwrap();
        let phi = haar_state(m, &mut r).unwrap();
        let joint = ek_pure(&psi.tensor(&phi).unwrap(), 1).unwrap().value;
        let sum = ek_pure(&psi, 1).unwrap().value + ek_pure(&phi, 1).unwrap().value;
        assert!(joint <= sum + 1e-12, "trial {trial}: {joint} > {sum}");
    }
}

#[test]
fn vanishes_on_k_producible_states() {
    let mut r = rng(17);
    for _ in 0..60 {
        let n = r.random_range(2..=6);
        let k = r.random_range(1..n);
        let (psi, partition) = random_k_producible(n, k, &mut r).unwrap();
        let res = ek_pure(&psi, k).unwrap();
        assert!(res.value <= 1e-9, "n={n} k={k} partition {partition}: {}", res.value);
    }
}

#[test]
fn positive_on_ghz_and_w() {
    for n in 2..=7 {
        for k in 1..n {
            assert!(ek_pure(&ghz(n), k).unwrap().value > 1e-6);
            assert!(ek_pure(&w(n), k).unwrap().value > 1e-6);
        }
    }
}

#[test]
fn matches_brute_force_scan() {
    let mut r = rng(23);
    for n in 2..=5 {
        for k in 1..n {
            let psi = haar_state(n, &mut r).unwrap();
            let fast = ek_pure(&psi, k).unwrap().value;
            assert!((fast - brute_force_ek(&psi, k)).abs() < 1e-10, "n={n} k={k}");
        }
    }
    for k in 1..5 {
        let psi = dicke(5, 2);
        assert!((ek_pure(&psi, k).unwrap().value - brute_force_ek(&psi, k)).abs() < 1e-10);
    }
}

#[test]
fn w3_ties_keep_first_partition() {
    // every partition of W3 with k = 2 has the same mean
    let res = ek_pure(&w(3), 2).unwrap();
    assert_eq!(res.argmin_partition.to_string(), "{1}|{2}|{3}");
    assert!((res.value - 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-12);
}
