//! End-to-end acceptance checks. Prints one line per criterion and exits
//! non-zero if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{brute_force_ek, dicke, ghz, w};
use kpe_core::concurrence::ek_pure;
use kpe_core::convexroof::{
    ek_mixed_upper, ek_mixed_upper_seeded, ConvexRoofOptions, Decomposition, Witness,
};
use kpe_core::detect::{
    criterion_ghz, criterion_w, degree_dk, degree_dtilde, detect_report, dk_detects, dtilde_detects,
};
use kpe_core::families::random::{
    ginibre_density, haar_local_unitaries, haar_state, random_k_producible, rng,
};
use kpe_core::families::{
    closed_form_dk_ghz, closed_form_dtilde_w, element_oracle, make_state, thresholds, Family, FamilySpec,
};
use kpe_core::pisym::pi_part;
use kpe_core::qstate::{DensityMatrix, PureState, QubitPermutation};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn p_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 * 0.05).collect()
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

fn ghz_detects(n: usize, k: usize, p: f64) -> bool {
    let spec = FamilySpec::new(Family::Ghz, n, p).unwrap();
    dk_detects(degree_dk(&element_oracle(&spec).unwrap()).unwrap(), n, k)
}

fn w_detects(n: usize, k: usize, p: f64) -> bool {
    let spec = FamilySpec::new(Family::W, n, p).unwrap();
    dtilde_detects(degree_dtilde(&element_oracle(&spec).unwrap()).unwrap(), k)
}

fn ghz_degree_reproduction() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [3, 4, 10] {
        for p in p_grid() {
            let spec = FamilySpec::new(Family::Ghz, n, p).map_err(|e| e.to_string())?;
            let dk = if n <= 8 {
                degree_dk(&make_state(&spec).unwrap()).unwrap()
            } else {
                degree_dk(&element_oracle(&spec).unwrap()).unwrap()
            };
            let expected = ((2f64.powi(n as i32 - 1) + p - 1.0) / (2f64.powi(n as i32 - 2) * p)).log2();
            let dev = (dk - expected).abs();
            worst = worst.max(dev);
            ensure(dev <= 1e-9, || format!("N={n} p={p}: {dk} vs {expected}"))?;
            ensure((closed_form_dk_ghz(n, p) - expected).abs() <= 1e-12, || {
                format!("closed form at N={n} p={p}")
            })?;
        }
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("max deviation {worst:.1e}, {:.2?}", start.elapsed()))
}

fn ghz_threshold_flip() -> Check {
    ensure(!ghz_detects(3, 1, 0.2 - 5e-7) && ghz_detects(3, 1, 0.2 + 5e-7), || "N=3 flip not at 0.2".into())?;
    for n in 3..=6 {
        let formula = (2f64.powi(n as i32 - 1) - 1.0) / (2f64.powi(2 * n as i32 - 2) - 1.0);
        let t = thresholds(&Family::Ghz, n, 1).unwrap().boundary().ok_or("no boundary")?;
        ensure((t - formula).abs() <= 1e-12, || format!("N={n}: threshold {t} vs {formula}"))?;
        ensure(!ghz_detects(n, 1, formula - 5e-7), || format!("N={n}: detected below {formula}"))?;
        ensure(ghz_detects(n, 1, formula + 5e-7), || format!("N={n}: missed above {formula}"))?;
    }
    Ok("flips bracketed to 1e-6 for N=3..6".into())
}

fn w_degree_reproduction() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [6, 8, 12] {
        let nf = n as f64;
        let d = 2f64.powi(n as i32);
        for p in p_grid() {
            let spec = FamilySpec::new(Family::W, n, p).map_err(|e| e.to_string())?;
            let dt = degree_dtilde(&element_oracle(&spec).unwrap()).unwrap().ok_or("degenerate E")?;
            let expected = (nf * d - (nf * d + nf * nf - 2.0 * nf) * p) / (d - (d - nf) * p);
            let dev = (dt - expected).abs();
            worst = worst.max(dev);
            ensure(dev <= 1e-9, || format!("N={n} p={p}: {dt} vs {expected}"))?;
            ensure((closed_form_dtilde_w(n, p) - expected).abs() <= 1e-12, || {
                format!("closed form at N={n} p={p}")
            })?;
        }
    }
    within(Duration::from_secs(30), start)?;
    Ok(format!("max deviation {worst:.1e}, {:.2?}", start.elapsed()))
}

fn w_threshold_flip() -> Check {
    for n in [4, 6, 8] {
        let d = 2f64.powi(n as i32);
        let nf = n as f64;
        let formula = d / (d + 2.0 * nf * nf - 3.0 * nf);
        let t = thresholds(&Family::W, n, n - 1).unwrap().boundary().ok_or("no boundary")?;
        ensure((t - formula).abs() <= 1e-12, || format!("N={n}: threshold {t} vs {formula}"))?;
        ensure(w_detects(n, n - 1, formula - 5e-7), || format!("N={n}: missed below {formula}"))?;
        ensure(!w_detects(n, n - 1, formula + 5e-7), || format!("N={n}: detected above {formula}"))?;
    }
    let t6 = thresholds(&Family::W, 6, 5).unwrap().boundary().unwrap();
    ensure((t6 - 64.0 / 118.0).abs() <= 1e-12, || format!("N=6 boundary {t6}"))?;
    Ok(format!("N=6 boundary {t6:.6}"))
}

fn exact_pure_values() -> Check {
    let start = Instant::now();
    for n in 2..=8 {
        for k in 1..n {
            let v = ek_pure(&ghz(n), k).map_err(|e| e.to_string())?.value;
            ensure((v - 1.0).abs() <= 1e-10, || format!("GHZ N={n} k={k}: {v}"))?;
            let zero = PureState::basis(&vec![0u8; n]).unwrap();
            let v = ek_pure(&zero, k).unwrap().value;
            ensure(v.abs() <= 1e-10, || format!("product N={n} k={k}: {v}"))?;
        }
    }
    for n in 3..=8 {
        let expected = 2.0 * ((n - 1) as f64).sqrt() / n as f64;
        let psi = w(n);
        for k in 1..n {
            let v = ek_pure(&psi, k).unwrap().value;
            ensure((v - expected).abs() <= 1e-10, || format!("W N={n} k={k}: {v} vs {expected}"))?;
            let b = brute_force_ek(&psi, k);
            ensure((v - b).abs() <= 1e-10, || format!("W N={n} k={k}: brute force {b}"))?;
        }
    }
    within(Duration::from_secs(120), start)?;
    Ok(format!("GHZ, W and product values exact, {:.2?}", start.elapsed()))
}

fn criteria_soundness() -> Check {
    let mut r = rng(0x5eed);
    let mut worst = f64::NEG_INFINITY;
    for trial in 0..500 {
        let n = r.random_range(2..=6);
        let k = r.random_range(1..n);
        let (psi, partition) = random_k_producible(n, k, &mut r).map_err(|e| e.to_string())?;
        let rho = psi.to_density().unwrap();
        let mg = criterion_ghz(&rho, k).unwrap();
        let mw = criterion_w(&rho, k).unwrap();
        worst = worst.max(mg).max(mw);
        ensure(mg <= 1e-9 && mw <= 1e-9, || {
            format!("trial {trial} ({partition}, k={k}): margins {mg}, {mw}")
        })?;
        let dk = degree_dk(&rho).unwrap();
        let dt = degree_dtilde(&rho).unwrap();
        ensure(!dk_detects(dk, n, k) && !dtilde_detects(dt, k), || {
            format!("trial {trial} ({partition}, k={k}): degrees {dk}, {dt:?}")
        })?;
        ensure(!detect_report(&rho, &[k]).unwrap().verdicts[0].detected, || {
            format!("trial {trial}: report")
        })?;
    }
    Ok(format!("500 states, largest margin {worst:.1e}"))
}

fn max_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn pi_machinery() -> Check {
    let mut r = rng(77);
    for n in 1..=5 {
        let rho = ginibre_density(n, &mut r).unwrap();
        let pi = pi_part(&rho).map_err(|e| e.to_string())?;
        ensure((pi.trace() - 1.0).abs() <= 1e-10, || format!("N={n}: trace {}", pi.trace()))?;
        let min_eig = pi.eigh().0.iter().copied().fold(f64::INFINITY, f64::min);
        ensure(min_eig >= -1e-10, || format!("N={n}: eigenvalue {min_eig}"))?;
        ensure(max_diff(&pi_part(&pi).unwrap(), &pi) <= 1e-10, || format!("N={n}: not idempotent"))?;
        for perm in QubitPermutation::all(n) {
            ensure(max_diff(&pi.permute_qubits(&perm).unwrap(), &pi) <= 1e-10, || {
                format!("N={n}: not invariant")
            })?;
        }
    }
    let rho = pi_part(&PureState::basis(&[0, 0, 1]).unwrap().to_density().unwrap()).unwrap();
    let opts = ConvexRoofOptions { restarts: 20, seed: 2024, ..Default::default() };
    let a = ek_mixed_upper(&rho, 1, &opts).map_err(|e| e.to_string())?;
    let b = ek_mixed_upper(&rho, 1, &opts).unwrap();
    ensure(a.value <= 0.02, || format!("PI part of |001>: {}", a.value))?;
    ensure(a == b, || "estimate not deterministic".into())?;
    Ok(format!("PI part of |001> bounded by {:.1e}", a.value))
}

fn decomposition_of(est: &Witness, rho: &DensityMatrix) -> Decomposition {
    match est {
        Witness::Decomposition { decomposition } => decomposition.clone(),
        _ => {
            let (_, vecs) = rho.eigh();
            let psi = PureState::normalized(rho.n_qubits(), vecs[0].iter().copied().collect()).unwrap();
            Decomposition::new(vec![1.0], vec![psi]).unwrap()
        }
    }
}

fn property_suites() -> Check {
    let mut r = rng(8);
    // local-unitary invariance
    let mut lu_worst: f64 = 0.0;
    for trial in 0..100 {
        let n = 3 + trial % 3;
        let k = 1 + trial % (n - 1);
        let psi = haar_state(n, &mut r).unwrap();
        let rotated = psi.apply_local(&haar_local_unitaries(n, &mut r)).unwrap();
        let dev = (ek_pure(&psi, k).unwrap().value - ek_pure(&rotated, k).unwrap().value).abs();
        lu_worst = lu_worst.max(dev);
        ensure(dev <= 1e-10, || format!("local unitary trial {trial}: {dev}"))?;
    }
    // subadditivity on products
    for trial in 0..50 {
        let m = if trial % 2 == 0 { 2 } else { 3 };
        let psi = haar_state(2, &mut r).unwrap();
        let phi = haar_state(m, &mut r).unwrap();
        let joint = ek_pure(&psi.tensor(&phi).unwrap(), 1).unwrap().value;
        let sum = ek_pure(&psi, 1).unwrap().value + ek_pure(&phi, 1).unwrap().value;
        ensure(joint <= sum + 1e-12, || format!("subadditivity trial {trial}: {joint} > {sum}"))?;
    }
    // convexity of the estimator
    let opts = ConvexRoofOptions { restarts: 4, seed: 1, ..Default::default() };
    for instance in 0..20 {
        let k = 1 + instance % 2;
        let parts: Vec<DensityMatrix> = (0..2)
            .map(|_| {
                let q: f64 = r.random_range(0.2..0.8);
                let a = haar_state(3, &mut r).unwrap().to_density().unwrap();
                let b = haar_state(3, &mut r).unwrap().to_density().unwrap();
                DensityMatrix::mixture(&[(q, &a), (1.0 - q, &b)]).unwrap()
            })
            .collect();
        let t: f64 = r.random_range(0.1..0.9);
        let rho = DensityMatrix::mixture(&[(t, &parts[0]), (1.0 - t, &parts[1])]).unwrap();
        let e0 = ek_mixed_upper(&parts[0], k, &opts).unwrap();
        let e1 = ek_mixed_upper(&parts[1], k, &opts).unwrap();
        let seed = Decomposition::mix(&[
            (t, &decomposition_of(&e0.witness, &parts[0])),
            (1.0 - t, &decomposition_of(&e1.witness, &parts[1])),
        ])
        .unwrap();
        let joint = ek_mixed_upper_seeded(&rho, k, &opts, &[seed]).unwrap().value;
        let bound = t * e0.value + (1.0 - t) * e1.value;
        ensure(joint <= bound + 0.02, || format!("convexity instance {instance}: {joint} > {bound}"))?;
    }
    // permutation-invariant pure states keep their value
    let opts = ConvexRoofOptions { restarts: 2, ..Default::default() };
    for psi in [ghz(3), ghz(4), ghz(6), w(3), w(5), w(6), dicke(4, 2), dicke(6, 3)] {
        let n = psi.n_qubits();
        let pi = pi_part(&psi.to_density().unwrap()).unwrap();
        let trivial = Decomposition::new(vec![1.0], vec![psi.clone()]).unwrap();
        for k in 1..n {
            let est = ek_mixed_upper_seeded(&pi, k, &opts, std::slice::from_ref(&trivial)).unwrap().value;
            let exact = ek_pure(&psi, k).unwrap().value;
            ensure((est - exact).abs() <= 1e-9, || format!("invariant state N={n} k={k}: {est} vs {exact}"))?;
        }
    }
    Ok(format!("local-unitary deviation {lu_worst:.1e}; subadditivity, convexity, invariant states hold"))
}

fn asymptotic_remarks() -> Check {
    let t = thresholds(&Family::Ghz, 20, 1).unwrap().boundary().ok_or("no boundary")?;
    ensure(t < 2e-5, || format!("GHZ N=20 threshold {t}"))?;
    let mut lowest = f64::INFINITY;
    for n in 12..=30 {
        let tw = thresholds(&Family::W, n, n - 1).unwrap().boundary().ok_or("no boundary")?;
        lowest = lowest.min(tw);
        ensure(tw > 0.9, || format!("W N={n} threshold {tw}"))?;
    }
    Ok(format!("GHZ N=20 threshold {t:.2e}; W thresholds for N=12..30 at least {lowest:.4}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("GHZ degree matches closed form", ghz_degree_reproduction),
        ("GHZ threshold flip", ghz_threshold_flip),
        ("W degree matches closed form", w_degree_reproduction),
        ("W threshold flip", w_threshold_flip),
        ("exact pure-state values", exact_pure_values),
        ("criteria soundness on k-producible states", criteria_soundness),
        ("permutation-invariant part machinery", pi_machinery),
        ("measure property suites", property_suites),
        ("large-N threshold behaviour", asymptotic_remarks),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("[PASS] {}. {name}: {detail}", i + 1),
            Ok(Err(why)) => {
                failures += 1;
                println!("[FAIL] {}. {name}: {why}", i + 1);
            }
            Err(_) => {
                failures += 1;
                println!("[FAIL] {}. {name}: panicked", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
