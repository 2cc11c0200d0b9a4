#![allow(dead_code)]

use std::collections::HashMap;

use kpe_core::families::{Family, FamilySpec};
use kpe_core::qstate::{PureState, QubitSubset};

pub fn ghz(n: usize) -> PureState {
    FamilySpec::new(Family::Ghz, n, 1.0).unwrap().target_state().unwrap()
}

pub fn w(n: usize) -> PureState {
    FamilySpec::new(Family::W, n, 0.0).unwrap().target_state().unwrap()
}

pub fn dicke(n: usize, e: usize) -> PureState {
    FamilySpec::new(Family::Dicke { excitations: e }, n, 0.0).unwrap().target_state().unwrap()
}

/// All partitions of 1..=n with blocks of size ≤ k, by inserting each
/// element into every existing block or a fresh one.
pub fn all_partitions(n: usize, k: usize) -> Vec<Vec<Vec<usize>>> {
    fn grow(j: usize, n: usize, k: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if j > n {
            out.push(cur.clone());
            return;
        }
        for b in 0..cur.len() {
            if cur[b].len() < k {
                cur[b].push(j);
                grow(j + 1, n, k, cur, out);
                cur[b].pop();
            }
        }
        cur.push(vec![j]);
        grow(j + 1, n, k, cur, out);
        cur.pop();
    }
    let mut out = Vec::new();
    grow(1, n, k, &mut Vec::new(), &mut out);
    out
}

/// Brute-force measure: dense projector, dense partial trace, `1 − Tr ρ²`.
pub fn brute_force_ek(psi: &PureState, k: usize) -> f64 {
    let n = psi.n_qubits();
    let rho = psi.to_density().unwrap();
    let mut cache: HashMap<Vec<usize>, f64> = HashMap::new();
    all_partitions(n, k)
        .iter()
        .map(|p| {
            p.iter()
                .map(|b| {
                    *cache.entry(b.clone()).or_insert_with(|| {
                        let red = rho.partial_trace(&QubitSubset::new(b.clone(), n).unwrap()).unwrap();
                        (2.0 * (1.0 - red.purity()).max(0.0)).sqrt()
                    })
                })
                .sum::<f64>()
                / p.len() as f64
        })
        .fold(f64::INFINITY, f64::min)
}
