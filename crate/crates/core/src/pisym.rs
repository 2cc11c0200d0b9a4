//! Permutationally invariant parts and the local-unitary lower-bound search.
//!
//! `pi_part(ρ) = (1/N!) Σ_π Π ρ Π†` averages over every qubit permutation.
//! Because the (k+1)-PE concurrence is invariant under permutations and local
//! unitaries and is convex, `E_k(ρ) ≥ E_k(pi_part(U ρ U†))` for every local
//! unitary `U`. [`lower_bound_search`] maximizes the right-hand side.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::concurrence::{check_k, ek_pure};
use crate::convexroof::{
    derive_seed, ek_mixed_upper_seeded, ConvexRoofOptions, Decomposition, EstimateStatus, MeasureEstimate,
    Witness, RANK_THRESHOLD,
};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::qstate::{su2_from_euler, DensityMatrix, PureState, QubitPermutation, Unitary2};
use crate::{Error, Result};

/// Largest qubit count for the explicit N!-term permutation sum.
pub const PI_CAP: usize = 8;
/// A rotated PI part counts as pure when its top eigenvalue is at least `1 - PURE_TOL`.
pub const PURE_TOL: f64 = 1e-9;

const POLISH_RESTARTS: usize = 4;
const POLISH_ITERS: usize = 200;
/// Heuristic values must beat certified ones by more than this to be reported.
const CERTIFIED_SLACK: f64 = 1e-9;

/// Euler angles `(α, β, γ)` per qubit; qubit `q` gets `Rz(α) Ry(β) Rz(γ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct LocalUnitaryParams {
    angles: Vec<[f64; 3]>,
}

impl LocalUnitaryParams {
    pub fn new(angles: Vec<[f64; 3]>) -> Result<Self> {
        if angles.iter().flatten().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("Euler angles must be finite".into()));
        }
        Ok(Self { angles })
    }

    pub fn identity(n: usize) -> Self {
        Self { angles: vec![[0.0; 3]; n] }
    }

    fn from_flat(x: &[f64]) -> Self {
        Self { angles: x.chunks(3).map(|c| [c[0], c[1], c[2]]).collect() }
    }

    fn to_flat(&self) -> Vec<f64> {
        self.angles.iter().flatten().copied().collect()
    }

    pub fn angles(&self) -> &[[f64; 3]] {
        &self.angles
    }

    pub fn n_qubits(&self) -> usize {
        self.angles.len()
    }

    pub fn factors(&self) -> Vec<Unitary2> {
        self.angles.iter().map(|a| su2_from_euler(a[0], a[1], a[2])).collect()
    }
}

fn check_pi_cap(n: usize) -> Result<()> {
    if n > PI_CAP {
        return Err(Error::FactorialGuard { n, cap: PI_CAP });
    }
    Ok(())
}

/// Average of `ρ` over all `N!` qubit permutations, summed in lexicographic
/// permutation order.
pub fn pi_part(rho: &DensityMatrix) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    check_pi_cap(n)?;
    let d = rho.dim();
    let perms = QubitPermutation::all(n);
    let scale = 1.0 / perms.len() as f64;
    let src = rho.matrix();
    let mut acc = vec![Complex64::new(0.0, 0.0); d * d];
    for p in &perms {
        let t = p.index_table();
        for b in 0..d {
            let col = t[b] * d;
            for a in 0..d {
                acc[col + t[a]] += src[(a, b)];
            }
        }
    }
    let m = DMatrix::from_column_slice(d, d, &acc) * Complex64::new(scale, 0.0);
    DensityMatrix::new(n, m)
}

/// `pi_part(U ρ U†)`.
pub fn pi_part_rotated(rho: &DensityMatrix, u: &LocalUnitaryParams) -> Result<DensityMatrix> {
    if u.n_qubits() != rho.n_qubits() {
        return Err(Error::DimensionMismatch { expected: rho.n_qubits(), actual: u.n_qubits() });
    }
    check_pi_cap(rho.n_qubits())?;
    pi_part(&rho.apply_local(&u.factors())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LowerBoundOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Settings for the convex-roof estimate used when a rotated PI part is
    /// mixed. Without an explicit ensemble size the isometry is square; the
    /// default `max_iters: 0` only scores the eigen-ensemble and any seed.
    pub inner: ConvexRoofOptions,
}

impl Default for LowerBoundOptions {
    fn default() -> Self {
        Self {
            restarts: 30,
            max_iters: 200,
            seed: 0,
            inner: ConvexRoofOptions { ensemble_size: None, restarts: 1, max_iters: 0, seed: 0 },
        }
    }
}

struct InnerValue {
    value: f64,
    certified: bool,
    rank: usize,
    witness: Witness,
}

/// A decomposition of the input and its average measure. Its permuted
/// local-unitary images decompose every rotated PI part at the same average,
/// so it caps every inner estimate.
struct Cap {
    value: f64,
    decomposition: Decomposition,
}

fn inner_value(
    rho: &DensityMatrix,
    pure_input: Option<&PureState>,
    cap: Option<&Cap>,
    u: &LocalUnitaryParams,
    k: usize,
    inner: &ConvexRoofOptions,
) -> Result<InnerValue> {
    let factors = u.factors();
    let rotated_pi = pi_part(&rho.apply_local(&factors)?)?;
    if let Some(psi) = rotated_pi.as_pure(PURE_TOL) {
        let r = ek_pure(&psi, k)?;
        return Ok(InnerValue {
            value: r.value,
            certified: true,
            rank: 1,
            witness: Witness::Partition { partition: r.argmin_partition },
        });
    }
    let seeds = match pure_input {
        Some(psi) => vec![Decomposition::permutation_ensemble(&psi.apply_local(&factors)?)?],
        None => vec![],
    };
    // square isometries unless the caller asked otherwise; the inner search runs per outer step
    let inner = match inner.ensemble_size {
        Some(_) => *inner,
        None => {
            let rank = rotated_pi.eigh().0.iter().filter(|v| **v > RANK_THRESHOLD).count();
            ConvexRoofOptions { ensemble_size: Some(rank), ..*inner }
        }
    };
    let est = ek_mixed_upper_seeded(&rotated_pi, k, &inner, &seeds)?;
    if let Some(c) = cap.filter(|c| c.value < est.value) {
        return Ok(InnerValue {
            value: c.value,
            certified: false,
            rank: est.rank,
            witness: Witness::Symmetrized { decomposition: c.decomposition.clone() },
        });
    }
    Ok(InnerValue { value: est.value, certified: false, rank: est.rank, witness: est.witness })
}

#[derive(Debug, Clone)]
struct Best {
    value: f64,
    angles: Vec<f64>,
}

fn keep_better(slot: &mut Option<Best>, value: f64, x: &[f64]) {
    if slot.as_ref().is_none_or(|b| value > b.value) {
        *slot = Some(Best { value, angles: x.to_vec() });
    }
}

/// Best found `max_U E_k(pi_part(U ρ U†))`, a lower bound on `E_k(ρ)`.
///
/// The status is [`EstimateStatus::Exact`] when the reported value is the
/// exact measure of a pure rotated PI part, which makes it a certified
/// lower bound. Otherwise the inner value is itself only a convex-roof upper
/// estimate and the result is [`EstimateStatus::HeuristicLowerBound`]. Inner
/// estimates never exceed the average measure of the best decomposition
/// found for `ρ`, since its symmetrized images decompose every rotated PI part.
pub fn lower_bound_search(
    rho: &DensityMatrix,
    k: usize,
    opts: &LowerBoundOptions,
) -> Result<MeasureEstimate> {
    let n = rho.n_qubits();
    check_pi_cap(n)?;
    check_k(n, k)?;
    let pure_input = rho.as_pure(PURE_TOL);
    let inner = ConvexRoofOptions { seed: opts.inner.seed ^ opts.seed, ..opts.inner };
    // the search scores mixed PI parts with a cheap inner estimate; the best
    // heuristic point is re-scored with a fuller one before the comparison
    let polish = ConvexRoofOptions {
        restarts: inner.restarts.max(POLISH_RESTARTS),
        max_iters: inner.max_iters.max(POLISH_ITERS),
        ..inner
    };
    let cap = match &pure_input {
        Some(psi) => Some(Cap {
            value: ek_pure(psi, k)?.value,
            decomposition: Decomposition::new(vec![1.0], vec![psi.clone()])?,
        }),
        None => match ek_mixed_upper_seeded(rho, k, &polish, &[])?.witness {
            Witness::Decomposition { decomposition } => {
                Some(Cap { value: decomposition.average_measure(k)?, decomposition })
            }
            _ => None,
        },
    };

    let mut starts = vec![LocalUnitaryParams::identity(n).to_flat()];
    for i in 1..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, i as u64));
        starts.push(
            (0..n)
                .flat_map(|_| {
                    [
                        rng.random_range(0.0..std::f64::consts::TAU),
                        rng.random_range(0.0..std::f64::consts::PI),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    ]
                })
                .collect(),
        );
    }

    let nm = NelderMeadOptions { max_iters: opts.max_iters, ..Default::default() };
    let outcomes: Vec<Result<(Option<Best>, Option<Best>)>> = starts
        .par_iter()
        .map(|x0| {
            let mut certified: Option<Best> = None;
            let mut heuristic: Option<Best> = None;
            let mut failure = None;
            nelder_mead(
                |x| {
                    let u = LocalUnitaryParams::from_flat(x);
                    match inner_value(rho, pure_input.as_ref(), cap.as_ref(), &u, k, &inner) {
                        Ok(v) => {
                            let slot = if v.certified { &mut certified } else { &mut heuristic };
                            keep_better(slot, v.value, x);
                            -v.value
                        }
                        Err(e) => {
                            failure.get_or_insert(e);
                            f64::INFINITY
                        }
                    }
                },
                x0,
                &nm,
            );
            match failure {
                Some(e) => Err(e),
                None => Ok((certified, heuristic)),
            }
        })
        .collect();

    let mut optimizer_trace = Vec::with_capacity(outcomes.len());
    let mut best_cert: Option<Best> = None;
    let mut best_heur: Option<Best> = None;
    for o in outcomes {
        let (c, h) = o?;
        let top =
            [&c, &h].iter().filter_map(|b| b.as_ref().map(|b| b.value)).fold(f64::NEG_INFINITY, f64::max);
        optimizer_trace.push(top);
        if let Some(c) = c {
            keep_better(&mut best_cert, c.value, &c.angles);
        }
        if let Some(h) = h {
            keep_better(&mut best_heur, h.value, &h.angles);
        }
    }

    let rescore = |b: &Best, o: &ConvexRoofOptions| -> Result<(LocalUnitaryParams, InnerValue)> {
        let angles = LocalUnitaryParams::from_flat(&b.angles);
        let v = inner_value(rho, pure_input.as_ref(), cap.as_ref(), &angles, k, o)?;
        Ok((angles, v))
    };
    let cert = best_cert.as_ref().map(|b| rescore(b, &inner)).transpose()?;
    let heur = best_heur.as_ref().map(|b| rescore(b, &polish)).transpose()?;
    let (angles, v) = match (cert, heur) {
        (Some(c), Some(h)) if h.1.value > c.1.value + CERTIFIED_SLACK => h,
        (Some(c), _) => c,
        (None, Some(h)) => h,
        (None, None) => unreachable!("every restart evaluates its starting point"),
    };
    Ok(MeasureEstimate {
        value: v.value,
        status: if v.certified { EstimateStatus::Exact } else { EstimateStatus::HeuristicLowerBound },
        witness: Witness::LocalUnitary { angles, inner: Box::new(v.witness) },
        optimizer_trace,
        seed: opts.seed,
        rank: v.rank,
        ensemble_size: 0,
        dropped_weight: 0.0,
    })
}
