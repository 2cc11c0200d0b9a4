//! Upper bounds on the mixed-state (k+1)-PE concurrence.
//!
//! The mixed-state measure is the convex roof
//! `E_k(ρ) = inf Σ_i p_i E_k(|ψ_i⟩)` over pure-state ensembles of `ρ`.
//! Any length-`L` ensemble is `√p_i |ψ_i⟩ = Σ_j U_ij √λ_j |e_j⟩` for an
//! `L × r` isometry `U` and the eigenpairs `(λ_j, |e_j⟩)` of `ρ`; the search
//! runs Nelder–Mead over a real parametrization of `U` and reports the best
//! ensemble found. The result is always an upper bound unless `ρ` is pure.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::concurrence::{check_k, ek_pure};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::partitions::Partition;
use crate::pisym::LocalUnitaryParams;
use crate::qstate::{DensityMatrix, PureState, QubitPermutation};
use crate::{Error, Result};

/// Eigenvalues at or below this are dropped before building ensembles.
pub const RANK_THRESHOLD: f64 = 1e-10;
/// Upper bound on the default ensemble length.
pub const MAX_DEFAULT_ENSEMBLE: usize = 24;
/// Entrywise tolerance for a decomposition to count as reproducing a state.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

const WEIGHT_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConvexRoofOptions {
    /// Ensemble length; `None` picks `max(r², 2r)` capped at
    /// [`MAX_DEFAULT_ENSEMBLE`] (but never below the rank `r`).
    pub ensemble_size: Option<usize>,
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for ConvexRoofOptions {
    fn default() -> Self {
        Self { ensemble_size: None, restarts: 20, max_iters: 500, seed: 0 }
    }
}

/// A pure-state ensemble `{p_i, |ψ_i⟩}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub weights: Vec<f64>,
    pub states: Vec<PureState>,
}

impl Decomposition {
    pub fn new(weights: Vec<f64>, states: Vec<PureState>) -> Result<Self> {
        if weights.is_empty() || weights.len() != states.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} states",
                weights.len(),
                states.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| w.is_nan() || **w < 0.0) {
            return Err(Error::InvalidParameter(format!("negative or NaN weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        let n = states[0].n_qubits();
        if let Some(s) = states.iter().find(|s| s.n_qubits() != n) {
            return Err(Error::DimensionMismatch { expected: n, actual: s.n_qubits() });
        }
        Ok(Self { weights, states })
    }

    /// The uniform ensemble `{1/N!, Π|ψ⟩}` over all qubit permutations, which
    /// decomposes the permutationally invariant part of `|ψ⟩⟨ψ|`.
    pub fn permutation_ensemble(psi: &PureState) -> Result<Self> {
        let perms = QubitPermutation::all(psi.n_qubits());
        let w = 1.0 / perms.len() as f64;
        let states = perms.iter().map(|p| psi.permute_qubits(p)).collect::<Result<Vec<_>>>()?;
        Self::new(vec![w; states.len()], states)
    }

    /// Concatenation of `Σ_j q_j · (decomposition j)`.
    pub fn mix(parts: &[(f64, &Decomposition)]) -> Result<Self> {
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for (q, d) in parts {
            weights.extend(d.weights.iter().map(|w| q * w));
            states.extend(d.states.iter().cloned());
        }
        Self::new(weights, states)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let n = self.states[0].n_qubits();
        let d = self.states[0].dim();
        let mut m = DMatrix::from_element(d, d, Complex64::new(0.0, 0.0));
        for (w, s) in self.weights.iter().zip(&self.states) {
            let v = DVector::from_column_slice(s.amplitudes());
            m += (&v * v.adjoint()) * Complex64::new(*w, 0.0);
        }
        DensityMatrix::new(n, m)
    }

    /// Largest entrywise deviation between the ensemble average and `rho`.
    pub fn deviation_from(&self, rho: &DensityMatrix) -> Result<f64> {
        let m = self.to_density()?;
        if m.dim() != rho.dim() {
            return Err(Error::DimensionMismatch { expected: rho.dim(), actual: m.dim() });
        }
        Ok((m.matrix() - rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    /// `Σ_i p_i E_k(|ψ_i⟩)`.
    pub fn average_measure(&self, k: usize) -> Result<f64> {
        let mut total = 0.0;
        for (w, s) in self.weights.iter().zip(&self.states) {
            if *w > WEIGHT_FLOOR {
                total += w * ek_pure(s, k)?.value;
            }
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimateStatus {
    Exact,
    UpperBound,
    HeuristicLowerBound,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    Partition {
        partition: Partition,
    },
    Decomposition {
        decomposition: Decomposition,
    },
    LocalUnitary {
        angles: LocalUnitaryParams,
        inner: Box<Witness>,
    },
    /// A decomposition of the input state whose local-unitary image,
    /// averaged over qubit permutations, decomposes the enclosing rotated
    /// PI part with the same average measure.
    Symmetrized {
        decomposition: Decomposition,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub value: f64,
    pub status: EstimateStatus,
    pub witness: Witness,
    /// Best value reached by each restart, in restart order.
    pub optimizer_trace: Vec<f64>,
    pub seed: u64,
    /// Number of eigenvalues above [`RANK_THRESHOLD`].
    pub rank: usize,
    pub ensemble_size: usize,
    /// Total eigenvalue weight removed by rank truncation.
    pub dropped_weight: f64,
}

/// Seed for restart `index`, derived from the master seed with splitmix64.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Eigen-ensemble of `ρ` after rank truncation: columns are `√λ_j |e_j⟩`.
struct Spectrum {
    n_qubits: usize,
    scaled: DMatrix<Complex64>,
    eigvecs: Vec<DVector<Complex64>>,
    eigvals: Vec<f64>,
    dropped_weight: f64,
}

impl Spectrum {
    fn of(rho: &DensityMatrix) -> Result<Self> {
        let (values, vectors) = rho.eigh();
        let kept: Vec<usize> = (0..values.len()).filter(|&i| values[i] > RANK_THRESHOLD).collect();
        if kept.is_empty() {
            return Err(Error::NotPositive { min_eigenvalue: values[0], floor: RANK_THRESHOLD });
        }
        let total: f64 = kept.iter().map(|&i| values[i]).sum();
        let dropped_weight = values.iter().map(|v| v.max(0.0)).sum::<f64>() - total;
        let eigvals: Vec<f64> = kept.iter().map(|&i| values[i] / total).collect();
        let eigvecs: Vec<DVector<Complex64>> = kept.iter().map(|&i| vectors[i].clone()).collect();
        let scaled = DMatrix::from_fn(rho.dim(), kept.len(), |a, j| {
            eigvecs[j][a] * Complex64::new(eigvals[j].sqrt(), 0.0)
        });
        Ok(Self { n_qubits: rho.n_qubits(), scaled, eigvecs, eigvals, dropped_weight })
    }

    fn rank(&self) -> usize {
        self.eigvals.len()
    }

    /// Subnormalized ensemble members `√p_i |ψ_i⟩` as columns.
    fn members(&self, isometry: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        &self.scaled * isometry.transpose()
    }

    fn decomposition(&self, isometry: &DMatrix<Complex64>) -> Result<Decomposition> {
        let cols = self.members(isometry);
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for col in cols.column_iter() {
            let p = col.norm_squared();
            if p > WEIGHT_FLOOR {
                weights.push(p);
                states.push(PureState::normalized(self.n_qubits, col.iter().copied().collect())?);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Decomposition::new(weights, states)
    }

    fn objective(&self, isometry: &DMatrix<Complex64>, k: usize) -> f64 {
        let cols = self.members(isometry);
        let mut total = 0.0;
        for col in cols.column_iter() {
            let p = col.norm_squared();
            if p <= WEIGHT_FLOOR {
                continue;
            }
            let psi = match PureState::normalized(self.n_qubits, col.iter().copied().collect()) {
                Ok(s) => s,
                Err(_) => return f64::INFINITY,
            };
            match ek_pure(&psi, k) {
                Ok(r) => total += p * r.value,
                Err(_) => return f64::INFINITY,
            }
        }
        total
    }

    /// Isometry rows reproducing a given decomposition: `U_ij = ⟨e_j|√p_i ψ_i⟩ / √λ_j`.
    fn isometry_of(&self, d: &Decomposition) -> DMatrix<Complex64> {
        let r = self.rank();
        DMatrix::from_fn(d.len(), r, |i, j| {
            let amp: Complex64 =
                self.eigvecs[j].iter().zip(d.states[i].amplitudes()).map(|(e, a)| e.conj() * a).sum();
            amp * Complex64::new((d.weights[i] / self.eigvals[j]).sqrt(), 0.0)
        })
    }
}

fn params_to_matrix(x: &[f64], rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |i, j| {
        let t = 2 * (i * cols + j);
        Complex64::new(x[t], x[t + 1])
    })
}

fn matrix_to_params(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut x = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            x.push(m[(i, j)].re);
            x.push(m[(i, j)].im);
        }
    }
    x
}

/// Orthonormalizes columns by modified Gram–Schmidt. `None` if the columns
/// are numerically dependent.
fn orthonormalize(mut m: DMatrix<Complex64>) -> Option<DMatrix<Complex64>> {
    for j in 0..m.ncols() {
        for i in 0..j {
            let proj: Complex64 = m.column(i).dotc(&m.column(j));
            let ci = m.column(i).into_owned();
            m.column_mut(j).axpy(-proj, &ci, Complex64::new(1.0, 0.0));
        }
        let norm = m.column(j).norm();
        if norm.is_nan() || norm <= 1e-10 {
            return None;
        }
        m.column_mut(j).unscale_mut(norm);
    }
    Some(m)
}

#[derive(Debug, Clone)]
enum Start {
    Eigen,
    Seeded(DMatrix<Complex64>),
    Random(u64),
}

struct RestartOutcome {
    value: f64,
    isometry: DMatrix<Complex64>,
}

fn run_restart(
    spectrum: &Spectrum,
    k: usize,
    length: usize,
    start: &Start,
    max_iters: usize,
) -> RestartOutcome {
    let r = spectrum.rank();
    let initial = match start {
        Start::Eigen => {
            DMatrix::from_fn(length, r, |i, j| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0))
        }
        Start::Seeded(u) => u.clone(),
        Start::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            DMatrix::from_fn(length, r, |_, _| {
                Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            })
        }
    };
    let rows = initial.nrows();
    let f = |x: &[f64]| match orthonormalize(params_to_matrix(x, rows, r)) {
        Some(u) => spectrum.objective(&u, k),
        None => f64::INFINITY,
    };
    let x0 = matrix_to_params(&initial);
    let opts = NelderMeadOptions { max_iters, ..Default::default() };
    let res = nelder_mead(f, &x0, &opts);
    let isometry = orthonormalize(params_to_matrix(&res.x, rows, r))
        .or_else(|| orthonormalize(initial))
        .expect("starting isometry has independent columns");
    RestartOutcome { value: res.value, isometry }
}

/// Default ensemble length for rank `r`.
pub fn default_ensemble_size(rank: usize) -> usize {
    (rank * rank).max(2 * rank).min(MAX_DEFAULT_ENSEMBLE).max(rank)
}

/// Upper bound on `E_k(ρ)` from an optimized pure-state ensemble.
pub fn ek_mixed_upper(rho: &DensityMatrix, k: usize, opts: &ConvexRoofOptions) -> Result<MeasureEstimate> {
    ek_mixed_upper_seeded(rho, k, opts, &[])
}

/// As [`ek_mixed_upper`], additionally starting local searches from the
/// given decompositions of `rho` and counting their own averages as
/// candidates. Seeds must reproduce `rho` within [`DECOMPOSITION_TOL`].
pub fn ek_mixed_upper_seeded(
    rho: &DensityMatrix,
    k: usize,
    opts: &ConvexRoofOptions,
    seeds: &[Decomposition],
) -> Result<MeasureEstimate> {
    let n = rho.n_qubits();
    check_k(n, k)?;
    let spectrum = Spectrum::of(rho)?;
    let r = spectrum.rank();
    let length = opts.ensemble_size.unwrap_or_else(|| default_ensemble_size(r));
    if length < r {
        return Err(Error::InfeasibleEnsemble { length, rank: r });
    }

    for s in seeds {
        let dev = s.deviation_from(rho)?;
        if dev > DECOMPOSITION_TOL {
            return Err(Error::InvalidParameter(format!(
                "seed decomposition deviates from the state by {dev:e}"
            )));
        }
    }

    if r == 1 {
        let psi = PureState::normalized(n, spectrum.eigvecs[0].iter().copied().collect())?;
        let pure = ek_pure(&psi, k)?;
        return Ok(MeasureEstimate {
            value: pure.value,
            status: EstimateStatus::Exact,
            witness: Witness::Partition { partition: pure.argmin_partition },
            optimizer_trace: vec![pure.value],
            seed: opts.seed,
            rank: 1,
            ensemble_size: 1,
            dropped_weight: spectrum.dropped_weight,
        });
    }

    let mut starts = vec![(Start::Eigen, length)];
    for s in seeds {
        let mut u = spectrum.isometry_of(s);
        if u.nrows() < length {
            u = u.resize_vertically(length, Complex64::new(0.0, 0.0));
        }
        let rows = u.nrows();
        starts.push((Start::Seeded(u), rows));
    }
    for i in 1..opts.restarts.max(1) {
        starts.push((Start::Random(derive_seed(opts.seed, i as u64)), length));
    }

    let outcomes: Vec<RestartOutcome> = starts
        .par_iter()
        .map(|(start, rows)| run_restart(&spectrum, k, *rows, start, opts.max_iters))
        .collect();

    let optimizer_trace: Vec<f64> = outcomes.iter().map(|o| o.value).collect();
    let best = (0..outcomes.len())
        .min_by(|&a, &b| outcomes[a].value.total_cmp(&outcomes[b].value))
        .expect("at least one restart");
    let mut decomposition = spectrum.decomposition(&outcomes[best].isometry)?;
    let mut value = decomposition.average_measure(k)?;

    // a seed's own average can beat its reconstructed isometry when the
    // rank truncation removed weight it depends on
    for s in seeds {
        let v = s.average_measure(k)?;
        if v < value {
            value = v;
            decomposition = s.clone();
        }
    }

    Ok(MeasureEstimate {
        value,
        status: EstimateStatus::UpperBound,
        witness: Witness::Decomposition { decomposition },
        optimizer_trace,
        seed: opts.seed,
        rank: r,
        ensemble_size: length,
        dropped_weight: spectrum.dropped_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ghz(n: usize) -> PureState {
        let mut a = vec![Complex64::new(0.0, 0.0); 1 << n];
        a[0] = Complex64::new(0.5f64.sqrt(), 0.0);
        a[(1 << n) - 1] = a[0];
        PureState::new(n, a).unwrap()
    }

    fn quick(seed: u64) -> ConvexRoofOptions {
        ConvexRoofOptions { ensemble_size: None, restarts: 4, max_iters: 150, seed }
    }

    #[test]
    fn rank_one_is_exact() {
        let rho = ghz(3).to_density().unwrap();
        let est = ek_mixed_upper(&rho, 2, &ConvexRoofOptions::default()).unwrap();
        assert_eq!(est.status, EstimateStatus::Exact);
        assert!((est.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_mixture_of_products_reaches_zero() {
        let a = PureState::basis(&[0, 0, 0]).unwrap().to_density().unwrap();
        let b = PureState::basis(&[1, 1, 1]).unwrap().to_density().unwrap();
        let rho = DensityMatrix::mixture(&[(0.5, &a), (0.5, &b)]).unwrap();
        let est = ek_mixed_upper(&rho, 1, &quick(7)).unwrap();
        assert_eq!(est.status, EstimateStatus::UpperBound);
        assert!(est.value <= 1e-6, "{}", est.value);
        if let Witness::Decomposition { decomposition } = &est.witness {
            assert!(decomposition.deviation_from(&rho).unwrap() < DECOMPOSITION_TOL);
        } else {
            panic!("expected a decomposition witness");
        }
    }

    #[test]
    fn witness_reproduces_state_and_value() {
        let g = ghz(3).to_density().unwrap();
        let noise = DensityMatrix::maximally_mixed(3).unwrap();
        let rho = DensityMatrix::mixture(&[(0.7, &g), (0.3, &noise)]).unwrap();
        let est = ek_mixed_upper(&rho, 1, &quick(3)).unwrap();
        let Witness::Decomposition { decomposition } = &est.witness else { panic!() };
        assert!(decomposition.deviation_from(&rho).unwrap() < DECOMPOSITION_TOL);
        assert!((decomposition.average_measure(1).unwrap() - est.value).abs() < 1e-12);
        assert_eq!(est.rank, 8);
        assert_eq!(est.ensemble_size, MAX_DEFAULT_ENSEMBLE);
    }

    #[test]
    fn seeded_runs_are_deterministic() {
        let g = ghz(3).to_density().unwrap();
        let noise = DensityMatrix::maximally_mixed(3).unwrap();
        let rho = DensityMatrix::mixture(&[(0.5, &g), (0.5, &noise)]).unwrap();
        let a = ek_mixed_upper(&rho, 2, &quick(11)).unwrap();
        let b = ek_mixed_upper(&rho, 2, &quick(11)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn more_restarts_never_worse() {
        let g = ghz(3).to_density().unwrap();
        let noise = DensityMatrix::maximally_mixed(3).unwrap();
        let rho = DensityMatrix::mixture(&[(0.6, &g), (0.4, &noise)]).unwrap();
        let few = ek_mixed_upper(&rho, 1, &ConvexRoofOptions { restarts: 2, ..quick(5) }).unwrap();
        let many = ek_mixed_upper(&rho, 1, &ConvexRoofOptions { restarts: 5, ..quick(5) }).unwrap();
        assert!(many.value <= few.value);
        assert_eq!(&many.optimizer_trace[..2], &few.optimizer_trace[..]);
    }

    #[test]
    fn infeasible_ensemble_length() {
        let noise = DensityMatrix::maximally_mixed(2).unwrap();
        let opts = ConvexRoofOptions { ensemble_size: Some(3), ..quick(0) };
        assert!(matches!(ek_mixed_upper(&noise, 1, &opts), Err(Error::InfeasibleEnsemble { .. })));
    }

    #[test]
    fn permutation_ensemble_decomposes_pi_part() {
        let psi = PureState::basis(&[0, 0, 1]).unwrap();
        let d = Decomposition::permutation_ensemble(&psi).unwrap();
        assert_eq!(d.len(), 6);
        let rho = d.to_density().unwrap();
        assert!((rho.element(2, 2).unwrap().re - 1.0 / 3.0).abs() < 1e-15);
        assert!((rho.element(5, 5).unwrap().re - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bad_seeds_are_rejected() {
        let noise = DensityMatrix::maximally_mixed(2).unwrap();
        let wrong = Decomposition::new(vec![1.0], vec![PureState::basis(&[0, 0]).unwrap()]).unwrap();
        assert!(ek_mixed_upper_seeded(&noise, 1, &quick(0), &[wrong]).is_err());
    }
}
