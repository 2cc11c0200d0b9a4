//! Seeded random samplers used by the property suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::partitions::Partition;
use crate::qstate::{DensityMatrix, PureState, QubitPermutation, Unitary2};
use crate::Result;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

/// Haar-random pure state (normalized complex Gaussian vector).
pub fn haar_state(n: usize, rng: &mut impl Rng) -> Result<PureState> {
    let amps = (0..1usize << n).map(|_| gaussian(rng)).collect();
    PureState::normalized(n, amps)
}

/// Haar-random element of SU(2), from a uniformly random unit quaternion.
pub fn haar_su2(rng: &mut impl Rng) -> Unitary2 {
    let q: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(rng));
    let norm = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [a, b, c, d] = q.map(|x| x / norm);
    [[Complex64::new(a, b), Complex64::new(c, d)], [Complex64::new(-c, d), Complex64::new(a, -b)]]
}

pub fn haar_local_unitaries(n: usize, rng: &mut impl Rng) -> Vec<Unitary2> {
    (0..n).map(|_| haar_su2(rng)).collect()
}

/// `G G† / Tr(G G†)` for a square complex Ginibre matrix `G`.
pub fn ginibre_density(n: usize, rng: &mut impl Rng) -> Result<DensityMatrix> {
    let d = 1usize << n;
    let g = DMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(n, m / Complex64::new(tr, 0.0))
}

pub fn random_permutation(n: usize, rng: &mut impl Rng) -> QubitPermutation {
    let mut images: Vec<usize> = (1..=n).collect();
    images.shuffle(rng);
    QubitPermutation::new(images).expect("shuffle of 1..n")
}

/// Random partition of `1..=n` into blocks of size at most `k`.
pub fn random_partition(n: usize, k: usize, rng: &mut impl Rng) -> Result<Partition> {
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut blocks = Vec::new();
    let mut rest = &order[..];
    while !rest.is_empty() {
        let size = rng.random_range(1..=k.min(rest.len()));
        blocks.push(rest[..size].to_vec());
        rest = &rest[size..];
    }
    Partition::new(blocks, n, k)
}

/// Product of Haar-random block states over a random partition with blocks
/// of size at most `k`, returned with that partition.
pub fn random_k_producible(n: usize, k: usize, rng: &mut impl Rng) -> Result<(PureState, Partition)> {
    let partition = random_partition(n, k, rng)?;
    let mut state: Option<PureState> = None;
    let mut placement = Vec::with_capacity(n);
    for block in partition.blocks() {
        let factor = haar_state(block.len(), rng)?;
        placement.extend_from_slice(block.indices());
        state = Some(match state {
            None => factor,
            Some(s) => s.tensor(&factor)?,
        });
    }
    // the tensor product lists qubits block by block; move each one home
    let perm = QubitPermutation::new(placement)?;
    let psi = state.expect("at least one block").permute_qubits(&perm)?;
    Ok((psi, partition))
}
