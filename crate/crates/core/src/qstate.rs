//! Dense N-qubit states.
//!
//! Basis convention: the 0-based storage index `x` of a basis state encodes
//! the bit string `b1 b2 ... bN` with qubit 1 as the most significant bit, so
//! qubit `q` (1-based) contributes `2^(N-q)`. Matrix elements exposed through
//! [`DensityMatrix::element`] use the 1-based index `x + 1`.

use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest qubit count for which density matrices are stored densely.
pub const DENSE_CAP: usize = 10;
/// Largest qubit count for a dense amplitude vector.
pub const MAX_PURE_QUBITS: usize = 20;

pub const NORM_TOL: f64 = 1e-10;
pub const HERMITIAN_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_FLOOR: f64 = -1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[inline]
fn bit_weight(n: usize, qubit: usize) -> usize {
    1 << (n - qubit)
}

/// A nonempty, sorted set of distinct 1-based qubit labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitSubset {
    indices: Vec<usize>,
}

impl QubitSubset {
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidSubset("subset is empty".into()));
        }
        indices.sort_unstable();
        for w in indices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidSubset(format!("qubit {} repeated", w[0])));
            }
        }
        for &i in &indices {
            if i == 0 || i > n {
                return Err(Error::QubitOutOfRange { index: i, n });
            }
        }
        Ok(Self { indices })
    }

    /// Builds a subset from a bit mask where bit `q - 1` marks qubit `q`.
    pub fn from_mask(mask: u32, n: usize) -> Result<Self> {
        let indices = (1..=n).filter(|q| mask & (1 << (q - 1)) != 0).collect();
        Self::new(indices, n)
    }

    /// Bit mask where bit `q - 1` marks qubit `q`.
    pub fn mask(&self) -> u32 {
        self.indices.iter().fold(0, |m, &q| m | (1 << (q - 1)))
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn min(&self) -> usize {
        self.indices[0]
    }

    /// Qubits of `1..=n` not in this subset, in increasing order.
    pub fn complement(&self, n: usize) -> Vec<usize> {
        (1..=n).filter(|q| self.indices.binary_search(q).is_err()).collect()
    }
}

impl fmt::Display for QubitSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (t, q) in self.indices.iter().enumerate() {
            if t > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, "}}")
    }
}

/// A bijection of `1..=n`; `image(j)` is where qubit `j` is sent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QubitPermutation {
    images: Vec<usize>,
}

impl QubitPermutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty permutation".into()));
        }
        let mut seen = vec![false; n];
        for &p in &images {
            if p == 0 || p > n {
                return Err(Error::InvalidPermutation(format!("image {p} outside 1..={n}")));
            }
            if seen[p - 1] {
                return Err(Error::InvalidPermutation(format!("image {p} repeated")));
            }
            seen[p - 1] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self { images: (1..=n).collect() }
    }

    /// Transposition of qubits `a` and `b`.
    pub fn swap(n: usize, a: usize, b: usize) -> Result<Self> {
        let mut images: Vec<usize> = (1..=n).collect();
        if a == 0 || a > n || b == 0 || b > n {
            return Err(Error::InvalidPermutation(format!("swap({a},{b}) outside 1..={n}")));
        }
        images.swap(a - 1, b - 1);
        Ok(Self { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image(&self, j: usize) -> usize {
        self.images[j - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn after(&self, first: &QubitPermutation) -> QubitPermutation {
        QubitPermutation { images: first.images.iter().map(|&j| self.images[j - 1]).collect() }
    }

    /// Image of a 0-based basis index: the bit of qubit `j` moves to qubit `image(j)`.
    pub fn map_index(&self, x: usize) -> usize {
        let n = self.images.len();
        let mut y = 0;
        for (j0, &target) in self.images.iter().enumerate() {
            if x & bit_weight(n, j0 + 1) != 0 {
                y |= bit_weight(n, target);
            }
        }
        y
    }

    /// Index map `x -> map_index(x)` over all `2^n` basis states.
    pub fn index_table(&self) -> Vec<usize> {
        (0..1usize << self.images.len()).map(|x| self.map_index(x)).collect()
    }

    /// All permutations of `1..=n` in lexicographic order of their image lists.
    pub fn all(n: usize) -> Vec<QubitPermutation> {
        let mut cur: Vec<usize> = (1..=n).collect();
        let mut out = vec![QubitPermutation { images: cur.clone() }];
        while next_permutation(&mut cur) {
            out.push(QubitPermutation { images: cur.clone() });
        }
        out
    }
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// A 2×2 complex matrix acting on a single qubit, row-major.
pub type Unitary2 = [[Complex64; 2]; 2];

/// `Rz(alpha) · Ry(beta) · Rz(gamma)` as a special-unitary 2×2 matrix.
pub fn su2_from_euler(alpha: f64, beta: f64, gamma: f64) -> Unitary2 {
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let e = |phi: f64| Complex64::from_polar(1.0, phi);
    let sum = (alpha + gamma) / 2.0;
    let diff = (alpha - gamma) / 2.0;
    [[e(-sum) * c, -e(-diff) * s], [e(diff) * s, e(sum) * c]]
}

/// Index maps used to split a basis index into kept and traced qubits.
/// `kept[a] + traced[t]` is the full index for kept-register value `a`
/// and traced-register value `t`.
fn split_tables(n: usize, keep: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let traced: Vec<usize> = (1..=n).filter(|q| !keep.contains(q)).collect();
    let table = |qs: &[usize]| -> Vec<usize> {
        let m = qs.len();
        (0..1usize << m)
            .map(|a| {
                qs.iter()
                    .enumerate()
                    .filter(|(t, _)| a & (1 << (m - 1 - t)) != 0)
                    .fold(0, |acc, (_, &q)| acc | bit_weight(n, q))
            })
            .collect()
    };
    (table(keep), table(&traced))
}

fn check_keep(keep: &QubitSubset, n: usize) -> Result<()> {
    match keep.indices().last() {
        Some(&q) if q > n => Err(Error::QubitOutOfRange { index: q, n }),
        _ => Ok(()),
    }
}

/// Pure N-qubit state as a dense amplitude vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl PureState {
    /// Checks the amplitude count only; call [`PureState::validate`] for the norm.
    pub fn new(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("n_qubits must be positive".into()));
        }
        if n_qubits > MAX_PURE_QUBITS {
            return Err(Error::DenseCapExceeded { n: n_qubits, cap: MAX_PURE_QUBITS });
        }
        let expected = 1usize << n_qubits;
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch { expected, actual: amplitudes.len() });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::new(n_qubits, amplitudes)?;
        let norm = s.norm_sqr().sqrt();
        if norm == 0.0 {
            return Err(Error::NotNormalized { norm_sq: 0.0, tol: NORM_TOL });
        }
        s.amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    /// Computational basis state for a bit string (qubit 1 first).
    pub fn basis(bits: &[u8]) -> Result<Self> {
        let n = bits.len();
        let mut index = 0;
        for (j, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => index |= bit_weight(n, j + 1),
                _ => return Err(Error::InvalidParameter(format!("bit value {b} is not 0 or 1"))),
            }
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Self::new(n, amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        let norm_sq = self.norm_sqr();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sq, tol: NORM_TOL });
        }
        Ok(())
    }

    /// `self ⊗ other`; the qubits of `other` follow those of `self`.
    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.n_qubits + other.n_qubits;
        let mut amps = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            amps.extend(other.amplitudes.iter().map(|b| a * b));
        }
        PureState::new(n, amps)
    }

    pub fn inner(&self, other: &PureState) -> Complex64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        let v = DVector::from_column_slice(&self.amplitudes);
        DensityMatrix::new(self.n_qubits, &v * v.adjoint())
    }

    /// Reduced density matrix on `keep`, computed from amplitudes without
    /// forming the full projector.
    pub fn reduced(&self, keep: &QubitSubset) -> Result<DensityMatrix> {
        check_keep(keep, self.n_qubits)?;
        let (kept, traced) = split_tables(self.n_qubits, keep.indices());
        let dk = kept.len();
        let mut m = DMatrix::from_element(dk, dk, ZERO);
        for a in 0..dk {
            for b in a..dk {
                let s: Complex64 = traced
                    .iter()
                    .map(|&t| self.amplitudes[kept[a] + t] * self.amplitudes[kept[b] + t].conj())
                    .sum();
                m[(a, b)] = s;
                m[(b, a)] = s.conj();
            }
        }
        DensityMatrix::new(keep.len(), m)
    }

    /// Purity of the reduced state on `keep`, evaluated on whichever side of
    /// the cut is smaller (both sides share the nonzero spectrum).
    pub fn reduced_purity(&self, keep: &QubitSubset) -> Result<f64> {
        check_keep(keep, self.n_qubits)?;
        let comp = keep.complement(self.n_qubits);
        if !comp.is_empty() && comp.len() < keep.len() {
            let other = QubitSubset::new(comp, self.n_qubits)?;
            return Ok(self.reduced(&other)?.purity());
        }
        Ok(self.reduced(keep)?.purity())
    }

    /// Linear entropy `1 − Tr ρ_A² / (Tr ρ_A)²` of the marginal on `keep`.
    ///
    /// Near-pure marginals are evaluated through the Lagrange identity
    /// `(Tr ρ)² − Tr ρ² = 2 Σ_{a<b} Σ_{t<u} |M_at M_bu − M_au M_bt|²` on the
    /// coefficient matrix `M`, which avoids the cancellation in `1 − Tr ρ²`.
    pub fn reduced_linear_entropy(&self, keep: &QubitSubset) -> Result<f64> {
        check_keep(keep, self.n_qubits)?;
        let (kept, traced) = split_tables(self.n_qubits, keep.indices());
        let coeff = |a: usize, t: usize| self.amplitudes[kept[a] + traced[t]];
        let norm_sq = self.norm_sqr();
        let direct = 1.0 - self.reduced_purity(keep)? / (norm_sq * norm_sq);
        if direct > 1e-6 {
            return Ok(direct);
        }
        let mut s = 0.0;
        for a in 0..kept.len() {
            for b in a + 1..kept.len() {
                for t in 0..traced.len() {
                    for u in t + 1..traced.len() {
                        s += (coeff(a, t) * coeff(b, u) - coeff(a, u) * coeff(b, t)).norm_sqr();
                    }
                }
            }
        }
        Ok(2.0 * s / (norm_sq * norm_sq))
    }

    pub fn permute_qubits(&self, perm: &QubitPermutation) -> Result<PureState> {
        if perm.len() != self.n_qubits {
            return Err(Error::InvalidPermutation(format!(
                "permutation of {} qubits applied to {} qubits",
                perm.len(),
                self.n_qubits
            )));
        }
        let mut amps = vec![ZERO; self.dim()];
        for (x, a) in self.amplitudes.iter().enumerate() {
            amps[perm.map_index(x)] = *a;
        }
        PureState::new(self.n_qubits, amps)
    }

    /// Applies `u` to a single qubit.
    pub fn apply_single(&self, qubit: usize, u: &Unitary2) -> Result<PureState> {
        if qubit == 0 || qubit > self.n_qubits {
            return Err(Error::QubitOutOfRange { index: qubit, n: self.n_qubits });
        }
        let w = bit_weight(self.n_qubits, qubit);
        let mut amps = self.amplitudes.clone();
        for x0 in (0..self.dim()).filter(|x| x & w == 0) {
            let (a0, a1) = (amps[x0], amps[x0 | w]);
            amps[x0] = u[0][0] * a0 + u[0][1] * a1;
            amps[x0 | w] = u[1][0] * a0 + u[1][1] * a1;
        }
        PureState::new(self.n_qubits, amps)
    }

    /// Applies `U_1 ⊗ … ⊗ U_N`.
    pub fn apply_local(&self, factors: &[Unitary2]) -> Result<PureState> {
        if factors.len() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, actual: factors.len() });
        }
        factors.iter().enumerate().try_fold(self.clone(), |s, (q0, u)| s.apply_single(q0 + 1, u))
    }
}

impl Serialize for PureState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let pairs: Vec<[f64; 2]> = self.amplitudes.iter().map(|z| [z.re, z.im]).collect();
        let mut st = s.serialize_struct("PureState", 2)?;
        st.serialize_field("n_qubits", &self.n_qubits)?;
        st.serialize_field("amplitudes", &pairs)?;
        st.end()
    }
}

/// Measured deviations from the density-matrix invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    pub hermiticity_deviation: f64,
    pub trace_deviation: f64,
    pub min_eigenvalue: f64,
}

/// Dense density matrix on N qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Checks shape and the dense cap; call [`DensityMatrix::validate`] for
    /// Hermiticity, trace and positivity.
    pub fn new(n_qubits: usize, matrix: DMatrix<Complex64>) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::InvalidParameter("n_qubits must be positive".into()));
        }
        if n_qubits > DENSE_CAP {
            return Err(Error::DenseCapExceeded { n: n_qubits, cap: DENSE_CAP });
        }
        let dim = 1usize << n_qubits;
        if matrix.nrows() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: matrix.nrows() });
        }
        if matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: matrix.ncols() });
        }
        Ok(Self { n_qubits, matrix })
    }

    pub fn maximally_mixed(n_qubits: usize) -> Result<Self> {
        if n_qubits > DENSE_CAP {
            return Err(Error::DenseCapExceeded { n: n_qubits, cap: DENSE_CAP });
        }
        let dim = 1usize << n_qubits;
        Self::new(n_qubits, DMatrix::from_diagonal_element(dim, dim, Complex64::new(1.0 / dim as f64, 0.0)))
    }

    /// `Σ w_i ρ_i`; all terms must share a qubit count.
    pub fn mixture(terms: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = terms.first().ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        let n = first.1.n_qubits;
        let dim = first.1.dim();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for (w, rho) in terms {
            if rho.n_qubits != n {
                return Err(Error::DimensionMismatch { expected: n, actual: rho.n_qubits });
            }
            m += &rho.matrix * Complex64::new(*w, 0.0);
        }
        Self::new(n, m)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `ρ_{i,j}` with 1-based indices.
    pub fn element(&self, i: usize, j: usize) -> Result<Complex64> {
        let dim = self.dim();
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(Error::ElementOutOfRange { i, j, dim });
        }
        Ok(self.matrix[(i - 1, j - 1)])
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Tr(ρ²)`, computed as the squared Frobenius norm of the Hermitian part.
    pub fn purity(&self) -> f64 {
        let d = self.dim();
        let mut s = 0.0;
        for j in 0..d {
            for i in 0..d {
                s += (self.matrix[(i, j)] * self.matrix[(j, i)]).re;
            }
        }
        s
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let min_eigenvalue = self.eigh().0.last().copied().unwrap_or(f64::NAN);
        Diagnostics {
            hermiticity_deviation: self.hermiticity_deviation(),
            trace_deviation: (self.trace() - 1.0).abs(),
            min_eigenvalue,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation, tol: HERMITIAN_TOL });
        }
        let trace = self.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::TraceNotOne { trace, tol: TRACE_TOL });
        }
        let min = self.eigh().0.last().copied().unwrap_or(0.0);
        if min < PSD_FLOOR {
            return Err(Error::NotPositive { min_eigenvalue: min, floor: PSD_FLOOR });
        }
        Ok(())
    }

    /// Eigenvalues in descending order with matching unit eigenvectors.
    pub fn eigh(&self) -> (Vec<f64>, Vec<DVector<Complex64>>) {
        let herm = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        (values, vectors)
    }

    pub fn partial_trace(&self, keep: &QubitSubset) -> Result<DensityMatrix> {
        check_keep(keep, self.n_qubits)?;
        let (kept, traced) = split_tables(self.n_qubits, keep.indices());
        let dk = kept.len();
        let m = DMatrix::from_fn(dk, dk, |a, b| {
            traced.iter().map(|&t| self.matrix[(kept[a] + t, kept[b] + t)]).sum()
        });
        DensityMatrix::new(keep.len(), m)
    }

    pub fn permute_qubits(&self, perm: &QubitPermutation) -> Result<DensityMatrix> {
        if perm.len() != self.n_qubits {
            return Err(Error::InvalidPermutation(format!(
                "permutation of {} qubits applied to {} qubits",
                perm.len(),
                self.n_qubits
            )));
        }
        let table = perm.index_table();
        let d = self.dim();
        let mut m = DMatrix::from_element(d, d, ZERO);
        for b in 0..d {
            for a in 0..d {
                m[(table[a], table[b])] = self.matrix[(a, b)];
            }
        }
        DensityMatrix::new(self.n_qubits, m)
    }

    /// `U ρ U†` with `U = U_1 ⊗ … ⊗ U_N`.
    pub fn apply_local(&self, factors: &[Unitary2]) -> Result<DensityMatrix> {
        if factors.len() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, actual: factors.len() });
        }
        let d = self.dim();
        let mut m = self.matrix.clone();
        for (q0, u) in factors.iter().enumerate() {
            let w = bit_weight(self.n_qubits, q0 + 1);
            for c in 0..d {
                for r0 in (0..d).filter(|r| r & w == 0) {
                    let (a0, a1) = (m[(r0, c)], m[(r0 | w, c)]);
                    m[(r0, c)] = u[0][0] * a0 + u[0][1] * a1;
                    m[(r0 | w, c)] = u[1][0] * a0 + u[1][1] * a1;
                }
            }
            for c0 in (0..d).filter(|c| c & w == 0) {
                for r in 0..d {
                    let (a0, a1) = (m[(r, c0)], m[(r, c0 | w)]);
                    m[(r, c0)] = a0 * u[0][0].conj() + a1 * u[0][1].conj();
                    m[(r, c0 | w)] = a0 * u[1][0].conj() + a1 * u[1][1].conj();
                }
            }
        }
        DensityMatrix::new(self.n_qubits, m)
    }

    /// Dominant eigenvector when the matrix is rank one within `tol`
    /// (largest eigenvalue at least `1 - tol`).
    pub fn as_pure(&self, tol: f64) -> Option<PureState> {
        let (values, vectors) = self.eigh();
        if values.first().copied().unwrap_or(0.0) < 1.0 - tol {
            return None;
        }
        let v = &vectors[0];
        PureState::normalized(self.n_qubits, v.iter().copied().collect()).ok()
    }
}

/// Either representation, as read from a state file.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(PureState),
    Density(DensityMatrix),
}

impl QuantumState {
    pub fn n_qubits(&self) -> usize {
        match self {
            QuantumState::Pure(p) => p.n_qubits(),
            QuantumState::Density(d) => d.n_qubits(),
        }
    }

    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            QuantumState::Pure(p) => p.to_density(),
            QuantumState::Density(d) => Ok(d.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            QuantumState::Pure(p) => p.validate(),
            QuantumState::Density(d) => d.validate(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let pair = |z: &Complex64| [z.re, z.im];
        let file = match self {
            QuantumState::Pure(p) => StateFile {
                n_qubits: p.n_qubits(),
                kind: StateKind::Pure,
                data: serde_json::to_value(p.amplitudes().iter().map(pair).collect::<Vec<_>>())?,
            },
            QuantumState::Density(d) => {
                let m = d.matrix();
                let rows: Vec<Vec<[f64; 2]>> =
                    (0..d.dim()).map(|i| (0..d.dim()).map(|j| pair(&m[(i, j)])).collect()).collect();
                StateFile {
                    n_qubits: d.n_qubits(),
                    kind: StateKind::Density,
                    data: serde_json::to_value(rows)?,
                }
            }
        };
        Ok(serde_json::to_string(&file)?)
    }

    /// Parses and validates a state document.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text)?;
        let n = file.n_qubits;
        let state = match file.kind {
            StateKind::Pure => {
                let pairs: Vec<[f64; 2]> = serde_json::from_value(file.data)
                    .map_err(|e| Error::Format(format!("pure data must be a list of [re, im] pairs: {e}")))?;
                let amps = pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect();
                QuantumState::Pure(PureState::new(n, amps)?)
            }
            StateKind::Density => {
                if n > DENSE_CAP {
                    return Err(Error::DenseCapExceeded { n, cap: DENSE_CAP });
                }
                let rows: Vec<Vec<[f64; 2]>> = serde_json::from_value(file.data).map_err(|e| {
                    Error::Format(format!("density data must be a list of rows of [re, im] pairs: {e}"))
                })?;
                let dim = 1usize << n;
                if rows.len() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, actual: rows.len() });
                }
                if let Some(bad) = rows.iter().find(|r| r.len() != dim) {
                    return Err(Error::DimensionMismatch { expected: dim, actual: bad.len() });
                }
                let m = DMatrix::from_fn(dim, dim, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
                QuantumState::Density(DensityMatrix::new(n, m)?)
            }
        };
        state.validate()?;
        Ok(state)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum StateKind {
    Pure,
    Density,
}

#[derive(Debug, Serialize, Deserialize)]
struct StateFile {
    n_qubits: usize,
    kind: StateKind,
    data: serde_json::Value,
}
