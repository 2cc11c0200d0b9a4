//! Matrix-element functionals, criterion margins and detection degrees.
//!
//! All indices are 1-based with qubit 1 most significant, so `ρ_{1,2^N}` is
//! the coherence between `|0…0⟩` and `|1…1⟩` and `2^i + 1` addresses the
//! single-excitation state with qubit `N − i` excited.
//!
//! For a k-producible state the two criteria
//!
//! - `(2^r − 2) A ≤ B` with `r = ⌈N/k⌉`, and
//! - `C ≤ D + (k − 1) E`
//!
//! both hold; a positive margin therefore certifies (k+1)-partite
//! entanglement. The degrees `D_k = log₂(B/A + 2)` and `D̃_k = (C − D)/E + 1`
//! repackage the same comparisons as `D_k < ⌈N/k⌉` and `D̃_k > k`.

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::qstate::{DensityMatrix, PureState};
use crate::{Error, Result};

/// Largest qubit count an accessor may address.
pub const MAX_ACCESSOR_QUBITS: usize = 24;

const PI_LABEL: &str =
    "PI-part verdict: (k+1)-partite entanglement of the PI part implies it for the original state";

/// Read access to individual density-matrix elements `ρ_{i,j}` (1-based).
pub trait ElementAccessor {
    fn n_qubits(&self) -> usize;
    fn element(&self, i: usize, j: usize) -> Result<Complex64>;

    fn dim(&self) -> usize {
        1 << self.n_qubits()
    }

    /// Real part of a diagonal element, clamped at zero.
    fn population(&self, i: usize) -> Result<f64> {
        Ok(self.element(i, i)?.re.max(0.0))
    }
}

impl ElementAccessor for DensityMatrix {
    fn n_qubits(&self) -> usize {
        DensityMatrix::n_qubits(self)
    }

    fn element(&self, i: usize, j: usize) -> Result<Complex64> {
        DensityMatrix::element(self, i, j)
    }
}

/// `ρ_ij = ψ_i ψ_j*` without forming the matrix.
impl ElementAccessor for PureState {
    fn n_qubits(&self) -> usize {
        PureState::n_qubits(self)
    }

    fn element(&self, i: usize, j: usize) -> Result<Complex64> {
        let dim = self.dim();
        if i < 1 || j < 1 || i > dim || j > dim {
            return Err(Error::ElementOutOfRange { i, j, dim });
        }
        let a = self.amplitudes();
        Ok(a[i - 1] * a[j - 1].conj())
    }
}

impl<T: ElementAccessor + ?Sized> ElementAccessor for &T {
    fn n_qubits(&self) -> usize {
        (**self).n_qubits()
    }

    fn element(&self, i: usize, j: usize) -> Result<Complex64> {
        (**self).element(i, j)
    }
}

/// Largest `|ρ_{i,j} − conj(ρ_{j,i})|` over the elements the functionals read.
pub fn hermiticity_spot_check(acc: &impl ElementAccessor) -> Result<f64> {
    let n = acc.n_qubits();
    let mut pairs = vec![(1, acc.dim())];
    for i in 0..n {
        for j in 0..n {
            pairs.push(((1 << i) + 1, (1 << j) + 1));
        }
    }
    pairs
        .iter()
        .try_fold(0.0f64, |m, &(i, j)| Ok(m.max((acc.element(i, j)? - acc.element(j, i)?.conj()).norm())))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Functionals {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
}

fn check_accessor(acc: &impl ElementAccessor) -> Result<usize> {
    let n = acc.n_qubits();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("detectors need N ≥ 2, got {n}")));
    }
    if n > MAX_ACCESSOR_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "{n} qubits exceeds the accessor limit of {MAX_ACCESSOR_QUBITS}"
        )));
    }
    Ok(n)
}

/// The five element sums. `C` and `D` run over ordered pairs `i ≠ j`.
pub fn functionals(acc: &impl ElementAccessor) -> Result<Functionals> {
    let n = check_accessor(acc)?;
    let dim = acc.dim();
    let a = acc.element(1, dim)?.norm();
    let mut b = 0.0;
    for i in 2..dim {
        b += (acc.population(i)? * acc.population(dim - i + 1)?).sqrt();
    }
    let p11 = acc.population(1)?;
    let (mut c, mut d) = (0.0, 0.0);
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            c += acc.element((1 << i) + 1, (1 << j) + 1)?.norm();
            d += (p11 * acc.population((1 << i) + (1 << j) + 1)?).sqrt();
        }
    }
    let e = (0..n).map(|i| acc.element((1 << i) + 1, (1 << i) + 1).map(|z| z.norm())).sum::<Result<f64>>()?;
    Ok(Functionals { a, b, c, d, e })
}

/// `⌈N/k⌉`, the minimum number of blocks of a k-producible partition.
pub fn r_used(n: usize, k: usize) -> usize {
    n.div_ceil(k)
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k < 1 || k >= n {
        return Err(Error::InvalidK { k, n, min: 1, max: n - 1 });
    }
    Ok(())
}

pub fn ghz_margin(f: &Functionals, n: usize, k: usize) -> f64 {
    (2f64.powi(r_used(n, k) as i32) - 2.0) * f.a - f.b
}

pub fn w_margin(f: &Functionals, k: usize) -> f64 {
    f.c - f.d - (k as f64 - 1.0) * f.e
}

/// `(2^r − 2)·A − B`; positive certifies (k+1)-partite entanglement.
pub fn criterion_ghz(acc: &impl ElementAccessor, k: usize) -> Result<f64> {
    let n = check_accessor(acc)?;
    check_k(n, k)?;
    Ok(ghz_margin(&functionals(acc)?, n, k))
}

/// `C − D − (k − 1)·E`; positive certifies (k+1)-partite entanglement.
pub fn criterion_w(acc: &impl ElementAccessor, k: usize) -> Result<f64> {
    let n = check_accessor(acc)?;
    check_k(n, k)?;
    Ok(w_margin(&functionals(acc)?, k))
}

/// `log₂(B/A + 2)`, or `+∞` when `A = 0`.
pub fn dk_from(f: &Functionals) -> f64 {
    if f.a > 0.0 {
        (f.b / f.a + 2.0).log2()
    } else {
        f64::INFINITY
    }
}

/// `(C − D)/E + 1`, or `None` when `E = 0`.
pub fn dtilde_from(f: &Functionals) -> Option<f64> {
    (f.e > 0.0).then(|| (f.c - f.d) / f.e + 1.0)
}

pub fn degree_dk(acc: &impl ElementAccessor) -> Result<f64> {
    Ok(dk_from(&functionals(acc)?))
}

pub fn degree_dtilde(acc: &impl ElementAccessor) -> Result<Option<f64>> {
    Ok(dtilde_from(&functionals(acc)?))
}

/// Minimum amount by which a degree or margin must clear its bound before a
/// rule fires. Exact equality (e.g. `C = D` on product states) otherwise
/// flips on rounding noise.
pub const DETECTION_TOL: f64 = 1e-9;

/// Detection by `D_k < ⌈N/k⌉`; never fires on the `+∞` sentinel.
pub fn dk_detects(dk: f64, n: usize, k: usize) -> bool {
    dk < r_used(n, k) as f64 - DETECTION_TOL
}

/// Detection by `D̃_k > k`; never fires when degenerate.
pub fn dtilde_detects(dtilde: Option<f64>, k: usize) -> bool {
    dtilde.is_some_and(|v| v > k as f64 + DETECTION_TOL)
}

/// Detection by a positive criterion margin.
pub fn margin_detects(margin: f64) -> bool {
    margin > DETECTION_TOL
}

pub(crate) fn serialize_extended<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KVerdict {
    pub k: usize,
    pub r_used: usize,
    pub margin_ghz: f64,
    pub margin_w: f64,
    pub via_dk: bool,
    pub via_dtilde: bool,
    pub via_criterion_ghz: bool,
    pub via_criterion_w: bool,
    /// Any rule fired: (k+1)-partite entanglement is certified.
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionReport {
    pub n: usize,
    #[serde(flatten)]
    pub functionals: Functionals,
    #[serde(serialize_with = "serialize_extended")]
    pub dk: f64,
    pub dtilde: Option<f64>,
    /// `E = 0`: the `D̃_k` rule cannot fire.
    pub dtilde_degenerate: bool,
    pub verdicts: Vec<KVerdict>,
    /// Set when the report was computed on a permutationally invariant part.
    pub pi_part: bool,
    pub label: Option<String>,
}

impl DetectionReport {
    pub fn verdict(&self, k: usize) -> Option<&KVerdict> {
        self.verdicts.iter().find(|v| v.k == k)
    }

    /// Marks the report as computed on `pi_part(ρ)`; a detection then carries
    /// over to `ρ` itself.
    pub fn label_pi_part(mut self) -> Self {
        self.pi_part = true;
        self.label = Some(PI_LABEL.to_string());
        self
    }
}

/// Functionals, degrees and per-k verdicts for every `k` in `ks`.
pub fn detect_report(acc: &impl ElementAccessor, ks: &[usize]) -> Result<DetectionReport> {
    let n = check_accessor(acc)?;
    let f = functionals(acc)?;
    let dk = dk_from(&f);
    let dtilde = dtilde_from(&f);
    let verdicts = ks
        .iter()
        .map(|&k| {
            check_k(n, k)?;
            let margin_ghz = ghz_margin(&f, n, k);
            let margin_w = w_margin(&f, k);
            let via_dk = dk_detects(dk, n, k);
            let via_dtilde = dtilde_detects(dtilde, k);
            let via_criterion_ghz = margin_detects(margin_ghz);
            let via_criterion_w = margin_detects(margin_w);
            Ok(KVerdict {
                k,
                r_used: r_used(n, k),
                margin_ghz,
                margin_w,
                via_dk,
                via_dtilde,
                via_criterion_ghz,
                via_criterion_w,
                detected: via_dk || via_dtilde || via_criterion_ghz || via_criterion_w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DetectionReport {
        n,
        functionals: f,
        dk,
        dtilde,
        dtilde_degenerate: dtilde.is_none(),
        verdicts,
        pi_part: false,
        label: None,
    })
}
