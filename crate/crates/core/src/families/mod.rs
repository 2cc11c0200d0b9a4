//! Canonical state families mixed with white noise.
//!
//! The noise parameter `p` follows two different conventions:
//!
//! - GHZ: `p |G_N⟩⟨G_N| + (1 − p) I/2^N` (`p` is the GHZ weight);
//! - W, Dicke and product states: `(1 − p) |ψ⟩⟨ψ| + p I/2^N` (`p` is the
//!   noise weight).
//!
//! Every family has an analytic element oracle, so detectors can run beyond
//! the dense limit.

pub mod random;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::detect::{r_used, ElementAccessor, MAX_ACCESSOR_QUBITS};
use crate::qstate::{DensityMatrix, PureState, DENSE_CAP, MAX_PURE_QUBITS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Ghz,
    W,
    Dicke { excitations: usize },
    Product { bits: Vec<u8> },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Ghz => write!(f, "ghz"),
            Family::W => write!(f, "w"),
            Family::Dicke { excitations } => write!(f, "dicke({excitations})"),
            Family::Product { bits } => {
                write!(f, "product(")?;
                bits.iter().try_for_each(|b| write!(f, "{b}"))?;
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySpec {
    pub family: Family,
    pub n: usize,
    pub p: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl FamilySpec {
    pub fn new(family: Family, n: usize, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("families need N ≥ 2, got {n}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("noise parameter p = {p} outside [0, 1]")));
        }
        match &family {
            Family::Dicke { excitations } if *excitations > n => {
                return Err(Error::InvalidParameter(format!("{excitations} excitations exceed {n} qubits")));
            }
            Family::Product { bits } if bits.len() != n || bits.iter().any(|b| *b > 1) => {
                return Err(Error::InvalidParameter(format!(
                    "product bit string must have {n} entries of 0 or 1"
                )));
            }
            _ => {}
        }
        Ok(Self { family, n, p })
    }

    /// Weight of the pure target state in the mixture.
    pub fn pure_weight(&self) -> f64 {
        match self.family {
            Family::Ghz => self.p,
            _ => 1.0 - self.p,
        }
    }

    pub fn noise_weight(&self) -> f64 {
        1.0 - self.pure_weight()
    }

    /// Real amplitude of the pure target state on 0-based basis index `x`.
    pub fn target_amplitude(&self, x: usize) -> f64 {
        let n = self.n;
        match &self.family {
            Family::Ghz => {
                if x == 0 || x == (1 << n) - 1 {
                    0.5f64.sqrt()
                } else {
                    0.0
                }
            }
            Family::W => {
                if x.count_ones() == 1 {
                    1.0 / (n as f64).sqrt()
                } else {
                    0.0
                }
            }
            Family::Dicke { excitations } => {
                if x.count_ones() as usize == *excitations {
                    1.0 / binomial(n, *excitations).sqrt()
                } else {
                    0.0
                }
            }
            Family::Product { bits } => {
                let idx = bits.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                if x == idx {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    pub fn target_state(&self) -> Result<PureState> {
        if self.n > MAX_PURE_QUBITS {
            return Err(Error::DenseCapExceeded { n: self.n, cap: MAX_PURE_QUBITS });
        }
        let amps = (0..1usize << self.n).map(|x| Complex64::new(self.target_amplitude(x), 0.0)).collect();
        PureState::new(self.n, amps)
    }

    /// True when the mixture carries no white noise.
    pub fn is_pure(&self) -> bool {
        self.noise_weight() == 0.0
    }
}

/// Dense density matrix of the family mixture.
pub fn make_state(spec: &FamilySpec) -> Result<DensityMatrix> {
    if spec.n > DENSE_CAP {
        return Err(Error::DenseCapExceeded { n: spec.n, cap: DENSE_CAP });
    }
    let target = spec.target_state()?;
    let d = target.dim();
    let w = spec.pure_weight();
    let noise = spec.noise_weight() / d as f64;
    let amps = target.amplitudes();
    let m = DMatrix::from_fn(d, d, |i, j| {
        amps[i] * amps[j].conj() * w
            + if i == j { Complex64::new(noise, 0.0) } else { Complex64::new(0.0, 0.0) }
    });
    DensityMatrix::new(spec.n, m)
}

/// Analytic element access to a family mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyOracle {
    spec: FamilySpec,
    noise_diag: f64,
}

pub fn element_oracle(spec: &FamilySpec) -> Result<FamilyOracle> {
    if spec.n > MAX_ACCESSOR_QUBITS {
        return Err(Error::DenseCapExceeded { n: spec.n, cap: MAX_ACCESSOR_QUBITS });
    }
    Ok(FamilyOracle { spec: spec.clone(), noise_diag: spec.noise_weight() / (1u64 << spec.n) as f64 })
}

impl FamilyOracle {
    pub fn spec(&self) -> &FamilySpec {
        &self.spec
    }
}

impl ElementAccessor for FamilyOracle {
    fn n_qubits(&self) -> usize {
        self.spec.n
    }

    fn element(&self, i: usize, j: usize) -> Result<Complex64> {
        let dim = self.dim();
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(Error::ElementOutOfRange { i, j, dim });
        }
        let coherent =
            self.spec.pure_weight() * self.spec.target_amplitude(i - 1) * self.spec.target_amplitude(j - 1);
        let diag = if i == j { self.noise_diag } else { 0.0 };
        Ok(Complex64::new(coherent + diag, 0.0))
    }
}

/// `log₂((2^{N−1} + p − 1) / (2^{N−2} p))`; `+∞` at `p = 0`.
pub fn closed_form_dk_ghz(n: usize, p: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    let half = 2f64.powi(n as i32 - 1);
    let quarter = 2f64.powi(n as i32 - 2);
    ((half + p - 1.0) / (quarter * p)).log2()
}

/// `(N 2^N − (N 2^N + N² − 2N) p) / (2^N − (2^N − N) p)`.
pub fn closed_form_dtilde_w(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let d = 2f64.powi(n as i32);
    (nf * d - (nf * d + nf * nf - 2.0 * nf) * p) / (d - (d - nf) * p)
}

/// Where the degree rule for a family flips as a function of `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "p", rename_all = "snake_case")]
pub enum Threshold {
    /// Detection for every `p` strictly above the boundary.
    DetectedAbove(f64),
    /// Detection for every `p` strictly below the boundary.
    DetectedBelow(f64),
    Always,
    Never,
}

impl Threshold {
    pub fn boundary(&self) -> Option<f64> {
        match self {
            Threshold::DetectedAbove(p) | Threshold::DetectedBelow(p) => Some(*p),
            _ => None,
        }
    }
}

/// Boundary `p` for `D_k < ⌈N/k⌉` (GHZ) or `D̃_k > k` (W), solved from the
/// closed forms.
///
/// GHZ: `p > (2^{N−1} − 1) / (2^{N+r−2} − 1)`, `r = ⌈N/k⌉`.
/// W: `p < (N − k) 2^N / ((N − k) 2^N + N (N − 2 + k))`.
pub fn thresholds(family: &Family, n: usize, k: usize) -> Result<Threshold> {
    if n < 2 || k < 1 || k >= n {
        return Err(Error::InvalidK { k, n, min: 1, max: n.saturating_sub(1) });
    }
    let nf = n as f64;
    let kf = k as f64;
    let t = match family {
        Family::Ghz => {
            let r = r_used(n, k) as i32;
            let p = (2f64.powi(n as i32 - 1) - 1.0) / (2f64.powi(n as i32 + r - 2) - 1.0);
            if p >= 1.0 {
                Threshold::Never
            } else if p < 0.0 {
                Threshold::Always
            } else {
                Threshold::DetectedAbove(p)
            }
        }
        Family::W => {
            let lead = (nf - kf) * 2f64.powi(n as i32);
            let p = lead / (lead + nf * (nf - 2.0 + kf));
            if p > 1.0 {
                Threshold::Always
            } else if p <= 0.0 {
                Threshold::Never
            } else {
                Threshold::DetectedBelow(p)
            }
        }
        other => return Err(Error::InvalidParameter(format!("no closed-form threshold for family {other}"))),
    };
    Ok(t)
}
