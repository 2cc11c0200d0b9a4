//! Exact (k+1)-PE concurrence of pure states.
//!
//! For a pure state `|ψ⟩` the measure is the minimum, over partitions
//! `A_1 | … | A_m` with every `|A_t| ≤ k`, of the mean block concurrence
//! `(1/m) Σ_t √(2 [1 − Tr ρ_{A_t}²])`.

use serde::Serialize;

use crate::partitions::{enumerate_partitions, Partition};
use crate::qstate::{PureState, QubitSubset, DENSE_CAP};
use crate::{Error, Result};

/// Result of the partition scan for a pure state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PureMeasureResult {
    pub value: f64,
    pub argmin_partition: Partition,
    pub per_block_concurrence: Vec<f64>,
}

/// Checks `1 ≤ k ≤ n − 1`.
pub fn check_k(n: usize, k: usize) -> Result<()> {
    if n < 2 || k < 1 || k + 1 > n {
        return Err(Error::InvalidK { k, n, min: 1, max: n.saturating_sub(1) });
    }
    Ok(())
}

fn concurrence_from_entropy(linear_entropy: f64) -> f64 {
    (2.0 * linear_entropy.max(0.0)).sqrt()
}

/// Bipartite concurrence `√(2 [1 − Tr ρ_A²])` of `block` against its complement.
pub fn block_concurrence(psi: &PureState, block: &QubitSubset) -> Result<f64> {
    let n = psi.n_qubits();
    if block.is_empty() || block.len() >= n {
        return Err(Error::InvalidSubset(format!(
            "block {block} must be a proper nonempty subset of 1..={n}"
        )));
    }
    Ok(concurrence_from_entropy(psi.reduced_linear_entropy(block)?))
}

/// Exact (k+1)-PE concurrence. Ties resolve to the first minimizing
/// partition in enumeration order.
pub fn ek_pure(psi: &PureState, k: usize) -> Result<PureMeasureResult> {
    let n = psi.n_qubits();
    if n > DENSE_CAP {
        return Err(Error::DenseCapExceeded { n, cap: DENSE_CAP });
    }
    check_k(n, k)?;

    // block concurrences indexed by subset mask; NaN marks "not yet computed"
    let mut cache = vec![f64::NAN; 1 << n];
    let full = (1u32 << n) - 1;
    let mut term = |block: &QubitSubset| -> Result<f64> {
        let mask = block.mask();
        if mask == full {
            return Ok(0.0);
        }
        let slot = &mut cache[mask as usize];
        if slot.is_nan() {
            *slot = concurrence_from_entropy(psi.reduced_linear_entropy(block)?);
        }
        Ok(*slot)
    };

    let mut best: Option<(f64, Partition)> = None;
    'scan: for partition in enumerate_partitions(n, k)? {
        let m = partition.len() as f64;
        let mut sum = 0.0;
        for block in partition.blocks() {
            sum += term(block)?;
            if let Some((b, _)) = &best {
                if sum / m >= *b {
                    continue 'scan;
                }
            }
        }
        best = Some((sum / m, partition));
    }

    let (_, argmin_partition) = best.expect("at least one admissible partition");
    let per_block_concurrence =
        argmin_partition.blocks().iter().map(&mut term).collect::<Result<Vec<_>>>()?;
    let value = per_block_concurrence.iter().sum::<f64>() / per_block_concurrence.len() as f64;
    Ok(PureMeasureResult { value, argmin_partition, per_block_concurrence })
}
