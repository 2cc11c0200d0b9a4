//! Set partitions of `{1..n}` whose blocks hold at most `k` elements.
//!
//! Partitions are produced as restricted growth strings: element `j` carries
//! the label of its block, labels appear in order of first use. The stream
//! walks the strings in reverse lexicographic order, so the all-singleton
//! partition comes first and the coarsest partitions come last.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::qstate::QubitSubset;
use crate::{Error, Result};

/// A partition `A_1 | … | A_m` of `{1..n}` with `|A_t| ≤ k_max`.
///
/// Blocks are sorted by their smallest element and elements are sorted
/// within each block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<QubitSubset>,
    n: usize,
    k_max: usize,
}

impl Partition {
    /// Builds a partition from arbitrary blocks, checking disjointness,
    /// coverage and the block-size bound, then canonicalizing.
    pub fn new(blocks: Vec<Vec<usize>>, n: usize, k_max: usize) -> Result<Self> {
        let mut seen = vec![false; n];
        let mut out = Vec::with_capacity(blocks.len());
        for b in blocks {
            if b.len() > k_max {
                return Err(Error::InvalidSubset(format!("block of size {} exceeds bound {k_max}", b.len())));
            }
            let subset = QubitSubset::new(b, n)?;
            for &q in subset.indices() {
                if seen[q - 1] {
                    return Err(Error::InvalidSubset(format!("qubit {q} appears in two blocks")));
                }
                seen[q - 1] = true;
            }
            out.push(subset);
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidSubset(format!("qubit {} not covered", missing + 1)));
        }
        out.sort_by_key(|b| b.min());
        Ok(Self { blocks: out, n, k_max })
    }

    pub fn singletons(n: usize) -> Self {
        Self {
            blocks: (1..=n).map(|q| QubitSubset::new(vec![q], n).expect("singleton in range")).collect(),
            n,
            k_max: 1,
        }
    }

    fn from_labels(labels: &[usize], n_blocks: usize, k_max: usize) -> Self {
        let n = labels.len();
        let mut members = vec![Vec::new(); n_blocks];
        for (j, &l) in labels.iter().enumerate() {
            members[l].push(j + 1);
        }
        // labels are assigned in order of first appearance, so block order
        // already follows smallest elements
        let blocks =
            members.into_iter().map(|m| QubitSubset::new(m, n).expect("labels cover 1..n")).collect();
        Self { blocks, n, k_max }
    }

    pub fn blocks(&self) -> &[QubitSubset] {
        &self.blocks
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// Number of blocks `m`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, b) in self.blocks.iter().enumerate() {
            if t > 0 {
                write!(f, "|")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn check_range(n: usize, k: usize) -> Result<()> {
    if n == 0 || k < 1 || k > n {
        return Err(Error::InvalidK { k, n, min: 1, max: n });
    }
    Ok(())
}

/// Streaming enumeration of all partitions of `{1..n}` with blocks of size ≤ `k`.
#[derive(Debug, Clone)]
pub struct Partitions {
    labels: Vec<usize>,
    sizes: Vec<usize>,
    k: usize,
    started: bool,
    done: bool,
}

impl Partitions {
    fn n_blocks(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    fn advance(&mut self) -> bool {
        let n = self.labels.len();
        for i in (1..n).rev() {
            let current = self.labels[i];
            self.sizes[current] -= 1;
            // choices run from the fresh label downward; a fresh label is
            // only ever chosen first, so every later choice is an existing block
            if let Some(next) = (0..current).rev().find(|&c| self.sizes[c] < self.k) {
                self.labels[i] = next;
                self.sizes[next] += 1;
                let mut fresh = self.labels[..=i].iter().max().copied().unwrap_or(0) + 1;
                for j in i + 1..n {
                    self.labels[j] = fresh;
                    self.sizes[fresh] = 1;
                    fresh += 1;
                }
                for s in self.sizes.iter_mut().skip(fresh) {
                    *s = 0;
                }
                return true;
            }
        }
        false
    }
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        if self.done {
            return None;
        }
        if self.started && !self.advance() {
            self.done = true;
            return None;
        }
        self.started = true;
        Some(Partition::from_labels(&self.labels, self.n_blocks(), self.k))
    }
}

/// Every partition of `{1..n}` with blocks of size at most `k`, each exactly
/// once, starting from the all-singleton partition.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<Partitions> {
    check_range(n, k)?;
    Ok(Partitions { labels: (0..n).collect(), sizes: vec![1; n], k, started: false, done: false })
}

/// Number of partitions of `{1..n}` with blocks of size at most `k`, from
/// `T(n) = Σ_{j=1}^{min(k,n)} C(n-1, j-1) · T(n-j)`, `T(0) = 1`.
pub fn count_partitions(n: usize, k: usize) -> Result<u128> {
    check_range(n, k)?;
    let mut binom = vec![vec![0u128; n + 1]; n + 1];
    for a in 0..=n {
        binom[a][0] = 1;
        for b in 1..=a {
            binom[a][b] = binom[a - 1][b - 1] + if b < a { binom[a - 1][b] } else { 0 };
        }
    }
    let mut t = vec![0u128; n + 1];
    t[0] = 1;
    for m in 1..=n {
        t[m] = (1..=k.min(m))
            .map(|j| binom[m - 1][j - 1] * t[m - j])
            .try_fold(0u128, |acc, x| acc.checked_add(x))
            .ok_or_else(|| Error::InvalidParameter(format!("partition count overflows for n = {n}")))?;
    }
    Ok(t[n])
}
