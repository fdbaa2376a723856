//! Even-subgraph enumeration through the cycle space.
//!
//! Subgraphs with a prescribed odd-degree set form a coset of the cycle space.
//! A particular solution is built from spanning-tree paths, and the coset is
//! walked in Gray-code order over the fundamental cycles of the co-tree edges.

use super::{EdgeSet, WeightedPlanarGraph};
use crate::{par, Error, Result};

/// Edge subsets are bitsets, so enumeration is limited to graphs that fit.
pub(crate) fn require_bitset(g: &WeightedPlanarGraph) -> Result<()> {
    if g.n_edges() > EdgeSet::MAX_EDGES {
        return Err(Error::InvalidGraph(format!(
            "{} edges exceeds the enumeration maximum {}",
            g.n_edges(),
            EdgeSet::MAX_EDGES
        )));
    }
    Ok(())
}

/// Fundamental cycles of the BFS tree rooted at vertex 0.
pub fn cycle_basis(g: &WeightedPlanarGraph) -> Vec<EdgeSet> {
    let parent = g.primal_tree(0);
    let tree: Vec<bool> = {
        let mut t = vec![false; g.n_edges()];
        for e in parent.iter().flatten() {
            t[*e] = true;
        }
        t
    };
    (0..g.n_edges())
        .filter(|&e| !tree[e])
        .map(|e| {
            let edge = g.edge(e);
            g.tree_path_to_root(&parent, edge.v0)
                .xor(g.tree_path_to_root(&parent, edge.v1))
                .xor(EdgeSet::singleton(e))
        })
        .collect()
}

/// Iterator over all edge subsets with the requested odd-degree set.
pub struct EvenSubgraphs {
    basis: Vec<EdgeSet>,
    current: EdgeSet,
    index: u64,
    end: u64,
    started: bool,
}

impl Iterator for EvenSubgraphs {
    type Item = EdgeSet;

    fn next(&mut self) -> Option<EdgeSet> {
        if !self.started {
            self.started = true;
            return (self.index < self.end).then_some(self.current);
        }
        self.index += 1;
        if self.index >= self.end {
            return None;
        }
        let bit = self.index.trailing_zeros() as usize;
        self.current = self.current.xor(self.basis[bit]);
        Some(self.current)
    }
}

fn gray(i: u64) -> u64 {
    i ^ (i >> 1)
}

/// Subsets of E(G) whose odd-degree vertices are exactly those listed an odd
/// number of times in `defects`. The count is 2^(|E| − |V| + 1).
pub fn enumerate_even_subgraphs(
    g: &WeightedPlanarGraph,
    defects: &[usize],
    cap: usize,
) -> Result<EvenSubgraphs> {
    require_bitset(g)?;
    let basis = cycle_basis(g);
    if basis.len() > cap {
        return Err(Error::CapExceeded {
            rank: basis.len(),
            cap,
        });
    }
    let base = g.pairing_path(defects).ok_or(Error::OddDefects)?;
    Ok(EvenSubgraphs {
        end: 1u64 << basis.len(),
        basis,
        current: base,
        index: 0,
        started: false,
    })
}

/// A signed sum represented as `mantissa · exp(log_scale)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogSum {
    pub log_scale: f64,
    pub mantissa: f64,
}

impl LogSum {
    pub const ZERO: LogSum = LogSum {
        log_scale: f64::NEG_INFINITY,
        mantissa: 0.0,
    };

    fn add_term(&mut self, log_w: f64, sign: f64) {
        if log_w > self.log_scale {
            self.mantissa *= (self.log_scale - log_w).exp();
            self.log_scale = log_w;
        }
        self.mantissa += sign * (log_w - self.log_scale).exp();
    }

    pub fn merge(self, other: LogSum) -> LogSum {
        if other.mantissa == 0.0 && other.log_scale == f64::NEG_INFINITY {
            return self;
        }
        if self.mantissa == 0.0 && self.log_scale == f64::NEG_INFINITY {
            return other;
        }
        let s = self.log_scale.max(other.log_scale);
        LogSum {
            log_scale: s,
            mantissa: self.mantissa * (self.log_scale - s).exp()
                + other.mantissa * (other.log_scale - s).exp(),
        }
    }

    pub fn value(self) -> f64 {
        if self.mantissa == 0.0 {
            0.0
        } else {
            self.mantissa * self.log_scale.exp()
        }
    }

    /// self / other, computed without leaving log scale.
    pub fn ratio(self, other: LogSum) -> f64 {
        if self.mantissa == 0.0 {
            return 0.0;
        }
        self.mantissa / other.mantissa * (self.log_scale - other.log_scale).exp()
    }
}

/// Σ over subgraphs C with odd set `defects` of (−1)^{|C ∩ sign_mask|} Π_{e∈C} x(e).
///
/// Chunks of the Gray-code walk are summed independently (in parallel when
/// enabled) and merged in index order, so the result does not depend on the
/// thread count.
pub fn weighted_sum(
    g: &WeightedPlanarGraph,
    defects: &[usize],
    sign_mask: EdgeSet,
    cap: usize,
) -> Result<LogSum> {
    require_bitset(g)?;
    let basis = cycle_basis(g);
    if basis.len() > cap {
        return Err(Error::CapExceeded {
            rank: basis.len(),
            cap,
        });
    }
    let Some(base) = g.pairing_path(defects) else {
        return Ok(LogSum::ZERO);
    };
    let logx: Vec<f64> = g.edges().iter().map(|e| e.x.ln()).collect();
    let rank = basis.len();
    let chunk_bits = rank.min(6);
    let n_chunks = 1usize << chunk_bits;
    let per_chunk = 1u64 << (rank - chunk_bits);
    let parts = par::map_range(n_chunks, |c| {
        let start = c as u64 * per_chunk;
        let mut current = base;
        let gs = gray(start);
        for (i, b) in basis.iter().enumerate() {
            if (gs >> i) & 1 == 1 {
                current = current.xor(*b);
            }
        }
        let mut acc = LogSum::ZERO;
        let mut i = start;
        loop {
            let lw: f64 = current.iter().map(|e| logx[e]).sum();
            let sign = if current.meet_parity(sign_mask) {
                -1.0
            } else {
                1.0
            };
            acc.add_term(lw, sign);
            i += 1;
            if i >= start + per_chunk {
                break;
            }
            current = current.xor(basis[i.trailing_zeros() as usize]);
        }
        acc
    });
    Ok(parts.into_iter().fold(LogSum::ZERO, LogSum::merge))
}
