//! The FK measure by exhaustive enumeration of edge configurations.

use super::sampler::Labeler;
use super::{BoundaryConditions, FkDomain, FkSample};
use crate::{Error, Result};

/// Largest number of FK edges accepted by [`ExactFk`].
pub const EXACT_EDGE_CAP: usize = 20;

/// Normalised weights ∏ p^{ω_e}(1 − p)^{1−ω_e} 2^{k(ω)} of all 2^E
/// configurations, indexed by the bitmask of open edges.
pub struct ExactFk {
    labeler: Labeler,
    n_edges: usize,
    pub weights: Vec<f64>,
}

impl ExactFk {
    pub fn new(dom: &FkDomain, bc: &BoundaryConditions) -> Result<ExactFk> {
        bc.validate(dom)?;
        let n = dom.n_edges();
        if n > EXACT_EDGE_CAP {
            return Err(Error::CapExceeded {
                rank: n,
                cap: EXACT_EDGE_CAP,
            });
        }
        let labeler = Labeler::new(dom, bc);
        let p: Vec<f64> = dom.edges.iter().map(|e| e.p).collect();
        let mut weights: Vec<f64> = (0..1usize << n)
            .map(|mask| {
                let open = unpack(mask, n);
                let w: f64 = p
                    .iter()
                    .zip(&open)
                    .map(|(&p, &o)| if o { p } else { 1.0 - p })
                    .product();
                w * 2f64.powi(labeler.n_clusters(&open) as i32)
            })
            .collect();
        let z: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= z);
        Ok(ExactFk {
            labeler,
            n_edges: n,
            weights,
        })
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    /// Configuration with the given mask, labelled.
    pub fn sample(&self, mask: usize) -> FkSample {
        self.labeler.sample(&unpack(mask, self.n_edges))
    }

    pub fn probability(&self, event: impl Fn(&FkSample) -> bool) -> f64 {
        self.expectation(|s| if event(s) { 1.0 } else { 0.0 })
    }

    pub fn expectation(&self, f: impl Fn(&FkSample) -> f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(|(mask, &w)| w * f(&self.sample(mask)))
            .sum()
    }

    /// Law of an integer statistic, e.g. the number of clusters.
    pub fn distribution(&self, stat: impl Fn(&FkSample) -> usize) -> Vec<f64> {
        let mut out = Vec::new();
        for (mask, &w) in self.weights.iter().enumerate() {
            let k = stat(&self.sample(mask));
            if out.len() <= k {
                out.resize(k + 1, 0.0);
            }
            out[k] += w;
        }
        out
    }

    /// P[a ↔ b] for primal sites a and b.
    pub fn connection(&self, a: usize, b: usize) -> f64 {
        self.probability(|s| s.connected(a, b))
    }
}

pub(crate) fn unpack(mask: usize, n: usize) -> Vec<bool> {
    (0..n).map(|e| mask >> e & 1 == 1).collect()
}
