//! Swendsen–Wang and single-edge heat-bath dynamics for the FK measure
//! φ(ω) ∝ ∏ p^{ω_e} (1 − p)^{1−ω_e} 2^{k(ω)} with wired arcs contracted.

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BoundaryConditions, FkDomain};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    #[default]
    SwendsenWang,
    HeatBath,
}

/// One FK configuration with its clusters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FkSample {
    pub open: Vec<bool>,
    /// Smallest primal site of the cluster of each site.
    pub labels: Vec<usize>,
    pub seed: u64,
    pub sweep: usize,
}

impl FkSample {
    pub fn connected(&self, a: usize, b: usize) -> bool {
        self.labels[a] == self.labels[b]
    }

    pub fn n_clusters(&self) -> usize {
        self.labels
            .iter()
            .enumerate()
            .filter(|(i, &l)| *i == l)
            .count()
    }

    /// Open crossing inside the domain between the wired arcs (b c)° and
    /// (d a)°, whether or not the conditions join them.
    pub fn arcs_connected(&self, dom: &FkDomain, bc: &BoundaryConditions) -> bool {
        let BoundaryConditions::FourArc { arcs, .. } = bc else {
            return false;
        };
        let ends = dom.edges.iter().map(|e| (e.u, e.v));
        crossed(dom.n_sites, ends, &self.open, true, &arcs[1], &arcs[3])
    }

    /// Dual-open crossing between the free arcs: dual edges are open where
    /// primal edges are closed.
    pub fn dual_arcs_connected(&self, dom: &FkDomain, bc: &BoundaryConditions) -> bool {
        let BoundaryConditions::FourArc { arcs, .. } = bc else {
            return false;
        };
        let ends = dom.edges.iter().map(|e| (e.du, e.dv));
        crossed(dom.n_dual, ends, &self.open, false, &arcs[0], &arcs[2])
    }
}

/// Whether some site of `a` meets some site of `b` through edges whose state
/// equals `state`.
fn crossed(
    n: usize,
    ends: impl Iterator<Item = (usize, usize)>,
    open: &[bool],
    state: bool,
    a: &[usize],
    b: &[usize],
) -> bool {
    let mut uf = UnionFind::<usize>::new(n);
    for ((u, v), &o) in ends.zip(open) {
        if o == state {
            uf.union(u, v);
        }
    }
    for w in a.windows(2).chain(b.windows(2)) {
        uf.union(w[0], w[1]);
    }
    uf.equiv(a[0], b[0])
}

/// Contracted graph: wired groups collapse to their first site.
struct Contracted {
    node: Vec<usize>,
    n_nodes: usize,
    ends: Vec<(usize, usize)>,
    /// Uncontracted ends.
    sites: Vec<(usize, usize)>,
    p: Vec<f64>,
    /// (edge, other end) per node, for heat-bath connectivity queries.
    adj: Vec<Vec<(usize, usize)>>,
}

impl Contracted {
    fn new(dom: &FkDomain, bc: &BoundaryConditions) -> Contracted {
        let mut rep: Vec<usize> = (0..dom.n_sites).collect();
        for g in bc.wired_groups() {
            for &s in &g {
                rep[s] = g[0];
            }
        }
        let mut node = vec![usize::MAX; dom.n_sites];
        let mut n_nodes = 0;
        for s in 0..dom.n_sites {
            if node[rep[s]] == usize::MAX {
                node[rep[s]] = n_nodes;
                n_nodes += 1;
            }
            node[s] = node[rep[s]];
        }
        let ends: Vec<(usize, usize)> = dom.edges.iter().map(|e| (node[e.u], node[e.v])).collect();
        let mut adj = vec![Vec::new(); n_nodes];
        for (e, &(a, b)) in ends.iter().enumerate() {
            adj[a].push((e, b));
            adj[b].push((e, a));
        }
        let sites = dom.edges.iter().map(|e| (e.u, e.v)).collect();
        Contracted {
            node,
            n_nodes,
            ends,
            sites,
            p: dom.edges.iter().map(|e| e.p).collect(),
            adj,
        }
    }

    fn clusters(&self, open: &[bool]) -> UnionFind<usize> {
        let mut uf = UnionFind::new(self.n_nodes);
        for (e, &(a, b)) in self.ends.iter().enumerate() {
            if open[e] {
                uf.union(a, b);
            }
        }
        uf
    }

    /// Whether a and b are joined by open edges other than `skip`.
    fn joined_without(
        &self,
        open: &[bool],
        skip: usize,
        a: usize,
        b: usize,
        seen: &mut [bool],
        stack: &mut Vec<usize>,
    ) -> bool {
        if a == b {
            return true;
        }
        seen.iter_mut().for_each(|s| *s = false);
        stack.clear();
        stack.push(a);
        seen[a] = true;
        while let Some(v) = stack.pop() {
            for &(e, u) in &self.adj[v] {
                if e != skip && open[e] && !seen[u] {
                    if u == b {
                        return true;
                    }
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        false
    }
}

/// A Markov chain on FK configurations owning its RNG state.
pub struct FkChain {
    graph: Contracted,
    rng: ChaCha8Rng,
    algorithm: Algorithm,
    open: Vec<bool>,
    seed: u64,
    sweep: usize,
    spin: Vec<i8>,
    seen: Vec<bool>,
    stack: Vec<usize>,
}

impl FkChain {
    /// Chain started from the all-closed configuration. `stream` selects an
    /// independent ChaCha stream for the same seed.
    pub fn new(
        dom: &FkDomain,
        bc: &BoundaryConditions,
        seed: u64,
        stream: u64,
        algorithm: Algorithm,
    ) -> Result<FkChain> {
        bc.validate(dom)?;
        if !dom.is_connected() {
            return Err(Error::InvalidGraph("the FK domain is disconnected".into()));
        }
        let graph = Contracted::new(dom, bc);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let n = graph.n_nodes;
        Ok(FkChain {
            open: vec![false; dom.n_edges()],
            graph,
            rng,
            algorithm,
            seed,
            sweep: 0,
            spin: vec![0; n],
            seen: vec![false; n],
            stack: Vec::new(),
        })
    }

    pub fn step(&mut self) {
        match self.algorithm {
            Algorithm::SwendsenWang => self.swendsen_wang(),
            Algorithm::HeatBath => self.heat_bath(),
        }
        self.sweep += 1;
    }

    pub fn run(&mut self, sweeps: usize) {
        for _ in 0..sweeps {
            self.step();
        }
    }

    /// Edwards–Sokal: uniform ±1 per cluster, then each edge with equal end
    /// spins opens with probability p.
    fn swendsen_wang(&mut self) {
        let mut uf = self.graph.clusters(&self.open);
        self.spin.iter_mut().for_each(|s| *s = 0);
        for v in 0..self.graph.n_nodes {
            let r = uf.find_mut(v);
            if self.spin[r] == 0 {
                self.spin[r] = if self.rng.random::<bool>() { 1 } else { -1 };
            }
            self.spin[v] = self.spin[r];
        }
        for (e, &(a, b)) in self.graph.ends.iter().enumerate() {
            self.open[e] =
                self.spin[a] == self.spin[b] && self.rng.random::<f64>() < self.graph.p[e];
        }
    }

    /// Sequential sweep of single-edge heat-bath updates: an edge whose ends
    /// are otherwise joined opens with probability p, else with p/(2 − p).
    fn heat_bath(&mut self) {
        for e in 0..self.open.len() {
            let (a, b) = self.graph.ends[e];
            let joined =
                self.graph
                    .joined_without(&self.open, e, a, b, &mut self.seen, &mut self.stack);
            let p = self.graph.p[e];
            let q = if joined { p } else { p / (2.0 - p) };
            self.open[e] = self.rng.random::<f64>() < q;
        }
    }

    /// Whether primal sites a and b share a cluster.
    pub fn connected_sites(&self, a: usize, b: usize) -> bool {
        let uf = self.graph.clusters(&self.open);
        uf.equiv(self.graph.node[a], self.graph.node[b])
    }

    /// Open crossing inside the domain between two sets of primal sites.
    pub fn crossed(&self, a: &[usize], b: &[usize]) -> bool {
        crossed(
            self.graph.node.len(),
            self.graph.sites.iter().copied(),
            &self.open,
            true,
            a,
            b,
        )
    }

    pub fn open(&self) -> &[bool] {
        &self.open
    }

    pub fn sample(&self) -> FkSample {
        sample_from(&self.graph, &self.open, self.seed, self.sweep)
    }
}

fn sample_from(graph: &Contracted, open: &[bool], seed: u64, sweep: usize) -> FkSample {
    let mut uf = graph.clusters(open);
    let mut first = vec![usize::MAX; graph.n_nodes];
    let labels = graph
        .node
        .iter()
        .enumerate()
        .map(|(s, &n)| {
            let r = uf.find_mut(n);
            if first[r] == usize::MAX {
                first[r] = s;
            }
            first[r]
        })
        .collect();
    FkSample {
        open: open.to_vec(),
        labels,
        seed,
        sweep,
    }
}

/// Cluster labelling of explicit configurations on a fixed domain.
pub(crate) struct Labeler(Contracted);

impl Labeler {
    pub(crate) fn new(dom: &FkDomain, bc: &BoundaryConditions) -> Labeler {
        Labeler(Contracted::new(dom, bc))
    }

    pub(crate) fn sample(&self, open: &[bool]) -> FkSample {
        sample_from(&self.0, open, 0, 0)
    }

    /// Clusters of the contracted graph, wired groups counted once.
    pub(crate) fn n_clusters(&self, open: &[bool]) -> usize {
        let uf = self.0.clusters(open);
        uf.into_labeling()
            .iter()
            .enumerate()
            .filter(|(i, &r)| *i == r)
            .count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerParams {
    pub seed: u64,
    /// Number of samples returned.
    pub samples: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    /// Sweeps between consecutive samples.
    #[serde(default = "one")]
    pub thin: usize,
    #[serde(default)]
    pub algorithm: Algorithm,
}

pub(crate) fn default_burn_in() -> usize {
    100
}

pub(crate) fn one() -> usize {
    1
}

/// Reproducible sample stream of one chain.
pub fn sample_fk(
    dom: &FkDomain,
    bc: &BoundaryConditions,
    params: &SamplerParams,
) -> Result<Vec<FkSample>> {
    let mut chain = FkChain::new(dom, bc, params.seed, 0, params.algorithm)?;
    chain.run(params.burn_in);
    let mut out = Vec::with_capacity(params.samples);
    for _ in 0..params.samples {
        chain.run(params.thin.max(1));
        out.push(chain.sample());
    }
    Ok(out)
}
