//! Crossing and annulus-circuit experiments with batch-means error bars.

use std::collections::HashSet;
use std::time::Instant;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use super::sampler::{default_burn_in, one, Algorithm, FkChain, FkSample};
use super::{BoundaryConditions, FkDomain, Site};
use crate::constructions::{build, square_lattice, ConstructionSpec};
use crate::{par, schema, Error, Result, C64};

pub const MIN_BATCHES: usize = 20;

/// Experiment requests as stored in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentKind {
    /// Four-arc conditions split at the bounding-box corners of the
    /// construction: wired left and right, free top and bottom.
    Crossing { domain: ConstructionSpec },
    /// Free annulus ([−3l, 3l]² ∖ (−l, l)²) of the square lattice with angle θ.
    Annulus {
        l: usize,
        #[serde(default = "quarter_pi")]
        theta: f64,
    },
}

fn quarter_pi() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn min_batches() -> usize {
    MIN_BATCHES
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub experiment: ExperimentKind,
    /// Total number of samples, split evenly over the batches.
    pub samples: usize,
    #[serde(default = "min_batches")]
    pub batches: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "one")]
    pub thin: usize,
    pub seed: u64,
    #[serde(default)]
    pub algorithm: Algorithm,
    /// Record wall time in the report, which then stops being reproducible.
    #[serde(default)]
    pub timing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub config: McConfig,
    pub event: String,
    pub convention: String,
    pub n_sites: usize,
    pub n_edges: usize,
    pub samples: usize,
    pub frequency: f64,
    pub std_error: f64,
    pub ci95_half_width: f64,
    /// E[σ σ'] of the two wired arcs, equal to the crossing probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_correlation: Option<f64>,
    pub batch_means: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

const CONVENTION: &str = "spins on white vertices; FK edge per quad with p = 1 - tan(theta/2); dual edge open iff primal closed";

/// Batch-means estimate of an event evaluated on the chain state.
#[derive(Clone, Debug, PartialEq)]
pub struct Estimate {
    pub samples: usize,
    pub frequency: f64,
    pub std_error: f64,
    pub batch_means: Vec<f64>,
}

impl Estimate {
    pub fn ci95_half_width(&self) -> f64 {
        1.96 * self.std_error
    }
}

/// Independent chains, one ChaCha stream per batch, each after `burn_in`
/// sweeps contributing `samples / batches` evaluations `thin` sweeps apart.
#[allow(clippy::too_many_arguments)]
pub fn estimate_event<F>(
    dom: &FkDomain,
    bc: &BoundaryConditions,
    samples: usize,
    batches: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
    algorithm: Algorithm,
    event: F,
) -> Result<Estimate>
where
    F: Fn(&FkChain) -> bool + Sync + Send,
{
    if batches < MIN_BATCHES || samples < batches {
        return Err(Error::Parameter(format!(
            "{samples} samples cannot fill {batches} batches (at least {MIN_BATCHES} batches of one sample)"
        )));
    }
    FkChain::new(dom, bc, seed, 0, algorithm)?;
    let per = samples / batches;
    let means = par::map_range(batches, |b| {
        let mut chain = FkChain::new(dom, bc, seed, b as u64, algorithm).expect("validated");
        chain.run(burn_in);
        let mut hits = 0usize;
        for _ in 0..per {
            chain.run(thin.max(1));
            hits += event(&chain) as usize;
        }
        hits as f64 / per as f64
    });
    let b = batches as f64;
    let mean = means.iter().sum::<f64>() / b;
    let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / (b - 1.0);
    Ok(Estimate {
        samples: per * batches,
        frequency: mean,
        std_error: (var / b).sqrt(),
        batch_means: means,
    })
}

/// Frequency of the wired arcs (b c)° and (d a)° being joined.
#[allow(clippy::too_many_arguments)]
pub fn estimate_crossing(
    dom: &FkDomain,
    bc: &BoundaryConditions,
    samples: usize,
    batches: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
    algorithm: Algorithm,
) -> Result<Estimate> {
    let BoundaryConditions::FourArc { arcs, .. } = bc else {
        return Err(Error::Parameter(
            "crossing experiments need four-arc conditions".into(),
        ));
    };
    estimate_event(
        dom,
        bc,
        samples,
        batches,
        burn_in,
        thin,
        seed,
        algorithm,
        |ch| ch.crossed(&arcs[1], &arcs[3]),
    )
}

pub fn run_experiment(cfg: &McConfig) -> Result<McReport> {
    let start = Instant::now();
    let (dom, bc, event) = match &cfg.experiment {
        ExperimentKind::Crossing { domain } => {
            let e = build(domain)?.embedding;
            let quads: Vec<usize> = (0..e.n_quads()).collect();
            let dom = FkDomain::from_mesh(&e.mesh, &e.s, &quads)?;
            let bc = BoundaryConditions::rectangle(&dom)?;
            (dom, bc, "wired arcs connected")
        }
        ExperimentKind::Annulus { l, theta } => (
            annulus_domain(6 * l, 2 * l, *theta)?,
            BoundaryConditions::Free,
            "wired circuit around the hole",
        ),
    };
    let est = match &cfg.experiment {
        ExperimentKind::Crossing { .. } => estimate_crossing(
            &dom,
            &bc,
            cfg.samples,
            cfg.batches,
            cfg.burn_in,
            cfg.thin,
            cfg.seed,
            cfg.algorithm,
        )?,
        ExperimentKind::Annulus { .. } => {
            let rings = AnnulusRings::new(&dom)?;
            estimate_event(
                &dom,
                &bc,
                cfg.samples,
                cfg.batches,
                cfg.burn_in,
                cfg.thin,
                cfg.seed,
                cfg.algorithm,
                |ch| rings.circuit(&dom, ch.open()),
            )?
        }
    };
    let crossing = matches!(cfg.experiment, ExperimentKind::Crossing { .. });
    Ok(McReport {
        config: cfg.clone(),
        event: event.into(),
        convention: CONVENTION.into(),
        n_sites: dom.n_sites,
        n_edges: dom.n_edges(),
        samples: est.samples,
        frequency: est.frequency,
        std_error: est.std_error,
        ci95_half_width: est.ci95_half_width(),
        spin_correlation: crossing.then_some(est.frequency),
        batch_means: est.batch_means,
        wall_time_s: cfg.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

/// Square lattice of `outer`² quads with the centred `inner`² block removed.
pub fn annulus_domain(outer: usize, inner: usize, theta: f64) -> Result<FkDomain> {
    if inner == 0 || inner + 2 > outer || !(outer - inner).is_multiple_of(2) {
        return Err(Error::Parameter(format!(
            "no centred {inner}-hole in a {outer}-square"
        )));
    }
    let e = square_lattice(outer, theta)?.embedding;
    let (cx, cy) = quad_grid(&e.s, &e.mesh.quads);
    let lo = (outer - inner) / 2;
    let quads: Vec<usize> = (0..e.n_quads())
        .filter(|&z| {
            let (i, j) = (cx[z], cy[z]);
            !(i >= lo && i < lo + inner && j >= lo && j < lo + inner)
        })
        .collect();
    FkDomain::from_mesh(&e.mesh, &e.s, &quads)
}

/// Column and row rank of every quad centre.
fn quad_grid(s: &[C64], quads: &[[usize; 4]]) -> (Vec<usize>, Vec<usize>) {
    let centres: Vec<C64> = quads
        .iter()
        .map(|q| q.iter().map(|&v| s[v]).sum::<C64>() / 4.0)
        .collect();
    let rank = |key: &dyn Fn(&C64) -> f64| {
        let mut vals: Vec<f64> = centres.iter().map(key).collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        centres
            .iter()
            .map(|c| {
                vals.iter()
                    .position(|v| (v - key(c)).abs() < 1e-9)
                    .expect("present")
            })
            .collect::<Vec<usize>>()
    };
    (rank(&|c: &C64| c.re), rank(&|c: &C64| c.im))
}

/// Dual sites on the outer and inner boundary cycles of an annulus.
struct AnnulusRings {
    outer: Vec<usize>,
    inner: Vec<usize>,
}

impl AnnulusRings {
    fn new(dom: &FkDomain) -> Result<AnnulusRings> {
        if dom.boundary.len() != 2 {
            return Err(Error::Geometry(format!(
                "an annulus needs two boundary cycles, found {}",
                dom.boundary.len()
            )));
        }
        let dual = |c: &Vec<Site>| -> Vec<usize> {
            c.iter()
                .filter_map(|s| match *s {
                    Site::Dual(i) => Some(i),
                    Site::Primal(_) => None,
                })
                .collect()
        };
        let (outer, inner) = (dual(&dom.boundary[0]), dual(&dom.boundary[1]));
        if outer.is_empty() || inner.is_empty() {
            return Err(Error::Geometry(
                "annulus boundary without dual sites".into(),
            ));
        }
        Ok(AnnulusRings { outer, inner })
    }

    /// No dual-open path joins the two boundaries.
    fn circuit(&self, dom: &FkDomain, open: &[bool]) -> bool {
        let mut uf = UnionFind::<usize>::new(dom.n_dual);
        for (e, edge) in dom.edges.iter().enumerate() {
            if !open[e] {
                uf.union(edge.du, edge.dv);
            }
        }
        for w in self.outer.windows(2) {
            uf.union(w[0], w[1]);
        }
        !self.inner.iter().any(|&i| uf.equiv(i, self.outer[0]))
    }
}

/// An open primal circuit separates the two boundaries of an annulus, by
/// planar duality: no dual-open path joins them.
pub fn detect_wired_circuit(dom: &FkDomain, sample: &FkSample) -> Result<bool> {
    if sample.open.len() != dom.n_edges() {
        return Err(Error::Parameter(
            "sample does not belong to the domain".into(),
        ));
    }
    Ok(AnnulusRings::new(dom)?.circuit(dom, &sample.open))
}

/// Exhaustive search over subsets of open edges for a simple cycle winding
/// around the hole.
pub fn circuit_brute_force(dom: &FkDomain, open: &[bool]) -> Result<bool> {
    if dom.boundary.len() != 2 {
        return Err(Error::Geometry(
            "an annulus needs two boundary cycles".into(),
        ));
    }
    let pos = |s: &Site| match *s {
        Site::Primal(i) => dom.site_pos[i],
        Site::Dual(i) => dom.dual_pos[i],
    };
    let hole = dom.boundary[1].iter().map(pos).sum::<C64>() / dom.boundary[1].len() as f64;
    let edges: Vec<usize> = (0..dom.n_edges()).filter(|&e| open[e]).collect();
    if edges.len() > 24 {
        return Err(Error::CapExceeded {
            rank: edges.len(),
            cap: 24,
        });
    }
    for mask in 1usize..1 << edges.len() {
        let sub: Vec<usize> = (0..edges.len())
            .filter(|&k| mask >> k & 1 == 1)
            .map(|k| edges[k])
            .collect();
        if sub.len() >= 3 && winds(dom, &sub, hole) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `sub` is a simple cycle with nonzero winding number around `hole`.
fn winds(dom: &FkDomain, sub: &[usize], hole: C64) -> bool {
    let mut deg: std::collections::HashMap<usize, Vec<usize>> = std::collections::HashMap::new();
    for &e in sub {
        deg.entry(dom.edges[e].u).or_default().push(e);
        deg.entry(dom.edges[e].v).or_default().push(e);
    }
    if deg.values().any(|es| es.len() != 2) {
        return false;
    }
    let start = dom.edges[sub[0]].u;
    let (mut at, mut via) = (start, sub[0]);
    let mut used = HashSet::new();
    let mut turn = 0.0;
    loop {
        used.insert(via);
        let e = dom.edges[via];
        let next = if e.u == at { e.v } else { e.u };
        turn += ((dom.site_pos[next] - hole) / (dom.site_pos[at] - hole)).arg();
        at = next;
        if at == start {
            break;
        }
        via = *deg[&at].iter().find(|&&f| f != via).expect("degree two");
    }
    used.len() == sub.len() && turn.abs() > std::f64::consts::PI
}

#[derive(Serialize)]
struct BatchRow {
    batch: usize,
    samples: usize,
    frequency: String,
}

/// Long-format `batch,samples,frequency` rows.
pub fn batches_to_csv(report: &McReport) -> String {
    let per = report.samples / report.batch_means.len().max(1);
    let mut w = csv::Writer::from_writer(Vec::new());
    for (batch, &m) in report.batch_means.iter().enumerate() {
        w.serialize(BatchRow {
            batch,
            samples: per,
            frequency: schema::format_f64(m),
        })
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}
