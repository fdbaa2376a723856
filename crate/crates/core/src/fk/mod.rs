//! FK-Ising (q = 2 random-cluster) sampling on G° with Dobrushin arcs.
//!
//! Spins sit on white vertices of Λ(G) (faces of G). Every quad z contributes
//! one FK edge v°0 v°1 open with probability p = 1 − x, x = tan(θ_z / 2), and
//! its dual edge v•0 v•1 is open exactly when the primal one is closed. The
//! dual model carries x* = (1 − x)/(1 + x), i.e. θ* = π/2 − θ.

mod exact;
mod experiment;
mod sampler;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

pub use exact::{ExactFk, EXACT_EDGE_CAP};
pub use experiment::{
    annulus_domain, batches_to_csv, circuit_brute_force, detect_wired_circuit, estimate_crossing,
    estimate_event, run_experiment, Estimate, ExperimentKind, McConfig, McReport, MIN_BATCHES,
};
pub use sampler::{sample_fk, Algorithm, FkChain, FkSample, SamplerParams};

use crate::graph::WeightedPlanarGraph;
use crate::mesh::{Color, QuadMesh};
use crate::{geom, Error, Result, C64};

/// Kramers–Wannier dual weight.
pub fn dual_weight(x: f64) -> f64 {
    (1.0 - x) / (1.0 + x)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkWeights {
    /// Open probability of the FK edge dual to each edge of G.
    pub p: Vec<f64>,
    pub x_dual: Vec<f64>,
    pub p_dual: Vec<f64>,
}

/// p_e = 1 − x(e) and the dual weights x* = (1 − x)/(1 + x), p* = 1 − x*.
pub fn derive_fk_weights(g: &WeightedPlanarGraph) -> Result<FkWeights> {
    let xs: Vec<f64> = g.edges().iter().map(|e| e.x).collect();
    weights_from_x(&xs)
}

fn weights_from_x(xs: &[f64]) -> Result<FkWeights> {
    if let Some((e, x)) = xs.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::Parameter(format!(
            "edge {e} has weight {x} outside (0, 1]"
        )));
    }
    let x_dual: Vec<f64> = xs.iter().map(|&x| dual_weight(x)).collect();
    Ok(FkWeights {
        p: xs.iter().map(|x| 1.0 - x).collect(),
        p_dual: x_dual.iter().map(|x| 1.0 - x).collect(),
        x_dual,
    })
}

/// A vertex of Λ(G) seen from the FK model: a primal site (white) or a dual
/// site (black).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum Site {
    Primal(usize),
    Dual(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FkEdge {
    pub u: usize,
    pub v: usize,
    /// Dual sites joined by the dual edge.
    pub du: usize,
    pub dv: usize,
    pub p: f64,
}

/// The FK graph on primal sites together with its planar dual.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FkDomain {
    pub n_sites: usize,
    pub n_dual: usize,
    pub edges: Vec<FkEdge>,
    /// Positions of the sites (empty for abstract graphs).
    pub site_pos: Vec<C64>,
    pub dual_pos: Vec<C64>,
    /// Mesh vertex behind each site, when built from a mesh.
    pub site_vertex: Vec<usize>,
    pub dual_vertex: Vec<usize>,
    /// Boundary cycles, counterclockwise, outer cycle first.
    pub boundary: Vec<Vec<Site>>,
}

impl FkDomain {
    /// FK model on G°: sites are the faces of G (the outer one included),
    /// dual sites the vertices of G, one edge per edge of G.
    pub fn from_graph(g: &WeightedPlanarGraph) -> Result<FkDomain> {
        let w = derive_fk_weights(g)?;
        let edges = (0..g.n_edges())
            .map(|e| {
                let ed = g.edge(e);
                FkEdge {
                    u: g.f_right(e),
                    v: g.f_left(e),
                    du: ed.v0,
                    dv: ed.v1,
                    p: w.p[e],
                }
            })
            .collect();
        Ok(FkDomain {
            n_sites: g.n_faces(),
            n_dual: g.n_vertices(),
            edges,
            site_pos: Vec::new(),
            dual_pos: Vec::new(),
            site_vertex: Vec::new(),
            dual_vertex: Vec::new(),
            boundary: Vec::new(),
        })
    }

    /// FK model on the white vertices of the given quads of a mesh.
    pub fn from_mesh(mesh: &QuadMesh, s: &[C64], quads: &[usize]) -> Result<FkDomain> {
        if quads.is_empty() {
            return Err(Error::Parameter(
                "an FK domain needs at least one quad".into(),
            ));
        }
        let mut site_of: HashMap<usize, usize> = HashMap::new();
        let mut dual_of: HashMap<usize, usize> = HashMap::new();
        let (mut site_vertex, mut dual_vertex) = (Vec::new(), Vec::new());
        let index = |map: &mut HashMap<usize, usize>, list: &mut Vec<usize>, v: usize| {
            *map.entry(v).or_insert_with(|| {
                list.push(v);
                list.len() - 1
            })
        };
        let mut xs = Vec::with_capacity(quads.len());
        let mut ends = Vec::with_capacity(quads.len());
        for &z in quads {
            let q = mesh.quads[z];
            let u = index(&mut site_of, &mut site_vertex, q[1]);
            let v = index(&mut site_of, &mut site_vertex, q[3]);
            let du = index(&mut dual_of, &mut dual_vertex, q[0]);
            let dv = index(&mut dual_of, &mut dual_vertex, q[2]);
            xs.push((mesh.theta[z] / 2.0).tan());
            ends.push((u, v, du, dv));
        }
        let w = weights_from_x(&xs)?;
        let edges = ends
            .into_iter()
            .zip(&w.p)
            .map(|((u, v, du, dv), &p)| FkEdge { u, v, du, dv, p })
            .collect();
        let boundary = boundary_cycles(mesh, s, quads)?
            .into_iter()
            .map(|cyc| {
                cyc.into_iter()
                    .map(|v| match mesh.color[v] {
                        Color::White => Site::Primal(site_of[&v]),
                        Color::Black => Site::Dual(dual_of[&v]),
                    })
                    .collect()
            })
            .collect();
        Ok(FkDomain {
            n_sites: site_vertex.len(),
            n_dual: dual_vertex.len(),
            edges,
            site_pos: site_vertex.iter().map(|&v| s[v]).collect(),
            dual_pos: dual_vertex.iter().map(|&v| s[v]).collect(),
            site_vertex,
            dual_vertex,
            boundary,
        })
    }

    /// The dual FK model: black sites, p* = 1 − (1 − x)/(1 + x).
    pub fn dual(&self) -> FkDomain {
        let flip = |s: &Site| match *s {
            Site::Primal(i) => Site::Dual(i),
            Site::Dual(i) => Site::Primal(i),
        };
        FkDomain {
            n_sites: self.n_dual,
            n_dual: self.n_sites,
            edges: self
                .edges
                .iter()
                .map(|e| FkEdge {
                    u: e.du,
                    v: e.dv,
                    du: e.u,
                    dv: e.v,
                    p: 1.0 - dual_weight(1.0 - e.p),
                })
                .collect(),
            site_pos: self.dual_pos.clone(),
            dual_pos: self.site_pos.clone(),
            site_vertex: self.dual_vertex.clone(),
            dual_vertex: self.site_vertex.clone(),
            boundary: self
                .boundary
                .iter()
                .map(|c| c.iter().map(flip).collect())
                .collect(),
        }
    }

    /// Same graph with every open probability replaced.
    pub fn with_p(&self, p: impl Fn(usize, f64) -> f64) -> FkDomain {
        let mut out = self.clone();
        for (e, edge) in out.edges.iter_mut().enumerate() {
            edge.p = p(e, edge.p);
        }
        out
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    fn is_connected(&self) -> bool {
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(self.n_sites);
        for e in &self.edges {
            uf.union(e.u, e.v);
        }
        (0..self.n_sites).all(|i| uf.equiv(0, i))
    }
}

/// Boundary cycles of a set of quads: corners used by exactly one of them,
/// chained through shared vertices. Outer cycle first, all counterclockwise.
fn boundary_cycles(mesh: &QuadMesh, s: &[C64], quads: &[usize]) -> Result<Vec<Vec<usize>>> {
    let mut count: HashMap<usize, usize> = HashMap::new();
    for &z in quads {
        for &c in &mesh.quad_corners[z] {
            *count.entry(c).or_default() += 1;
        }
    }
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut bcorners: Vec<usize> = count
        .iter()
        .filter(|(_, &n)| n == 1)
        .map(|(&c, _)| c)
        .collect();
    bcorners.sort_unstable();
    for &c in &bcorners {
        let [b, w] = mesh.corners[c];
        adj.entry(b).or_default().push(w);
        adj.entry(w).or_default().push(b);
    }
    if let Some((v, _)) = adj.iter().find(|(_, n)| n.len() != 2) {
        return Err(Error::Geometry(format!(
            "boundary is pinched at vertex {v}"
        )));
    }
    let mut starts: Vec<usize> = adj.keys().copied().collect();
    starts.sort_unstable();
    let mut seen = std::collections::HashSet::new();
    let mut cycles = Vec::new();
    for start in starts {
        if seen.contains(&start) {
            continue;
        }
        let mut cyc = vec![start];
        seen.insert(start);
        let (mut prev, mut cur) = (start, adj[&start][0]);
        while cur != start {
            cyc.push(cur);
            seen.insert(cur);
            let n = &adj[&cur];
            let next = if n[0] == prev { n[1] } else { n[0] };
            prev = cur;
            cur = next;
        }
        let pts: Vec<C64> = cyc.iter().map(|&v| s[v]).collect();
        if geom::polygon_area(&pts) < 0.0 {
            cyc.reverse();
        }
        cycles.push(cyc);
    }
    let area = |c: &Vec<usize>| geom::polygon_area(&c.iter().map(|&v| s[v]).collect::<Vec<_>>());
    cycles.sort_by(|a, b| area(b).total_cmp(&area(a)));
    Ok(cycles)
}

/// Boundary conditions for the FK model on primal sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryConditions {
    Free,
    /// Arcs (a b)•, (b c)°, (c d)•, (d a)° in counterclockwise order: dual
    /// sites of the free arcs, primal sites of the wired ones. The wired arcs
    /// are contracted separately unless `joined`, which is the dual of
    /// separate wiring.
    FourArc {
        arcs: [Vec<usize>; 4],
        #[serde(default)]
        joined: bool,
    },
}

impl BoundaryConditions {
    /// Four arcs split at the boundary vertices nearest to the points `abcd`
    /// (counterclockwise). A splitting vertex joins the adjacent arc of its
    /// own colour.
    pub fn four_arc(dom: &FkDomain, abcd: [C64; 4]) -> Result<BoundaryConditions> {
        let cyc = dom
            .boundary
            .first()
            .ok_or_else(|| Error::Parameter("four-arc conditions need a boundary cycle".into()))?;
        let pos = |s: &Site| match *s {
            Site::Primal(i) => dom.site_pos[i],
            Site::Dual(i) => dom.dual_pos[i],
        };
        let marks: Vec<usize> = abcd
            .iter()
            .map(|&t| {
                (0..cyc.len())
                    .min_by(|&i, &j| {
                        (pos(&cyc[i]) - t)
                            .norm()
                            .total_cmp(&(pos(&cyc[j]) - t).norm())
                    })
                    .expect("non-empty cycle")
            })
            .collect();
        let n = cyc.len();
        // Offsets along the cycle from a; the marks must appear in order.
        let off = |i: usize| (i + n - marks[0]) % n;
        if !(off(marks[1]) > 0 && off(marks[1]) < off(marks[2]) && off(marks[2]) < off(marks[3])) {
            return Err(Error::Parameter(
                "arc corners are not in counterclockwise order".into(),
            ));
        }
        let mut arcs: [Vec<usize>; 4] = Default::default();
        for (i, site) in cyc.iter().enumerate() {
            let o = off(i);
            let seg = (0..4).rev().find(|&k| off(marks[k]) <= o).unwrap_or(0);
            let at_mark = marks.contains(&i);
            // Arcs 1 and 3 are wired (primal), 0 and 2 free (dual).
            let arc = match (site, at_mark) {
                (Site::Primal(_), false) if seg % 2 == 1 => seg,
                (Site::Dual(_), false) if seg % 2 == 0 => seg,
                (Site::Primal(_), true) => {
                    if seg % 2 == 1 {
                        seg
                    } else {
                        (seg + 3) % 4
                    }
                }
                (Site::Dual(_), true) => {
                    if seg % 2 == 0 {
                        seg
                    } else {
                        (seg + 3) % 4
                    }
                }
                _ => continue,
            };
            let idx = match *site {
                Site::Primal(k) | Site::Dual(k) => k,
            };
            arcs[arc].push(idx);
        }
        let bc = BoundaryConditions::FourArc {
            arcs,
            joined: false,
        };
        bc.validate(dom)?;
        Ok(bc)
    }

    /// Four arcs split at the corners of the bounding box: wired left and
    /// right sides, free top and bottom.
    pub fn rectangle(dom: &FkDomain) -> Result<BoundaryConditions> {
        let all: Vec<C64> = dom.site_pos.iter().chain(&dom.dual_pos).copied().collect();
        let (lo, hi) = all.iter().fold(
            (
                C64::new(f64::INFINITY, f64::INFINITY),
                C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            ),
            |(lo, hi), p| {
                (
                    C64::new(lo.re.min(p.re), lo.im.min(p.im)),
                    C64::new(hi.re.max(p.re), hi.im.max(p.im)),
                )
            },
        );
        BoundaryConditions::four_arc(
            dom,
            [lo, C64::new(hi.re, lo.im), hi, C64::new(lo.re, hi.im)],
        )
    }

    pub fn validate(&self, dom: &FkDomain) -> Result<()> {
        let BoundaryConditions::FourArc { arcs, .. } = self else {
            return Ok(());
        };
        for (k, arc) in arcs.iter().enumerate() {
            let n = if k % 2 == 1 { dom.n_sites } else { dom.n_dual };
            if arc.is_empty() {
                return Err(Error::Parameter(format!("boundary arc {k} is empty")));
            }
            if let Some(i) = arc.iter().find(|&&i| i >= n) {
                return Err(Error::Parameter(format!(
                    "boundary arc {k} names unknown site {i}"
                )));
            }
        }
        let overlap = |a: &[usize], b: &[usize]| a.iter().any(|i| b.contains(i));
        if overlap(&arcs[1], &arcs[3]) || overlap(&arcs[0], &arcs[2]) {
            return Err(Error::Parameter(
                "boundary arcs of the same type overlap".into(),
            ));
        }
        Ok(())
    }

    /// Groups of primal sites contracted to one vertex.
    pub fn wired_groups(&self) -> Vec<Vec<usize>> {
        match self {
            BoundaryConditions::Free => Vec::new(),
            BoundaryConditions::FourArc {
                arcs,
                joined: false,
            } => vec![arcs[1].clone(), arcs[3].clone()],
            BoundaryConditions::FourArc { arcs, joined: true } => {
                vec![[&arcs[1][..], &arcs[3][..]].concat()]
            }
        }
    }

    /// The conditions of the dual model: free arcs become wired and separate
    /// wiring becomes joined, and vice versa.
    pub fn dual(&self) -> BoundaryConditions {
        match self {
            BoundaryConditions::Free => BoundaryConditions::Free,
            BoundaryConditions::FourArc { arcs, joined } => BoundaryConditions::FourArc {
                arcs: [
                    arcs[1].clone(),
                    arcs[2].clone(),
                    arcs[3].clone(),
                    arcs[0].clone(),
                ],
                joined: !joined,
            },
        }
    }
}
