//! Kadanoff–Ceva correlators by exact enumeration.
//!
//! Spins σ sit on faces, disorders μ on vertices. With Γ a primal edge set
//! whose odd vertices are the disorders and Σ a set of primal edges whose dual
//! edges have odd faces exactly at the spins,
//!
//!   E[μ σ] = (−1)^{|Γ ∩ Σ|} Σ_{C ≡ Γ} (−1)^{|C ∩ Σ|} x(C) / Σ_{C even} x(C),
//!
//! where C ranges over the coset Γ + (cycle space). The value depends on Γ
//! and Σ only through their homology class relative to the defects; changing
//! Γ by a face cycle around a spin face flips the sign.

use serde::{Deserialize, Serialize};

use super::{weighted_sum, EdgeSet, WeightedPlanarGraph};
use crate::mesh::{graph_quad_corners, QuadMesh};
use crate::propagation::Cover;
use crate::{Error, Result};

/// Disorder vertices, spin faces and the paths pairing them. When a list has
/// odd length its path pairs all entries but the first; the first entry is
/// then paired with the vertex or face of a corner fermion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectSet {
    pub disorders: Vec<usize>,
    pub spins: Vec<usize>,
    pub disorder_path: EdgeSet,
    pub spin_path: EdgeSet,
}

fn odd_entries(list: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = if list.len() % 2 == 1 {
        list[1..].to_vec()
    } else {
        list.to_vec()
    };
    v.sort_unstable();
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        if (j - i) % 2 == 1 {
            out.push(v[i]);
        }
        i = j;
    }
    out
}

impl DefectSet {
    /// Defects with explicit paths, checked against the boundary conditions.
    pub fn new(
        g: &WeightedPlanarGraph,
        disorders: Vec<usize>,
        spins: Vec<usize>,
        disorder_path: EdgeSet,
        spin_path: EdgeSet,
    ) -> Result<Self> {
        if let Some(&v) = disorders.iter().find(|&&v| v >= g.n_vertices()) {
            return Err(Error::InvalidGraph(format!(
                "disorder vertex {v} out of range"
            )));
        }
        if let Some(&f) = spins.iter().find(|&&f| f >= g.n_faces()) {
            return Err(Error::InvalidGraph(format!("spin face {f} out of range")));
        }
        if g.odd_vertices(disorder_path) != odd_entries(&disorders) {
            return Err(Error::InvalidGraph(
                "disorder path has the wrong odd vertices".into(),
            ));
        }
        if g.odd_faces(spin_path) != odd_entries(&spins) {
            return Err(Error::InvalidGraph(
                "spin path has the wrong odd faces".into(),
            ));
        }
        Ok(DefectSet {
            disorders,
            spins,
            disorder_path,
            spin_path,
        })
    }

    /// Defects paired along breadth-first spanning trees.
    pub fn with_tree_paths(
        g: &WeightedPlanarGraph,
        disorders: Vec<usize>,
        spins: Vec<usize>,
    ) -> Result<Self> {
        super::enumerate::require_bitset(g)?;
        let dp = g.pairing_path(&odd_entries(&disorders)).expect("even list");
        let sp = g
            .dual_pairing_path(&odd_entries(&spins))
            .expect("even list");
        Self::new(g, disorders, spins, dp, sp)
    }

    pub fn empty() -> Self {
        DefectSet {
            disorders: Vec::new(),
            spins: Vec::new(),
            disorder_path: EdgeSet::empty(),
            spin_path: EdgeSet::empty(),
        }
    }

    /// Vertices of Λ(G) carrying a defect: disorder vertices and n_vertices + spin face.
    pub fn lambda_vertices(&self, g: &WeightedPlanarGraph) -> Vec<usize> {
        let mut out: Vec<usize> = self.disorders.clone();
        out.extend(self.spins.iter().map(|f| g.n_vertices() + f));
        out
    }
}

/// One of the two lifts of corner `corner` (a dart of G).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CornerLift {
    pub corner: usize,
    pub sheet: bool,
}

/// A correlator value. `note` explains exact zeros forced by parity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KcValue {
    pub value: f64,
    pub note: Option<String>,
}

/// Disorder and spin paths including the corner fermion, or `None` if the
/// defect counts cannot be paired.
fn total_paths(
    g: &WeightedPlanarGraph,
    defects: &DefectSet,
    corner: Option<usize>,
    trees: &Trees,
) -> Option<(EdgeSet, EdgeSet)> {
    match corner {
        None => (defects.disorders.len().is_multiple_of(2)
            && defects.spins.len().is_multiple_of(2))
        .then_some((defects.disorder_path, defects.spin_path)),
        Some(d) => {
            if defects.disorders.len().is_multiple_of(2) || defects.spins.len().is_multiple_of(2) {
                return None;
            }
            let v = g.tail(d);
            let f = g.left_face(d);
            let gamma = defects
                .disorder_path
                .xor(g.tree_path_to_root(&trees.primal, defects.disorders[0]))
                .xor(g.tree_path_to_root(&trees.primal, v));
            let sigma = defects
                .spin_path
                .xor(g.dual_path_to_root(&trees.dual, defects.spins[0]))
                .xor(g.dual_path_to_root(&trees.dual, f));
            Some((gamma, sigma))
        }
    }
}

struct Trees {
    primal: Vec<Option<usize>>,
    dual: Vec<Option<usize>>,
}

impl Trees {
    fn new(g: &WeightedPlanarGraph) -> Self {
        Trees {
            primal: g.primal_tree(0),
            dual: g.dual_tree(g.outer_face()),
        }
    }
}

/// Ratio of signed weighted sums for explicit paths Γ (disorders) and Σ (spins).
pub fn correlator_from_paths(
    g: &WeightedPlanarGraph,
    gamma: EdgeSet,
    sigma: EdgeSet,
    cap: usize,
) -> Result<f64> {
    let z = weighted_sum(g, &[], EdgeSet::empty(), cap)?;
    let num = weighted_sum(g, &g.odd_vertices(gamma), sigma, cap)?;
    let sign = if gamma.meet_parity(sigma) { -1.0 } else { 1.0 };
    Ok(sign * num.ratio(z))
}

/// E[χ_c μ_{v•…} σ_{v°…}] when `corner` is given, E[μ_{v•…} σ_{v°…}] otherwise.
pub fn kadanoff_ceva_correlator(
    g: &WeightedPlanarGraph,
    defects: &DefectSet,
    corner: Option<CornerLift>,
    cap: usize,
) -> Result<KcValue> {
    super::enumerate::require_bitset(g)?;
    let trees = Trees::new(g);
    let Some((gamma, sigma)) = total_paths(g, defects, corner.map(|c| c.corner), &trees) else {
        return Ok(KcValue {
            value: 0.0,
            note: Some("disorders or spins cannot be paired: correlator vanishes".into()),
        });
    };
    let v = correlator_from_paths(g, gamma, sigma, cap)?;
    let sheet = corner.is_some_and(|c| c.sheet);
    Ok(KcValue {
        value: if sheet { -v } else { v },
        note: None,
    })
}

/// The fermionic observable c ↦ E[χ_c μ σ] on the reference lift of every
/// corner, together with the cover relating lifts of neighbouring corners.
pub fn kc_spinor(
    g: &WeightedPlanarGraph,
    defects: &DefectSet,
    cap: usize,
) -> Result<(QuadMesh, Cover, Vec<f64>)> {
    super::enumerate::require_bitset(g)?;
    let mesh = QuadMesh::from_graph(g);
    let trees = Trees::new(g);
    let paths: Vec<(EdgeSet, EdgeSet)> = (0..g.n_darts())
        .map(|d| total_paths(g, defects, Some(d), &trees).ok_or(Error::OddDefects))
        .collect::<Result<_>>()?;
    let z = weighted_sum(g, &[], EdgeSet::empty(), cap)?;
    let values = crate::par::map_slice(&paths, |&(gamma, sigma)| {
        let num = weighted_sum(g, &g.odd_vertices(gamma), sigma, cap).map(|n| n.ratio(z));
        num.map(|n| if gamma.meet_parity(sigma) { -n } else { n })
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let mut signs = Vec::with_capacity(g.n_edges());
    for e in 0..g.n_edges() {
        let cs = graph_quad_corners(g, e);
        let mut s = [0i8; 4];
        for (k, slot) in s.iter_mut().enumerate() {
            let (a, b) = (cs[k], cs[(k + 1) % 4]);
            let (ga, sa) = paths[a];
            let (gb, _) = paths[b];
            let flip = if k % 2 == 1 {
                // Shared black vertex: the spin paths differ by crossing e.
                gb.contains(e)
            } else {
                // Shared white vertex: the disorder paths close up through e.
                ga.xor(gb).xor(EdgeSet::singleton(e)).meet_parity(sa)
            };
            *slot = if flip { -1 } else { 1 };
        }
        signs.push(s);
    }
    Ok((mesh, Cover { signs }, values))
}
