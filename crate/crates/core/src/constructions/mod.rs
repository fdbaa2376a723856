//! Explicit s-embeddings: square lattices, zig-zag layered models, isoradial
//! rhombus tilings and circle patterns of triangulations.

mod isoradial;
mod packing;
mod zigzag;

use serde::{Deserialize, Serialize};

pub use isoradial::{
    isoradial_from_rhombi, penrose_rhombi, square_rhombi, triangular_rhombi, RhombusTiling,
};
pub use packing::{
    circle_pattern_from_triangulation, hexagonal_triangulation, pack_circles, random_delaunay,
    single_triangle, CirclePacking, Triangulation,
};
pub use zigzag::{
    column_increments, massive_square_lattice, square_lattice, zigzag_layered, ColumnIncrement,
    LayerSpec, RandomLayers,
};

use crate::embedding::SEmbedding;
use crate::graph::{Edge, WeightedPlanarGraph};
use crate::mesh::{Color, QuadMesh};
use crate::{geom, Error, Result, C64};

/// Construction diagnostics kept next to the output.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstructionMeta {
    pub kind: String,
    /// Realised Rademacher signs of an IID layered model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realized_z: Option<Vec<i8>>,
    /// Largest disagreement between two independent routes to the same data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cross_check: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packing_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_circle_radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// An embedding together with its weighted graph G.
#[derive(Clone, Debug)]
pub struct Construction {
    pub embedding: SEmbedding,
    /// G on the black vertices, `None` when no cycle survives pruning.
    pub graph: Option<PatchGraph>,
    pub meta: ConstructionMeta,
}

/// G read off a patch of Λ(G): black vertices, one edge per quad and all
/// boundary faces merged into the outer face. Pendant black vertices are
/// pruned repeatedly, so the quads at them have no edge.
#[derive(Clone, Debug)]
pub struct PatchGraph {
    pub graph: WeightedPlanarGraph,
    /// Mesh vertex of each graph vertex.
    pub vertex: Vec<usize>,
    /// Quad of each graph edge.
    pub edge: Vec<usize>,
}

pub fn graph_from_mesh(mesh: &QuadMesh, s: &[C64], center: &[C64]) -> Result<PatchGraph> {
    let n = mesh.n_vertices();
    let mut alive = vec![true; mesh.n_quads()];
    let mut degree = vec![0usize; n];
    for q in &mesh.quads {
        degree[q[0]] += 1;
        degree[q[2]] += 1;
    }
    let vq = mesh.vertex_quads();
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = stack.pop() {
        if degree[v] != 1 {
            continue;
        }
        let Some(&z) = vq[v].iter().find(|&&z| alive[z]) else {
            continue;
        };
        alive[z] = false;
        for u in [mesh.quads[z][0], mesh.quads[z][2]] {
            degree[u] -= 1;
            if degree[u] == 1 {
                stack.push(u);
            }
        }
    }
    let vertex: Vec<usize> = (0..n)
        .filter(|&v| mesh.color[v] == Color::Black && degree[v] >= 2)
        .collect();
    if vertex.is_empty() {
        return Err(Error::InvalidGraph(
            "no cycle survives pruning of pendant vertices".into(),
        ));
    }
    let mut id = vec![usize::MAX; n];
    for (i, &v) in vertex.iter().enumerate() {
        id[v] = i;
    }
    let edge: Vec<usize> = (0..mesh.n_quads()).filter(|&z| alive[z]).collect();
    let edges: Vec<Edge> = edge
        .iter()
        .map(|&z| Edge {
            v0: id[mesh.quads[z][0]],
            v1: id[mesh.quads[z][2]],
            x: (mesh.theta[z] / 2.0).tan(),
        })
        .collect();
    let mut rotations: Vec<Vec<(f64, usize)>> = vec![Vec::new(); vertex.len()];
    for (e, &z) in edge.iter().enumerate() {
        for v in [mesh.quads[z][0], mesh.quads[z][2]] {
            let d = center[z] - s[v];
            rotations[id[v]].push((d.im.atan2(d.re), e));
        }
    }
    let rotations: Vec<Vec<usize>> = rotations
        .into_iter()
        .map(|mut r| {
            r.sort_by(|a, b| a.0.total_cmp(&b.0));
            r.into_iter().map(|(_, e)| e).collect()
        })
        .collect();
    let g = WeightedPlanarGraph::from_rotations(vertex.len(), edges, rotations.clone(), None)?;
    // Inner faces are traced counterclockwise, the outer one clockwise.
    let outer = (0..g.n_faces())
        .min_by(|&a, &b| face_area(&g, &vertex, s, a).total_cmp(&face_area(&g, &vertex, s, b)))
        .unwrap_or(0);
    let graph = WeightedPlanarGraph::from_rotations(
        vertex.len(),
        g.edges().to_vec(),
        rotations,
        Some(outer),
    )?;
    Ok(PatchGraph {
        graph,
        vertex,
        edge,
    })
}

fn face_area(g: &WeightedPlanarGraph, vertex: &[usize], s: &[C64], f: usize) -> f64 {
    let pts: Vec<C64> = g
        .face_boundary(f)
        .iter()
        .map(|&d| s[vertex[g.tail(d)]])
        .collect();
    geom::polygon_area(&pts)
}

/// Embedding of explicit quads plus its patch graph.
pub(crate) fn assemble(
    color: Vec<Color>,
    quads: Vec<[usize; 4]>,
    s: Vec<C64>,
    meta: ConstructionMeta,
) -> Result<Construction> {
    let (embedding, _) = SEmbedding::from_geometry(color, quads, s)?;
    let graph = graph_from_mesh(&embedding.mesh, &embedding.s, &embedding.center).ok();
    Ok(Construction {
        embedding,
        graph,
        meta,
    })
}

/// Construction requests as stored in configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstructionSpec {
    SquareLattice {
        n: usize,
        #[serde(default = "quarter_pi")]
        theta: f64,
    },
    /// tan θ = 1 + c/n.
    MassiveSquare {
        n: usize,
        c: f64,
    },
    Zigzag {
        layers: LayerSpec,
    },
    Isoradial {
        tiling: TilingKind,
        size: usize,
        #[serde(default = "one")]
        delta: f64,
    },
    CirclePattern {
        triangulation: TriangulationKind,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TilingKind {
    Square,
    Triangular,
    Penrose,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TriangulationKind {
    Single,
    Hexagonal { rings: usize },
    Random { faces: usize, seed: u64 },
    Explicit(Triangulation),
}

fn quarter_pi() -> f64 {
    std::f64::consts::FRAC_PI_4
}

fn one() -> f64 {
    1.0
}

pub fn build(spec: &ConstructionSpec) -> Result<Construction> {
    match spec {
        ConstructionSpec::SquareLattice { n, theta } => square_lattice(*n, *theta),
        ConstructionSpec::MassiveSquare { n, c } => massive_square_lattice(*n, *c),
        ConstructionSpec::Zigzag { layers } => zigzag_layered(layers),
        ConstructionSpec::Isoradial {
            tiling,
            size,
            delta,
        } => {
            let t = match tiling {
                TilingKind::Square => square_rhombi(*size, *delta),
                TilingKind::Triangular => triangular_rhombi(*size, *delta),
                TilingKind::Penrose => penrose_rhombi(*size as f64, *delta),
            };
            isoradial_from_rhombi(&t, *delta)
        }
        ConstructionSpec::CirclePattern { triangulation } => {
            let tri = match triangulation {
                TriangulationKind::Single => single_triangle(),
                TriangulationKind::Hexagonal { rings } => hexagonal_triangulation(*rings),
                TriangulationKind::Random { faces, seed } => random_delaunay(*faces, *seed),
                TriangulationKind::Explicit(t) => t.clone(),
            };
            circle_pattern_from_triangulation(&tri)
        }
    }
}
