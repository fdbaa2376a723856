//! Graph interchange format.
//!
//! ```json
//! { "vertices": 4, "faces": 2, "outer_face": 1,
//!   "edges": [{"v0": 0, "v1": 1, "f_left": 0, "f_right": 1, "x": 0.5}, ...],
//!   "rotations": [[0, 3], [1, 0], ...] }
//! ```
//!
//! `rotations[v]` lists edge ids counterclockwise around v. Faces are numbered
//! by the tracing order of the rotation system; the declared `f_left` and
//! `f_right` of every edge must agree with the traced faces.

use serde::{Deserialize, Serialize};

use super::{Edge, WeightedPlanarGraph};
use crate::{schema, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub v0: usize,
    pub v1: usize,
    pub f_left: usize,
    pub f_right: usize,
    pub x: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphRecord {
    pub vertices: usize,
    pub faces: usize,
    pub outer_face: usize,
    pub edges: Vec<EdgeRecord>,
    pub rotations: Vec<Vec<usize>>,
}

impl GraphRecord {
    pub fn from_graph(g: &WeightedPlanarGraph) -> Self {
        GraphRecord {
            vertices: g.n_vertices(),
            faces: g.n_faces(),
            outer_face: g.outer_face(),
            edges: (0..g.n_edges())
                .map(|e| {
                    let ed = g.edge(e);
                    EdgeRecord {
                        v0: ed.v0,
                        v1: ed.v1,
                        f_left: g.f_left(e),
                        f_right: g.f_right(e),
                        x: ed.x,
                    }
                })
                .collect(),
            rotations: (0..g.n_vertices()).map(|v| g.rotation_edges(v)).collect(),
        }
    }

    pub fn to_graph(&self) -> Result<WeightedPlanarGraph> {
        if self.rotations.len() != self.vertices {
            return Err(Error::schema(
                "rotations",
                format!(
                    "expected {} entries, found {}",
                    self.vertices,
                    self.rotations.len()
                ),
            ));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if !(e.x.is_finite() && e.x > 0.0) {
                return Err(Error::schema(
                    format!("edges[{i}].x"),
                    "weight must be positive and finite",
                ));
            }
        }
        if self.outer_face >= self.faces {
            return Err(Error::schema("outer_face", "out of range"));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                v0: e.v0,
                v1: e.v1,
                x: e.x,
            })
            .collect();
        let g = WeightedPlanarGraph::from_rotations(
            self.vertices,
            edges,
            self.rotations.clone(),
            Some(self.outer_face),
        )?;
        if g.n_faces() != self.faces {
            return Err(Error::schema(
                "faces",
                format!("declared {}, traced {}", self.faces, g.n_faces()),
            ));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if g.f_left(i) != e.f_left || g.f_right(i) != e.f_right {
                return Err(Error::schema(
                    format!("edges[{i}]"),
                    "incident faces disagree with face tracing",
                ));
            }
        }
        Ok(g)
    }
}

pub fn graph_to_json(g: &WeightedPlanarGraph) -> String {
    schema::to_string(&GraphRecord::from_graph(g))
}

pub fn graph_from_json(text: &str) -> Result<WeightedPlanarGraph> {
    schema::from_str::<GraphRecord>(text)?.to_graph()
}
