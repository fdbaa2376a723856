//! The quad complex Λ(G): black vertices G•, white vertices G°, one quad per
//! edge of G and one corner per Λ-edge.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::WeightedPlanarGraph;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Black,
    White,
}

/// Corner slots of a quad in counterclockwise order c00, c10, c11, c01.
/// Consecutive slots k, k+1 share the quad vertex with index (k + 1) % 4.
pub const SLOT_NAMES: [&str; 4] = ["c00", "c10", "c11", "c01"];

/// A region of Λ(G). Quads list vertices as [v•0, v°0, v•1, v°1]
/// counterclockwise, corners as [c00, c10, c11, c01] with c_pq = (v•p, v°q).
#[derive(Clone, Debug, PartialEq)]
pub struct QuadMesh {
    pub color: Vec<Color>,
    pub quads: Vec<[usize; 4]>,
    pub theta: Vec<f64>,
    pub corners: Vec<[usize; 2]>,
    pub quad_corners: Vec<[usize; 4]>,
    pub corner_quads: Vec<Vec<(usize, usize)>>,
}

impl QuadMesh {
    /// Mesh from explicit quads. Corners are identified by their (black, white)
    /// endpoint pair, which is unique in simply connected patches.
    pub fn from_quads(color: Vec<Color>, quads: Vec<[usize; 4]>, theta: Vec<f64>) -> Result<Self> {
        if quads.len() != theta.len() {
            return Err(Error::InvalidGraph("one angle per quad required".into()));
        }
        let mut index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut corners = Vec::new();
        let mut quad_corners = Vec::with_capacity(quads.len());
        for (z, q) in quads.iter().enumerate() {
            for &v in q {
                if v >= color.len() {
                    return Err(Error::InvalidGraph(format!(
                        "quad {z} names unknown vertex {v}"
                    )));
                }
            }
            let expect = [Color::Black, Color::White, Color::Black, Color::White];
            if (0..4).any(|i| color[q[i]] != expect[i]) {
                return Err(Error::InvalidGraph(format!(
                    "quad {z} does not alternate colours"
                )));
            }
            let mut cs = [0; 4];
            for (slot, pair) in slot_pairs(q).into_iter().enumerate() {
                cs[slot] = *index.entry(pair).or_insert_with(|| {
                    corners.push(pair);
                    corners.len() - 1
                });
            }
            quad_corners.push(cs);
        }
        Self::assemble(color, quads, theta, corners, quad_corners)
    }

    /// Mesh of the whole sphere Λ(G): black vertex v ↦ v, face f ↦ |G•| + f,
    /// quad z(e) ↦ e, corner ↦ dart. Corners are angular sectors, so repeated
    /// (vertex, face) incidences stay distinct.
    pub fn from_graph(g: &WeightedPlanarGraph) -> Self {
        let nv = g.n_vertices();
        let mut color = vec![Color::Black; nv];
        color.extend(std::iter::repeat_n(Color::White, g.n_faces()));
        let corners = (0..g.n_darts())
            .map(|d| [g.tail(d), nv + g.left_face(d)])
            .collect();
        let mut quads = Vec::with_capacity(g.n_edges());
        let mut quad_corners = Vec::with_capacity(g.n_edges());
        let mut theta = Vec::with_capacity(g.n_edges());
        for e in 0..g.n_edges() {
            let edge = g.edge(e);
            quads.push([edge.v0, nv + g.f_right(e), edge.v1, nv + g.f_left(e)]);
            quad_corners.push(graph_quad_corners(g, e));
            theta.push(g.theta(e));
        }
        Self::assemble(color, quads, theta, corners, quad_corners)
            .expect("graph meshes are well formed")
    }

    /// Mesh from explicit corner numbering, as stored in interchange files.
    pub fn from_parts(
        color: Vec<Color>,
        quads: Vec<[usize; 4]>,
        theta: Vec<f64>,
        corners: Vec<[usize; 2]>,
        quad_corners: Vec<[usize; 4]>,
    ) -> Result<Self> {
        if quads.len() != theta.len() || quads.len() != quad_corners.len() {
            return Err(Error::InvalidGraph(
                "quads, angles and corner lists differ in length".into(),
            ));
        }
        for (z, (q, cs)) in quads.iter().zip(&quad_corners).enumerate() {
            if q.iter().any(|&v| v >= color.len()) || cs.iter().any(|&c| c >= corners.len()) {
                return Err(Error::InvalidGraph(format!(
                    "quad {z} has an index out of range"
                )));
            }
            let expect = [Color::Black, Color::White, Color::Black, Color::White];
            if (0..4).any(|i| color[q[i]] != expect[i]) {
                return Err(Error::InvalidGraph(format!(
                    "quad {z} does not alternate colours"
                )));
            }
            if slot_pairs(q)
                .iter()
                .zip(cs)
                .any(|(pair, &c)| corners[c] != *pair)
            {
                return Err(Error::InvalidGraph(format!(
                    "corners of quad {z} do not match its vertices"
                )));
            }
        }
        Self::assemble(color, quads, theta, corners, quad_corners)
    }

    fn assemble(
        color: Vec<Color>,
        quads: Vec<[usize; 4]>,
        theta: Vec<f64>,
        corners: Vec<[usize; 2]>,
        quad_corners: Vec<[usize; 4]>,
    ) -> Result<Self> {
        let mut corner_quads = vec![Vec::new(); corners.len()];
        for (z, cs) in quad_corners.iter().enumerate() {
            for (slot, &c) in cs.iter().enumerate() {
                corner_quads[c].push((z, slot));
            }
        }
        if let Some(c) = corner_quads.iter().position(|q| q.len() > 2) {
            return Err(Error::InvalidGraph(format!(
                "corner {c} belongs to more than two quads"
            )));
        }
        for (z, &t) in theta.iter().enumerate() {
            if !(t > 0.0 && t < std::f64::consts::FRAC_PI_2) {
                return Err(Error::InvalidGraph(format!(
                    "quad {z} has angle {t} outside (0, π/2)"
                )));
            }
        }
        Ok(QuadMesh {
            color,
            quads,
            theta,
            corners,
            quad_corners,
            corner_quads,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.color.len()
    }

    pub fn n_quads(&self) -> usize {
        self.quads.len()
    }

    pub fn n_corners(&self) -> usize {
        self.corners.len()
    }

    /// Quads incident to each vertex.
    pub fn vertex_quads(&self) -> Vec<Vec<usize>> {
        let mut vq = vec![Vec::new(); self.n_vertices()];
        for (z, q) in self.quads.iter().enumerate() {
            for &v in q {
                if !vq[v].contains(&z) {
                    vq[v].push(z);
                }
            }
        }
        vq
    }

    /// Corners incident to each vertex.
    pub fn vertex_corners(&self) -> Vec<Vec<usize>> {
        let mut vc = vec![Vec::new(); self.n_vertices()];
        for (c, &[b, w]) in self.corners.iter().enumerate() {
            vc[b].push(c);
            vc[w].push(c);
        }
        vc
    }

    /// Vertices lying on a corner that belongs to a single quad.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut on = vec![false; self.n_vertices()];
        for (c, qs) in self.corner_quads.iter().enumerate() {
            if qs.len() < 2 {
                on[self.corners[c][0]] = true;
                on[self.corners[c][1]] = true;
            }
        }
        on
    }

    /// Quads sharing a corner with `z`.
    pub fn quad_neighbors(&self, z: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for &c in &self.quad_corners[z] {
            for &(z2, _) in &self.corner_quads[c] {
                if z2 != z && !out.contains(&z2) {
                    out.push(z2);
                }
            }
        }
        out
    }
}

/// (black, white) endpoints of the four corners of a quad, in slot order.
pub fn slot_pairs(q: &[usize; 4]) -> [[usize; 2]; 4] {
    [[q[0], q[1]], [q[2], q[1]], [q[2], q[3]], [q[0], q[3]]]
}

/// Corner darts of quad z(e) in slot order.
pub fn graph_quad_corners(g: &WeightedPlanarGraph, e: usize) -> [usize; 4] {
    [g.rot_prev(2 * e), 2 * e + 1, g.rot_prev(2 * e + 1), 2 * e]
}
