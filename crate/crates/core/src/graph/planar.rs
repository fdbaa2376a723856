use std::collections::VecDeque;

use super::EdgeSet;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub v0: usize,
    pub v1: usize,
    pub x: f64,
}

/// A connected planar map with positive edge weights. Spins live on faces.
///
/// Darts are numbered `2e` (from `v0` to `v1`) and `2e + 1` (reverse). The
/// rotation at each vertex lists outgoing darts counterclockwise. Corners of
/// the graph (angular sectors) are identified with darts: corner `d` is the
/// sector swept counterclockwise from `d`, so it sits at `tail(d)` inside
/// `left_face(d)`.
#[derive(Clone, Debug)]
pub struct WeightedPlanarGraph {
    n_vertices: usize,
    edges: Vec<Edge>,
    rot: Vec<Vec<usize>>,
    dart_pos: Vec<usize>,
    dart_face: Vec<usize>,
    faces: Vec<Vec<usize>>,
    outer_face: usize,
}

impl WeightedPlanarGraph {
    /// Build from per-vertex counterclockwise edge orders. Faces are traced from
    /// the rotation system and numbered in order of their smallest dart.
    pub fn from_rotations(
        n_vertices: usize,
        edges: Vec<Edge>,
        rotations: Vec<Vec<usize>>,
        outer_face: Option<usize>,
    ) -> Result<Self> {
        if rotations.len() != n_vertices {
            return Err(Error::InvalidGraph(format!(
                "{} rotations for {} vertices",
                rotations.len(),
                n_vertices
            )));
        }
        for (i, e) in edges.iter().enumerate() {
            if e.v0 >= n_vertices || e.v1 >= n_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} has an endpoint out of range"
                )));
            }
            if e.v0 == e.v1 {
                return Err(Error::Loop(i));
            }
            if !(e.x.is_finite() && e.x > 0.0 && e.x < 1.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} has weight {} outside (0, 1)",
                    e.x
                )));
            }
        }
        let mut rot = Vec::with_capacity(n_vertices);
        let mut seen = vec![false; 2 * edges.len()];
        for (v, order) in rotations.iter().enumerate() {
            let mut darts = Vec::with_capacity(order.len());
            for &e in order {
                let edge = edges.get(e).ok_or_else(|| {
                    Error::InvalidGraph(format!("rotation of vertex {v} names unknown edge {e}"))
                })?;
                let d = if edge.v0 == v {
                    2 * e
                } else if edge.v1 == v {
                    2 * e + 1
                } else {
                    return Err(Error::InvalidGraph(format!(
                        "rotation of vertex {v} names edge {e} which is not incident"
                    )));
                };
                if seen[d] {
                    return Err(Error::InvalidGraph(format!(
                        "edge {e} repeated in rotation of vertex {v}"
                    )));
                }
                seen[d] = true;
                darts.push(d);
            }
            rot.push(darts);
        }
        if let Some(d) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidGraph(format!(
                "edge {} missing from rotation of vertex {}",
                d / 2,
                if d % 2 == 0 {
                    edges[d / 2].v0
                } else {
                    edges[d / 2].v1
                }
            )));
        }
        for (v, r) in rot.iter().enumerate() {
            match r.len() {
                0 => return Err(Error::InvalidGraph(format!("vertex {v} is isolated"))),
                1 => return Err(Error::DegreeOne(v)),
                _ => {}
            }
        }
        let mut dart_pos = vec![0; 2 * edges.len()];
        for r in &rot {
            for (i, &d) in r.iter().enumerate() {
                dart_pos[d] = i;
            }
        }
        let mut g = WeightedPlanarGraph {
            n_vertices,
            edges,
            rot,
            dart_pos,
            dart_face: Vec::new(),
            faces: Vec::new(),
            outer_face: 0,
        };
        if !g.is_connected() {
            return Err(Error::InvalidGraph("graph is disconnected".into()));
        }
        g.trace_faces();
        let genus2 = 2 + g.edges.len() as i64 - g.n_vertices as i64 - g.faces.len() as i64;
        if genus2 != 0 {
            return Err(Error::NonPlanar(format!(
                "rotation system has genus {} (V={}, E={}, F={})",
                genus2 / 2,
                g.n_vertices,
                g.edges.len(),
                g.faces.len()
            )));
        }
        g.outer_face = match outer_face {
            Some(f) if f < g.faces.len() => f,
            Some(f) => return Err(Error::InvalidGraph(format!("outer face {f} out of range"))),
            None => g.largest_face(),
        };
        Ok(g)
    }

    /// Build from vertex coordinates: rotations are sorted by angle and the
    /// straight-line drawing must be crossing-free.
    pub fn from_coordinates(
        positions: &[(f64, f64)],
        edges: Vec<Edge>,
        outer_face: Option<usize>,
    ) -> Result<Self> {
        let n = positions.len();
        for (i, e) in edges.iter().enumerate() {
            if e.v0 >= n || e.v1 >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} has an endpoint out of range"
                )));
            }
        }
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                if segments_cross(positions, &edges[i], &edges[j]) {
                    return Err(Error::NonPlanar(format!("edges {i} and {j} cross")));
                }
            }
        }
        let mut rotations: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            let (a, b) = (positions[e.v0], positions[e.v1]);
            rotations[e.v0].push(((b.1 - a.1).atan2(b.0 - a.0), i));
            rotations[e.v1].push(((a.1 - b.1).atan2(a.0 - b.0), i));
        }
        let rotations = rotations
            .into_iter()
            .map(|mut r| {
                r.sort_by(|p, q| p.0.total_cmp(&q.0));
                r.into_iter().map(|(_, e)| e).collect()
            })
            .collect();
        Self::from_rotations(n, edges, rotations, outer_face)
    }

    fn is_connected(&self) -> bool {
        if self.n_vertices == 0 {
            return false;
        }
        let mut seen = vec![false; self.n_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &d in &self.rot[v] {
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn trace_faces(&mut self) {
        let nd = 2 * self.edges.len();
        self.dart_face = vec![usize::MAX; nd];
        self.faces.clear();
        for start in 0..nd {
            if self.dart_face[start] != usize::MAX {
                continue;
            }
            let f = self.faces.len();
            let mut boundary = Vec::new();
            let mut d = start;
            loop {
                self.dart_face[d] = f;
                boundary.push(d);
                d = self.face_next(d);
                if d == start {
                    break;
                }
            }
            self.faces.push(boundary);
        }
    }

    fn largest_face(&self) -> usize {
        let mut best = 0;
        for (f, b) in self.faces.iter().enumerate() {
            if b.len() > self.faces[best].len() {
                best = f;
            }
        }
        best
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_darts(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Edge {
        self.edges[e]
    }

    pub fn outer_face(&self) -> usize {
        self.outer_face
    }

    /// θ = 2·arctan x of edge `e`.
    pub fn theta(&self, e: usize) -> f64 {
        2.0 * self.edges[e].x.atan()
    }

    /// Counterclockwise outgoing darts at `v`.
    pub fn rotation(&self, v: usize) -> &[usize] {
        &self.rot[v]
    }

    /// Rotation as edge ids (the interchange representation).
    pub fn rotation_edges(&self, v: usize) -> Vec<usize> {
        self.rot[v].iter().map(|d| d / 2).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.rot[v].len()
    }

    pub fn tail(&self, d: usize) -> usize {
        let e = self.edges[d / 2];
        if d.is_multiple_of(2) {
            e.v0
        } else {
            e.v1
        }
    }

    pub fn head(&self, d: usize) -> usize {
        self.tail(d ^ 1)
    }

    /// Next dart counterclockwise around `tail(d)`.
    pub fn rot_next(&self, d: usize) -> usize {
        let r = &self.rot[self.tail(d)];
        r[(self.dart_pos[d] + 1) % r.len()]
    }

    /// Previous dart counterclockwise (next clockwise) around `tail(d)`.
    pub fn rot_prev(&self, d: usize) -> usize {
        let r = &self.rot[self.tail(d)];
        r[(self.dart_pos[d] + r.len() - 1) % r.len()]
    }

    /// Successor of `d` along the boundary of its left face.
    pub fn face_next(&self, d: usize) -> usize {
        self.rot_prev(d ^ 1)
    }

    /// Face on the left of dart `d`.
    pub fn left_face(&self, d: usize) -> usize {
        self.dart_face[d]
    }

    pub fn f_left(&self, e: usize) -> usize {
        self.dart_face[2 * e]
    }

    pub fn f_right(&self, e: usize) -> usize {
        self.dart_face[2 * e + 1]
    }

    /// Darts bounding face `f`, counterclockwise.
    pub fn face_boundary(&self, f: usize) -> &[usize] {
        &self.faces[f]
    }

    /// Edge set of the boundary walk of face `f` (edges traversed twice cancel).
    pub fn face_cycle(&self, f: usize) -> EdgeSet {
        EdgeSet::from_edges(self.faces[f].iter().map(|d| d / 2))
    }

    /// Vertices with odd degree in `set`.
    pub fn odd_vertices(&self, set: EdgeSet) -> Vec<usize> {
        let mut parity = vec![false; self.n_vertices];
        for e in set.iter() {
            parity[self.edges[e].v0] ^= true;
            parity[self.edges[e].v1] ^= true;
        }
        (0..self.n_vertices).filter(|&v| parity[v]).collect()
    }

    /// Faces incident to an odd number of dual edges of `set`.
    pub fn odd_faces(&self, set: EdgeSet) -> Vec<usize> {
        let mut parity = vec![false; self.faces.len()];
        for e in set.iter() {
            parity[self.f_left(e)] ^= true;
            parity[self.f_right(e)] ^= true;
        }
        (0..self.faces.len()).filter(|&f| parity[f]).collect()
    }

    /// Breadth-first spanning tree of G rooted at `root`: parent edge per vertex.
    pub fn primal_tree(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.n_vertices];
        let mut seen = vec![false; self.n_vertices];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(v) = queue.pop_front() {
            for &d in &self.rot[v] {
                let w = self.head(d);
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(d / 2);
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    /// Breadth-first spanning tree of the dual graph rooted at face `root`.
    pub fn dual_tree(&self, root: usize) -> Vec<Option<usize>> {
        let nf = self.faces.len();
        let mut parent = vec![None; nf];
        let mut seen = vec![false; nf];
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(f) = queue.pop_front() {
            for &d in &self.faces[f] {
                let g = self.left_face(d ^ 1);
                if !seen[g] {
                    seen[g] = true;
                    parent[g] = Some(d / 2);
                    queue.push_back(g);
                }
            }
        }
        parent
    }

    /// Edges on the tree path from the tree root to `v`. Edge sets are
    /// bitsets, so these path helpers need at most 128 edges.
    pub fn tree_path_to_root(&self, parent: &[Option<usize>], mut v: usize) -> EdgeSet {
        let mut set = EdgeSet::empty();
        while let Some(e) = parent[v] {
            set.toggle(e);
            let edge = self.edges[e];
            v = if edge.v0 == v { edge.v1 } else { edge.v0 };
        }
        set
    }

    /// Primal edges crossed by the dual tree path from the dual root to `f`.
    pub fn dual_path_to_root(&self, parent: &[Option<usize>], mut f: usize) -> EdgeSet {
        let mut set = EdgeSet::empty();
        while let Some(e) = parent[f] {
            set.toggle(e);
            f = if self.f_left(e) == f {
                self.f_right(e)
            } else {
                self.f_left(e)
            };
        }
        set
    }

    /// Edge set with odd degree exactly at the vertices appearing an odd number
    /// of times in `vertices`, built from tree paths. `None` if that count is odd.
    pub fn pairing_path(&self, vertices: &[usize]) -> Option<EdgeSet> {
        let parent = self.primal_tree(0);
        let mut set = EdgeSet::empty();
        let mut parity = 0usize;
        for &v in vertices {
            set = set.xor(self.tree_path_to_root(&parent, v));
            parity ^= 1;
        }
        (parity == 0).then_some(set)
    }

    /// Dual counterpart of [`pairing_path`](Self::pairing_path) for faces.
    pub fn dual_pairing_path(&self, faces: &[usize]) -> Option<EdgeSet> {
        let parent = self.dual_tree(self.outer_face);
        let mut set = EdgeSet::empty();
        let mut parity = 0usize;
        for &f in faces {
            set = set.xor(self.dual_path_to_root(&parent, f));
            parity ^= 1;
        }
        (parity == 0).then_some(set)
    }

    /// Kramers–Wannier dual: vertices ↔ faces, x ↦ (1 − x)/(1 + x). Also
    /// returns, for each vertex of `self`, the face of the dual containing it.
    pub fn dual(&self) -> Result<(WeightedPlanarGraph, Vec<usize>)> {
        let edges: Vec<Edge> = (0..self.edges.len())
            .map(|e| Edge {
                v0: self.f_right(e),
                v1: self.f_left(e),
                x: (1.0 - self.edges[e].x) / (1.0 + self.edges[e].x),
            })
            .collect();
        let rotations: Vec<Vec<usize>> = self
            .faces
            .iter()
            .map(|b| b.iter().map(|d| d / 2).collect())
            .collect();
        let dual = WeightedPlanarGraph::from_rotations(self.faces.len(), edges, rotations, None)?;
        // The dual dart with the same index as a primal dart d crosses d from
        // right to left, so tail(d) lies on its left.
        let vertex_face = self.rot.iter().map(|r| dual.left_face(r[0])).collect();
        Ok((dual, vertex_face))
    }

    /// Copy with new weights.
    pub fn with_weights(&self, x: &[f64]) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .zip(x)
            .map(|(e, &x)| Edge { x, ..*e })
            .collect();
        let rotations = (0..self.n_vertices)
            .map(|v| self.rotation_edges(v))
            .collect();
        Self::from_rotations(self.n_vertices, edges, rotations, Some(self.outer_face))
    }
}

fn segments_cross(p: &[(f64, f64)], a: &Edge, b: &Edge) -> bool {
    let shared = a.v0 == b.v0 || a.v0 == b.v1 || a.v1 == b.v0 || a.v1 == b.v1;
    let (p1, p2, p3, p4) = (p[a.v0], p[a.v1], p[b.v0], p[b.v1]);
    let orient = |o: (f64, f64), u: (f64, f64), v: (f64, f64)| {
        (u.0 - o.0) * (v.1 - o.1) - (u.1 - o.1) * (v.0 - o.0)
    };
    let d1 = orient(p3, p4, p1);
    let d2 = orient(p3, p4, p2);
    let d3 = orient(p1, p2, p3);
    let d4 = orient(p1, p2, p4);
    if shared {
        // Collinear overlap of edges sharing an endpoint.
        return d1 == 0.0 && d2 == 0.0 && {
            let dot = |u: (f64, f64), v: (f64, f64)| u.0 * v.0 + u.1 * v.1;
            let common = if a.v0 == b.v0 || a.v0 == b.v1 { p1 } else { p2 };
            let oa = if common == p1 { p2 } else { p1 };
            let ob = if common == p3 { p4 } else { p3 };
            dot(
                (oa.0 - common.0, oa.1 - common.1),
                (ob.0 - common.0, ob.1 - common.1),
            ) > 0.0
        };
    }
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0
        || (d1 == 0.0 && on_segment(p3, p4, p1))
        || (d2 == 0.0 && on_segment(p3, p4, p2))
        || (d3 == 0.0 && on_segment(p1, p2, p3))
        || (d4 == 0.0 && on_segment(p1, p2, p4))
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}
