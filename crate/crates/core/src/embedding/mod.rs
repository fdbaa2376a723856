//! s-embeddings: positions S on Λ(G) ∪ ◇(G) and the origami map Q.
//!
//! From a complex spinor 𝒳 solving the propagation equation, corner
//! increments S(v•) − S(v°) = 𝒳(c)² and Q(v•) − Q(v°) = |𝒳(c)|² are
//! integrated over Λ(G), and each quad center is
//!
//!   S(z) = S(v•_p) − ε 𝒳(c_p0) 𝒳(c_p1) cos θ_z = S(v°_q) + ε 𝒳(c_0q) 𝒳(c_1q) sin θ_z,
//!
//! with ε the cover sign between the two corners.

mod checks;
pub mod io;

use serde::{Deserialize, Serialize};

pub use checks::{
    check_properness, exp_fat_check, lip_scale, lip_scale_sequential, ExpFatReport, LipReport,
    ProperReport,
};

use crate::geom::{self, TangentialQuad};
use crate::mesh::{Color, QuadMesh};
use crate::propagation::{reference_lifts, verify_spinor, Cover};
use crate::{tol, Error, Result, C64};

/// The spinor an embedding was integrated from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinorData {
    pub cover: Cover,
    pub values: Vec<C64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SEmbedding {
    pub mesh: QuadMesh,
    /// Positions of the vertices of Λ(G).
    pub s: Vec<C64>,
    /// Quad centers S(z).
    pub center: Vec<C64>,
    pub radius: Vec<f64>,
    /// Origami map on Λ(G), zero at the anchor vertex.
    pub q: Vec<f64>,
    pub spinor: Option<SpinorData>,
}

/// Diagnostics gathered while integrating a spinor.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BuildReport {
    pub max_propagation_residual: f64,
    pub max_closure_mismatch: f64,
    pub worst_quad: Option<usize>,
    /// Largest disagreement between the four center formulas of a quad.
    pub max_center_spread: f64,
    pub degenerate: Vec<usize>,
}

/// Breadth-first visiting order over the corner graph of Λ(G) from `root`,
/// with the (parent vertex, corner) used to reach each vertex.
fn bfs_order(mesh: &QuadMesh, root: usize) -> (Vec<usize>, Vec<Option<(usize, usize)>>) {
    let vc = mesh.vertex_corners();
    let mut parent = vec![None; mesh.n_vertices()];
    let mut seen = vec![false; mesh.n_vertices()];
    seen[root] = true;
    let mut order = vec![root];
    let mut i = 0;
    while i < order.len() {
        let v = order[i];
        i += 1;
        for &c in &vc[v] {
            let [b, w] = mesh.corners[c];
            let u = if b == v { w } else { b };
            if !seen[u] {
                seen[u] = true;
                parent[u] = Some((v, c));
                order.push(u);
            }
        }
    }
    (order, parent)
}

/// Integrate corner increments `inc[c]` (value at v• minus value at v°).
pub(crate) fn integrate<T>(
    mesh: &QuadMesh,
    root: usize,
    anchor: T,
    inc: impl Fn(usize) -> T,
) -> Result<Vec<T>>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T>,
{
    let (order, parent) = bfs_order(mesh, root);
    let used: usize = mesh
        .vertex_corners()
        .iter()
        .filter(|c| !c.is_empty())
        .count();
    if order.len() < used {
        return Err(Error::Geometry(
            "the corner graph of the region is disconnected".into(),
        ));
    }
    let mut val: Vec<Option<T>> = vec![None; mesh.n_vertices()];
    val[root] = Some(anchor);
    for &v in &order[1..] {
        let (p, c) = parent[v].expect("tree vertex");
        let pv = val[p].expect("parent visited first");
        let d = inc(c);
        val[v] = Some(if mesh.corners[c][0] == v {
            pv + d
        } else {
            pv - d
        });
    }
    Ok(val.into_iter().map(|v| v.unwrap_or(anchor)).collect())
}

pub(crate) fn root_vertex(mesh: &QuadMesh) -> usize {
    mesh.quads.first().map_or(0, |q| q[0])
}

/// Centers from the four corner-pair formulas; returns (mean, spread).
fn spinor_center(mesh: &QuadMesh, s: &[C64], cover: &Cover, x: &[C64], z: usize) -> (C64, f64) {
    let q = mesh.quads[z];
    let c = mesh.quad_corners[z];
    let e = cover.signs[z].map(|v| v as f64);
    let (sin, cos) = mesh.theta[z].sin_cos();
    let cands = [
        s[q[0]] - x[c[0]] * x[c[3]] * (e[3] * cos),
        s[q[2]] - x[c[1]] * x[c[2]] * (e[1] * cos),
        s[q[1]] + x[c[0]] * x[c[1]] * (e[0] * sin),
        s[q[3]] + x[c[2]] * x[c[3]] * (e[2] * sin),
    ];
    let mean = cands.iter().sum::<C64>() / 4.0;
    let spread = cands.iter().map(|p| (p - mean).norm()).fold(0.0, f64::max);
    (mean, spread)
}

/// Diagonal of the bounding box of a point set (within √2 of the diameter).
pub fn bbox_diameter(points: &[C64]) -> f64 {
    let (mut lo, mut hi) = (
        C64::new(f64::INFINITY, f64::INFINITY),
        C64::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in points {
        lo = C64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = C64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    if points.is_empty() {
        0.0
    } else {
        (hi - lo).norm()
    }
}

/// Integrate a spinor into an s-embedding with S = `anchor` and Q = 0 at the
/// first black vertex of the first quad.
pub fn build_embedding(
    mesh: QuadMesh,
    cover: Cover,
    x: Vec<C64>,
    anchor: C64,
) -> Result<(SEmbedding, BuildReport)> {
    cover.validate(&mesh)?;
    if x.len() != mesh.n_corners() {
        return Err(Error::Spinor("one value per corner required".into()));
    }
    let sup = x.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut report = BuildReport::default();
    let prop = verify_spinor(&mesh, &cover, &x, None);
    report.max_propagation_residual = prop.max_residual;
    if prop.max_residual > tol::PROPAGATION_BUILD * sup.max(f64::MIN_POSITIVE) {
        return Err(Error::Closure {
            face: prop.worst_quad.unwrap_or(0),
            mismatch: prop.max_residual,
        });
    }
    let root = root_vertex(&mesh);
    let s = integrate(&mesh, root, anchor, |c| x[c] * x[c])?;
    let q = integrate(&mesh, root, 0.0, |c| x[c].norm_sqr())?;

    for (z, cs) in mesh.quad_corners.iter().enumerate() {
        for &c in cs {
            let [b, w] = mesh.corners[c];
            let m = (s[b] - s[w] - x[c] * x[c]).norm();
            if m > report.max_closure_mismatch {
                report.max_closure_mismatch = m;
                report.worst_quad = Some(z);
            }
        }
    }
    if report.max_closure_mismatch > tol::CLOSURE * sup * sup {
        return Err(Error::Closure {
            face: report.worst_quad.unwrap_or(0),
            mismatch: report.max_closure_mismatch,
        });
    }
    let mut center = Vec::with_capacity(mesh.n_quads());
    for z in 0..mesh.n_quads() {
        let (c, spread) = spinor_center(&mesh, &s, &cover, &x, z);
        report.max_center_spread = report.max_center_spread.max(spread);
        center.push(c);
    }
    let mut emb = SEmbedding {
        mesh,
        s,
        center,
        radius: Vec::new(),
        q,
        spinor: Some(SpinorData { cover, values: x }),
    };
    emb.radius = (0..emb.mesh.n_quads())
        .map(|z| TangentialQuad::with_center(z, emb.quad_vertices(z), emb.center[z]).radius)
        .collect();
    report.degenerate = emb.degenerate_quads();
    Ok((emb, report))
}

/// The spinor 𝒳(c) = |S(v•) − S(v°)|^{1/2} · (principal root of the
/// direction) together with the cover induced by the angular lift.
pub fn spinor_from_positions(mesh: &QuadMesh, s: &[C64]) -> Result<(Cover, Vec<C64>)> {
    let cover = Cover::from_geometry(mesh, s)?;
    let rho = reference_lifts(mesh, s)?;
    let x = mesh
        .corners
        .iter()
        .zip(rho)
        .map(|(&[b, w], r)| r * (s[b] - s[w]).norm().sqrt())
        .collect();
    Ok((cover, x))
}

impl SEmbedding {
    /// Embedding of given tangential quads. Centers come from support-line
    /// least squares, Ising angles from the half-angles, and the embedding is
    /// then re-integrated from the induced spinor so that all invariants hold.
    pub fn from_geometry(
        color: Vec<Color>,
        quads: Vec<[usize; 4]>,
        s: Vec<C64>,
    ) -> Result<(SEmbedding, BuildReport)> {
        let diam = bbox_diameter(&s);
        let mut theta = Vec::with_capacity(quads.len());
        for (z, q) in quads.iter().enumerate() {
            let p = q.map(|v| s[v]);
            let (c, r, dev) = geom::incircle_least_squares(&p);
            if !(dev <= tol::SUPPORT_LINE * geom::diameter(&p)) {
                return Err(Error::Geometry(format!(
                    "quad {z} is not tangential (support residual {dev:e})"
                )));
            }
            if r < tol::DEGENERATE_RADIUS * diam {
                return Err(Error::DegenerateQuad(z));
            }
            theta.push(TangentialQuad::with_center(z, p, c).recover_theta()?);
        }
        let mesh = QuadMesh::from_quads(color, quads, theta)?;
        let (cover, x) = spinor_from_positions(&mesh, &s)?;
        let root = root_vertex(&mesh);
        build_embedding(mesh, cover, x, s[root])
    }

    pub fn n_vertices(&self) -> usize {
        self.s.len()
    }

    pub fn n_quads(&self) -> usize {
        self.mesh.n_quads()
    }

    pub fn quad_vertices(&self, z: usize) -> [C64; 4] {
        self.mesh.quads[z].map(|v| self.s[v])
    }

    pub fn diameter(&self) -> f64 {
        bbox_diameter(&self.s)
    }

    /// Quads whose radius is below the degeneracy threshold.
    pub fn degenerate_quads(&self) -> Vec<usize> {
        let cut = tol::DEGENERATE_RADIUS * self.diameter();
        (0..self.n_quads())
            .filter(|&z| !(self.radius[z] >= cut))
            .collect()
    }

    /// Tangential-quad data of face z.
    pub fn quad_geometry(&self, z: usize) -> Result<TangentialQuad> {
        if !(self.radius[z] >= tol::DEGENERATE_RADIUS * self.diameter()) {
            return Err(Error::DegenerateQuad(z));
        }
        Ok(TangentialQuad::with_center(
            z,
            self.quad_vertices(z),
            self.center[z],
        ))
    }

    pub fn recover_theta(&self, z: usize) -> Result<f64> {
        self.quad_geometry(z)?.recover_theta()
    }

    /// The spinor behind the embedding, derived from positions if absent.
    pub fn spinor(&self) -> Result<SpinorData> {
        match &self.spinor {
            Some(sp) => Ok(sp.clone()),
            None => {
                let (cover, values) = spinor_from_positions(&self.mesh, &self.s)?;
                Ok(SpinorData { cover, values })
            }
        }
    }

    /// Minkowski boost (Re S, Im S, Q) ↦ ((1+t²)Re S + 2tQ, (1−t²)Im S, 2t Re S + (1+t²)Q)/(1−t²),
    /// realised on spinors as 𝒳 ↦ (𝒳 + t 𝒳̄)/√(1 − t²).
    pub fn boost(&self, t: f64) -> Result<SEmbedding> {
        if !(t.abs() < 1.0) {
            return Err(Error::Parameter(format!(
                "boost parameter {t} must lie in (−1, 1)"
            )));
        }
        let sp = self.spinor()?;
        let k = 1.0 / (1.0 - t * t).sqrt();
        let x: Vec<C64> = sp.values.iter().map(|v| (v + v.conj() * t) * k).collect();
        let root = root_vertex(&self.mesh);
        let a = self.s[root];
        let qa = self.q[root];
        let anchor = C64::new(((1.0 + t * t) * a.re + 2.0 * t * qa) / (1.0 - t * t), a.im);
        let (mut emb, _) = build_embedding(self.mesh.clone(), sp.cover, x, anchor)?;
        let q0 = (2.0 * t * a.re + (1.0 + t * t) * qa) / (1.0 - t * t);
        for q in emb.q.iter_mut() {
            *q += q0;
        }
        Ok(emb)
    }

    /// Q is defined up to an additive constant.
    pub fn shift_q(&mut self, c: f64) {
        for q in self.q.iter_mut() {
            *q += c;
        }
    }

    /// Apply z ↦ a z + b. Q scales by |a|.
    pub fn similarity(&self, a: C64, b: C64) -> Result<SEmbedding> {
        let sp = self.spinor()?;
        let ra = a.sqrt();
        let x = sp.values.iter().map(|v| v * ra).collect();
        let root = root_vertex(&self.mesh);
        let (mut emb, _) = build_embedding(self.mesh.clone(), sp.cover, x, a * self.s[root] + b)?;
        let q0 = self.q[root] * a.norm();
        for q in emb.q.iter_mut() {
            *q += q0;
        }
        Ok(emb)
    }

    /// Worst per-quad invariants.
    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        for z in 0..self.n_quads() {
            let p = self.quad_vertices(z);
            let per = geom::perimeter(&p);
            r.alternating_sum = r.alternating_sum.max(geom::alternating_sum(&p).abs() / per);
            let tq = TangentialQuad::with_center(z, p, self.center[z]);
            r.support_residual = r
                .support_residual
                .max(tq.tangency_residual() / tq.diameter());
            match tq.recover_theta() {
                Ok(th) => {
                    r.theta_roundtrip = r.theta_roundtrip.max((th - self.mesh.theta[z]).abs())
                }
                Err(_) => r.theta_roundtrip = f64::INFINITY,
            }
            for &c in &self.mesh.quad_corners[z] {
                let [b, w] = self.mesh.corners[c];
                let m = (self.q[b] - self.q[w] - (self.s[b] - self.s[w]).norm()).abs();
                r.origami_mismatch = r.origami_mismatch.max(m / per);
            }
        }
        let prop = check_properness(self);
        r.proper = prop.is_proper();
        r.properness = prop;
        r
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ValidationReport {
    /// max |e0| − |e1| + |e2| − |e3| over perimeter.
    pub alternating_sum: f64,
    /// max support-line deviation over quad diameter.
    pub support_residual: f64,
    pub theta_roundtrip: f64,
    /// max |Q(v•) − Q(v°) − |S(v•) − S(v°)|| over perimeter.
    pub origami_mismatch: f64,
    pub proper: bool,
    pub properness: ProperReport,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.alternating_sum < tol::ALTERNATING_SUM
            && self.support_residual < tol::SUPPORT_LINE
            && self.theta_roundtrip < tol::THETA_ROUNDTRIP
            && self.proper
    }
}
