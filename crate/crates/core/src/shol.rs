//! s-holomorphic functions on quads and their primitives.
//!
//! A real spinor X on the cover of an s-embedding S = S_𝒳 and a function F on
//! quads determine each other through X(c) = Re[ς̄ 𝒳(c) F(z)], ς = e^{iπ/4}.
//! From X one integrates H_X over Λ(G) ∪ ◇(G); from F the line integrals
//! H_F = ∫ Im(F² dS) + |F|² dQ and I_C = ∫ ς̄ F dS + ς F̄ dQ.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::embedding::{integrate, SEmbedding, SpinorData};
use crate::mesh::QuadMesh;
use crate::propagation::Cover;
use crate::{par, tol, Error, Result, C64};

/// ς = e^{iπ/4}.
pub fn varsigma() -> C64 {
    C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)
}

/// η_c = ς · exp(−i arg(S(v•) − S(v°)) / 2) on the reference lift.
pub fn eta(x: C64) -> C64 {
    varsigma() * (x / x.norm()).conj()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SHolFunction {
    pub values: Vec<C64>,
}

impl SHolFunction {
    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Worst disagreement of Pr[F(z), η_c ℝ] across a shared corner.
#[derive(Clone, Debug, Default, Serialize)]
pub struct SHolResidual {
    pub max: f64,
    pub corner: Option<usize>,
}

fn spinor_of(emb: &SEmbedding) -> Result<SpinorData> {
    emb.spinor()
}

fn check_len<T>(v: &[T], n: usize, what: &str) -> Result<()> {
    if v.len() == n {
        Ok(())
    } else {
        Err(Error::Spinor(format!(
            "{what}: expected {n} values, got {}",
            v.len()
        )))
    }
}

/// Real coordinate of F(z) along η_c: Re[η̄_c F(z)].
fn projection(x: C64, f: C64) -> f64 {
    (eta(x).conj() * f).re
}

pub fn s_hol_residual(emb: &SEmbedding, f: &SHolFunction) -> Result<SHolResidual> {
    let sp = spinor_of(emb)?;
    check_len(&f.values, emb.n_quads(), "F")?;
    let mut r = SHolResidual::default();
    for (c, qs) in emb.mesh.corner_quads.iter().enumerate() {
        if let [(z0, _), (z1, _)] = qs[..] {
            let x = sp.values[c];
            let d = (projection(x, f.values[z0]) - projection(x, f.values[z1])).abs();
            if d > r.max {
                r.max = d;
                r.corner = Some(c);
            }
        }
    }
    Ok(r)
}

/// F(z) from the values at corners `a`, `b` of z:
/// F = iς (𝒳̄_b X_a − 𝒳̄_a X_b) / Im(𝒳̄_a 𝒳_b).
fn from_pair(xa: C64, xb: C64, ra: f64, rb: f64) -> Option<C64> {
    let den = (xa.conj() * xb).im;
    if den.abs() <= 1e-12 * xa.norm() * xb.norm() {
        return None;
    }
    Some(C64::i() * varsigma() * (xb.conj() * ra - xa.conj() * rb) / den)
}

/// F from a real spinor using the pair (c10, c01) of every quad.
pub fn x_to_f(emb: &SEmbedding, x: &[f64]) -> Result<SHolFunction> {
    let sp = spinor_of(emb)?;
    check_len(x, emb.mesh.n_corners(), "X")?;
    let values = par::map_range(emb.n_quads(), |z| {
        let cs = emb.mesh.quad_corners[z];
        from_pair(sp.values[cs[1]], sp.values[cs[3]], x[cs[1]], x[cs[3]])
            .ok_or(Error::DegenerateQuad(z))
    });
    Ok(SHolFunction {
        values: values.into_iter().collect::<Result<_>>()?,
    })
}

/// Largest spread between the reconstructions of F(z) from the six corner
/// pairs of each quad.
pub fn pair_spread(emb: &SEmbedding, x: &[f64]) -> Result<f64> {
    let sp = spinor_of(emb)?;
    check_len(x, emb.mesh.n_corners(), "X")?;
    let per_quad = par::map_range(emb.n_quads(), |z| {
        let cs = emb.mesh.quad_corners[z];
        let mut got = Vec::with_capacity(6);
        for a in 0..4 {
            for b in a + 1..4 {
                if let Some(f) = from_pair(sp.values[cs[a]], sp.values[cs[b]], x[cs[a]], x[cs[b]]) {
                    got.push(f);
                }
            }
        }
        let mut s: f64 = 0.0;
        for f in &got {
            for g in &got {
                s = s.max((f - g).norm());
            }
        }
        s
    });
    Ok(per_quad.into_iter().fold(0.0, f64::max))
}

/// X(c) = Re[ς̄ 𝒳(c) F(z)]. Fails when the incident quads disagree by more
/// than the s-holomorphicity tolerance.
pub fn f_to_x(emb: &SEmbedding, f: &SHolFunction) -> Result<Vec<f64>> {
    let sp = spinor_of(emb)?;
    check_len(&f.values, emb.n_quads(), "F")?;
    let res = s_hol_residual(emb, f)?;
    let scale = sp.values.iter().map(|v| v.norm()).fold(0.0, f64::max) * f.sup();
    if res.max > tol::SHOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::NotSHolomorphic {
            corner: res.corner.unwrap_or(0),
            residual: res.max,
        });
    }
    let sbar = varsigma().conj();
    Ok(emb
        .mesh
        .corner_quads
        .iter()
        .enumerate()
        .map(|(c, qs)| {
            let mean = qs.iter().map(|&(z, _)| f.values[z]).sum::<C64>() / qs.len().max(1) as f64;
            (sbar * sp.values[c] * mean).re
        })
        .collect())
}

/// A real function on Λ(G) ∪ ◇(G), zero at the anchor vertex.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HFunction {
    pub vertex: Vec<f64>,
    pub quad: Vec<f64>,
    pub anchor: usize,
    /// Worst disagreement between redundant increments.
    pub closure: f64,
}

impl HFunction {
    fn anchored(mut self) -> Self {
        let a = self.vertex[self.anchor];
        self.vertex.iter_mut().for_each(|h| *h -= a);
        self.quad.iter_mut().for_each(|h| *h -= a);
        self
    }

    pub fn scaled(&self, k: f64) -> HFunction {
        HFunction {
            vertex: self.vertex.iter().map(|h| h * k).collect(),
            quad: self.quad.iter().map(|h| h * k).collect(),
            anchor: self.anchor,
            closure: self.closure * k.abs(),
        }
    }

    pub fn minus(&self, other: &HFunction) -> HFunction {
        HFunction {
            vertex: self
                .vertex
                .iter()
                .zip(&other.vertex)
                .map(|(a, b)| a - b)
                .collect(),
            quad: self
                .quad
                .iter()
                .zip(&other.quad)
                .map(|(a, b)| a - b)
                .collect(),
            anchor: self.anchor,
            closure: self.closure + other.closure,
        }
    }

    /// sup-norm distance after matching the anchors.
    pub fn distance(&self, other: &HFunction) -> f64 {
        let d = self.minus(other);
        let a = d.vertex[self.anchor];
        d.vertex
            .iter()
            .chain(&d.quad)
            .map(|h| (h - a).abs())
            .fold(0.0, f64::max)
    }

    pub fn oscillation(&self) -> f64 {
        let (lo, hi) = self
            .vertex
            .iter()
            .chain(&self.quad)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &h| {
                (a.min(h), b.max(h))
            });
        hi - lo
    }
}

/// Per-quad increments H(v) − H(z) of a quad from a spinor on its corners,
/// in vertex order [v•0, v°0, v•1, v°1]; the black ones carry cos θ, the white
/// ones −sin θ, and ε is the cover sign between the two corners at the vertex.
fn quad_increments<T, P>(mesh: &QuadMesh, cover: &Cover, z: usize, prod: P) -> [T; 4]
where
    P: Fn(usize, usize) -> T,
    T: std::ops::Mul<f64, Output = T>,
{
    let cs = mesh.quad_corners[z];
    let e = cover.signs[z].map(|s| s as f64);
    let (sin, cos) = mesh.theta[z].sin_cos();
    [
        prod(cs[0], cs[3]) * (e[3] * cos),
        prod(cs[0], cs[1]) * (-e[0] * sin),
        prod(cs[1], cs[2]) * (e[1] * cos),
        prod(cs[2], cs[3]) * (-e[2] * sin),
    ]
}

/// H_X from the three increment rules: X(c)² across corners, and
/// ±X X cos θ, ∓X X sin θ between a quad and its vertices.
pub fn build_h(emb: &SEmbedding, x: &[f64], anchor: usize) -> Result<HFunction> {
    let sp = spinor_of(emb)?;
    build_h_on(&emb.mesh, &sp.cover, x, anchor)
}

/// H_X on a bare mesh and cover (no embedding needed).
pub fn build_h_on(mesh: &QuadMesh, cover: &Cover, x: &[f64], anchor: usize) -> Result<HFunction> {
    check_len(x, mesh.n_corners(), "X")?;
    if anchor >= mesh.n_vertices() {
        return Err(Error::Parameter(format!(
            "anchor vertex {anchor} out of range"
        )));
    }
    let vertex = integrate(mesh, anchor, 0.0, |c| x[c] * x[c])?;
    let sup = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut closure: f64 = 0.0;
    let mut worst = 0;
    let mut quad = Vec::with_capacity(mesh.n_quads());
    for (z, q) in mesh.quads.iter().enumerate() {
        let inc = quad_increments(mesh, cover, z, |a, b| x[a] * x[b]);
        let cands: Vec<f64> = (0..4).map(|k| vertex[q[k]] - inc[k]).collect();
        let mean = cands.iter().sum::<f64>() / 4.0;
        let spread = cands.iter().map(|h| (h - mean).abs()).fold(0.0, f64::max);
        if spread > closure {
            closure = spread;
            worst = z;
        }
        quad.push(mean);
    }
    for (c, &[b, w]) in mesh.corners.iter().enumerate() {
        if mesh.corner_quads[c].is_empty() {
            continue;
        }
        closure = closure.max((vertex[b] - vertex[w] - x[c] * x[c]).abs());
    }
    if closure > tol::CLOSURE * (sup * sup).max(f64::MIN_POSITIVE) {
        return Err(Error::Closure {
            face: worst,
            mismatch: closure,
        });
    }
    Ok(HFunction {
        vertex,
        quad,
        anchor,
        closure,
    }
    .anchored())
}

/// Origami map at quad centers: Q(v•_p) − Q(z) = ε Re(𝒳 𝒳̄) cos θ and
/// Q(v°_q) − Q(z) = −ε Re(𝒳 𝒳̄) sin θ over the two corners at the vertex.
/// Equivalently Q(z) = Q(v°) + (tangent length at v°).
pub fn quad_origami(emb: &SEmbedding) -> Result<Vec<f64>> {
    let sp = spinor_of(emb)?;
    let x = &sp.values;
    Ok((0..emb.n_quads())
        .map(|z| {
            let q = emb.mesh.quads[z];
            let inc = quad_increments(&emb.mesh, &sp.cover, z, |a, b| (x[a] * x[b].conj()).re);
            (0..4).map(|k| emb.q[q[k]] - inc[k]).sum::<f64>() / 4.0
        })
        .collect())
}

/// Breadth-first integration over the vertex–quad incidence graph of
/// Λ(G) ∪ ◇(G) of per-quad increments `inc(z, v) = G(v) − G(z)`.
fn integrate_incidence<T>(
    emb: &SEmbedding,
    anchor: usize,
    zero: T,
    inc: impl Fn(usize, usize) -> T,
) -> Result<(Vec<T>, Vec<T>, f64)>
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Sub<Output = T> + Into<Magnitude>,
{
    let vq = emb.mesh.vertex_quads();
    let mut vert: Vec<Option<T>> = vec![None; emb.n_vertices()];
    let mut quad: Vec<Option<T>> = vec![None; emb.n_quads()];
    vert[anchor] = Some(zero);
    let mut queue = VecDeque::from([anchor]);
    while let Some(v) = queue.pop_front() {
        let hv = vert[v].expect("queued vertices are set");
        for &z in &vq[v] {
            if quad[z].is_some() {
                continue;
            }
            let hz = hv - inc(z, v);
            quad[z] = Some(hz);
            for &u in &emb.mesh.quads[z] {
                if vert[u].is_none() {
                    vert[u] = Some(hz + inc(z, u));
                    queue.push_back(u);
                }
            }
        }
    }
    let quad: Vec<T> = quad
        .into_iter()
        .enumerate()
        .map(|(z, h)| {
            h.ok_or_else(|| Error::Geometry(format!("quad {z} not connected to the anchor")))
        })
        .collect::<Result<_>>()?;
    let vert: Vec<T> = vert.into_iter().map(|h| h.unwrap_or(zero)).collect();
    let mut closure: f64 = 0.0;
    for (z, q) in emb.mesh.quads.iter().enumerate() {
        for &v in q {
            closure = closure.max((vert[v] - quad[z] - inc(z, v)).into().0);
        }
    }
    Ok((vert, quad, closure))
}

/// Absolute value used for closure bookkeeping.
pub struct Magnitude(f64);

impl From<f64> for Magnitude {
    fn from(v: f64) -> Self {
        Magnitude(v.abs())
    }
}

impl From<C64> for Magnitude {
    fn from(v: C64) -> Self {
        Magnitude(v.norm())
    }
}

/// H_F = ∫ Im(F² dS) + |F|² dQ along quad–vertex segments, with F(z) constant
/// on each quad.
pub fn h_line_integral(emb: &SEmbedding, f: &SHolFunction, anchor: usize) -> Result<HFunction> {
    check_len(&f.values, emb.n_quads(), "F")?;
    if anchor >= emb.n_vertices() {
        return Err(Error::Parameter(format!(
            "anchor vertex {anchor} out of range"
        )));
    }
    let qz = quad_origami(emb)?;
    let inc = |z: usize, v: usize| {
        let fz = f.values[z];
        (fz * fz * (emb.s[v] - emb.center[z])).im + fz.norm_sqr() * (emb.q[v] - qz[z])
    };
    let (vertex, quad, closure) = integrate_incidence(emb, anchor, 0.0, inc)?;
    let scale = f.sup().powi(2) * emb.diameter();
    if closure > tol::CLOSURE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Closure {
            face: 0,
            mismatch: closure,
        });
    }
    Ok(HFunction {
        vertex,
        quad,
        anchor,
        closure,
    }
    .anchored())
}

/// I_C = ∫ ς̄ F dS + ς F̄ dQ on Λ(G), zero at the anchor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ICFunction {
    pub values: Vec<C64>,
    pub anchor: usize,
    /// Worst loop mismatch over corner edges and same-colour quad diagonals.
    pub closure: f64,
}

/// Integral of ς̄ F(z) dS + ς F̄(z) dQ between two vertices of quad z.
pub fn ic_increment(emb: &SEmbedding, f: C64, a: usize, b: usize) -> C64 {
    let s = varsigma();
    s.conj() * f * (emb.s[b] - emb.s[a]) + s * f.conj() * (emb.q[b] - emb.q[a])
}

pub fn build_ic(emb: &SEmbedding, f: &SHolFunction, anchor: usize) -> Result<ICFunction> {
    check_len(&f.values, emb.n_quads(), "F")?;
    if anchor >= emb.n_vertices() {
        return Err(Error::Parameter(format!(
            "anchor vertex {anchor} out of range"
        )));
    }
    let mesh = &emb.mesh;
    let first_quad = |c: usize| mesh.corner_quads[c].first().map(|&(z, _)| z);
    let raw = integrate(mesh, anchor, C64::new(0.0, 0.0), |c| {
        let [b, w] = mesh.corners[c];
        first_quad(c).map_or(C64::new(0.0, 0.0), |z| ic_increment(emb, f.values[z], w, b))
    })?;
    let mut closure: f64 = 0.0;
    for (z, q) in mesh.quads.iter().enumerate() {
        let fz = f.values[z];
        for (a, b) in [
            (q[0], q[1]),
            (q[2], q[1]),
            (q[2], q[3]),
            (q[0], q[3]),
            (q[0], q[2]),
            (q[1], q[3]),
        ] {
            closure = closure.max((raw[b] - raw[a] - ic_increment(emb, fz, a, b)).norm());
        }
    }
    let scale = f.sup() * emb.diameter();
    if closure > tol::CLOSURE * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Closure {
            face: 0,
            mismatch: closure,
        });
    }
    Ok(ICFunction {
        values: raw,
        anchor,
        closure,
    })
}

/// A node of Λ(G) ∪ ◇(G).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "index", rename_all = "lowercase")]
pub enum Node {
    Vertex(usize),
    Quad(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub pass: bool,
    pub witness: Option<Node>,
    pub scanned: usize,
}

/// Scan interior vertices and all quads for strict local extrema of
/// H_X − H_Y on the graph Λ(G) ∪ ◇(G) (corner edges and vertex–quad edges).
/// Differences below 1e-12 of the oscillation count as ties.
pub fn max_principle_check(
    mesh: &QuadMesh,
    hx: &HFunction,
    hy: Option<&HFunction>,
) -> MaxPrincipleReport {
    let d = match hy {
        Some(y) => hx.minus(y),
        None => hx.clone(),
    };
    let eps = 1e-12 * d.oscillation();
    let strict = |val: f64, nb: &mut dyn Iterator<Item = f64>| {
        let (mut above, mut below) = (true, true);
        for h in nb {
            above &= val > h + eps;
            below &= val < h - eps;
        }
        above || below
    };
    let on_boundary = mesh.boundary_vertices();
    let vq = mesh.vertex_quads();
    let vc = mesh.vertex_corners();
    let mut scanned = 0;
    for v in 0..mesh.n_vertices() {
        if on_boundary[v] || vq[v].is_empty() {
            continue;
        }
        scanned += 1;
        let mut nb = vc[v]
            .iter()
            .map(|&c| {
                let [b, w] = mesh.corners[c];
                d.vertex[if b == v { w } else { b }]
            })
            .chain(vq[v].iter().map(|&z| d.quad[z]));
        if strict(d.vertex[v], &mut nb) {
            return MaxPrincipleReport {
                pass: false,
                witness: Some(Node::Vertex(v)),
                scanned,
            };
        }
    }
    for (z, q) in mesh.quads.iter().enumerate() {
        scanned += 1;
        if strict(d.quad[z], &mut q.iter().map(|&v| d.vertex[v])) {
            return MaxPrincipleReport {
                pass: false,
                witness: Some(Node::Quad(z)),
                scanned,
            };
        }
    }
    MaxPrincipleReport {
        pass: true,
        witness: None,
        scanned,
    }
}

/// Empirical constant C in max_{B(u, r/2)} |F|² ≤ C r⁻¹ osc_{B(u, r)} H.
/// `None` when the balls hold no quads or H does not oscillate.
pub fn harnack_constant(
    emb: &SEmbedding,
    f: &SHolFunction,
    h: &HFunction,
    u: C64,
    r: f64,
) -> Option<f64> {
    let inner = (0..emb.n_quads())
        .filter(|&z| (emb.center[z] - u).norm() < r / 2.0)
        .map(|z| f.values[z].norm_sqr())
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))?;
    let ball: Vec<f64> = (0..emb.n_vertices())
        .filter(|&v| (emb.s[v] - u).norm() < r)
        .map(|v| h.vertex[v])
        .chain(
            (0..emb.n_quads())
                .filter(|&z| (emb.center[z] - u).norm() < r)
                .map(|z| h.quad[z]),
        )
        .collect();
    let osc = ball.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - ball.iter().cloned().fold(f64::INFINITY, f64::min);
    (osc > 0.0).then(|| inner * r / osc)
}

/// Basis of the real solutions of the propagation equation on a mesh, from
/// the right singular vectors of the stacked relations.
pub fn real_solution_basis(mesh: &QuadMesh, cover: &Cover) -> Vec<Vec<f64>> {
    let n = mesh.n_corners();
    let rows = (4 * mesh.n_quads()).max(n);
    let mut a = DMatrix::<f64>::zeros(rows, n);
    for z in 0..mesh.n_quads() {
        let cs = mesh.quad_corners[z];
        let s = cover.signs[z].map(|v| v as f64);
        let (sin, cos) = mesh.theta[z].sin_cos();
        let coef = |k: usize| if k.is_multiple_of(2) { sin } else { cos };
        for k in 0..4 {
            let (next, prev) = ((k + 1) % 4, (k + 3) % 4);
            let r = 4 * z + k;
            a[(r, cs[k])] += 1.0;
            a[(r, cs[next])] -= s[k] * coef(k);
            a[(r, cs[prev])] -= s[prev] * coef(prev);
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    (0..n)
        .filter(|&i| svd.singular_values[i] <= 1e-10 * top)
        .map(|i| vt.row(i).iter().cloned().collect())
        .collect()
}

/// Gaussian combination of a solution basis, scaled to unit sup-norm.
pub fn random_real_solution<R: Rng>(basis: &[Vec<f64>], rng: &mut R) -> Vec<f64> {
    let n = basis.first().map_or(0, |b| b.len());
    let mut x = vec![0.0; n];
    for b in basis {
        let g: f64 = rng.sample(StandardNormal);
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi += g * bi;
        }
    }
    let sup = x.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if sup > 0.0 {
        x.iter_mut().for_each(|v| *v /= sup);
    }
    x
}

#[derive(Serialize)]
struct HRow {
    node: &'static str,
    index: usize,
    h: f64,
}

#[derive(Serialize)]
struct FRow {
    quad: usize,
    re: f64,
    im: f64,
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8")
}

/// Long-format `node,index,h` rows, vertices first.
pub fn h_to_csv(h: &HFunction) -> String {
    let verts = h.vertex.iter().enumerate().map(|(i, &v)| HRow {
        node: "vertex",
        index: i,
        h: v,
    });
    let quads = h.quad.iter().enumerate().map(|(i, &v)| HRow {
        node: "quad",
        index: i,
        h: v,
    });
    to_csv(verts.chain(quads))
}

pub fn f_to_csv(f: &SHolFunction) -> String {
    to_csv(f.values.iter().enumerate().map(|(i, v)| FRow {
        quad: i,
        re: v.re,
        im: v.im,
    }))
}
