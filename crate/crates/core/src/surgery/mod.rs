//! Cutting tangential quads along horizontal levels and welding an
//! embedding to a piece of the square lattice.
//!
//! All constructions keep every output face tangential: a point is moved
//! along the conic of positions that preserve Pitot's condition, and the
//! triangles left over are completed into quads by inserting the tangency
//! point of their incircle.

mod weld;

use serde::{Deserialize, Serialize};

pub use weld::{render_weld_svg, weld_square_district, Provenance, WeldParams, WeldReport};

use crate::geom::{self, TangentialQuad};
use crate::mesh::Color;
use crate::{par, tol, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Above,
    Below,
}

/// Which construction of the alignment applies, by the vertices on the
/// discarded side of the level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AlignCase {
    /// One vertex discarded.
    #[serde(rename = "1")]
    One,
    /// Two adjacent vertices discarded.
    #[serde(rename = "2a")]
    TwoA,
    /// Two opposite vertices discarded.
    #[serde(rename = "2b")]
    TwoB,
    /// Three vertices discarded.
    #[serde(rename = "3")]
    Three,
}

/// Origin of an output vertex, relative to the mesh order of the source quad.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    Corner(usize),
    /// Crossing of the level with the edge between corners (k, l), k < l.
    Cut(usize, usize),
    /// Any other vertex on the level line.
    New(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlignedVertex {
    pub node: Node,
    pub z: C64,
    pub color: Color,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HalfPlaneClip {
    pub source: TangentialQuad,
    pub level: f64,
    pub side: Side,
    pub case: AlignCase,
    pub vertices: Vec<AlignedVertex>,
    /// Output quads in mesh order [v•0, v°0, v•1, v°1], indexing `vertices`.
    pub quads: Vec<[usize; 4]>,
    pub geometry: Vec<TangentialQuad>,
    /// Area of the clipped source quad.
    pub clip_area: f64,
}

impl HalfPlaneClip {
    pub fn min_radius(&self) -> f64 {
        self.geometry
            .iter()
            .map(|q| q.radius)
            .fold(f64::INFINITY, f64::min)
    }

    /// |Σ area(output) − area(clip)| / area(source).
    pub fn area_residual(&self) -> f64 {
        let total: f64 = self.geometry.iter().map(|q| q.area()).sum();
        (total - self.clip_area).abs() / self.source.area().abs()
    }

    /// Vertices created on the level line.
    pub fn level_vertices(&self) -> impl Iterator<Item = &AlignedVertex> {
        self.vertices
            .iter()
            .filter(|v| !matches!(v.node, Node::Corner(_)))
    }
}

const BISECTION_STEPS: usize = 100;
const BISECTION_BRACKET: f64 = 1e-13;

/// One branch of {v : |v − a| − |v − c| = |b − a| − |b − c|}, parametrised as
/// mid + e (k cosh t + i β sinh t) in the frame of the foci a, c.
struct Branch {
    mid: C64,
    e: C64,
    k: f64,
    beta: f64,
}

impl Branch {
    fn new(a: C64, b: C64, c: C64) -> Result<Self> {
        let half = (c - a).norm() / 2.0;
        if !(half > 0.0) {
            return Err(Error::Geometry("conic with coincident foci".into()));
        }
        let k = ((b - a).norm() - (b - c).norm()) / 2.0;
        let beta = (half * half - k * k).max(0.0).sqrt();
        if !(beta > 1e-14 * half) {
            return Err(Error::Geometry("conic degenerates to a ray".into()));
        }
        Ok(Branch {
            mid: (a + c) / 2.0,
            e: (c - a) / (2.0 * half),
            k,
            beta,
        })
    }

    fn point(&self, t: f64) -> C64 {
        self.mid + self.e * C64::new(self.k * t.cosh(), self.beta * t.sinh())
    }

    fn param(&self, p: C64) -> f64 {
        (((p - self.mid) / self.e).im / self.beta).asinh()
    }
}

/// The point ṽ at ordinate y with (a, b, c, ṽ) tangential, on the arc of
/// the conic running from `from` to `b`. `from` is the vertex being
/// replaced and must lie on the other side of the level than `b`.
pub fn hyperbola_point(a: C64, b: C64, c: C64, from: C64, y: f64) -> Result<C64> {
    let br = Branch::new(a, b, c)?;
    let (mut t0, mut t1) = (br.param(from), br.param(b));
    let g = |t: f64| br.point(t).im - y;
    let (g0, g1) = (g(t0), g(t1));
    if !(g0 * g1 <= 0.0) {
        return Err(Error::Geometry(format!(
            "conic arc does not reach level {y}"
        )));
    }
    if g0 > 0.0 {
        std::mem::swap(&mut t0, &mut t1);
    }
    for _ in 0..BISECTION_STEPS {
        if (t1 - t0).abs() <= BISECTION_BRACKET * t0.abs().max(1.0) {
            break;
        }
        let m = 0.5 * (t0 + t1);
        if g(m) <= 0.0 {
            t0 = m;
        } else {
            t1 = m;
        }
    }
    let p = br.point(0.5 * (t0 + t1));
    Ok(C64::new(p.re, y))
}

/// Tangency point of the incircle of a counterclockwise triangle on side
/// [t_s, t_{s+1}].
fn tangency_point(t: [C64; 3], side: usize) -> C64 {
    let (p, q, r) = (t[side], t[(side + 1) % 3], t[(side + 2) % 3]);
    let semi = ((q - p).norm() + (r - q).norm() + (p - r).norm()) / 2.0;
    let along = semi - (r - q).norm();
    p + (q - p) * (along / (q - p).norm())
}

/// Quad (J K L M) from a counterclockwise triangle (J K L) by inserting the
/// incircle tangency point M after vertex `side`; it shares the incircle.
pub fn triangle_to_quad(tri: [C64; 3], side: usize) -> Result<TangentialQuad> {
    if side > 2 {
        return Err(Error::Parameter(format!("side {side} of a triangle")));
    }
    let area = geom::polygon_area(&tri);
    let d = geom::diameter(&tri);
    if !(area > 1e-14 * d * d) {
        return Err(Error::Geometry(
            "triangle is degenerate or clockwise".into(),
        ));
    }
    let m = tangency_point(tri, side);
    let mut ring = [C64::new(0.0, 0.0); 4];
    let mut k = 0;
    for (i, &p) in tri.iter().enumerate() {
        ring[k] = p;
        k += 1;
        if i == side {
            ring[k] = m;
            k += 1;
        }
    }
    let (c, _) = geom::triangle_incircle(tri);
    Ok(TangentialQuad::with_center(0, ring, c))
}

fn opposite(c: Color) -> Color {
    match c {
        Color::Black => Color::White,
        Color::White => Color::Black,
    }
}

/// Point of [a, b] at ordinate y, computed the same way whichever endpoint
/// comes first so that neighbouring quads agree bit for bit.
fn cut(a: C64, b: C64, y: f64) -> C64 {
    let (a, b) = if (a.im, a.re) <= (b.im, b.re) {
        (a, b)
    } else {
        (b, a)
    };
    let t = (y - a.im) / (b.im - a.im);
    C64::new(a.re + (b.re - a.re) * t, y)
}

/// Working state of one alignment in the rotated frame where the kept side
/// is above the level.
struct Work {
    y: f64,
    verts: Vec<AlignedVertex>,
    quads: Vec<[usize; 4]>,
    geometry: Vec<TangentialQuad>,
    n_new: usize,
}

impl Work {
    fn add(&mut self, node: Node, z: C64, color: Color) -> usize {
        if !matches!(node, Node::New(_)) {
            if let Some(i) = self.verts.iter().position(|v| v.node == node) {
                return i;
            }
        }
        self.verts.push(AlignedVertex { node, z, color });
        self.verts.len() - 1
    }

    fn new_vertex(&mut self, z: C64, color: Color) -> usize {
        self.n_new += 1;
        self.add(Node::New(self.n_new - 1), z, color)
    }

    /// Record a counterclockwise ring, rotated to start at a black vertex.
    fn push(&mut self, ring: [usize; 4], center: Option<C64>) -> Result<()> {
        let cols = ring.map(|i| self.verts[i].color);
        if (0..4).any(|i| cols[i] == cols[(i + 1) % 4]) {
            return Err(Error::Geometry(
                "aligned quad does not alternate colours".into(),
            ));
        }
        let shift = if cols[0] == Color::Black { 0 } else { 1 };
        let q: [usize; 4] = std::array::from_fn(|i| ring[(i + shift) % 4]);
        let p = q.map(|i| self.verts[i].z);
        let tq = match center {
            Some(c) => TangentialQuad::with_center(self.quads.len(), p, c),
            None => TangentialQuad::from_vertices(self.quads.len(), p),
        };
        self.quads.push(q);
        self.geometry.push(tq);
        Ok(())
    }

    /// Complete the triangle (ring order) by the tangency point on side s,
    /// which lies on the level line.
    fn triangle(&mut self, tri: [usize; 3], side: usize) -> Result<()> {
        let p = tri.map(|i| self.verts[i].z);
        let area = geom::polygon_area(&p);
        if !(area > 0.0) {
            return Err(Error::Geometry("leftover triangle is inverted".into()));
        }
        let mut m = tangency_point(p, side);
        m.im = self.y;
        let col = opposite(self.verts[tri[side]].color);
        let mi = self.new_vertex(m, col);
        let mut ring = [0; 4];
        let mut k = 0;
        for (i, &v) in tri.iter().enumerate() {
            ring[k] = v;
            k += 1;
            if i == side {
                ring[k] = mi;
                k += 1;
            }
        }
        self.push(ring, Some(geom::triangle_incircle(p).0))
    }
}

fn slot_color(k: usize) -> Color {
    if k.is_multiple_of(2) {
        Color::Black
    } else {
        Color::White
    }
}

/// Horizontal alignment of z at level y: 1–3 tangential quads whose union
/// is the part of z on `side` of the level, with every new vertex on it.
pub fn horizontal_align(z: &TangentialQuad, y: f64, side: Side) -> Result<HalfPlaneClip> {
    let sgn = if side == Side::Above { 1.0 } else { -1.0 };
    let p: [C64; 4] = z.vertices.map(|v| v * sgn);
    let ys = y * sgn;
    let diam = geom::diameter(&p);
    if p.iter().any(|v| (v.im - ys).abs() <= 1e-12 * diam) {
        return Err(Error::Geometry(format!(
            "level {y} passes through a vertex"
        )));
    }
    let above = p.map(|v| v.im > ys);
    let n_below = above.iter().filter(|&&a| !a).count();
    if n_below == 0 || n_below == 4 {
        return Err(Error::Geometry(format!("level {y} misses the quad")));
    }
    let mut w = Work {
        y: ys,
        verts: Vec::new(),
        quads: Vec::new(),
        geometry: Vec::new(),
        n_new: 0,
    };
    let corner = |w: &mut Work, k: usize| w.add(Node::Corner(k), p[k], slot_color(k));
    let cutv = |w: &mut Work, k: usize, l: usize| {
        let below = if above[k] { l } else { k };
        let node = Node::Cut(k.min(l), k.max(l));
        w.add(node, cut(p[k], p[l], ys), slot_color(below))
    };
    let idx = |i: usize| i % 4;

    let case = match n_below {
        1 => {
            let b = (0..4).find(|&k| !above[k]).unwrap();
            let (p1, p2, p3) = (idx(b + 1), idx(b + 2), idx(b + 3));
            let v = hyperbola_point(p[p1], p[p2], p[p3], p[b], ys)?;
            let vi = w.new_vertex(v, slot_color(b));
            let (i1, i2, i3) = (corner(&mut w, p1), corner(&mut w, p2), corner(&mut w, p3));
            w.push([vi, i1, i2, i3], None)?;
            let x = cutv(&mut w, b, p1);
            let yv = cutv(&mut w, p3, b);
            w.triangle([x, i1, vi], 2)?;
            w.triangle([vi, i3, yv], 2)?;
            AlignCase::One
        }
        2 => {
            let first = (0..4).find(|&k| !above[k] && !above[idx(k + 1)]);
            match first {
                Some(b) => {
                    // b and b + 1 below; move b + 2 onto the level, then b + 1.
                    let (q0, q1, q2, q3) = (b, idx(b + 1), idx(b + 2), idx(b + 3));
                    let v = hyperbola_point(p[q3], p[q0], p[q1], p[q2], ys)?;
                    let v2 = hyperbola_point(p[q2], p[q3], v, p[q1], ys)?;
                    let vi = w.new_vertex(v, slot_color(q2));
                    let v2i = w.new_vertex(v2, slot_color(q1));
                    let (i2, i3) = (corner(&mut w, q2), corner(&mut w, q3));
                    w.push([v2i, i2, i3, vi], None)?;
                    let x = cutv(&mut w, q1, q2);
                    let yv = cutv(&mut w, q3, q0);
                    w.triangle([x, i2, v2i], 2)?;
                    w.triangle([vi, i3, yv], 2)?;
                    AlignCase::TwoA
                }
                None => {
                    let a = (0..4).find(|&k| above[k]).unwrap();
                    for k in [a, idx(a + 2)] {
                        let (l, r) = (idx(k + 3), idx(k + 1));
                        let x = cutv(&mut w, l, k);
                        let ik = corner(&mut w, k);
                        let yv = cutv(&mut w, k, r);
                        w.triangle([x, ik, yv], 2)?;
                    }
                    AlignCase::TwoB
                }
            }
        }
        _ => {
            let a = (0..4).find(|&k| above[k]).unwrap();
            let (l, r) = (idx(a + 3), idx(a + 1));
            let x = cutv(&mut w, l, a);
            let ia = corner(&mut w, a);
            let yv = cutv(&mut w, a, r);
            w.triangle([x, ia, yv], 2)?;
            AlignCase::Three
        }
    };

    let clip_area = geom::polygon_area(&geom::clip_half_plane(&p, ys, true));
    let total: f64 = w.geometry.iter().map(|q| q.area()).sum();
    if (total - clip_area).abs() > 1e-10 * geom::polygon_area(&p).abs() {
        return Err(Error::Geometry(format!(
            "alignment at level {y} does not tile the clip (case {case:?}, area {total:e} vs {clip_area:e})"
        )));
    }
    for q in &w.geometry {
        if !(q.area() > 0.0) || !(q.tangency_residual() <= tol::SUPPORT_LINE * q.diameter()) {
            return Err(Error::Geometry(format!(
                "alignment at level {y} produced a bad quad (case {case:?})"
            )));
        }
    }
    let back = |v: C64| v * sgn;
    let vertices = w
        .verts
        .into_iter()
        .map(|v| AlignedVertex { z: back(v.z), ..v })
        .collect();
    let geometry = w
        .geometry
        .into_iter()
        .map(|q| TangentialQuad::with_center(q.id, q.vertices.map(back), back(q.center)))
        .collect();
    Ok(HalfPlaneClip {
        source: z.clone(),
        level: y,
        side,
        case,
        vertices,
        quads: w.quads,
        geometry,
        clip_area,
    })
}

/// One level of a bad-level sweep. `min_radius` is zero where the
/// alignment fails.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelSample {
    pub y: f64,
    /// Length of the cell of levels this sample stands for.
    pub weight: f64,
    pub min_radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BadLevelReport {
    pub beta: f64,
    pub extent: f64,
    pub bad_measure: f64,
    pub levels: Vec<LevelSample>,
}

impl BadLevelReport {
    /// Samples whose level is β-bad.
    pub fn bad(&self) -> impl Iterator<Item = &LevelSample> {
        self.levels
            .iter()
            .filter(move |s| !(s.min_radius >= self.beta))
    }
}

/// Measure of the β-bad levels of z for alignment from above. Each gap
/// between consecutive vertex ordinates is cut into `cells` cells whose
/// sizes shrink quadratically towards the ordinates; one level is sampled
/// per cell.
pub fn bad_level_measure(z: &TangentialQuad, beta: f64, cells: usize) -> BadLevelReport {
    let mut ys: Vec<f64> = z.vertices.iter().map(|v| v.im).collect();
    ys.sort_by(f64::total_cmp);
    ys.dedup();
    let cells = cells.max(1);
    let mut plan = Vec::new();
    for gap in ys.windows(2) {
        let (lo, len) = (gap[0], gap[1] - gap[0]);
        let at = |u: f64| lo + len * (1.0 - (std::f64::consts::PI * u).cos()) / 2.0;
        for i in 0..cells {
            let (a, b) = (
                at(i as f64 / cells as f64),
                at((i + 1) as f64 / cells as f64),
            );
            plan.push((at((i as f64 + 0.5) / cells as f64), b - a));
        }
    }
    let levels = par::map_slice(&plan, |&(y, weight)| {
        let min_radius = horizontal_align(z, y, Side::Above).map_or(0.0, |c| c.min_radius());
        LevelSample {
            y,
            weight,
            min_radius,
        }
    });
    let bad_measure = levels
        .iter()
        .filter(|s| !(s.min_radius >= beta))
        .map(|s| s.weight)
        .sum();
    BadLevelReport {
        beta,
        extent: ys.last().unwrap() - ys[0],
        bad_measure,
        levels,
    }
}
