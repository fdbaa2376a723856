//! Circle packings of triangulations and the associated circle patterns.
//!
//! Λ(G) is built on the incidence graph of the triangulation: black
//! vertices are circle centers v and incircle centers o_T, white vertices
//! are tangency points t_uv. Each (vertex, triangle) incidence gives the kite
//! (v, t_vw, o_T, t_uv) with right angles at the tangency points.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{assemble, Construction, ConstructionMeta};
use crate::geom;
use crate::mesh::Color;
use crate::{tol, Error, Result, C64};

/// A triangulated disc. Triangles are counterclockwise vertex triples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triangulation {
    pub triangles: Vec<[usize; 3]>,
    /// Optional positions, used for initial radii and orientation.
    #[serde(default)]
    pub points: Option<Vec<C64>>,
    /// Radius imposed on every boundary vertex.
    #[serde(default)]
    pub boundary_radius: Option<f64>,
}

pub fn single_triangle() -> Triangulation {
    Triangulation {
        triangles: vec![[0, 1, 2]],
        points: Some(vec![
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.5, 0.75f64.sqrt()),
        ]),
        boundary_radius: None,
    }
}

/// Triangular-lattice vertices within hexagonal distance `rings` of the origin.
pub fn hexagonal_triangulation(rings: usize) -> Triangulation {
    let r = rings as i64;
    let omega = C64::from_polar(1.0, PI / 3.0);
    let mut index = HashMap::new();
    let mut points = Vec::new();
    for i in -r..=r {
        for j in -r..=r {
            if (i + j).abs() <= r {
                index.insert((i, j), points.len());
                points.push(C64::new(i as f64, 0.0) + omega * j as f64);
            }
        }
    }
    let mut triangles = Vec::new();
    for (&(i, j), &a) in &index {
        if let (Some(&b), Some(&c)) = (index.get(&(i + 1, j)), index.get(&(i, j + 1))) {
            triangles.push([a, b, c]);
        }
        if let (Some(&b), Some(&c)) = (index.get(&(i + 1, j - 1)), index.get(&(i + 1, j))) {
            triangles.push([a, b, c]);
        }
    }
    triangles.sort_unstable();
    Triangulation {
        triangles,
        points: Some(points),
        boundary_radius: None,
    }
}

/// Delaunay triangulation of uniform points in the unit disc, with the
/// largest point count whose triangulation has at most `faces` triangles.
pub fn random_delaunay(faces: usize, seed: u64) -> Triangulation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool: Vec<C64> = Vec::new();
    while pool.len() < faces + 3 {
        let p = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if p.norm() < 1.0 {
            pool.push(p);
        }
    }
    let triangulate = |pts: &[C64]| -> Vec<[usize; 3]> {
        let dp: Vec<delaunator::Point> = pts
            .iter()
            .map(|p| delaunator::Point { x: p.re, y: p.im })
            .collect();
        let t = delaunator::triangulate(&dp);
        t.triangles
            .chunks(3)
            .map(|c| {
                let tri = [c[0], c[1], c[2]];
                if geom::polygon_area(&tri.map(|v| pts[v])) < 0.0 {
                    [tri[0], tri[2], tri[1]]
                } else {
                    tri
                }
            })
            .collect()
    };
    let (mut lo, mut hi) = (3, pool.len());
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if triangulate(&pool[..mid]).len() <= faces {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let points = pool[..lo].to_vec();
    Triangulation {
        triangles: triangulate(&points),
        points: Some(points),
        boundary_radius: None,
    }
}

/// Radii and centers of a packing whose interior angle sums are 2π.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CirclePacking {
    pub radii: Vec<f64>,
    pub centers: Vec<C64>,
    /// max |angle sum − 2π| over interior vertices.
    pub residual: f64,
    /// Largest disagreement between two placements of the same center.
    pub layout_mismatch: f64,
    pub sweeps: usize,
}

struct Topology {
    n: usize,
    interior: Vec<bool>,
    /// Triangles incident to each vertex.
    star: Vec<Vec<usize>>,
}

fn topology(tri: &Triangulation) -> Result<Topology> {
    if tri.triangles.is_empty() {
        return Err(Error::InvalidGraph("empty triangulation".into()));
    }
    let n = tri.triangles.iter().flatten().max().map_or(0, |m| m + 1);
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    let mut star = vec![Vec::new(); n];
    for (t, &[a, b, c]) in tri.triangles.iter().enumerate() {
        if a == b || b == c || c == a {
            return Err(Error::InvalidGraph(format!(
                "triangle {t} repeats a vertex"
            )));
        }
        for (u, v) in [(a, b), (b, c), (c, a)] {
            if directed.insert((u, v), t).is_some() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) is used twice with the same orientation"
                )));
            }
        }
        for v in [a, b, c] {
            star[v].push(t);
        }
    }
    if let Some(v) = star.iter().position(|s| s.is_empty()) {
        return Err(Error::InvalidGraph(format!("vertex {v} is in no triangle")));
    }
    let mut interior = vec![true; n];
    for &(u, v) in directed.keys() {
        if !directed.contains_key(&(v, u)) {
            interior[u] = false;
            interior[v] = false;
        }
    }
    Ok(Topology { n, interior, star })
}

/// Angle at a circle of radius r between tangent neighbours of radii a and b.
fn petal_angle(r: f64, a: f64, b: f64) -> f64 {
    2.0 * ((a * b) / ((r + a) * (r + b))).sqrt().min(1.0).asin()
}

fn angle_sum(tri: &Triangulation, star: &[usize], v: usize, radii: &[f64]) -> f64 {
    star.iter()
        .map(|&t| {
            let [a, b, c] = tri.triangles[t];
            let (u, w) = if a == v {
                (b, c)
            } else if b == v {
                (c, a)
            } else {
                (a, b)
            };
            petal_angle(radii[v], radii[u], radii[w])
        })
        .sum()
}

/// Sweeps are stopped early once residuals drop below this level.
const TARGET: f64 = 1e-13;
const MAX_SWEEPS: usize = 200_000;

/// Packing by per-vertex radius updates driven by angle-sum defects, with
/// boundary radii held fixed, then a breadth-first layout over triangles.
pub fn pack_circles(tri: &Triangulation) -> Result<CirclePacking> {
    let top = topology(tri)?;
    let n = top.n;
    let mut radii = vec![1.0; n];
    if let Some(pts) = &tri.points {
        if pts.len() < n {
            return Err(Error::InvalidGraph(format!(
                "{} points for {n} vertices",
                pts.len()
            )));
        }
        for (t, tr) in tri.triangles.iter().enumerate() {
            if geom::polygon_area(&tr.map(|v| pts[v])) <= 0.0 {
                return Err(Error::Geometry(format!(
                    "triangle {t} is not counterclockwise"
                )));
            }
        }
        radii = vec![f64::INFINITY; n];
        for tr in &tri.triangles {
            for i in 0..3 {
                let (u, v) = (tr[i], tr[(i + 1) % 3]);
                let h = (pts[u] - pts[v]).norm() / 2.0;
                radii[u] = radii[u].min(h);
                radii[v] = radii[v].min(h);
            }
        }
    }
    if let Some(rb) = tri.boundary_radius {
        if !(rb > 0.0 && rb.is_finite()) {
            return Err(Error::Parameter(format!(
                "boundary radius {rb} must be positive"
            )));
        }
        for (r, &inside) in radii.iter_mut().zip(&top.interior) {
            if !inside {
                *r = rb;
            }
        }
    }
    let inner: Vec<usize> = (0..n).filter(|&v| top.interior[v]).collect();
    let mut residual = 0.0;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        residual = inner
            .iter()
            .map(|&v| (angle_sum(tri, &top.star[v], v, &radii) - 2.0 * PI).abs())
            .fold(0.0, f64::max);
        if residual < TARGET {
            break;
        }
        for &v in &inner {
            let k = top.star[v].len() as f64;
            let theta = angle_sum(tri, &top.star[v], v, &radii);
            let beta = (theta / (2.0 * k)).sin();
            let delta = (PI / k).sin();
            let hat = beta * radii[v] / (1.0 - beta);
            radii[v] = hat * (1.0 - delta) / delta;
        }
        sweeps += 1;
    }
    if !(residual < tol::PACKING) {
        return Err(Error::PackingDiverged(residual));
    }
    let (centers, layout_mismatch) = layout(tri, &radii);
    Ok(CirclePacking {
        radii,
        centers,
        residual,
        layout_mismatch,
        sweeps,
    })
}

fn layout(tri: &Triangulation, radii: &[f64]) -> (Vec<C64>, f64) {
    let n = radii.len();
    let mut pos: Vec<Option<C64>> = vec![None; n];
    let mut by_edge: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, &[a, b, c]) in tri.triangles.iter().enumerate() {
        for e in [(a, b), (b, c), (c, a)] {
            by_edge.insert(e, t);
        }
    }
    let [a, b, _] = tri.triangles[0];
    let (pa, dir) = match &tri.points {
        Some(p) => (p[a], (p[b] - p[a]) / (p[b] - p[a]).norm()),
        None => (C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
    };
    pos[a] = Some(pa);
    pos[b] = Some(pa + dir * (radii[a] + radii[b]));
    let mut mismatch: f64 = 0.0;
    let mut done = vec![false; tri.triangles.len()];
    let mut queue = VecDeque::from([0usize]);
    done[0] = true;
    while let Some(t) = queue.pop_front() {
        let tr = tri.triangles[t];
        // Rotate so that the first two corners are placed.
        let r = (0..3)
            .find(|&i| pos[tr[i]].is_some() && pos[tr[(i + 1) % 3]].is_some())
            .expect("placed edge");
        let (u, v, w) = (tr[r], tr[(r + 1) % 3], tr[(r + 2) % 3]);
        let (pu, pv) = (pos[u].unwrap(), pos[v].unwrap());
        let alpha = petal_angle(radii[u], radii[v], radii[w]);
        let d = (pv - pu) / (pv - pu).norm();
        let pw = pu + d * C64::from_polar(radii[u] + radii[w], alpha);
        match pos[w] {
            Some(old) => mismatch = mismatch.max((old - pw).norm()),
            None => pos[w] = Some(pw),
        }
        for e in [(v, u), (w, v), (u, w)] {
            if let Some(&t2) = by_edge.get(&e) {
                if !done[t2] {
                    done[t2] = true;
                    queue.push_back(t2);
                }
            }
        }
    }
    (
        pos.into_iter()
            .map(|p| p.unwrap_or(C64::new(f64::NAN, f64::NAN)))
            .collect(),
        mismatch,
    )
}

/// Relative agreement required between the kite closed forms and the
/// embedding rebuilt from the kites.
const KITE: f64 = 1e-9;

pub fn circle_pattern_from_triangulation(tri: &Triangulation) -> Result<Construction> {
    let pack = pack_circles(tri)?;
    let c = &pack.centers;
    let n = pack.radii.len();
    let mut color = vec![Color::Black; n];
    let mut s = c.clone();
    let mut incircle = Vec::with_capacity(tri.triangles.len());
    for tr in &tri.triangles {
        let (o, rho) = geom::triangle_incircle(tr.map(|v| c[v]));
        incircle.push((s.len(), rho));
        s.push(o);
        color.push(Color::Black);
    }
    let mut tangency: HashMap<(usize, usize), usize> = HashMap::new();
    let mut quads = Vec::with_capacity(3 * tri.triangles.len());
    let mut kite_data = Vec::with_capacity(3 * tri.triangles.len());
    for (t, tr) in tri.triangles.iter().enumerate() {
        for i in 0..3 {
            let (v, w, u) = (tr[i], tr[(i + 1) % 3], tr[(i + 2) % 3]);
            let mut touch = |a: usize, b: usize| {
                *tangency.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    let d = c[b] - c[a];
                    s.push(c[a] + d * (pack.radii[a] / d.norm()));
                    color.push(Color::White);
                    s.len() - 1
                })
            };
            let t_vw = touch(v, w);
            let t_uv = touch(u, v);
            quads.push([v, t_vw, incircle[t].0, t_uv]);
            kite_data.push((pack.radii[v], incircle[t].1));
        }
    }
    let max_r = pack.radii.iter().copied().fold(0.0, f64::max);
    let meta = ConstructionMeta {
        kind: "circle_pattern".into(),
        packing_residual: Some(pack.residual),
        max_circle_radius: Some(max_r),
        ..Default::default()
    };
    let mut out = assemble(color, quads, s, meta)?;
    let emb = &mut out.embedding;
    let w0 = (0..emb.n_vertices())
        .find(|&v| emb.mesh.color[v] == Color::White)
        .unwrap_or(0);
    emb.shift_q(-emb.q[w0]);

    // Right-angled kite with tangent lengths r and ρ: tan² θ = 2rρ / (r² + ρ²);
    // Q vanishes on tangency points and equals the radius at both centers.
    let mut dev: f64 = 0.0;
    for (z, &(r, rho)) in kite_data.iter().enumerate() {
        let theta = (2.0 * r * rho / (r * r + rho * rho)).sqrt().atan();
        dev = dev.max((theta - emb.mesh.theta[z]).abs());
        let q = emb.mesh.quads[z];
        let scale = r.max(rho);
        dev = dev
            .max(emb.q[q[1]].abs() / scale)
            .max(emb.q[q[3]].abs() / scale);
        dev = dev
            .max((emb.q[q[0]] - r).abs() / scale)
            .max((emb.q[q[2]] - rho).abs() / scale);
    }
    if let Some(pg) = &out.graph {
        for (e, &z) in pg.edge.iter().enumerate() {
            let (r, rho) = kite_data[z];
            let theta = (2.0 * r * rho / (r * r + rho * rho)).sqrt().atan();
            dev = dev.max((pg.graph.edge(e).x - (theta / 2.0).tan()).abs());
        }
    }
    out.meta.cross_check = Some(dev);
    if !(dev <= KITE) {
        return Err(Error::Geometry(format!(
            "kite closed forms deviate by {dev:e}"
        )));
    }
    Ok(out)
}
