//! Plane geometry for tangential quadrilaterals.
//!
//! Quads are given counterclockwise. A quad is tangential when a circle is
//! tangent to the four lines supporting its edges. Signed support distances
//! are measured to the left of each directed edge, so the incircle of a
//! tangential quad (convex or not) sits at signed distance +r from all four
//! lines. With that convention the decomposition of the signed area into the
//! four triangles (center, edge) gives area = r · half-perimeter for every
//! tangential quad, convex or not.

use serde::{Deserialize, Serialize};

use crate::C64;

pub fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

pub fn dot(a: C64, b: C64) -> f64 {
    a.re * b.re + a.im * b.im
}

/// Signed area (positive for counterclockwise polygons).
pub fn polygon_area(p: &[C64]) -> f64 {
    let n = p.len();
    (0..n).map(|i| cross(p[i], p[(i + 1) % n])).sum::<f64>() / 2.0
}

pub fn perimeter(p: &[C64]) -> f64 {
    let n = p.len();
    (0..n).map(|i| (p[(i + 1) % n] - p[i]).norm()).sum()
}

pub fn diameter(p: &[C64]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            d = d.max((p[i] - p[j]).norm());
        }
    }
    d
}

/// |e0| − |e1| + |e2| − |e3| for edges e_i = [p_i, p_{i+1}].
pub fn alternating_sum(p: &[C64; 4]) -> f64 {
    let e = |i: usize| (p[(i + 1) % 4] - p[i]).norm();
    e(0) - e(1) + e(2) - e(3)
}

/// Signed distance from `c` to the line through `a`, `b`, positive on the left.
pub fn signed_distance(a: C64, b: C64, c: C64) -> f64 {
    cross(b - a, c - a) / (b - a).norm()
}

pub fn support_distances(p: &[C64; 4], c: C64) -> [f64; 4] {
    std::array::from_fn(|i| signed_distance(p[i], p[(i + 1) % 4], c))
}

/// Center and radius of the circle closest (in least squares) to being at
/// signed distance r from all four support lines, plus the worst deviation.
pub fn incircle_least_squares(p: &[C64; 4]) -> (C64, f64, f64) {
    // Rows: n_i · c − r = n_i · p_i with n_i the unit left normal of edge i.
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for i in 0..4 {
        let d = p[(i + 1) % 4] - p[i];
        let n = C64::new(-d.im, d.re) / d.norm();
        let row = [n.re, n.im, -1.0];
        let rhs = dot(n, p[i]);
        for a in 0..3 {
            for b in 0..3 {
                ata[a][b] += row[a] * row[b];
            }
            atb[a] += row[a] * rhs;
        }
    }
    let sol = solve3(ata, atb).unwrap_or([f64::NAN; 3]);
    let c = C64::new(sol[0], sol[1]);
    let r = sol[2];
    let dev = support_distances(p, c)
        .iter()
        .map(|d| (d - r).abs())
        .fold(0.0, f64::max);
    (c, r, dev)
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (x, p) in a[row].iter_mut().zip(pivot_row).skip(col) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Unsigned angle between the directions `u` and `v`.
pub fn angle_between(u: C64, v: C64) -> f64 {
    cross(u, v).atan2(dot(u, v)).abs()
}

/// Half-angles at the four vertices: the angle between the bisector towards
/// the center and the incident edges (averaged over the two edges).
pub fn half_angles(p: &[C64; 4], c: C64) -> [f64; 4] {
    std::array::from_fn(|i| {
        let v = p[i];
        let a = angle_between(p[(i + 3) % 4] - v, c - v);
        let b = angle_between(p[(i + 1) % 4] - v, c - v);
        (a + b) / 2.0
    })
}

/// Interior angle at vertex i of a counterclockwise polygon, in (0, 2π).
pub fn interior_angle_at(p: &[C64], i: usize) -> f64 {
    let n = p.len();
    crate::propagation::interior_angle(p[(i + n - 1) % n], p[i], p[(i + 1) % n])
}

/// One face of an s-embedding. Vertices in mesh order [v•0, v°0, v•1, v°1].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentialQuad {
    pub id: usize,
    pub vertices: [C64; 4],
    pub center: C64,
    pub radius: f64,
    pub half_angles: [f64; 4],
}

impl TangentialQuad {
    /// Geometry from vertices and a known center; the radius is the mean
    /// signed support distance.
    pub fn with_center(id: usize, vertices: [C64; 4], center: C64) -> Self {
        let d = support_distances(&vertices, center);
        let radius = d.iter().sum::<f64>() / 4.0;
        TangentialQuad {
            id,
            vertices,
            center,
            radius,
            half_angles: half_angles(&vertices, center),
        }
    }

    /// Geometry from vertices alone, center by least squares.
    pub fn from_vertices(id: usize, vertices: [C64; 4]) -> Self {
        let (c, _, _) = incircle_least_squares(&vertices);
        Self::with_center(id, vertices, c)
    }

    /// Largest deviation of a support distance from the radius.
    pub fn tangency_residual(&self) -> f64 {
        support_distances(&self.vertices, self.center)
            .iter()
            .map(|d| (d - self.radius).abs())
            .fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn half_perimeter(&self) -> f64 {
        perimeter(&self.vertices) / 2.0
    }

    pub fn diameter(&self) -> f64 {
        diameter(&self.vertices)
    }

    pub fn is_convex(&self) -> bool {
        (0..4).all(|i| interior_angle_at(&self.vertices, i) < std::f64::consts::PI)
    }

    /// |area − r · half-perimeter| relative to the area.
    pub fn area_residual(&self) -> f64 {
        let a = self.area();
        (a - self.radius * self.half_perimeter()).abs() / a.abs().max(f64::MIN_POSITIVE)
    }

    /// Largest distance from the center to the four bisector lines.
    pub fn bisector_residual(&self) -> f64 {
        (0..4)
            .map(|i| {
                let v = self.vertices[i];
                let a = self.vertices[(i + 3) % 4] - v;
                let b = self.vertices[(i + 1) % 4] - v;
                let mut bis = a / a.norm() + b / b.norm();
                if bis.norm() < 1e-12 {
                    bis = C64::new(-a.im, a.re);
                }
                signed_distance(v, v + bis, self.center).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Largest deviation from |e| = r (cot φ_a + cot φ_b) over the four edges.
    pub fn edge_formula_residual(&self) -> f64 {
        (0..4)
            .map(|i| {
                let j = (i + 1) % 4;
                let len = (self.vertices[j] - self.vertices[i]).norm();
                let pred = self.radius
                    * (1.0 / self.half_angles[i].tan() + 1.0 / self.half_angles[j].tan());
                (len - pred).abs()
            })
            .fold(0.0, f64::max)
    }

    /// tan θ = (sin φ•0 sin φ•1 / (sin φ°0 sin φ°1))^{1/2}.
    pub fn recover_theta(&self) -> crate::Result<f64> {
        if self.half_angles.iter().any(|&a| !(a > 0.0)) {
            return Err(crate::Error::Geometry(format!(
                "quad {} has a zero half-angle",
                self.id
            )));
        }
        let s = self.half_angles.map(f64::sin);
        Ok(((s[0] * s[2]) / (s[1] * s[3])).sqrt().atan())
    }
}

/// Point of segment [a, b] at ordinate y, if the segment reaches it.
pub fn level_crossing(a: C64, b: C64, y: f64) -> Option<C64> {
    if (a.im - y) * (b.im - y) > 0.0 || a.im == b.im {
        return None;
    }
    let t = (y - a.im) / (b.im - a.im);
    Some(a + (b - a) * t)
}

/// Incircle of a counterclockwise triangle: (center, radius).
pub fn triangle_incircle(p: [C64; 3]) -> (C64, f64) {
    let a = (p[1] - p[2]).norm();
    let b = (p[2] - p[0]).norm();
    let c = (p[0] - p[1]).norm();
    let s = (a + b + c) / 2.0;
    let center = (p[0] * a + p[1] * b + p[2] * c) / (a + b + c);
    let area = polygon_area(&p).abs();
    (center, area / s)
}

/// Sutherland–Hodgman clip of a polygon against the half-plane {Im ≥ y}
/// (`above`) or {Im ≤ y}.
pub fn clip_half_plane(p: &[C64], y: f64, above: bool) -> Vec<C64> {
    let inside = |q: C64| if above { q.im >= y } else { q.im <= y };
    let mut out = Vec::new();
    let n = p.len();
    for i in 0..n {
        let cur = p[i];
        let next = p[(i + 1) % n];
        match (inside(cur), inside(next)) {
            (true, true) => out.push(next),
            (true, false) => out.push(cut(cur, next, y)),
            (false, true) => {
                out.push(cut(cur, next, y));
                out.push(next);
            }
            (false, false) => {}
        }
    }
    out
}

fn cut(a: C64, b: C64, y: f64) -> C64 {
    let t = (y - a.im) / (b.im - a.im);
    C64::new(a.re + (b.re - a.re) * t, y)
}

/// Clip `subject` by a convex counterclockwise polygon.
pub fn clip_convex(subject: &[C64], clip: &[C64]) -> Vec<C64> {
    let mut out = subject.to_vec();
    let m = clip.len();
    for i in 0..m {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % m]);
        let input = std::mem::take(&mut out);
        let n = input.len();
        let side = |q: C64| cross(b - a, q - a);
        for k in 0..n {
            let cur = input[k];
            let next = input[(k + 1) % n];
            let (sc, sn) = (side(cur), side(next));
            if sc >= 0.0 {
                out.push(cur);
            }
            if (sc >= 0.0) != (sn >= 0.0) {
                let t = sc / (sc - sn);
                out.push(cur + (next - cur) * t);
            }
        }
    }
    out
}

/// Split a simple counterclockwise quad into two counterclockwise triangles
/// along a diagonal that lies inside it.
pub fn quad_triangles(p: &[C64; 4]) -> [[C64; 3]; 2] {
    let reflex = (0..4).find(|&i| cross(p[i] - p[(i + 3) % 4], p[(i + 1) % 4] - p[i]) < 0.0);
    let k = reflex.unwrap_or(0);
    let q = |i: usize| p[(k + i) % 4];
    [[q(0), q(1), q(2)], [q(0), q(2), q(3)]]
}

/// Area of the intersection of the interiors of two simple quads.
pub fn quad_overlap_area(p: &[C64; 4], q: &[C64; 4]) -> f64 {
    let mut area = 0.0;
    for tp in quad_triangles(p) {
        for tq in quad_triangles(q) {
            let inter = clip_convex(&tp, &tq);
            if inter.len() >= 3 {
                area += polygon_area(&inter).abs();
            }
        }
    }
    area
}

/// Whether segments [a, b] and [c, d] cross at a point interior to both.
pub fn segments_cross(a: C64, b: C64, c: C64, d: C64) -> bool {
    let d1 = cross(b - a, c - a);
    let d2 = cross(b - a, d - a);
    let d3 = cross(d - c, a - c);
    let d4 = cross(d - c, b - c);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// A simple polygon has no two non-adjacent edges crossing.
pub fn is_simple(p: &[C64]) -> bool {
    let n = p.len();
    for i in 0..n {
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            if segments_cross(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}
