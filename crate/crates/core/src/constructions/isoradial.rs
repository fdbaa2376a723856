//! Isoradial embeddings from rhombus tilings. Every quad is a rhombus of
//! side δ, so each white vertex is the center of a circle of radius δ
//! through its black neighbours, and the weights are critical.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{assemble, Construction, ConstructionMeta};
use crate::geom;
use crate::mesh::Color;
use crate::propagation::verify_spinor;
use crate::{Error, Result, C64};

/// Quads listed as [v•0, v°0, v•1, v°1] counterclockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhombusTiling {
    pub points: Vec<C64>,
    pub color: Vec<Color>,
    pub quads: Vec<[usize; 4]>,
}

struct Builder<K> {
    index: HashMap<K, usize>,
    points: Vec<C64>,
    color: Vec<Color>,
    quads: Vec<[usize; 4]>,
}

impl<K: std::hash::Hash + Eq> Builder<K> {
    fn new() -> Self {
        Builder {
            index: HashMap::new(),
            points: Vec::new(),
            color: Vec::new(),
            quads: Vec::new(),
        }
    }

    fn vertex(&mut self, key: K, p: C64, c: Color) -> usize {
        *self.index.entry(key).or_insert_with(|| {
            self.points.push(p);
            self.color.push(c);
            self.points.len() - 1
        })
    }

    fn finish(self) -> RhombusTiling {
        RhombusTiling {
            points: self.points,
            color: self.color,
            quads: self.quads,
        }
    }
}

/// Rotate a counterclockwise quad so that it starts at a black vertex.
fn black_first(q: [usize; 4], color: &[Color]) -> [usize; 4] {
    if color[q[0]] == Color::Black {
        q
    } else {
        [q[1], q[2], q[3], q[0]]
    }
}

/// n × n grid of squares of side δ, with the corner at the origin white.
pub fn square_rhombi(n: usize, delta: f64) -> RhombusTiling {
    let mut b = Builder::new();
    let colour = |k: usize, j: usize| {
        if (k + j) % 2 == 1 {
            Color::Black
        } else {
            Color::White
        }
    };
    for k in 0..n {
        for j in 0..n {
            let corners = [(k, j), (k + 1, j), (k + 1, j + 1), (k, j + 1)];
            let q = corners
                .map(|(a, c)| b.vertex((a, c), C64::new(a as f64, c as f64) * delta, colour(a, c)));
            let q = black_first(q, &b.color);
            b.quads.push(q);
        }
    }
    b.finish()
}

/// 60°/120° rhombi: G is a parallelogram patch of the triangular lattice with
/// n × n cells and G° its hexagonal dual; triangle circumradius δ.
pub fn triangular_rhombi(n: usize, delta: f64) -> RhombusTiling {
    #[derive(Hash, PartialEq, Eq)]
    enum Key {
        B(usize, usize),
        Up(usize, usize),
        Down(usize, usize),
    }
    let side = delta * 3f64.sqrt();
    let omega = C64::from_polar(1.0, PI / 3.0);
    let bp = |i: usize, j: usize| (C64::new(i as f64, 0.0) + omega * j as f64) * side;
    let up = |i: usize, j: usize| (bp(i, j) + bp(i + 1, j) + bp(i, j + 1)) / 3.0;
    let down = |i: usize, j: usize| (bp(i + 1, j) + bp(i + 1, j + 1) + bp(i, j + 1)) / 3.0;
    let mut b = Builder::new();
    let quad =
        |b: &mut Builder<Key>, b0: (usize, usize), b1: (usize, usize), right: Key, left: Key| {
            let v0 = b.vertex(Key::B(b0.0, b0.1), bp(b0.0, b0.1), Color::Black);
            let v1 = b.vertex(Key::B(b1.0, b1.1), bp(b1.0, b1.1), Color::Black);
            let pos = |k: &Key| match *k {
                Key::Up(i, j) => up(i, j),
                Key::Down(i, j) => down(i, j),
                Key::B(i, j) => bp(i, j),
            };
            let (pr, pl) = (pos(&right), pos(&left));
            let wr = b.vertex(right, pr, Color::White);
            let wl = b.vertex(left, pl, Color::White);
            b.quads.push([v0, wr, v1, wl]);
        };
    for i in 0..n {
        for j in 0..n {
            if j >= 1 {
                quad(
                    &mut b,
                    (i, j),
                    (i + 1, j),
                    Key::Down(i, j - 1),
                    Key::Up(i, j),
                );
            }
            if i >= 1 {
                quad(
                    &mut b,
                    (i, j),
                    (i, j + 1),
                    Key::Up(i, j),
                    Key::Down(i - 1, j),
                );
            }
            quad(
                &mut b,
                (i + 1, j),
                (i, j + 1),
                Key::Down(i, j),
                Key::Up(i, j),
            );
        }
    }
    b.finish()
}

/// Penrose rhombi from de Bruijn's pentagrid: one rhombus per intersection
/// of grid lines within `radius` of the origin. Vertices are the integer
/// vectors K with position δ Σ K_j e_j, coloured by the parity of Σ K_j.
pub fn penrose_rhombi(radius: f64, delta: f64) -> RhombusTiling {
    let gamma = [0.2, 0.1, -0.05, -0.3, 0.05];
    let e: Vec<C64> = (0..5)
        .map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / 5.0))
        .collect();
    let lim = radius.ceil() as i64 + 2;
    let mut b = Builder::new();
    for j in 0..5 {
        for k in j + 1..5 {
            let det = geom::cross(e[j], e[k]);
            for nj in -lim..=lim {
                for nk in -lim..=lim {
                    let (cj, ck) = (nj as f64 - gamma[j], nk as f64 - gamma[k]);
                    // ⟨z, e_j⟩ = cj, ⟨z, e_k⟩ = ck.
                    let z =
                        C64::new(cj * e[k].im - ck * e[j].im, ck * e[j].re - cj * e[k].re) / det;
                    if z.norm() > radius {
                        continue;
                    }
                    let mut base = [0i64; 5];
                    for (l, slot) in base.iter_mut().enumerate() {
                        *slot = (geom::dot(z, e[l]) + gamma[l]).ceil() as i64;
                    }
                    base[j] = nj;
                    base[k] = nk;
                    let shifted = |dj: i64, dk: i64| {
                        let mut key = base;
                        key[j] += dj;
                        key[k] += dk;
                        key
                    };
                    let ring = if det > 0.0 {
                        [shifted(0, 0), shifted(1, 0), shifted(1, 1), shifted(0, 1)]
                    } else {
                        [shifted(0, 0), shifted(0, 1), shifted(1, 1), shifted(1, 0)]
                    };
                    let q = ring.map(|key| {
                        let p: C64 =
                            key.iter().zip(&e).map(|(&c, &u)| u * c as f64).sum::<C64>() * delta;
                        let parity = key.iter().sum::<i64>().rem_euclid(2);
                        b.vertex(
                            key,
                            p,
                            if parity == 0 {
                                Color::Black
                            } else {
                                Color::White
                            },
                        )
                    });
                    let q = black_first(q, &b.color);
                    b.quads.push(q);
                }
            }
        }
    }
    b.finish()
}

/// Relative agreement required between the tiling and the rebuilt embedding.
const ISORADIAL: f64 = 1e-10;

pub fn isoradial_from_rhombi(tiling: &RhombusTiling, delta: f64) -> Result<Construction> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::Parameter(format!("δ = {delta} must be positive")));
    }
    if tiling.points.len() != tiling.color.len() {
        return Err(Error::InvalidGraph("one colour per point required".into()));
    }
    for (z, q) in tiling.quads.iter().enumerate() {
        if q.iter().any(|&v| v >= tiling.points.len()) {
            return Err(Error::InvalidGraph(format!(
                "quad {z} names an unknown point"
            )));
        }
        let p = q.map(|v| tiling.points[v]);
        if (0..4).any(|i| ((p[(i + 1) % 4] - p[i]).norm() - delta).abs() > 1e-9 * delta) {
            return Err(Error::Geometry(format!(
                "quad {z} is not a rhombus of side {delta}"
            )));
        }
    }
    let mut out = assemble(
        tiling.color.clone(),
        tiling.quads.clone(),
        tiling.points.clone(),
        ConstructionMeta {
            kind: "isoradial".into(),
            ..Default::default()
        },
    )?;
    let emb = &mut out.embedding;
    let w0 = (0..emb.n_vertices())
        .find(|&v| emb.mesh.color[v] == Color::White)
        .unwrap_or(0);
    emb.shift_q(-emb.q[w0]);

    // Positions reproduced, θ equal to the half rhombus angle at the black
    // vertex, spinor exact, Q = δ on G• and 0 on G°.
    let mut dev: f64 = 0.0;
    for (v, p) in tiling.points.iter().enumerate() {
        dev = dev.max((emb.s[v] - p).norm() / delta);
    }
    for (z, q) in tiling.quads.iter().enumerate() {
        let p = q.map(|v| tiling.points[v]);
        dev = dev.max((geom::interior_angle_at(&p, 0) / 2.0 - emb.mesh.theta[z]).abs());
    }
    let sp = emb.spinor()?;
    let sup = sp.values.iter().map(|x| x.norm()).fold(0.0, f64::max);
    dev = dev.max(verify_spinor(&emb.mesh, &sp.cover, &sp.values, None).max_residual / sup);
    for &z in emb.mesh.quads.iter().flatten() {
        let expect = if emb.mesh.color[z] == Color::Black {
            delta
        } else {
            0.0
        };
        dev = dev.max((emb.q[z] - expect).abs() / delta);
    }
    out.meta.cross_check = Some(dev);
    if !(dev <= ISORADIAL) {
        return Err(Error::Geometry(format!(
            "isoradial rebuild deviates by {dev:e}"
        )));
    }
    Ok(out)
}
