//! Spinors on corner double covers and the three-term propagation equation
//! X(c_pq) = X(c_{p,1−q}) cos θ + X(c_{1−p,q}) sin θ.
//!
//! A spinor is stored by its value on one reference lift of every corner; the
//! other lift carries the negated value. Which lifts of adjacent corners are
//! neighbours on the cover is recorded by a [`Cover`]: one sign per pair of
//! consecutive corners of each quad.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::mesh::QuadMesh;
use crate::{Error, Result, C64};

/// Values a spinor may take: real or complex.
pub trait SpinorValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Neg<Output = Self>
{
    fn zero() -> Self;
    fn modulus(self) -> f64;
}

impl SpinorValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl SpinorValue for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Neighbour signs on a double cover. `signs[z][k]` is +1 when the reference
/// lifts of slots k and k+1 (mod 4) of quad z are neighbours, −1 otherwise.
/// Around every quad the product is −1: the cover branches over each quad.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub signs: Vec<[i8; 4]>,
}

/// Index of the quad vertex shared by slots k and k+1.
pub fn pair_vertex(k: usize) -> usize {
    (k + 1) % 4
}

impl Cover {
    pub fn validate(&self, mesh: &QuadMesh) -> Result<()> {
        if self.signs.len() != mesh.n_quads() {
            return Err(Error::Spinor("cover size does not match the mesh".into()));
        }
        for (z, s) in self.signs.iter().enumerate() {
            if s.iter().any(|&x| x != 1 && x != -1)
                || s.iter().map(|&x| x as i32).product::<i32>() != -1
            {
                return Err(Error::Spinor(format!(
                    "incoherent lift selection at quad {z}"
                )));
            }
        }
        Ok(())
    }

    /// Sign between slots `a` and `b` of quad `z`, which must be adjacent.
    pub fn sign(&self, z: usize, a: usize, b: usize) -> f64 {
        let k = if (a + 1) % 4 == b {
            a
        } else {
            debug_assert_eq!((b + 1) % 4, a);
            b
        };
        self.signs[z][k] as f64
    }

    /// Cover induced by the angular lift of corner directions S(v•) − S(v°):
    /// the reference lift of each corner is the principal square root of its
    /// direction, and neighbouring lifts differ by the continuous rotation
    /// through the quad's interior angle at the shared vertex.
    pub fn from_geometry(mesh: &QuadMesh, s: &[C64]) -> Result<Cover> {
        let rho = reference_lifts(mesh, s)?;
        let mut signs = Vec::with_capacity(mesh.n_quads());
        for (z, q) in mesh.quads.iter().enumerate() {
            let cs = mesh.quad_corners[z];
            let mut sz = [0i8; 4];
            for (k, slot) in sz.iter_mut().enumerate() {
                let v = pair_vertex(k);
                let angle = interior_angle(s[q[(v + 3) % 4]], s[q[v]], s[q[(v + 1) % 4]]);
                let predicted = rho[cs[k]] * C64::from_polar(1.0, -angle / 2.0);
                let dot = (predicted * rho[cs[(k + 1) % 4]].conj()).re;
                *slot = if dot >= 0.0 { 1 } else { -1 };
            }
            signs.push(sz);
        }
        let cover = Cover { signs };
        cover.validate(mesh)?;
        Ok(cover)
    }
}

/// Principal square roots of the unit corner directions.
pub fn reference_lifts(mesh: &QuadMesh, s: &[C64]) -> Result<Vec<C64>> {
    mesh.corners
        .iter()
        .enumerate()
        .map(|(c, &[b, w])| {
            let d = s[b] - s[w];
            if d.norm() == 0.0 {
                Err(Error::Spinor(format!("corner {c} has zero length")))
            } else {
                Ok((d / d.norm()).sqrt())
            }
        })
        .collect()
}

/// Interior angle at `b` of a counterclockwise polygon with neighbours `a`
/// (previous) and `c` (next), in (0, 2π).
pub fn interior_angle(a: C64, b: C64, c: C64) -> f64 {
    let t = ((a - b) / (c - b)).arg();
    if t <= 0.0 {
        t + 2.0 * std::f64::consts::PI
    } else {
        t
    }
}

fn coef(theta: f64, k: usize) -> f64 {
    if k.is_multiple_of(2) {
        theta.sin()
    } else {
        theta.cos()
    }
}

/// Residuals of the four relations at quad `z`, in slot order.
pub fn propagation_residual<T: SpinorValue>(
    mesh: &QuadMesh,
    cover: &Cover,
    x: &[T],
    z: usize,
) -> [f64; 4] {
    let cs = mesh.quad_corners[z];
    let th = mesh.theta[z];
    let s = cover.signs[z];
    let mut out = [0.0; 4];
    for (k, r) in out.iter_mut().enumerate() {
        let next = (k + 1) % 4;
        let prev = (k + 3) % 4;
        let rhs = x[cs[next]] * (s[k] as f64 * coef(th, k))
            + x[cs[prev]] * (s[prev] as f64 * coef(th, prev));
        *r = (x[cs[k]] - rhs).modulus();
    }
    out
}

/// Aggregated residual report.
#[derive(Clone, Debug, Serialize)]
pub struct SpinorReport {
    pub max_residual: f64,
    pub worst_quad: Option<usize>,
    /// (quad, residual) sorted by decreasing residual.
    pub residuals: Vec<(usize, f64)>,
}

/// Propagation residuals over `region` (all quads if `None`).
pub fn verify_spinor<T: SpinorValue + Send + Sync>(
    mesh: &QuadMesh,
    cover: &Cover,
    x: &[T],
    region: Option<&[usize]>,
) -> SpinorReport {
    let quads: Vec<usize> = match region {
        Some(r) => r.to_vec(),
        None => (0..mesh.n_quads()).collect(),
    };
    let mut residuals: Vec<(usize, f64)> = crate::par::map_slice(&quads, |&z| {
        let r = propagation_residual(mesh, cover, x, z);
        (z, r.into_iter().fold(0.0, f64::max))
    });
    residuals.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    SpinorReport {
        max_residual: residuals.first().map_or(0.0, |r| r.1),
        worst_quad: residuals.first().map(|r| r.0),
        residuals,
    }
}

/// Complete the four corner values of a quad from any two of them.
pub fn complete_quad<T: SpinorValue>(
    theta: f64,
    signs: [i8; 4],
    known: [Option<T>; 4],
) -> Option<[T; 4]> {
    let mut x = known;
    // Relation at slot k solved for x[k+1] or x[k−1], repeated until stable.
    for _ in 0..4 {
        for k in 0..4 {
            let next = (k + 1) % 4;
            let prev = (k + 3) % 4;
            let sn = signs[k] as f64 * coef(theta, k);
            let sp = signs[prev] as f64 * coef(theta, prev);
            match (x[k], x[next], x[prev]) {
                (Some(a), Some(b), None) => x[prev] = Some((a - b * sn) * (1.0 / sp)),
                (Some(a), None, Some(c)) => x[next] = Some((a - c * sp) * (1.0 / sn)),
                (None, Some(b), Some(c)) => x[k] = Some(b * sn + c * sp),
                _ => {}
            }
        }
    }
    Some([x[0]?, x[1]?, x[2]?, x[3]?])
}

/// Extend partial corner data over the region by repeatedly completing quads
/// with two known corners. Fails if some corner stays undetermined.
pub fn propagate<T: SpinorValue>(
    mesh: &QuadMesh,
    cover: &Cover,
    known: Vec<Option<T>>,
) -> Result<Vec<T>> {
    let mut x = known;
    let mut changed = true;
    while changed {
        changed = false;
        for z in 0..mesh.n_quads() {
            let cs = mesh.quad_corners[z];
            let vals = [x[cs[0]], x[cs[1]], x[cs[2]], x[cs[3]]];
            let n_known = vals.iter().filter(|v| v.is_some()).count();
            if (2..4).contains(&n_known) {
                if let Some(full) = complete_quad(mesh.theta[z], cover.signs[z], vals) {
                    for k in 0..4 {
                        if x[cs[k]].is_none() {
                            x[cs[k]] = Some(full[k]);
                            changed = true;
                        }
                    }
                }
            }
        }
    }
    x.into_iter()
        .enumerate()
        .map(|(c, v)| {
            v.ok_or_else(|| Error::Spinor(format!("corner {c} not reached by propagation")))
        })
        .collect()
}

/// Value on a chosen lift: the second sheet carries the negation.
pub fn on_sheet<T: SpinorValue>(x: &[T], corner: usize, sheet: bool) -> T {
    if sheet {
        -x[corner]
    } else {
        x[corner]
    }
}

/// Interchange form keyed by (corner id, sheet).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinorEntry {
    pub corner: usize,
    pub sheet: u8,
    pub re: f64,
    pub im: f64,
}

pub fn spinor_to_entries(x: &[C64]) -> Vec<SpinorEntry> {
    let mut out = Vec::with_capacity(2 * x.len());
    for (c, v) in x.iter().enumerate() {
        out.push(SpinorEntry {
            corner: c,
            sheet: 0,
            re: v.re,
            im: v.im,
        });
        out.push(SpinorEntry {
            corner: c,
            sheet: 1,
            re: -v.re,
            im: -v.im,
        });
    }
    out
}

pub fn spinor_from_entries(entries: &[SpinorEntry], n_corners: usize) -> Result<Vec<C64>> {
    let mut x: Vec<Option<C64>> = vec![None; n_corners];
    let mut y: Vec<Option<C64>> = vec![None; n_corners];
    for (i, e) in entries.iter().enumerate() {
        if !(e.re.is_finite() && e.im.is_finite()) {
            return Err(Error::schema(format!("spinor[{i}]"), "non-finite value"));
        }
        if e.corner >= n_corners || e.sheet > 1 {
            return Err(Error::schema(
                format!("spinor[{i}]"),
                "corner or sheet out of range",
            ));
        }
        let slot = if e.sheet == 0 { &mut x } else { &mut y };
        slot[e.corner] = Some(C64::new(e.re, e.im));
    }
    (0..n_corners)
        .map(|c| match (x[c], y[c]) {
            (Some(a), Some(b)) if (a + b).norm() <= 1e-12 * a.norm().max(1.0) => Ok(a),
            (Some(_), Some(_)) => Err(Error::schema(
                format!("spinor corner {c}"),
                "sheets are not opposite",
            )),
            (Some(a), None) => Ok(a),
            (None, Some(b)) => Ok(-b),
            (None, None) => Err(Error::schema(format!("spinor corner {c}"), "missing value")),
        })
        .collect()
}
