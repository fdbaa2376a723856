//! Layered models on the zig-zag grid.
//!
//! Layer k joins columns C_{k−1} and C_k with constant angle θ_k. Quads are
//! trapezoids with unit incircles (scaled by `radius`) and horizontal bases;
//! consecutive rows are mirror images. With a_k the tangent of the half-angle
//! at the lower-left black vertex of layer k, a_{k+1} = a_k cot² θ_k and
//! the tangent lengths from the left vertices are 1/a_k (black) and a_k
//! (white), from the right ones 1/a_{k+1} (white) and a_{k+1} (black).

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{assemble, Construction, ConstructionMeta};
use crate::mesh::Color;
use crate::{Error, Result, C64};

/// tan θ_k = 1 + Z_k / columns^α with IID Rademacher Z_k.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomLayers {
    pub columns: usize,
    pub alpha: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerSpec {
    /// θ_k for k = 1, 2, …; ignored when `random` is set.
    #[serde(default)]
    pub thetas: Vec<f64>,
    pub rows: usize,
    #[serde(default)]
    pub random: Option<RandomLayers>,
    /// Incircle radius of every quad.
    #[serde(default = "unit")]
    pub radius: f64,
}

fn unit() -> f64 {
    1.0
}

impl LayerSpec {
    pub fn deterministic(thetas: Vec<f64>, rows: usize) -> Self {
        LayerSpec {
            thetas,
            rows,
            random: None,
            radius: 1.0,
        }
    }

    pub fn iid(columns: usize, alpha: f64, seed: u64, rows: usize) -> Self {
        LayerSpec {
            thetas: Vec::new(),
            rows,
            random: Some(RandomLayers {
                columns,
                alpha,
                seed,
            }),
            radius: 1.0,
        }
    }

    /// Column angles and, for IID specs, the realised signs.
    pub fn realize(&self) -> Result<(Vec<f64>, Option<Vec<i8>>)> {
        if self.rows == 0 {
            return Err(Error::Parameter("at least one row is required".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::Parameter(format!(
                "radius {} must be positive",
                self.radius
            )));
        }
        let (thetas, z) = match &self.random {
            None => (self.thetas.clone(), None),
            Some(rl) => {
                let step = (rl.columns as f64).powf(-rl.alpha);
                if !(step < 1.0) {
                    return Err(Error::Parameter(format!(
                        "columns^(-alpha) = {step} must be below 1 for tan θ to stay positive"
                    )));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(rl.seed);
                let z: Vec<i8> = (0..rl.columns)
                    .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
                    .collect();
                let thetas = z.iter().map(|&s| (1.0 + s as f64 * step).atan()).collect();
                (thetas, Some(z))
            }
        };
        if thetas.is_empty() {
            return Err(Error::Parameter(
                "at least one column angle is required".into(),
            ));
        }
        if let Some(k) = thetas.iter().position(|&t| !(t > 0.0 && t < FRAC_PI_2)) {
            return Err(Error::Parameter(format!(
                "θ_{} = {} outside (0, π/2)",
                k + 1,
                thetas[k]
            )));
        }
        Ok((thetas, z))
    }
}

/// Horizontal increments between columns C_{k−1} and C_k, evaluated from the
/// products of tan² and cot² directly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ColumnIncrement {
    pub ds_black: f64,
    pub ds_white: f64,
    pub dq_black: f64,
    pub dq_white: f64,
}

pub fn column_increments(thetas: &[f64], radius: f64) -> Vec<ColumnIncrement> {
    let cot2 = |upto: usize| {
        thetas[..upto]
            .iter()
            .map(|t| 1.0 / t.tan().powi(2))
            .product::<f64>()
    };
    let tan2 = |upto: usize| {
        thetas[..upto]
            .iter()
            .map(|t| t.tan().powi(2))
            .product::<f64>()
    };
    (1..=thetas.len())
        .map(|k| ColumnIncrement {
            ds_black: radius * (cot2(k) + tan2(k - 1)),
            ds_white: radius * (cot2(k - 1) + tan2(k)),
            dq_black: radius * (cot2(k) - tan2(k - 1)),
            dq_white: radius * (cot2(k - 1) - tan2(k)),
        })
        .collect()
}

/// Agreement required between the layered geometry and the column formulas.
const CLOSED_FORM: f64 = 1e-10;

pub fn zigzag_layered(spec: &LayerSpec) -> Result<Construction> {
    let (thetas, realized_z) = spec.realize()?;
    let (m, rows, r) = (thetas.len(), spec.rows, spec.radius);

    // a[k − 1] = a_k.
    let mut a = vec![1.0f64];
    for (k, &t) in thetas.iter().enumerate() {
        let next = a[k] / t.tan().powi(2);
        let phi = next.atan();
        if !(next.is_finite()
            && phi > 0.0
            && phi < FRAC_PI_2
            && next > 0.0
            && 1.0 / next > 0.0
            && (1.0 / next).is_finite())
        {
            return Err(Error::Parameter(format!(
                "column {}: half-angle leaves (0, π/2)",
                k + 1
            )));
        }
        a.push(next);
    }
    // First white column on the imaginary axis.
    let mut xb = vec![0.0; m + 1];
    let mut xw = vec![0.0; m + 1];
    xb[0] = a[0] - 1.0 / a[0];
    for k in 1..=m {
        let c = xb[k - 1] + 1.0 / a[k - 1];
        xw[k] = c + 1.0 / a[k];
        xb[k] = c + a[k];
    }

    let id = |k: usize, j: usize| k * (rows + 1) + j;
    let is_black = |k: usize, j: usize| (k + j) % 2 == 1;
    let mut color = Vec::with_capacity((m + 1) * (rows + 1));
    let mut s = Vec::with_capacity((m + 1) * (rows + 1));
    for k in 0..=m {
        for j in 0..=rows {
            let black = is_black(k, j);
            color.push(if black { Color::Black } else { Color::White });
            let x = if black { xb[k] } else { xw[k] };
            s.push(C64::new(r * x, r * 2.0 * j as f64));
        }
    }
    let mut quads = Vec::with_capacity(m * rows);
    for k in 1..=m {
        for j in 0..rows {
            let (bl, br, tr, tl) = (id(k - 1, j), id(k, j), id(k, j + 1), id(k - 1, j + 1));
            quads.push(if is_black(k - 1, j) {
                [bl, br, tr, tl]
            } else {
                [br, tr, tl, bl]
            });
        }
    }
    let kind = if spec.random.is_some() {
        "zigzag_iid"
    } else {
        "zigzag"
    };
    let mut out = assemble(
        color,
        quads,
        s,
        ConstructionMeta {
            kind: kind.into(),
            realized_z,
            ..Default::default()
        },
    )?;
    let emb = &mut out.embedding;
    emb.shift_q(-emb.q[id(0, 0)]);

    // Second route: cumulative column increments from the closed formulas.
    let inc = column_increments(&thetas, r);
    let (mut sb, mut sw) = (r * xb[0], 0.0);
    let (mut qb, mut qw) = (r * (a[0] + 1.0 / a[0]), 0.0);
    let scale = emb
        .s
        .iter()
        .map(|p| p.norm())
        .chain(emb.q.iter().map(|q| q.abs()))
        .fold(1.0, f64::max);
    let mut dev: f64 = 0.0;
    for k in 0..=m {
        if k > 0 {
            sb += inc[k - 1].ds_black;
            sw += inc[k - 1].ds_white;
            qb += inc[k - 1].dq_black;
            qw += inc[k - 1].dq_white;
        }
        for j in 0..=rows {
            let v = id(k, j);
            let (se, qe) = if is_black(k, j) { (sb, qb) } else { (sw, qw) };
            let p = emb.s[v];
            dev = dev
                .max((p.re - se).abs())
                .max((p.im - r * 2.0 * j as f64).abs())
                .max((emb.q[v] - qe).abs());
        }
    }
    out.meta.cross_check = Some(dev / scale);
    if !(dev <= CLOSED_FORM * scale) {
        return Err(Error::Geometry(format!(
            "layered geometry and column formulas disagree by {:e} (relative)",
            dev / scale
        )));
    }
    Ok(out)
}

/// n × n patch of Λ(G) with constant angle θ. At θ = π/4 this is the grid
/// of unit squares with Q = 1 on G• and Q = 0 on G°.
pub fn square_lattice(n: usize, theta: f64) -> Result<Construction> {
    if n < 2 {
        return Err(Error::Parameter(format!(
            "square lattice needs n ≥ 2, got {n}"
        )));
    }
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(Error::Parameter(format!("θ = {theta} outside (0, π/2)")));
    }
    let spec = LayerSpec {
        thetas: vec![theta; n],
        rows: n,
        random: None,
        radius: 0.5,
    };
    let mut out = zigzag_layered(&spec)?;
    out.meta.kind = if theta == FRAC_PI_4 {
        "critical_square"
    } else {
        "massive_square"
    }
    .into();
    Ok(out)
}

/// Square lattice with tan θ = 1 + c/n.
pub fn massive_square_lattice(n: usize, c: f64) -> Result<Construction> {
    let t = 1.0 + c / n as f64;
    if !(t > 0.0) {
        return Err(Error::Parameter(format!("1 + c/n = {t} must be positive")));
    }
    square_lattice(n, t.atan())
}
