//! Embedding interchange JSON and SVG rendering.
//!
//! ```json
//! { "S": [[x, y], ...], "Q": [q, ...], "colors": ["black", "white", ...],
//!   "corners": [[v_black, v_white], ...],
//!   "quads": [{"vertices": [b0, w0, b1, w1], "corners": [c00, c10, c11, c01],
//!              "theta": t, "center": [x, y], "r": r}, ...],
//!   "spinor": null | {"cover": [[s0, s1, s2, s3], ...], "values": [[re, im], ...]} }
//! ```

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{SEmbedding, SpinorData};
use crate::mesh::{Color, QuadMesh};
use crate::propagation::Cover;
use crate::{schema, Error, Result, C64};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadRecord {
    pub vertices: [usize; 4],
    pub corners: [usize; 4],
    pub theta: f64,
    pub center: [f64; 2],
    pub r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinorRecord {
    pub cover: Vec<[i8; 4]>,
    pub values: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingRecord {
    #[serde(rename = "S")]
    pub s: Vec<[f64; 2]>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    pub colors: Vec<Color>,
    pub corners: Vec<[usize; 2]>,
    pub quads: Vec<QuadRecord>,
    pub spinor: Option<SpinorRecord>,
}

fn xy(p: C64) -> [f64; 2] {
    [p.re, p.im]
}

fn pt(a: [f64; 2]) -> C64 {
    C64::new(a[0], a[1])
}

impl EmbeddingRecord {
    pub fn from_embedding(e: &SEmbedding) -> Self {
        EmbeddingRecord {
            s: e.s.iter().map(|&p| xy(p)).collect(),
            q: e.q.clone(),
            colors: e.mesh.color.clone(),
            corners: e.mesh.corners.clone(),
            quads: (0..e.n_quads())
                .map(|z| QuadRecord {
                    vertices: e.mesh.quads[z],
                    corners: e.mesh.quad_corners[z],
                    theta: e.mesh.theta[z],
                    center: xy(e.center[z]),
                    r: e.radius[z],
                })
                .collect(),
            spinor: e.spinor.as_ref().map(|sp| SpinorRecord {
                cover: sp.cover.signs.clone(),
                values: sp.values.iter().map(|&v| xy(v)).collect(),
            }),
        }
    }

    pub fn to_embedding(&self) -> Result<SEmbedding> {
        let n = self.colors.len();
        if self.s.len() != n || self.q.len() != n {
            return Err(Error::schema(
                "S",
                format!("expected {n} positions and origami values"),
            ));
        }
        schema::check_finite("S", self.s.iter().flatten().copied())?;
        schema::check_finite("Q", self.q.iter().copied())?;
        for (z, q) in self.quads.iter().enumerate() {
            schema::check_finite(
                &format!("quads[{z}]"),
                [q.theta, q.center[0], q.center[1], q.r],
            )?;
        }
        let mesh = QuadMesh::from_parts(
            self.colors.clone(),
            self.quads.iter().map(|q| q.vertices).collect(),
            self.quads.iter().map(|q| q.theta).collect(),
            self.corners.clone(),
            self.quads.iter().map(|q| q.corners).collect(),
        )
        .map_err(|e| Error::schema("quads", e.to_string()))?;
        let spinor = match &self.spinor {
            None => None,
            Some(sp) => {
                schema::check_finite("spinor.values", sp.values.iter().flatten().copied())?;
                if sp.values.len() != mesh.n_corners() || sp.cover.len() != mesh.n_quads() {
                    return Err(Error::schema("spinor", "size does not match the mesh"));
                }
                let cover = Cover {
                    signs: sp.cover.clone(),
                };
                cover
                    .validate(&mesh)
                    .map_err(|e| Error::schema("spinor.cover", e.to_string()))?;
                Some(SpinorData {
                    cover,
                    values: sp.values.iter().map(|&v| pt(v)).collect(),
                })
            }
        };
        Ok(SEmbedding {
            s: self.s.iter().map(|&p| pt(p)).collect(),
            q: self.q.clone(),
            center: self.quads.iter().map(|q| pt(q.center)).collect(),
            radius: self.quads.iter().map(|q| q.r).collect(),
            mesh,
            spinor,
        })
    }
}

pub fn embedding_to_json(e: &SEmbedding) -> String {
    schema::to_string(&EmbeddingRecord::from_embedding(e))
}

pub fn embedding_from_json(text: &str) -> Result<SEmbedding> {
    schema::from_str::<EmbeddingRecord>(text)?.to_embedding()
}

/// Rendering options.
#[derive(Clone, Debug, Default)]
pub struct SvgOptions {
    /// Fill quads by the mean origami value of their vertices.
    pub q_heat: bool,
    /// Quads drawn with a highlight fill.
    pub highlight: Vec<usize>,
    /// Segments drawn on top, e.g. open FK edges.
    pub overlay: Vec<(C64, C64)>,
    pub width: f64,
}

fn heat(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t) as u8;
    let b = (255.0 * (1.0 - t)) as u8;
    format!("rgb({r},96,{b})")
}

/// SVG 1.1 picture: quads, dashed incircles, G• as black dots and G° as
/// white dots. The y axis points up as in the complex plane.
pub fn render_svg(e: &SEmbedding, opt: &SvgOptions) -> String {
    let pts: Vec<C64> = e.s.clone();
    let (mut lo, mut hi) = (pts[0], pts[0]);
    for p in &pts {
        lo = C64::new(lo.re.min(p.re), lo.im.min(p.im));
        hi = C64::new(hi.re.max(p.re), hi.im.max(p.im));
    }
    let span = (hi.re - lo.re).max(hi.im - lo.im).max(f64::MIN_POSITIVE);
    let width = if opt.width > 0.0 { opt.width } else { 800.0 };
    let scale = 0.9 * width / span;
    let pad = 0.05 * width;
    let height = (hi.im - lo.im) * scale + 2.0 * pad;
    let wdt = (hi.re - lo.re) * scale + 2.0 * pad;
    let map = |p: C64| ((p.re - lo.re) * scale + pad, (hi.im - p.im) * scale + pad);
    let dot =
        (0.15 * e.radius.iter().copied().fold(f64::INFINITY, f64::min) * scale).clamp(0.5, 4.0);
    let (qmin, qmax) =
        e.q.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &q| {
                (a.min(q), b.max(q))
            });

    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{wdt:.3}" height="{height:.3}" viewBox="0 0 {wdt:.3} {height:.3}">"#
    );
    let _ = writeln!(out, r#"<g id="quads" stroke="black" stroke-width="0.6">"#);
    for z in 0..e.n_quads() {
        let fill = if opt.highlight.contains(&z) {
            "rgb(255,200,80)".to_string()
        } else if opt.q_heat {
            let m = e.mesh.quads[z].iter().map(|&v| e.q[v]).sum::<f64>() / 4.0;
            heat(if qmax > qmin {
                (m - qmin) / (qmax - qmin)
            } else {
                0.5
            })
        } else {
            "none".to_string()
        };
        let poly: Vec<String> = e
            .quad_vertices(z)
            .iter()
            .map(|&p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polygon points="{}" fill="{fill}" fill-opacity="0.5"/>"#,
            poly.join(" ")
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(
        out,
        r#"<g id="incircles" fill="none" stroke="gray" stroke-width="0.5" stroke-dasharray="3,2">"#
    );
    for z in 0..e.n_quads() {
        let (x, y) = map(e.center[z]);
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{:.3}"/>"#,
            e.radius[z] * scale
        );
    }
    let _ = writeln!(out, "</g>");
    if !opt.overlay.is_empty() {
        let _ = writeln!(
            out,
            r#"<g id="overlay" stroke="rgb(200,0,0)" stroke-width="1.2">"#
        );
        for &(a, b) in &opt.overlay {
            let ((x1, y1), (x2, y2)) = (map(a), map(b));
            let _ = writeln!(
                out,
                r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}"/>"#
            );
        }
        let _ = writeln!(out, "</g>");
    }
    let _ = writeln!(
        out,
        r#"<g id="vertices" stroke="black" stroke-width="0.5">"#
    );
    for (v, &p) in pts.iter().enumerate() {
        let (x, y) = map(p);
        let fill = match e.mesh.color[v] {
            Color::Black => "black",
            Color::White => "white",
        };
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{dot:.3}" fill="{fill}"/>"#
        );
    }
    let _ = writeln!(out, "</g>");
    let _ = writeln!(out, "</svg>");
    out
}
