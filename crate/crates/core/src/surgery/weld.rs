//! Welding an embedding to a square-grid district.
//!
//! The embedding is cut at a good level y_b and everything below is
//! dropped. Under the aligned level a strip of height h is built from
//! triangles completed by tangency points; the strip and its mirror image
//! are stacked alternately, so the right boundary of the stack zig-zags
//! between two abscissae with period 2h. One column of kites straightens
//! it and a diagonal square grid of mesh √2 h continues to the right.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{horizontal_align, tangency_point, HalfPlaneClip, Node, Side};
use crate::embedding::io::{render_svg, SvgOptions};
use crate::embedding::{check_properness, exp_fat_check, lip_scale, LipReport, SEmbedding};
use crate::geom::{self, TangentialQuad};
use crate::mesh::Color;
use crate::{par, Error, Result, C64};

fn default_rho() -> f64 {
    1.0
}

fn default_candidates() -> usize {
    10_000
}

fn default_periods() -> usize {
    3
}

fn default_columns() -> usize {
    4
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeldParams {
    pub kappa: f64,
    pub delta: f64,
    /// Exp-Fat(δ, ρ) is required of the input.
    #[serde(default = "default_rho")]
    pub rho: f64,
    /// Ordinates searched for y_b; defaults to the band between 20% and
    /// 50% of the region's height.
    #[serde(default)]
    pub window: Option<[f64; 2]>,
    #[serde(default = "default_candidates")]
    pub candidates: usize,
    /// Strip height h; chosen from the aligned level when absent.
    #[serde(default)]
    pub strip_height: Option<f64>,
    /// Number of (strip, mirrored strip) pairs stacked below y_b.
    #[serde(default = "default_periods")]
    pub periods: usize,
    /// Square columns of the district, each 2h wide.
    #[serde(default = "default_columns")]
    pub district_columns: usize,
}

impl WeldParams {
    pub fn new(kappa: f64, delta: f64) -> Self {
        WeldParams {
            kappa,
            delta,
            rho: default_rho(),
            window: None,
            candidates: default_candidates(),
            strip_height: None,
            periods: default_periods(),
            district_columns: default_columns(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Untouched quad of the input.
    Original(usize),
    /// Piece of an input quad aligned at y_b.
    Aligned(usize),
    Strip,
    Kite,
    District,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeldReport {
    #[serde(skip)]
    pub embedding: SEmbedding,
    pub provenance: Vec<Provenance>,
    pub level: f64,
    /// Smallest radius among the quads aligned at y_b.
    pub aligned_min_radius: f64,
    pub strip_height: f64,
    /// The two strip constants of the construction at this δ,
    /// 10 exp(−160/δ) and 10 exp(−1600/δ); reported, not used.
    pub nominal_shift: f64,
    pub nominal_strip: f64,
    pub kite_min_radius: f64,
    /// Ordinate spread of the white vertices on the bottom boundary of the
    /// district.
    pub district_bottom_spread: f64,
    /// Largest change of Ising angle on untouched quads.
    pub interior_theta_change: f64,
    pub lip: LipReport,
    pub lip_bound: f64,
    pub lip_ok: bool,
    pub proper: bool,
}

impl WeldReport {
    pub fn new_quads(&self) -> Vec<usize> {
        (0..self.provenance.len())
            .filter(|&z| !matches!(self.provenance[z], Provenance::Original(_)))
            .collect()
    }
}

/// Output vertices, deduplicated by origin.
#[derive(Default)]
struct Table {
    s: Vec<C64>,
    color: Vec<Color>,
    index: HashMap<Key, usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Input(usize),
    Cut(usize, usize),
    Fresh(usize),
}

impl Table {
    fn get(&mut self, key: Key, z: C64, c: Color) -> usize {
        if let Key::Fresh(_) = key {
            return self.fresh(z, c);
        }
        *self.index.entry(key).or_insert_with(|| {
            self.s.push(z);
            self.color.push(c);
            self.s.len() - 1
        })
    }

    fn fresh(&mut self, z: C64, c: Color) -> usize {
        self.s.push(z);
        self.color.push(c);
        self.s.len() - 1
    }

    /// Counterclockwise ring of alternating colours, rotated to black first.
    fn quad(&self, ring: [usize; 4]) -> Result<[usize; 4]> {
        let p = ring.map(|v| self.s[v]);
        if !(geom::polygon_area(&p) > 0.0) {
            return Err(Error::Geometry(
                "strip reflection collides: inverted quad".into(),
            ));
        }
        if (0..4).any(|i| self.color[ring[i]] == self.color[ring[(i + 1) % 4]]) {
            return Err(Error::Geometry(
                "welded quad does not alternate colours".into(),
            ));
        }
        let k = if self.color[ring[0]] == Color::Black {
            0
        } else {
            1
        };
        Ok(std::array::from_fn(|i| ring[(i + k) % 4]))
    }
}

/// Minimum output radius over the quads crossing level y, zero if any
/// alignment fails.
fn level_score(quads: &[TangentialQuad], y: f64) -> f64 {
    let mut best = f64::INFINITY;
    for q in quads {
        let (lo, hi) = q
            .vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
                (a.min(v.im), b.max(v.im))
            });
        if lo < y && y < hi {
            match horizontal_align(q, y, Side::Above) {
                Ok(c) => best = best.min(c.min_radius()),
                Err(_) => return 0.0,
            }
        }
    }
    if best.is_finite() {
        best
    } else {
        0.0
    }
}

/// Quads of one strip layer as rings over (top row, bottom row) indices.
#[derive(Clone, Copy)]
enum Row {
    Top(usize),
    Bottom(usize),
}

struct StripLayer {
    bottom: Vec<(f64, Color)>,
    quads: Vec<[Row; 4]>,
}

/// The strip below the aligned level line: under every other top vertex a
/// triangle whose incircle touches the line at that vertex, between them
/// triangles completed by their tangency point on the lower line, and a
/// trapezoid over the last top edge when the dips do not reach it.
fn strip_layer(top: &[(f64, Color)], y: f64, h: f64) -> Result<StripLayer> {
    let m = top.len() - 1;
    let pt = |x: f64, row: usize| C64::new(x, y - h * row as f64);
    let mut bottom: Vec<(f64, Color)> = Vec::new();
    let mut quads = Vec::new();
    let mut last: Option<usize> = None;
    for i in (1..m).step_by(2) {
        let (x0, xi, x1) = (top[i - 1].0, top[i].0, top[i + 1].0);
        let (w1, w2) = (xi - x0, x1 - xi);
        // Branch of |d − u_{i−1}| − |d − u_{i+1}| = w1 − w2 at depth h.
        let (k, beta) = ((w1 - w2) / 2.0, (w1 * w2).sqrt());
        let d = (x0 + x1) / 2.0 + k * (1.0 + (h / beta).powi(2)).sqrt();
        if let Some(p) = last {
            let tri = [pt(bottom[p].0, 1), pt(d, 1), pt(x0, 0)];
            let e = tangency_point(tri, 0).re;
            bottom.push((e, top[i - 1].1));
            let ei = bottom.len() - 1;
            quads.push([
                Row::Bottom(p),
                Row::Bottom(ei),
                Row::Bottom(ei + 1),
                Row::Top(i - 1),
            ]);
        }
        bottom.push((d, top[i].1));
        let di = bottom.len() - 1;
        quads.push([
            Row::Top(i - 1),
            Row::Bottom(di),
            Row::Top(i + 1),
            Row::Top(i),
        ]);
        last = Some(di);
    }
    if m % 2 == 1 {
        let d = match last {
            Some(p) => p,
            None => {
                bottom.push((top[0].0, top[1].1));
                0
            }
        };
        let (ua, ub) = (top[m - 1].0, top[m].0);
        let dl = pt(bottom[d].0, 1);
        // Pitot: |dβ| − |β u_m| = |u_{m−1} d| − |u_{m−1} u_m|.
        let target = (pt(ua, 0) - dl).norm() - (ub - ua);
        let g = |x: f64| (x - dl.re) - (pt(x, 1) - pt(ub, 0)).norm();
        let span = ub - dl.re + h;
        let (mut lo, mut hi) = (dl.re, dl.re + span);
        while g(hi) < target {
            hi = dl.re + 2.0 * (hi - dl.re);
            if hi - dl.re > 1e6 * span {
                return Err(Error::Geometry(
                    "strip reflection collides: no closing trapezoid".into(),
                ));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if g(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        bottom.push((0.5 * (lo + hi), top[m - 1].1));
        quads.push([
            Row::Bottom(d),
            Row::Bottom(d + 1),
            Row::Top(m),
            Row::Top(m - 1),
        ]);
    }
    if bottom
        .windows(2)
        .any(|w| !(w[0].0 < w[1].0) || w[0].1 == w[1].1)
    {
        return Err(Error::Geometry(
            "strip reflection collides: bottom row out of order".into(),
        ));
    }
    Ok(StripLayer { bottom, quads })
}

/// Weld `emb` (restricted to `region`, all quads when empty) to a square
/// district below the level y_b on the right.
pub fn weld_square_district(
    emb: &SEmbedding,
    region: &[usize],
    params: &WeldParams,
) -> Result<WeldReport> {
    let WeldParams {
        kappa, delta, rho, ..
    } = *params;
    if !(delta > 0.0) || !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Parameter(format!(
            "need δ > 0 and κ in (0, 1), got δ = {delta}, κ = {kappa}"
        )));
    }
    if params.periods < 2 {
        return Err(Error::Parameter(
            "at least two strip periods are needed for a kite".into(),
        ));
    }
    let fat = exp_fat_check(emb, delta, rho);
    if !fat.pass {
        return Err(Error::Parameter(format!(
            "input is not Exp-Fat(δ = {delta}, ρ = {rho}): thin component of diameter {}",
            fat.max_thin_diameter
        )));
    }
    let region: Vec<usize> = if region.is_empty() {
        (0..emb.n_quads()).collect()
    } else {
        region.to_vec()
    };
    let geo: Vec<TangentialQuad> = region
        .iter()
        .map(|&z| emb.quad_geometry(z))
        .collect::<Result<_>>()?;
    let ords: Vec<f64> = {
        let mut v: Vec<f64> = region
            .iter()
            .flat_map(|&z| emb.mesh.quads[z])
            .map(|v| emb.s[v].im)
            .collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let (ymin, ymax) = (ords[0], *ords.last().unwrap());
    let height = ymax - ymin;
    let [wlo, whi] = params
        .window
        .unwrap_or([ymin + 0.2 * height, ymin + 0.5 * height]);
    let n = params.candidates.max(1);
    let guard = 1e-9 * height;
    let scores = par::map_range(n, |j| {
        let y = wlo + (whi - wlo) * (j as f64 + 0.5) / n as f64;
        let i = ords.partition_point(|&o| o < y);
        let near = [i.checked_sub(1), Some(i)]
            .into_iter()
            .flatten()
            .filter_map(|k| ords.get(k))
            .any(|o| (o - y).abs() <= guard);
        if near {
            (y, 0.0)
        } else {
            (y, level_score(&geo, y))
        }
    });
    let (yb, score) = scores.into_iter().fold(
        (f64::NAN, 0.0),
        |best, c| if c.1 > best.1 { c } else { best },
    );
    if !(score > 0.0) {
        return Err(Error::NoGoodLevel);
    }

    // Step 2: keep the part above y_b, aligning the crossing quads.
    let mut t = Table::default();
    let mut quads: Vec<[usize; 4]> = Vec::new();
    let mut prov: Vec<Provenance> = Vec::new();
    let mut aligned_min: f64 = f64::INFINITY;
    for (k, &z) in region.iter().enumerate() {
        let q = emb.mesh.quads[z];
        let lo = q.iter().map(|&v| emb.s[v].im).fold(f64::INFINITY, f64::min);
        if lo > yb {
            let ring = q.map(|v| t.get(Key::Input(v), emb.s[v], emb.mesh.color[v]));
            quads.push(ring);
            prov.push(Provenance::Original(z));
            continue;
        }
        let hi = q
            .iter()
            .map(|&v| emb.s[v].im)
            .fold(f64::NEG_INFINITY, f64::max);
        if hi < yb {
            continue;
        }
        let clip: HalfPlaneClip = horizontal_align(&geo[k], yb, Side::Above)?;
        aligned_min = aligned_min.min(clip.min_radius());
        let ids: Vec<usize> = clip
            .vertices
            .iter()
            .map(|av| {
                let key = match av.node {
                    Node::Corner(i) => Key::Input(q[i]),
                    Node::Cut(i, j) => Key::Cut(q[i].min(q[j]), q[i].max(q[j])),
                    Node::New(_) => Key::Fresh(0),
                };
                t.get(key, av.z, av.color)
            })
            .collect();
        for r in &clip.quads {
            quads.push(r.map(|i| ids[i]));
            prov.push(Provenance::Aligned(z));
        }
    }

    // The aligned level line must be a single path u_0 … u_m.
    let on_line: Vec<usize> = (0..t.s.len()).filter(|&v| t.s[v].im == yb).collect();
    let mut line_edges = 0;
    for q in &quads {
        for i in 0..4 {
            if t.s[q[i]].im == yb && t.s[q[(i + 1) % 4]].im == yb {
                line_edges += 1;
            }
        }
    }
    let mut u = on_line.clone();
    u.sort_by(|&a, &b| t.s[a].re.total_cmp(&t.s[b].re));
    if u.len() < 2
        || line_edges != u.len() - 1
        || u.windows(2).any(|w| t.color[w[0]] == t.color[w[1]])
    {
        return Err(Error::Geometry(format!(
            "level {yb} does not cut the region along one interval"
        )));
    }
    let min_edge = u
        .windows(2)
        .map(|w| t.s[w[1]].re - t.s[w[0]].re)
        .fold(f64::INFINITY, f64::min);
    let h = params
        .strip_height
        .unwrap_or((0.25 * aligned_min).min(0.1 * delta).min(0.5 * min_edge));
    if !(h > 0.0) {
        return Err(Error::Parameter(format!(
            "strip height {h} must be positive"
        )));
    }

    // Steps 3 and 4: strip, mirrored strip, repeated.
    let top: Vec<(f64, Color)> = u.iter().map(|&v| (t.s[v].re, t.color[v])).collect();
    let layer = strip_layer(&top, yb, h)?;
    let n_rows = 2 * params.periods + 1;
    let mut rows: Vec<Vec<usize>> = vec![u.clone()];
    for r in 1..n_rows {
        let src = if r % 2 == 1 { &layer.bottom } else { &top };
        let y = yb - h * r as f64;
        rows.push(
            src.iter()
                .map(|&(x, c)| t.fresh(C64::new(x, y), c))
                .collect(),
        );
    }
    for l in 0..n_rows - 1 {
        for ring in &layer.quads {
            let pick = |r: Row| match (r, l % 2) {
                (Row::Top(i), 0) => rows[l][i],
                (Row::Bottom(i), 0) => rows[l + 1][i],
                (Row::Top(i), _) => rows[l + 1][i],
                (Row::Bottom(i), _) => rows[l][i],
            };
            let mut q = ring.map(pick);
            if l % 2 == 1 {
                q.reverse();
            }
            quads.push(t.quad(q)?);
            prov.push(Provenance::Strip);
        }
    }

    // Step 5: kites on the right boundary, then the district.
    let bnd: Vec<usize> = rows.iter().map(|r| *r.last().unwrap()).collect();
    let o = if t.s[bnd[0]].re >= t.s[bnd[1]].re {
        0
    } else {
        1
    };
    let x0 = t.s[bnd[o]].re;
    let (b_lo, b_hi) = (o, n_rows - 1 - (n_rows - 1 - o) % 2);
    let outer_color = t.color[bnd[o]];
    let cols = 2 * params.district_columns + 1;
    let mut lattice: HashMap<(usize, usize), usize> = HashMap::new();
    for b in (b_lo..=b_hi).step_by(2) {
        lattice.insert((0, b), bnd[b]);
    }
    let mut node = |t: &mut Table, a: usize, b: usize| -> usize {
        *lattice.entry((a, b)).or_insert_with(|| {
            let c = if a.is_multiple_of(2) {
                outer_color
            } else {
                super::opposite(outer_color)
            };
            t.fresh(C64::new(x0 + h * a as f64, yb - h * b as f64), c)
        })
    };
    let mut kite_min = f64::INFINITY;
    for b in (b_lo + 1..b_hi).step_by(2) {
        let tip = node(&mut t, 1, b);
        let q = t.quad([bnd[b - 1], bnd[b], bnd[b + 1], tip])?;
        let p = q.map(|v| t.s[v]);
        kite_min = kite_min.min(TangentialQuad::from_vertices(0, p).radius);
        quads.push(q);
        prov.push(Provenance::Kite);
    }
    for a in 1..cols {
        for b in b_lo + 1..b_hi {
            if (a + b) % 2 == o {
                continue;
            }
            let ring = [
                node(&mut t, a, b - 1),
                node(&mut t, a - 1, b),
                node(&mut t, a, b + 1),
                node(&mut t, a + 1, b),
            ];
            quads.push(t.quad(ring)?);
            prov.push(Provenance::District);
        }
    }
    let bottom_whites: Vec<f64> = lattice
        .iter()
        .filter(|(&(a, b), &v)| a >= 1 && b + 1 >= b_hi && t.color[v] == Color::White)
        .map(|(_, &v)| t.s[v].im)
        .collect();
    let spread = bottom_whites
        .iter()
        .fold(f64::NEG_INFINITY, |m, &y| m.max(y))
        - bottom_whites.iter().fold(f64::INFINITY, |m, &y| m.min(y));

    // Drop vertices no quad uses (input vertices below the level).
    let mut used = vec![usize::MAX; t.s.len()];
    let (mut s, mut color) = (Vec::new(), Vec::new());
    for q in quads.iter_mut() {
        for v in q.iter_mut() {
            if used[*v] == usize::MAX {
                used[*v] = s.len();
                s.push(t.s[*v]);
                color.push(t.color[*v]);
            }
            *v = used[*v];
        }
    }
    let (out, _) = SEmbedding::from_geometry(color, quads, s)?;

    let mut theta_change: f64 = 0.0;
    for (z, p) in prov.iter().enumerate() {
        if let Provenance::Original(src) = *p {
            theta_change = theta_change.max((out.recover_theta(z)? - emb.mesh.theta[src]).abs());
        }
    }
    let lip = lip_scale(&out, kappa);
    let lip_bound = 5.0 * delta;
    let proper = check_properness(&out).is_proper();
    Ok(WeldReport {
        provenance: prov,
        level: yb,
        aligned_min_radius: aligned_min,
        strip_height: h,
        nominal_shift: 10.0 * (-160.0 / delta).exp(),
        nominal_strip: 10.0 * (-1600.0 / delta).exp(),
        kite_min_radius: kite_min,
        district_bottom_spread: if bottom_whites.is_empty() {
            0.0
        } else {
            spread
        },
        interior_theta_change: theta_change,
        lip_ok: !(lip.scale > lip_bound),
        lip,
        lip_bound,
        proper,
        embedding: out,
    })
}

/// The welded embedding with its new quads highlighted and the edges of
/// the input drawn on top.
pub fn render_weld_svg(original: &SEmbedding, weld: &WeldReport) -> String {
    let mut overlay = Vec::new();
    for z in 0..original.n_quads() {
        let p = original.quad_vertices(z);
        for i in 0..4 {
            overlay.push((p[i], p[(i + 1) % 4]));
        }
    }
    let opt = SvgOptions {
        highlight: weld.new_quads(),
        overlay,
        ..Default::default()
    };
    let mut svg = render_svg(&weld.embedding, &opt);
    let note = format!(
        "<!-- level {:.17e}, strip height {:.17e} -->\n",
        weld.level, weld.strip_height
    );
    if let Some(pos) = svg.find("<svg") {
        svg.insert_str(pos, &note);
    }
    svg
}
