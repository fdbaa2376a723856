//! Global diagnostics: properness, the Lip(κ, δ) scale and Exp-Fat(δ, ρ).

use std::collections::HashMap;

use serde::Serialize;

use super::SEmbedding;
use crate::geom::{self, cross};
use crate::{par, C64};

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ProperReport {
    /// Pairs of quads whose interiors overlap.
    pub overlapping: Vec<(usize, usize)>,
    pub degenerate: Vec<usize>,
    /// Quads that are clockwise or self-intersecting.
    pub inverted: Vec<usize>,
}

impl ProperReport {
    pub fn is_proper(&self) -> bool {
        self.overlapping.is_empty() && self.degenerate.is_empty() && self.inverted.is_empty()
    }
}

/// Overlap area below this fraction of the smaller quad counts as touching.
const OVERLAP_REL: f64 = 1e-9;

fn bbox(p: &[C64]) -> (C64, C64) {
    let mut lo = p[0];
    let mut hi = p[0];
    for q in &p[1..] {
        lo = C64::new(lo.re.min(q.re), lo.im.min(q.im));
        hi = C64::new(hi.re.max(q.re), hi.im.max(q.im));
    }
    (lo, hi)
}

/// Candidate quad pairs whose bounding boxes share a cell of a uniform grid.
fn candidate_pairs(quads: &[[C64; 4]]) -> Vec<(usize, usize)> {
    let boxes: Vec<(C64, C64)> = quads.iter().map(|q| bbox(q)).collect();
    let mut sizes: Vec<f64> = boxes.iter().map(|(lo, hi)| (hi - lo).norm()).collect();
    sizes.sort_by(f64::total_cmp);
    let cell = sizes
        .get(sizes.len() / 2)
        .copied()
        .unwrap_or(1.0)
        .max(f64::MIN_POSITIVE);
    let key = |x: f64| (x / cell).floor() as i64;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, (lo, hi)) in boxes.iter().enumerate() {
        let span = (key(hi.re) - key(lo.re) + 1) * (key(hi.im) - key(lo.im) + 1);
        if span > 4096 {
            // Huge quads go in a shared overflow bucket checked against everything.
            grid.entry((i64::MIN, i64::MIN)).or_default().push(i);
            continue;
        }
        for gx in key(lo.re)..=key(hi.re) {
            for gy in key(lo.im)..=key(hi.im) {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let overflow = grid.remove(&(i64::MIN, i64::MIN)).unwrap_or_default();
    let mut pairs = Vec::new();
    for bucket in grid.values() {
        for (a, &i) in bucket.iter().enumerate() {
            for &j in &bucket[a + 1..] {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    for &i in &overflow {
        for j in 0..quads.len() {
            if j != i {
                pairs.push((i.min(j), i.max(j)));
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs.retain(|&(i, j)| {
        let (a, b) = (boxes[i], boxes[j]);
        a.0.re <= b.1.re && b.0.re <= a.1.re && a.0.im <= b.1.im && b.0.im <= a.1.im
    });
    pairs
}

/// Exact interior-overlap test over quad pairs pruned by a uniform grid.
pub fn check_properness(emb: &SEmbedding) -> ProperReport {
    let quads: Vec<[C64; 4]> = (0..emb.n_quads()).map(|z| emb.quad_vertices(z)).collect();
    let inverted = (0..quads.len())
        .filter(|&z| !(geom::polygon_area(&quads[z]) > 0.0) || !geom::is_simple(&quads[z]))
        .collect();
    let pairs = candidate_pairs(&quads);
    let hits = par::map_slice(&pairs, |&(i, j)| {
        let a = geom::polygon_area(&quads[i])
            .abs()
            .min(geom::polygon_area(&quads[j]).abs());
        geom::quad_overlap_area(&quads[i], &quads[j]) > OVERLAP_REL * a
    });
    let overlapping = pairs
        .into_iter()
        .zip(hits)
        .filter(|(_, h)| *h)
        .map(|(p, _)| p)
        .collect();
    ProperReport {
        overlapping,
        degenerate: emb.degenerate_quads(),
        inverted,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipReport {
    pub kappa: f64,
    /// Smallest δ̃ with |Q(v′) − Q(v)| ≤ κ|S(v′) − S(v)| for all pairs at distance
    /// ≥ δ̃; infinite when the pair realising the diameter already violates it.
    pub scale: f64,
    /// The violating pair at the largest distance.
    pub pair: Option<(usize, usize)>,
    pub diameter: f64,
}

impl LipReport {
    pub fn fails_everywhere(&self) -> bool {
        self.scale.is_infinite()
    }

    pub fn describe(&self) -> String {
        match (self.pair, self.fails_everywhere()) {
            (None, _) => format!("Lip({}, δ) holds at every scale", self.kappa),
            (Some((u, v)), true) => format!(
                "Lip({}) fails at every scale up to diameter {} (pair {u}, {v})",
                self.kappa, self.diameter
            ),
            (Some((u, v)), false) => format!("Lip scale {} set by pair ({u}, {v})", self.scale),
        }
    }
}

#[derive(Clone, Copy)]
struct PairScan {
    viol_dist: f64,
    viol_pair: Option<(usize, usize)>,
    diam: f64,
    diam_violates: bool,
}

impl PairScan {
    const EMPTY: PairScan = PairScan {
        viol_dist: 0.0,
        viol_pair: None,
        diam: 0.0,
        diam_violates: false,
    };

    fn merge(self, o: PairScan) -> PairScan {
        let (viol_dist, viol_pair) = if o.viol_dist > self.viol_dist
            || (self.viol_pair.is_none() && o.viol_pair.is_some())
        {
            (o.viol_dist, o.viol_pair)
        } else {
            (self.viol_dist, self.viol_pair)
        };
        // Pairs tied for the diameter (up to rounding) all count.
        let tie = 1e-12 * self.diam.max(o.diam);
        let (diam, diam_violates) = if o.diam > self.diam + tie {
            (o.diam, o.diam_violates)
        } else if o.diam >= self.diam - tie {
            (self.diam.max(o.diam), self.diam_violates || o.diam_violates)
        } else {
            (self.diam, self.diam_violates)
        };
        PairScan {
            viol_dist,
            viol_pair,
            diam,
            diam_violates,
        }
    }
}

fn scan_row(s: &[C64], q: &[f64], used: &[usize], kappa: f64, a: usize) -> PairScan {
    let mut acc = PairScan::EMPTY;
    let i = used[a];
    for &j in &used[a + 1..] {
        let d = (s[i] - s[j]).norm();
        let violates = (q[i] - q[j]).abs() > kappa * d;
        let here = PairScan {
            viol_dist: if violates { d } else { 0.0 },
            viol_pair: violates.then_some((i, j)),
            diam: d,
            diam_violates: violates,
        };
        acc = acc.merge(here);
    }
    acc
}

fn finish(kappa: f64, scan: PairScan) -> LipReport {
    let scale = if scan.viol_pair.is_some() && scan.diam_violates {
        f64::INFINITY
    } else {
        scan.viol_dist
    };
    LipReport {
        kappa,
        scale,
        pair: scan.viol_pair,
        diameter: scan.diam,
    }
}

fn used_vertices(emb: &SEmbedding) -> Vec<usize> {
    let mut used = vec![false; emb.n_vertices()];
    for q in &emb.mesh.quads {
        for &v in q {
            used[v] = true;
        }
    }
    (0..emb.n_vertices()).filter(|&v| used[v]).collect()
}

/// Exact scan over all vertex pairs of Λ(G), parallel over rows.
pub fn lip_scale(emb: &SEmbedding, kappa: f64) -> LipReport {
    let used = used_vertices(emb);
    let rows = par::map_range(used.len(), |a| scan_row(&emb.s, &emb.q, &used, kappa, a));
    finish(
        kappa,
        rows.into_iter().fold(PairScan::EMPTY, PairScan::merge),
    )
}

/// Sequential reference for [`lip_scale`].
pub fn lip_scale_sequential(emb: &SEmbedding, kappa: f64) -> LipReport {
    let used = used_vertices(emb);
    let rows = par::seq::map_range(used.len(), |a| scan_row(&emb.s, &emb.q, &used, kappa, a));
    finish(
        kappa,
        rows.into_iter().fold(PairScan::EMPTY, PairScan::merge),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpFatReport {
    /// Quads with r_z ≥ δ exp(−ρ/δ) are fat.
    pub threshold: f64,
    pub pass: bool,
    pub n_fat: usize,
    /// Vertex-connected components of thin quads.
    pub thin_components: Vec<Vec<usize>>,
    pub component_diameters: Vec<f64>,
    pub max_thin_diameter: f64,
}

/// Diameter of a point set via its convex hull.
pub fn point_set_diameter(points: &[C64]) -> f64 {
    let hull = convex_hull(points);
    geom::diameter(&hull)
}

fn convex_hull(points: &[C64]) -> Vec<C64> {
    let mut p = points.to_vec();
    p.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<C64> = Vec::new();
    for &q in &p {
        while lower.len() >= 2
            && cross(
                lower[lower.len() - 1] - lower[lower.len() - 2],
                q - lower[lower.len() - 2],
            ) <= 0.0
        {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<C64> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2
            && cross(
                upper[upper.len() - 1] - upper[upper.len() - 2],
                q - upper[upper.len() - 2],
            ) <= 0.0
        {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Remove fat quads and measure the vertex-connected components that remain.
pub fn exp_fat_check(emb: &SEmbedding, delta: f64, rho: f64) -> ExpFatReport {
    let threshold = delta * (-rho / delta).exp();
    let thin: Vec<usize> = (0..emb.n_quads())
        .filter(|&z| !(emb.radius[z] >= threshold))
        .collect();
    // Union-find over thin quads joined through shared vertices.
    let mut parent: Vec<usize> = (0..thin.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    let mut owner: HashMap<usize, usize> = HashMap::new();
    for (k, &z) in thin.iter().enumerate() {
        for &v in &emb.mesh.quads[z] {
            if let Some(&o) = owner.get(&v) {
                let (a, b) = (find(&mut parent, o), find(&mut parent, k));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            } else {
                owner.insert(v, k);
            }
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (k, &z) in thin.iter().enumerate() {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(z);
    }
    let mut thin_components: Vec<Vec<usize>> = groups.into_values().collect();
    thin_components.sort();
    let component_diameters: Vec<f64> = thin_components
        .iter()
        .map(|comp| {
            let pts: Vec<C64> = comp.iter().flat_map(|&z| emb.quad_vertices(z)).collect();
            point_set_diameter(&pts)
        })
        .collect();
    let max_thin_diameter = component_diameters.iter().copied().fold(0.0, f64::max);
    ExpFatReport {
        threshold,
        pass: max_thin_diameter <= rho,
        n_fat: emb.n_quads() - thin.len(),
        thin_components,
        component_diameters,
        max_thin_diameter,
    }
}
