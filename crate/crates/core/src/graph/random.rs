//! Random planar maps for property tests and acceptance runs.

use rand::Rng;

use super::{Edge, WeightedPlanarGraph};

/// A random 2-edge-connected planar map with `n_edges` edges, grown from a
/// cycle by subdividing edges and adding chords inside faces. Weights are
/// uniform in (0.05, 0.95).
pub fn random_planar_map<R: Rng>(rng: &mut R, n_edges: usize) -> WeightedPlanarGraph {
    assert!(n_edges >= 3, "need at least a triangle");
    let start = rng.random_range(3..=n_edges.min(5));
    let mut ends: Vec<(usize, usize)> = (0..start).map(|i| (i, (i + 1) % start)).collect();
    let mut rot: Vec<Vec<usize>> = (0..start)
        .map(|i| vec![(i + start - 1) % start, i])
        .collect();
    while ends.len() < n_edges {
        let g = build(&ends, &rot, rng);
        if rng.random_bool(0.35) || !add_chord(&g, &mut ends, &mut rot, rng) {
            let e = rng.random_range(0..ends.len());
            subdivide(&mut ends, &mut rot, e);
        }
    }
    build(&ends, &rot, rng)
}

fn build<R: Rng>(ends: &[(usize, usize)], rot: &[Vec<usize>], rng: &mut R) -> WeightedPlanarGraph {
    let edges = ends
        .iter()
        .map(|&(v0, v1)| Edge {
            v0,
            v1,
            x: rng.random_range(0.05..0.95),
        })
        .collect();
    WeightedPlanarGraph::from_rotations(rot.len(), edges, rot.to_vec(), None)
        .expect("planar by construction")
}

fn subdivide(ends: &mut Vec<(usize, usize)>, rot: &mut Vec<Vec<usize>>, e: usize) {
    let (u, w) = ends[e];
    let m = rot.len();
    let e2 = ends.len();
    ends[e] = (u, m);
    ends.push((m, w));
    for slot in rot[w].iter_mut() {
        if *slot == e {
            *slot = e2;
        }
    }
    rot.push(vec![e, e2]);
}

/// Insert an edge between two non-adjacent corners of a random face.
fn add_chord<R: Rng>(
    g: &WeightedPlanarGraph,
    ends: &mut Vec<(usize, usize)>,
    rot: &mut [Vec<usize>],
    rng: &mut R,
) -> bool {
    let f = rng.random_range(0..g.n_faces());
    let boundary = g.face_boundary(f);
    let k = boundary.len();
    if k < 4 {
        return false;
    }
    let i = rng.random_range(0..k);
    let j = (i + rng.random_range(2..k - 1)) % k;
    let (da, db) = (boundary[i], boundary[j]);
    let (a, b) = (g.tail(da), g.tail(db));
    if a == b {
        return false;
    }
    let e = ends.len();
    ends.push((a, b));
    // Corner da sits counterclockwise after da at a, so the chord goes right after it.
    for (v, d) in [(a, da), (b, db)] {
        let pos = rot[v]
            .iter()
            .position(|&x| x == d / 2)
            .expect("dart at vertex");
        rot[v].insert(pos + 1, e);
    }
    true
}
