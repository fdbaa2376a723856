use std::collections::HashSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sembed::graph::json::{graph_from_json, graph_to_json};
use sembed::graph::random::random_planar_map;
use sembed::graph::*;
use sembed::mesh::QuadMesh;
use sembed::Error;

fn cycle(n: usize, x: f64) -> WeightedPlanarGraph {
    let pos: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            (a.cos(), a.sin())
        })
        .collect();
    let edges = (0..n)
        .map(|i| Edge {
            v0: i,
            v1: (i + 1) % n,
            x,
        })
        .collect();
    WeightedPlanarGraph::from_coordinates(&pos, edges, None).unwrap()
}

/// (k+1)² grid vertices with unit spacing and random weights.
fn grid(k: usize, rng: &mut ChaCha8Rng) -> WeightedPlanarGraph {
    let id = |i: usize, j: usize| i * (k + 1) + j;
    let mut pos = Vec::new();
    for i in 0..=k {
        for j in 0..=k {
            pos.push((j as f64, i as f64));
        }
    }
    let mut edges = Vec::new();
    for i in 0..=k {
        for j in 0..=k {
            if j < k {
                edges.push(Edge {
                    v0: id(i, j),
                    v1: id(i, j + 1),
                    x: rng.random_range(0.1..0.9),
                });
            }
            if i < k {
                edges.push(Edge {
                    v0: id(i, j),
                    v1: id(i + 1, j),
                    x: rng.random_range(0.1..0.9),
                });
            }
        }
    }
    WeightedPlanarGraph::from_coordinates(&pos, edges, None).unwrap()
}

/// Faces traced directly from the rotation lists: the next dart after
/// arriving at v along e is the one clockwise-before e at v.
fn trace_faces(g: &WeightedPlanarGraph) -> usize {
    let mut seen = HashSet::new();
    let mut faces = 0;
    for e in 0..g.n_edges() {
        for rev in [false, true] {
            let (mut u, mut v) = (g.edge(e).v0, g.edge(e).v1);
            if rev {
                std::mem::swap(&mut u, &mut v);
            }
            if seen.contains(&(e, u)) {
                continue;
            }
            faces += 1;
            let (mut ce, mut cu, mut cv) = (e, u, v);
            while seen.insert((ce, cu)) {
                let rot = g.rotation_edges(cv);
                let i = rot.iter().position(|&f| f == ce).unwrap();
                let ne = rot[(i + rot.len() - 1) % rot.len()];
                let ed = g.edge(ne);
                let nv = if ed.v0 == cv { ed.v1 } else { ed.v0 };
                (ce, cu, cv) = (ne, cv, nv);
            }
        }
    }
    faces
}

fn subsets(g: &WeightedPlanarGraph) -> impl Iterator<Item = EdgeSet> + '_ {
    (0u64..1 << g.n_edges())
        .map(|m| EdgeSet::from_edges((0..g.n_edges()).filter(move |&e| m >> e & 1 == 1)))
}

#[test]
fn four_cycle_has_four_quads() {
    let g = cycle(4, 0.5);
    assert_eq!((g.n_vertices(), g.n_edges(), g.n_faces()), (4, 4, 2));
    let mesh = QuadMesh::from_graph(&g);
    assert_eq!(mesh.n_quads(), 4);
    assert_eq!(mesh.n_vertices(), 6);
    assert!((g.theta(0) - 2.0 * 0.5f64.atan()).abs() < 1e-15);
}

#[test]
fn square_patch_yields_one_quad_per_edge() {
    let g = grid(3, &mut ChaCha8Rng::seed_from_u64(1));
    assert_eq!((g.n_vertices(), g.n_edges(), g.n_faces()), (16, 24, 10));
    let mesh = QuadMesh::from_graph(&g);
    assert_eq!(mesh.n_quads(), g.n_edges());
    assert_eq!(mesh.n_corners(), 2 * g.n_edges());
}

#[test]
fn random_triangulation_faces_are_traced() {
    // Hexagon fan (six triangles and the outer face) plus an outside vertex
    // joined to two neighbours, which adds an eighth face.
    let mut pos: Vec<(f64, f64)> = (0..6)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / 6.0;
            (a.cos(), a.sin())
        })
        .collect();
    pos.push((0.0, 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut edges: Vec<Edge> = (0..6)
        .map(|i| Edge {
            v0: i,
            v1: (i + 1) % 6,
            x: rng.random_range(0.1..0.9),
        })
        .collect();
    edges.extend((0..6).map(|i| Edge {
        v0: i,
        v1: 6,
        x: rng.random_range(0.1..0.9),
    }));
    pos.push((3.0, 3.0));
    edges.push(Edge {
        v0: 7,
        v1: 0,
        x: 0.3,
    });
    edges.push(Edge {
        v0: 7,
        v1: 1,
        x: 0.4,
    });
    let g = WeightedPlanarGraph::from_coordinates(&pos, edges, None).unwrap();
    assert_eq!(g.n_faces(), 8);
    assert_eq!(trace_faces(&g), 8);
    assert_eq!(g.n_vertices() + g.n_faces(), g.n_edges() + 2);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for n in 3..14 {
        let g = random_planar_map(&mut rng, n);
        assert_eq!(trace_faces(&g), g.n_faces());
        assert_eq!(g.n_vertices() + g.n_faces(), g.n_edges() + 2);
    }
}

#[test]
fn invalid_descriptions_are_rejected() {
    let e = |v0, v1| Edge { v0, v1, x: 0.5 };
    assert!(matches!(
        WeightedPlanarGraph::from_rotations(2, vec![e(0, 0)], vec![vec![0], vec![]], None),
        Err(Error::Loop(0))
    ));
    let path = WeightedPlanarGraph::from_rotations(
        3,
        vec![e(0, 1), e(1, 2)],
        vec![vec![0], vec![0, 1], vec![1]],
        None,
    );
    assert!(matches!(path, Err(Error::DegreeOne(0))));
    // K4 drawn with crossing diagonals.
    let pos = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
    let k4 = vec![e(0, 1), e(1, 2), e(2, 3), e(3, 0), e(0, 2), e(1, 3)];
    assert!(matches!(
        WeightedPlanarGraph::from_coordinates(&pos, k4, None),
        Err(Error::NonPlanar(_))
    ));
    // A toroidal rotation system for K4.
    let k4 = vec![e(0, 1), e(1, 2), e(2, 3), e(3, 0), e(0, 2), e(1, 3)];
    let rot = vec![vec![0, 4, 3], vec![0, 1, 5], vec![1, 4, 2], vec![2, 5, 3]];
    let r = WeightedPlanarGraph::from_rotations(4, k4, rot, None);
    assert!(matches!(r, Err(Error::NonPlanar(_))), "{r:?}");
    assert!(WeightedPlanarGraph::from_rotations(
        2,
        vec![
            Edge {
                v0: 0,
                v1: 1,
                x: 1.5
            },
            e(0, 1)
        ],
        vec![vec![0, 1], vec![1, 0]],
        None
    )
    .is_err());
}

#[test]
fn even_subgraph_counts() {
    let g = cycle(3, 0.4);
    let all: Vec<EdgeSet> = enumerate_even_subgraphs(&g, &[], 24).unwrap().collect();
    assert_eq!(all.len(), 2);
    assert!(all.contains(&EdgeSet::empty()) && all.contains(&EdgeSet::from_edges(0..3)));

    let g = grid(2, &mut ChaCha8Rng::seed_from_u64(2));
    assert_eq!((g.n_vertices(), g.n_edges()), (9, 12));
    let sets: HashSet<EdgeSet> = enumerate_even_subgraphs(&g, &[], 24).unwrap().collect();
    assert_eq!(sets.len(), 16);
    let brute: HashSet<EdgeSet> = subsets(&g)
        .filter(|s| g.odd_vertices(*s).is_empty())
        .collect();
    assert_eq!(sets, brute);
}

#[test]
fn defects_select_odd_subgraphs() {
    let g = cycle(3, 0.4);
    let (u, v) = (g.edge(0).v0, g.edge(0).v1);
    let got: HashSet<EdgeSet> = enumerate_even_subgraphs(&g, &[u, v], 24).unwrap().collect();
    let mut want_odd = vec![u, v];
    want_odd.sort();
    let brute: HashSet<EdgeSet> = subsets(&g)
        .filter(|s| g.odd_vertices(*s) == want_odd)
        .collect();
    assert_eq!(brute.len(), 2);
    assert_eq!(got, brute);
    assert!(matches!(
        enumerate_even_subgraphs(&g, &[u], 24),
        Err(Error::OddDefects)
    ));
    let big = grid(3, &mut ChaCha8Rng::seed_from_u64(3));
    assert!(matches!(
        enumerate_even_subgraphs(&big, &[], 8),
        Err(Error::CapExceeded { rank: 9, cap: 8 })
    ));
}

#[test]
fn trivial_correlators() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = random_planar_map(&mut rng, 9);
    let one = kadanoff_ceva_correlator(&g, &DefectSet::empty(), None, 24).unwrap();
    assert!((one.value - 1.0).abs() < 1e-15);
    let d = DefectSet::with_tree_paths(&g, vec![], vec![1, 1]).unwrap();
    assert!((kadanoff_ceva_correlator(&g, &d, None, 24).unwrap().value - 1.0).abs() < 1e-15);
    let odd = DefectSet::with_tree_paths(&g, vec![0], vec![0]).unwrap();
    let v = kadanoff_ceva_correlator(&g, &odd, None, 24).unwrap();
    assert_eq!(v.value, 0.0);
    assert!(v.note.is_some());
}

#[test]
fn four_cycle_spin_correlation_matches_spin_sum() {
    for x in [0.1, 0.37, 0.5, 0.9] {
        let g = cycle(4, x);
        let d = DefectSet::with_tree_paths(&g, vec![], vec![0, 1]).unwrap();
        let kc = kadanoff_ceva_correlator(&g, &d, None, 24).unwrap().value;
        // Two face spins, four edges between them: Σ σσ' x^{4[σ≠σ']} / Σ x^{4[σ≠σ']}.
        let mut num = 0.0;
        let mut den = 0.0;
        for s in [-1.0f64, 1.0] {
            for t in [-1.0f64, 1.0] {
                let w = if s == t { 1.0 } else { x.powi(4) };
                num += s * t * w;
                den += w;
            }
        }
        assert!((kc - num / den).abs() < 1e-14);
    }
}

#[test]
fn lifts_of_a_corner_are_opposite() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 5..12 {
        let g = random_planar_map(&mut rng, n);
        let d = DefectSet::with_tree_paths(&g, vec![0], vec![g.outer_face()]).unwrap();
        for c in 0..g.n_darts() {
            let a = kadanoff_ceva_correlator(
                &g,
                &d,
                Some(CornerLift {
                    corner: c,
                    sheet: false,
                }),
                24,
            )
            .unwrap()
            .value;
            let b = kadanoff_ceva_correlator(
                &g,
                &d,
                Some(CornerLift {
                    corner: c,
                    sheet: true,
                }),
                24,
            )
            .unwrap()
            .value;
            assert_eq!(a, -b);
        }
    }
}

#[test]
fn kramers_wannier_duality() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for n in 4..13 {
        let g = random_planar_map(&mut rng, n);
        let (dual, _) = g.dual().unwrap();
        for f in 0..g.n_faces() {
            for h in f + 1..g.n_faces() {
                let s = DefectSet::with_tree_paths(&g, vec![], vec![f, h]).unwrap();
                let m = DefectSet::with_tree_paths(&dual, vec![f, h], vec![]).unwrap();
                let a = kadanoff_ceva_correlator(&g, &s, None, 24).unwrap().value;
                let b = kadanoff_ceva_correlator(&dual, &m, None, 24).unwrap().value;
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }
}

#[test]
fn graph_json_roundtrip() {
    let g = random_planar_map(&mut ChaCha8Rng::seed_from_u64(9), 10);
    let text = graph_to_json(&g);
    let h = graph_from_json(&text).unwrap();
    assert_eq!(graph_to_json(&h), text);
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["edges"][0]["f_left"] = serde_json::json!(v["edges"][0]["f_right"].clone());
    assert!(graph_from_json(&v.to_string()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // Moving Σ across a vertex leaves the value unchanged; moving Γ across
    // a face flips the sign exactly when that face carries a spin.
    #[test]
    fn path_choice_is_immaterial_up_to_spin_faces(seed in 0u64..10_000, n in 5usize..16) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = random_planar_map(&mut rng, n);
        let nv = g.n_vertices();
        let dis = vec![rng.random_range(0..nv), rng.random_range(0..nv)];
        let spins = vec![rng.random_range(0..g.n_faces()), rng.random_range(0..g.n_faces())];
        let base = DefectSet::with_tree_paths(&g, dis.clone(), spins.clone()).unwrap();
        let v0 = kadanoff_ceva_correlator(&g, &base, None, 24).unwrap().value;
        let star = EdgeSet::from_edges(g.rotation_edges(rng.random_range(0..nv)));
        let moved = DefectSet::new(&g, dis.clone(), spins.clone(), base.disorder_path, base.spin_path.xor(star)).unwrap();
        prop_assert!((kadanoff_ceva_correlator(&g, &moved, None, 24).unwrap().value - v0).abs() < 1e-12);
        let f = rng.random_range(0..g.n_faces());
        let moved = DefectSet::new(&g, dis, spins, base.disorder_path.xor(g.face_cycle(f)), base.spin_path).unwrap();
        let v1 = kadanoff_ceva_correlator(&g, &moved, None, 24).unwrap().value;
        let flip = g.odd_faces(base.spin_path).contains(&f);
        let want = if flip { -v0 } else { v0 };
        prop_assert!((v1 - want).abs() < 1e-12);
    }
}
