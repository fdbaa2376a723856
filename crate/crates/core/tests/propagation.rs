use std::f64::consts::FRAC_PI_4;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sembed::constructions::{square_lattice, zigzag_layered, LayerSpec};
use sembed::graph::random::random_planar_map;
use sembed::graph::{kc_spinor, DefectSet, Edge, WeightedPlanarGraph};
use sembed::mesh::QuadMesh;
use sembed::propagation::*;
use sembed::C64;

fn block(rng: &mut ChaCha8Rng) -> WeightedPlanarGraph {
    let mut pos = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            pos.push((j as f64, i as f64));
        }
    }
    let mut edges = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            if j < 2 {
                edges.push(Edge {
                    v0: 3 * i + j,
                    v1: 3 * i + j + 1,
                    x: rng.random_range(0.1..0.9),
                });
            }
            if i < 2 {
                edges.push(Edge {
                    v0: 3 * i + j,
                    v1: 3 * i + j + 3,
                    x: rng.random_range(0.1..0.9),
                });
            }
        }
    }
    WeightedPlanarGraph::from_coordinates(&pos, edges, None).unwrap()
}

/// Largest residual over quads away from the defects.
fn kc_residual(g: &WeightedPlanarGraph, d: &DefectSet) -> f64 {
    let (mesh, cover, x) = kc_spinor(g, d, 24).unwrap();
    cover.validate(&mesh).unwrap();
    let lam = d.lambda_vertices(g);
    (0..mesh.n_quads())
        .filter(|&z| !mesh.quads[z].iter().any(|v| lam.contains(v)))
        .map(|z| {
            propagation_residual(&mesh, &cover, &x, z)
                .into_iter()
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

fn square_spinor(n: usize) -> (QuadMesh, Cover, Vec<C64>) {
    let e = square_lattice(n, FRAC_PI_4).unwrap().embedding;
    let sp = e.spinor().unwrap();
    (e.mesh, sp.cover, sp.values)
}

#[test]
fn zero_spinor_has_zero_residual() {
    let (mesh, cover, _) = square_spinor(4);
    let r = verify_spinor(&mesh, &cover, &vec![0.0f64; mesh.n_corners()], None);
    assert_eq!(r.max_residual, 0.0);
    assert_eq!(r.residuals.len(), mesh.n_quads());
}

#[test]
fn kadanoff_ceva_observables_propagate() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = block(&mut rng);
    let d = DefectSet::with_tree_paths(&g, vec![4], vec![g.outer_face()]).unwrap();
    assert!(kc_residual(&g, &d) < 1e-12);
    for it in 0..60 {
        let g = random_planar_map(&mut rng, 6 + it % 7);
        let d = DefectSet::with_tree_paths(&g, vec![it % g.n_vertices()], vec![it % g.n_faces()])
            .unwrap();
        assert!(kc_residual(&g, &d) < 1e-12);
    }
}

#[test]
fn perturbed_corner_is_flagged() {
    let (mesh, cover, mut x) = square_spinor(5);
    let z = mesh.n_quads() / 2;
    x[mesh.quad_corners[z][0]] += 1.0;
    let th = mesh.theta[z];
    let r = propagation_residual(&mesh, &cover, &x, z)
        .into_iter()
        .fold(0.0, f64::max);
    assert!(r >= th.cos().min(th.sin()) - 1e-12);
    assert!(verify_spinor(&mesh, &cover, &x, None)
        .residuals
        .iter()
        .any(|&(q, v)| q == z && v == r));
}

#[test]
fn embedding_spinors_propagate() {
    let (mesh, cover, x) = square_spinor(8);
    assert!(verify_spinor(&mesh, &cover, &x, None).max_residual < 1e-12);
    let e = zigzag_layered(&LayerSpec::iid(7, 0.75, 3, 6))
        .unwrap()
        .embedding;
    let sp = e.spinor().unwrap();
    assert!(verify_spinor(&e.mesh, &sp.cover, &sp.values, None).max_residual < 1e-10);
}

#[test]
fn random_values_are_rejected() {
    let (mesh, cover, _) = square_spinor(6);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x: Vec<f64> = (0..mesh.n_corners())
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let r = verify_spinor(&mesh, &cover, &x, None);
    assert!(r.max_residual > 0.1);
    assert_eq!(r.worst_quad, Some(r.residuals[0].0));
    let region = [1, 3];
    assert_eq!(
        verify_spinor(&mesh, &cover, &x, Some(&region))
            .residuals
            .len(),
        2
    );
}

#[test]
fn any_two_corners_determine_the_quad() {
    let (mesh, cover, x) = square_spinor(4);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let g = random_planar_map(&mut rng, 9);
    let d = DefectSet::with_tree_paths(&g, vec![0], vec![g.outer_face()]).unwrap();
    let (kmesh, kcover, kx) = kc_spinor(&g, &d, 24).unwrap();
    let lam = d.lambda_vertices(&g);
    let kx: Vec<C64> = kx.iter().map(|&v| C64::new(v, 0.0)).collect();
    for (mesh, cover, x, skip) in [(&mesh, &cover, &x, vec![]), (&kmesh, &kcover, &kx, lam)] {
        for z in (0..mesh.n_quads()).filter(|&z| !mesh.quads[z].iter().any(|v| skip.contains(v))) {
            let cs = mesh.quad_corners[z];
            let full = [x[cs[0]], x[cs[1]], x[cs[2]], x[cs[3]]];
            for a in 0..4 {
                for b in a + 1..4 {
                    let mut known = [None; 4];
                    known[a] = Some(full[a]);
                    known[b] = Some(full[b]);
                    let got = complete_quad(mesh.theta[z], cover.signs[z], known).unwrap();
                    for k in 0..4 {
                        assert!((got[k] - full[k]).norm() < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn propagation_fills_a_square_from_its_boundary_row() {
    let (mesh, cover, x) = square_spinor(5);
    let mut known = vec![None; mesh.n_corners()];
    let mut fixed = 0;
    for z in 0..mesh.n_quads() {
        for &c in &mesh.quad_corners[z] {
            let touches = (0..mesh.n_quads())
                .filter(|&w| mesh.quad_corners[w].contains(&c))
                .count();
            if touches == 1 {
                known[c] = Some(x[c]);
                fixed += 1;
            }
        }
    }
    assert!(fixed > 0);
    let got = propagate(&mesh, &cover, known).unwrap();
    assert!(got.iter().zip(&x).all(|(a, b)| (a - b).norm() < 1e-10));
    assert!(propagate::<C64>(&mesh, &cover, vec![None; mesh.n_corners()]).is_err());
}

#[test]
fn flipping_a_reference_lift_flips_its_cover_signs() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = random_planar_map(&mut rng, 8);
    let d = DefectSet::with_tree_paths(&g, vec![0], vec![g.outer_face()]).unwrap();
    let (mesh, mut cover, mut x) = kc_spinor(&g, &d, 24).unwrap();
    let lam = d.lambda_vertices(&g);
    let away: Vec<usize> = (0..mesh.n_quads())
        .filter(|&z| !mesh.quads[z].iter().any(|v| lam.contains(v)))
        .collect();
    assert!(!away.is_empty());
    assert!(verify_spinor(&mesh, &cover, &x, Some(&away)).max_residual < 1e-12);
    for c in [0, 3, mesh.n_corners() - 1] {
        x[c] = on_sheet(&x, c, true);
        for z in 0..mesh.n_quads() {
            if let Some(k) = mesh.quad_corners[z].iter().position(|&d| d == c) {
                cover.signs[z][k] *= -1;
                cover.signs[z][(k + 3) % 4] *= -1;
            }
        }
    }
    cover.validate(&mesh).unwrap();
    assert!(verify_spinor(&mesh, &cover, &x, Some(&away)).max_residual < 1e-12);
}

#[test]
fn entries_roundtrip() {
    let (_, _, x) = square_spinor(3);
    let entries = spinor_to_entries(&x);
    assert_eq!(entries.len(), 2 * x.len());
    let text = serde_json::to_string(&entries).unwrap();
    let back: Vec<SpinorEntry> = serde_json::from_str(&text).unwrap();
    assert_eq!(spinor_from_entries(&back, x.len()).unwrap(), x);
    let half: Vec<SpinorEntry> = entries.iter().filter(|e| e.sheet == 1).cloned().collect();
    assert_eq!(spinor_from_entries(&half, x.len()).unwrap(), x);
    let mut bad = entries.clone();
    bad[1].re += 1.0;
    assert!(spinor_from_entries(&bad, x.len()).is_err());
    assert!(spinor_from_entries(&entries[2..], x.len()).is_err());
    let mut nan = entries;
    nan[0].im = f64::NAN;
    assert!(spinor_from_entries(&nan, x.len()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_is_a_seminorm(seed in 0u64..10_000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let (mesh, cover, _) = square_spinor(3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..mesh.n_corners()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..mesh.n_corners()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let comb: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        for z in 0..mesh.n_quads() {
            let rx = propagation_residual(&mesh, &cover, &x, z);
            let ry = propagation_residual(&mesh, &cover, &y, z);
            let rc = propagation_residual(&mesh, &cover, &comb, z);
            for k in 0..4 {
                prop_assert!(rc[k] <= a.abs() * rx[k] + b.abs() * ry[k] + 1e-12);
            }
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            prop_assert_eq!(propagation_residual(&mesh, &cover, &neg, z), rx);
        }
    }
}
