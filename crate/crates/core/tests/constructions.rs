use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

use proptest::prelude::*;
use sembed::constructions::*;
use sembed::embedding::{exp_fat_check, lip_scale};
use sembed::mesh::Color;

fn assert_valid(c: &Construction) {
    let r = c.embedding.validate();
    assert!(r.passes(), "{} fails validation: {r:?}", c.meta.kind);
}

#[test]
fn critical_square_is_unit_grid() {
    let c = square_lattice(4, FRAC_PI_4).unwrap();
    let e = &c.embedding;
    assert_eq!(e.n_quads(), 16);
    for z in 0..e.n_quads() {
        let p = e.quad_vertices(z);
        for i in 0..4 {
            assert!(((p[(i + 1) % 4] - p[i]).norm() - 1.0).abs() < 1e-12);
        }
        assert!((e.recover_theta(z).unwrap() - FRAC_PI_4).abs() < 1e-12);
    }
    for &v in e.mesh.quads.iter().flatten() {
        let expect = if e.mesh.color[v] == Color::Black {
            1.0
        } else {
            0.0
        };
        assert!((e.q[v] - expect).abs() < 1e-12);
    }
    assert_valid(&c);
    let lip = lip_scale(e, 0.5);
    assert!(
        lip.scale.is_finite() && lip.scale <= 2.0 * 2f64.sqrt(),
        "{lip:?}"
    );
    let g = c.graph.as_ref().unwrap();
    assert!(g
        .graph
        .edges()
        .iter()
        .all(|ed| (ed.x - (FRAC_PI_4 / 2.0).tan()).abs() < 1e-12));
}

#[test]
fn odd_square_prunes_pendant_corners() {
    let c = square_lattice(5, FRAC_PI_4).unwrap();
    assert_eq!(c.embedding.n_quads(), 25);
    assert_eq!(c.graph.unwrap().edge.len(), 23);
}

#[test]
fn homogeneous_zigzag_increments() {
    let n = 6;
    let c = zigzag_layered(&LayerSpec::deterministic(vec![FRAC_PI_4; n], 4)).unwrap();
    let e = &c.embedding;
    let col = |k: usize, j: usize| k * 5 + j;
    // Whites of C_0 and C_n sit on rows 0 and 2.
    assert!((e.s[col(n, 0)].re - e.s[col(0, 0)].re - 2.0 * n as f64).abs() < 1e-12);
    assert!((e.q[col(n, 0)] - e.q[col(0, 0)]).abs() < 1e-12);
    for inc in column_increments(&[FRAC_PI_4; 6], 1.0) {
        assert!(inc.dq_black.abs() < 1e-12 && inc.dq_white.abs() < 1e-12);
        assert!((inc.ds_black - 2.0).abs() < 1e-12 && (inc.ds_white - 2.0).abs() < 1e-12);
    }
    assert_valid(&c);
}

#[test]
fn alternating_zigzag_matches_hand_sums() {
    // tan² θ: 3, 1/3; partial products of tan² alternate between 3 and 1.
    let inc = column_increments(&[FRAC_PI_3, FRAC_PI_6], 1.0);
    let frozen = [
        [4.0 / 3.0, 4.0, -2.0 / 3.0, -2.0],
        [4.0, 4.0 / 3.0, -2.0, -2.0 / 3.0],
    ];
    for (got, want) in inc.iter().zip(frozen) {
        let got = [got.ds_black, got.ds_white, got.dq_black, got.dq_white];
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }
    let c = zigzag_layered(&LayerSpec::deterministic(vec![FRAC_PI_3, FRAC_PI_6], 3)).unwrap();
    let e = &c.embedding;
    let col = |k: usize, j: usize| k * 4 + j;
    // Vertex (k, j) is black iff k + j is odd.
    assert!((e.s[col(2, 1)].re - e.s[col(0, 1)].re - (4.0 / 3.0 + 4.0)).abs() < 1e-12);
    assert!((e.q[col(2, 0)] - e.q[col(0, 0)] - (-2.0 - 2.0 / 3.0)).abs() < 1e-12);
    assert!(c.meta.cross_check.unwrap() < 1e-12);
    assert_valid(&c);
}

#[test]
fn iid_products_stay_bounded() {
    let spec = LayerSpec::iid(64, 0.75, 7, 4);
    let (thetas, z) = spec.realize().unwrap();
    assert_eq!(z.as_ref().unwrap().len(), 64);
    let mut prod = 1.0;
    for t in &thetas {
        prod *= t.tan().powi(2);
        assert!((0.2..=5.0).contains(&prod), "product {prod}");
    }
    let c = zigzag_layered(&spec).unwrap();
    assert_eq!(c.meta.realized_z, z);
    assert_valid(&c);
    assert_eq!(spec.realize().unwrap().1, z);
}

#[test]
fn zigzag_rejects_bad_angles() {
    assert!(zigzag_layered(&LayerSpec::deterministic(vec![0.3, FRAC_PI_2], 2)).is_err());
    assert!(square_lattice(1, FRAC_PI_4).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dual_angles_negate_q_increments(thetas in prop::collection::vec(0.4f64..1.2, 1..12)) {
        let dual: Vec<f64> = thetas.iter().map(|t| FRAC_PI_2 - t).collect();
        let a = column_increments(&thetas, 1.0);
        let b = column_increments(&dual, 1.0);
        for (x, y) in a.iter().zip(&b) {
            let tol = 1e-10 * x.ds_black.max(x.ds_white);
            prop_assert!((x.dq_black + y.dq_white).abs() < tol);
            prop_assert!((x.dq_white + y.dq_black).abs() < tol);
            prop_assert!((x.ds_black - y.ds_white).abs() < tol);
        }
    }

    #[test]
    fn zigzag_routes_agree(thetas in prop::collection::vec(0.6f64..0.97, 1..16), rows in 1usize..5) {
        let c = zigzag_layered(&LayerSpec::deterministic(thetas, rows)).unwrap();
        prop_assert!(c.meta.cross_check.unwrap() < 1e-10);
        prop_assert!(c.embedding.validate().passes());
    }
}

#[test]
fn square_rhombi_reduce_to_critical_square() {
    let c = isoradial_from_rhombi(&square_rhombi(4, 1.0), 1.0).unwrap();
    let sq = square_lattice(4, FRAC_PI_4).unwrap();
    assert_eq!(c.embedding.n_quads(), sq.embedding.n_quads());
    for z in 0..c.embedding.n_quads() {
        assert!((c.embedding.mesh.theta[z] - FRAC_PI_4).abs() < 1e-12);
    }
    assert_valid(&c);
}

#[test]
fn triangular_rhombi_have_half_angle_weights() {
    let c = isoradial_from_rhombi(&triangular_rhombi(4, 1.0), 1.0).unwrap();
    for z in 0..c.embedding.n_quads() {
        assert!((c.embedding.recover_theta(z).unwrap() - FRAC_PI_6).abs() < 1e-12);
    }
    assert!(c.meta.cross_check.unwrap() < 1e-10);
    assert_valid(&c);
}

#[test]
fn penrose_patch_is_flat_and_fat() {
    let c = isoradial_from_rhombi(&penrose_rhombi(3.0, 1.0), 1.0).unwrap();
    assert!(c.embedding.n_quads() > 50);
    assert_valid(&c);
    let lip = lip_scale(&c.embedding, 0.5);
    assert!(lip.scale.is_finite() && lip.scale <= 2.0, "{lip:?}");
    // Thin rhombi have r = sin(π/5)/2, above exp(−2): every quad is fat.
    let fat = exp_fat_check(&c.embedding, 1.0, 2.0);
    assert!(fat.pass && fat.n_fat == c.embedding.n_quads());
}

#[test]
fn single_triangle_gives_three_kites() {
    let c = circle_pattern_from_triangulation(&single_triangle()).unwrap();
    let e = &c.embedding;
    assert_eq!(e.n_quads(), 3);
    for z in 0..3 {
        e.quad_geometry(z).unwrap();
    }
    // All three kites share the incircle center.
    let o: Vec<usize> = e.mesh.quads.iter().map(|q| q[2]).collect();
    assert!(o.iter().all(|&v| v == o[0]));
    assert_valid(&c);
}

#[test]
fn hexagonal_packing_has_equal_radii() {
    let tri = hexagonal_triangulation(3);
    let p = pack_circles(&tri).unwrap();
    assert!(p.residual < 1e-8);
    let r0 = p.radii[0];
    assert!(p.radii.iter().all(|r| (r - r0).abs() < 1e-9 * r0));
    let c = circle_pattern_from_triangulation(&tri).unwrap();
    assert_valid(&c);
    let qmax = c.embedding.q.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    assert!(qmax <= r0 * (1.0 + 1e-9));
}

#[test]
fn random_delaunay_circle_pattern() {
    let tri = random_delaunay(200, 3);
    assert!(tri.triangles.len() <= 200 && tri.triangles.len() > 150);
    let c = circle_pattern_from_triangulation(&tri).unwrap();
    assert_valid(&c);
    assert!(c.meta.max_circle_radius.unwrap() > 0.0);
}

#[test]
fn spec_json_builds() {
    let spec: ConstructionSpec =
        serde_json::from_str(r#"{"kind": "square_lattice", "n": 3}"#).unwrap();
    let c = build(&spec).unwrap();
    assert_eq!(c.embedding.n_quads(), 9);
    let bad =
        serde_json::from_str::<ConstructionSpec>(r#"{"kind": "square_lattice", "n": 3, "x": 1}"#);
    assert!(bad.is_err());
}
