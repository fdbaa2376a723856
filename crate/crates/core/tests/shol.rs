use std::f64::consts::FRAC_PI_4;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sembed::constructions::{
    isoradial_from_rhombi, square_lattice, triangular_rhombi, zigzag_layered, LayerSpec,
};
use sembed::embedding::SEmbedding;
use sembed::mesh::Color;
use sembed::propagation::verify_spinor;
use sembed::shol::*;
use sembed::{Error, C64};

fn square5() -> SEmbedding {
    square_lattice(5, FRAC_PI_4).unwrap().embedding
}

fn zigzag() -> SEmbedding {
    zigzag_layered(&LayerSpec::deterministic(vec![0.6, 1.1, 0.9, 0.7, 1.0], 5))
        .unwrap()
        .embedding
}

fn solutions(e: &SEmbedding, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let sp = e.spinor().unwrap();
    let basis = real_solution_basis(&e.mesh, &sp.cover);
    assert!(basis.len() >= 2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| random_real_solution(&basis, &mut rng))
        .collect()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[test]
fn real_and_imaginary_parts_give_constant_f() {
    for e in [square5(), zigzag()] {
        let x = e.spinor().unwrap().values;
        let re: Vec<f64> = x.iter().map(|v| v.re).collect();
        let im: Vec<f64> = x.iter().map(|v| v.im).collect();
        let s = varsigma();
        for (spinor, want) in [(re, s), (im, -C64::i() * s)] {
            let f = x_to_f(&e, &spinor).unwrap();
            assert!(f.values.iter().all(|v| (v - want).norm() < 1e-12));
        }
    }
}

#[test]
fn zero_spinor_gives_zero_everything() {
    let e = square5();
    let x = vec![0.0; e.mesh.n_corners()];
    let f = x_to_f(&e, &x).unwrap();
    assert!(f.values.iter().all(|v| v.norm() == 0.0));
    let h = build_h(&e, &x, 0).unwrap();
    assert_eq!(h.oscillation(), 0.0);
    let ic = build_ic(&e, &f, 0).unwrap();
    assert!(ic.values.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn random_solutions_round_trip() {
    for e in [square5(), zigzag()] {
        let cover = e.spinor().unwrap().cover;
        for x in solutions(&e, 10, 3) {
            assert!(verify_spinor(&e.mesh, &cover, &x, None).max_residual < 1e-12);
            assert!(pair_spread(&e, &x).unwrap() < 1e-10);
            let f = x_to_f(&e, &x).unwrap();
            assert!(s_hol_residual(&e, &f).unwrap().max < 1e-10 * f.sup());
            let back = f_to_x(&e, &f).unwrap();
            assert!(sup_diff(&back, &x) < 1e-10);
            assert!(verify_spinor(&e.mesh, &cover, &back, None).max_residual < 1e-10);
            let again = x_to_f(&e, &back).unwrap();
            let d = f
                .values
                .iter()
                .zip(&again.values)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(d < 1e-10 * f.sup());
        }
    }
}

#[test]
fn unit_f_on_one_quad() {
    let color = vec![Color::Black, Color::White, Color::Black, Color::White];
    let s = vec![
        C64::new(2.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(-2.0, 0.0),
        C64::new(0.0, -1.0),
    ];
    let (e, _) = SEmbedding::from_geometry(color, vec![[0, 1, 2, 3]], s).unwrap();
    let x = f_to_x(
        &e,
        &SHolFunction {
            values: vec![C64::new(1.0, 0.0)],
        },
    )
    .unwrap();
    let sp = e.spinor().unwrap();
    for (c, &[b, w]) in e.mesh.corners.iter().enumerate() {
        let want = (e.s[b] - e.s[w]).norm().sqrt() * eta(sp.values[c]).conj().re;
        assert!((x[c] - want).abs() < 1e-14);
    }
}

#[test]
fn non_s_holomorphic_input_is_rejected() {
    let e = square5();
    let values = (0..e.n_quads()).map(|z| C64::new(z as f64, 1.0)).collect();
    assert!(matches!(
        f_to_x(&e, &SHolFunction { values }),
        Err(Error::NotSHolomorphic { .. })
    ));
}

#[test]
fn corner_increments_are_squares() {
    let e = zigzag();
    for x in solutions(&e, 5, 8) {
        let h = build_h(&e, &x, 0).unwrap();
        for (c, &[b, w]) in e.mesh.corners.iter().enumerate() {
            let d = h.vertex[b] - h.vertex[w];
            assert!(d >= -1e-15 && (d - x[c] * x[c]).abs() < 1e-12);
        }
    }
}

#[test]
fn h_from_spinor_matches_line_integral() {
    for e in [square5(), zigzag()] {
        for x in solutions(&e, 5, 4) {
            let hx = build_h(&e, &x, 0).unwrap();
            let hf = h_line_integral(&e, &x_to_f(&e, &x).unwrap(), 0).unwrap();
            assert!(hx.scaled(2.0).distance(&hf) < 1e-9);
        }
    }
}

#[test]
fn isoradial_h_integrates_im_f_squared_on_white() {
    let e = isoradial_from_rhombi(&triangular_rhombi(3, 0.5), 0.5)
        .unwrap()
        .embedding;
    let white: Vec<usize> = (0..e.n_vertices())
        .filter(|&v| e.mesh.color[v] == Color::White)
        .collect();
    assert!(white
        .iter()
        .all(|&v| (e.q[v] - e.q[white[0]]).abs() < 1e-12));
    let x = &solutions(&e, 1, 6)[0];
    let f = x_to_f(&e, x).unwrap();
    let h = build_h(&e, x, 0).unwrap();
    for (z, q) in e.mesh.quads.iter().enumerate() {
        let fz = f.values[z];
        let d = (fz * fz * (e.s[q[3]] - e.s[q[1]])).im / 2.0;
        assert!((h.vertex[q[3]] - h.vertex[q[1]] - d).abs() < 1e-10);
    }
}

#[test]
fn ic_of_constant_is_affine() {
    let e = square5();
    let f = SHolFunction {
        values: vec![C64::new(0.3, -0.7); e.n_quads()],
    };
    let ic = build_ic(&e, &f, 0).unwrap();
    let s = varsigma();
    for v in 0..e.n_vertices() {
        let want = ic_increment(&e, f.values[0], 0, v);
        assert!((ic.values[v] - want).norm() < 1e-12);
        let direct =
            s.conj() * f.values[0] * (e.s[v] - e.s[0]) + s * f.values[0].conj() * (e.q[v] - e.q[0]);
        assert!((want - direct).norm() < 1e-15);
    }
}

#[test]
fn ic_loops_close_on_random_solutions() {
    let e = square_lattice(6, FRAC_PI_4).unwrap().embedding;
    for x in solutions(&e, 5, 9) {
        let f = x_to_f(&e, &x).unwrap();
        let ic = build_ic(&e, &f, 0).unwrap();
        let per = (0..e.n_quads())
            .map(|z| sembed::geom::perimeter(&e.quad_vertices(z)))
            .fold(0.0, f64::max);
        assert!(ic.closure < 1e-10 * f.sup() * per, "{}", ic.closure);
    }
}

#[test]
fn maximum_principle_on_random_observables() {
    let e = zigzag();
    let xs = solutions(&e, 50, 17);
    for pair in xs.chunks(2) {
        let hx = build_h(&e, &pair[0], 0).unwrap();
        let hy = build_h(&e, &pair[1], 0).unwrap();
        let r = max_principle_check(&e.mesh, &hx, None);
        assert!(r.pass && r.scanned > 0, "{r:?}");
        assert!(max_principle_check(&e.mesh, &hx, Some(&hy)).pass);
        assert!(max_principle_check(&e.mesh, &hx, Some(&hx)).pass);
    }
}

#[test]
fn corrupted_h_is_caught() {
    let e = square5();
    let on_boundary = e.mesh.boundary_vertices();
    let x = &solutions(&e, 1, 2)[0];
    let mut h = build_h(&e, x, 0).unwrap();
    let v = (0..e.n_vertices()).find(|&v| !on_boundary[v]).unwrap();
    h.vertex[v] += 10.0 * h.oscillation() + 1.0;
    let r = max_principle_check(&e.mesh, &h, None);
    assert!(!r.pass);
    assert_eq!(r.witness, Some(Node::Vertex(v)));
}

#[test]
fn harnack_constant_is_finite() {
    let e = square_lattice(8, FRAC_PI_4).unwrap().embedding;
    let x = &solutions(&e, 1, 1)[0];
    let f = x_to_f(&e, x).unwrap();
    let h = build_h(&e, x, 0).unwrap();
    let mid = e.s.iter().sum::<C64>() / e.n_vertices() as f64;
    let c = harnack_constant(&e, &f, &h, mid, 3.0).unwrap();
    assert!(c.is_finite() && c > 0.0);
}

#[test]
fn csv_dumps() {
    let e = square5();
    let x = &solutions(&e, 1, 5)[0];
    let f = x_to_f(&e, x).unwrap();
    let h = build_h(&e, x, 0).unwrap();
    let hc = h_to_csv(&h);
    assert!(hc.starts_with("node,index,h\n"));
    assert_eq!(hc.lines().count(), 1 + e.n_vertices() + e.n_quads());
    let fc = f_to_csv(&f);
    assert!(fc.starts_with("quad,re,im\n"));
    let row: Vec<f64> = fc
        .lines()
        .nth(1)
        .unwrap()
        .split(',')
        .skip(1)
        .map(|t| t.parse().unwrap())
        .collect();
    assert_eq!(row, vec![f.values[0].re, f.values[0].im]);
}
