use std::f64::consts::PI;

use due_core::nilfourier::{
    is_pseudo_polynomial, pseudo_poly_basis, quadrature_mean, theta_tree, trig_monomial_tree, CoefficientTree,
};
use due_core::nilgroup::{LatticeElement, NilStructure};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn e(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// Direct sum for `e^{2 pi i ell t} e^{2 pi i k z} sum_j h(x + j) e^{-2 pi i k j y}`.
fn theta_naive(ell: i64, k: i64, t: f64, z: f64, x: f64, y: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for j in -6i64..=6 {
        let u = x + j as f64;
        acc += (-PI * u * u).exp() * e(-(k * j) as f64 * y);
    }
    e(ell as f64 * t) * e(k as f64 * z) * acc
}

#[test]
fn monomial_towers_match_direct_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let ell = rng.gen_range(-3..=3);
        let freqs: Vec<i64> = (0..3).map(|_| rng.gen_range(-3..=3)).collect();
        let tree = trig_monomial_tree(3, 3, ell, &freqs);
        tree.validate().unwrap();
        let t: f64 = rng.gen();
        let y: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
        let phase = ell as f64 * t + freqs.iter().zip(&y).map(|(&a, &b)| a as f64 * b).sum::<f64>();
        assert!((tree.evaluate(t, &y) - e(phase)).norm() < 1e-13);
    }
}

#[test]
fn theta_towers_match_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..100 {
        let ell = rng.gen_range(-2..=2);
        let k = [-2i64, -1, 1, 2][rng.gen_range(0..4)];
        let tree = theta_tree(2, ell, k, 6, 1.0);
        let t: f64 = rng.gen();
        let y: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
        let want = theta_naive(ell, k, t, y[0], y[1], y[2]);
        assert!((tree.evaluate(t, &y) - want).norm() < 1e-13);
    }
}

#[test]
fn basis_functions_descend_to_the_nilmanifold() {
    let s = NilStructure::heisenberg3();
    let basis = pseudo_poly_basis(&s, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for el in &basis {
        for _ in 0..20 {
            let y: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
            let t: f64 = rng.gen();
            let p = s.from_second_kind(&y);
            let g = LatticeElement((0..3).map(|_| rng.gen_range(-1..=1)).collect());
            let moved = s.mul(&p, &s.embed(&g)).unwrap();
            let a = el.tree.evaluate(t, &s.to_second_kind(&p));
            let b = el.tree.evaluate(t, &s.to_second_kind(&moved));
            assert!((a - b).norm() < 1e-12, "{}: {}", el.label, (a - b).norm());
        }
    }
}

#[test]
fn basis_means_vanish_and_degrees_hold() {
    let s = NilStructure::heisenberg3();
    for n in 1..=2 {
        for el in pseudo_poly_basis(&s, n).unwrap() {
            assert!(quadrature_mean(&el.tree, 12).norm() < 1e-12, "{}", el.label);
            assert!(is_pseudo_polynomial(&el.tree, n).holds);
        }
    }
    let high = trig_monomial_tree(3, 1, 2, &[0, 0, 0]);
    assert!(!is_pseudo_polynomial(&high, 1).holds);
    assert!(is_pseudo_polynomial(&CoefficientTree::constant(3, Complex64::new(2.0, 0.0)), 1).holds);
}

#[test]
fn zero_modes_follow_the_tower() {
    let tree = trig_monomial_tree(3, 2, 0, &[0, 1, -2]);
    // level 0 and level 1 zero modes are the remaining monomial
    let y = [0.3, 0.7, 0.15];
    let m0 = tree.zero_mode(0).eval(&y);
    assert!((m0 - e(0.7 - 2.0 * 0.15)).norm() < 1e-14);
    let m1 = tree.zero_mode(1).eval(&y[1..]);
    assert!((m1 - e(0.7 - 0.3)).norm() < 1e-14);
    assert_eq!(tree.zero_mode(2).eval(&y[2..]), Complex64::new(0.0, 0.0));
}

#[test]
fn json_round_trip_preserves_values() {
    let a = trig_monomial_tree(3, 1, 1, &[0, 1, 0]);
    let b = theta_tree(1, 0, -1, 6, 1.0);
    let tree = a.linear_combination(Complex64::new(0.5, 0.0), &b, Complex64::new(0.0, 2.0));
    let back = CoefficientTree::from_json(&tree.to_json().unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let t: f64 = rng.gen();
        let y: Vec<f64> = (0..3).map(|_| rng.gen()).collect();
        assert!((tree.evaluate(t, &y) - back.evaluate(t, &y)).norm() < 1e-15);
    }
}

proptest! {
    #[test]
    fn linear_combination_is_pointwise(
        ell in -2i64..=2, f1 in proptest::collection::vec(-2i64..=2, 3),
        f2 in proptest::collection::vec(-2i64..=2, 3),
        a in -2.0f64..2.0, b in -2.0f64..2.0,
        t in 0.0f64..1.0, y in proptest::collection::vec(0.0f64..1.0, 3),
    ) {
        let x = trig_monomial_tree(3, 2, ell, &f1);
        let z = trig_monomial_tree(3, 2, -ell, &f2);
        let ca = Complex64::new(a, 0.0);
        let cb = Complex64::new(0.0, b);
        let sum = x.linear_combination(ca, &z, cb);
        let want = ca * x.evaluate(t, &y) + cb * z.evaluate(t, &y);
        prop_assert!((sum.evaluate(t, &y) - want).norm() < 1e-12);
    }
}
