use std::f64::consts::PI;
use std::sync::Arc;

use due_core::compactgroup::{haar_quadrature, su2_exp, wigner, CompactPoint, Spin, Su2};
use due_core::dynamics::{
    birkhoff_sum, conjugated_rotation, due_residual, fiber_conjugacy, solve_coboundary_periodic, FiberFunction,
    FiberPoint, GroupLoop, SkewProduct,
};
use due_core::nilconstruct::{build_construction, tree_function, NilGrid};
use due_core::nilfourier::pseudo_poly_basis;
use due_core::nilgroup::{NilPoint, NilStructure};
use due_core::rationals::{ak_rationals, AkSequenceParams, Fraction};
use due_core::FiberGroup;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn wobble(s: &NilStructure, dir: Vec<f64>, freq: f64) -> GroupLoop<NilStructure> {
    GroupLoop::one_parameter(s.clone(), dir, Arc::new(move |t: f64| (2.0 * PI * freq * t).sin()), 1)
}

fn random_point(s: &NilStructure, rng: &mut ChaCha8Rng) -> FiberPoint<NilPoint> {
    let y: Vec<f64> = (0..s.dim()).map(|_| rng.gen()).collect();
    FiberPoint::new(rng.gen(), s.from_second_kind(&y))
}

fn close(s: &NilStructure, a: &FiberPoint<NilPoint>, b: &FiberPoint<NilPoint>) -> f64 {
    let dt = (a.t - b.t).abs();
    dt.min(1.0 - dt) + s.fiber_distance(&a.p, &b.p)
}

#[test]
fn identity_and_pure_rotation() {
    let s = NilStructure::heisenberg3();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let id = SkewProduct::new(0.0, GroupLoop::identity(s.clone()));
    let rot = SkewProduct::rotation(s.clone(), Fraction::new(2, 7).unwrap());
    for _ in 0..50 {
        let z = random_point(&s, &mut rng);
        assert!(close(&s, &id.apply(&z), &z) < 1e-14);
        let w = rot.apply(&z);
        assert!(s.fiber_distance(&w.p, &z.p) < 1e-14);
        assert!(((w.t - z.t).rem_euclid(1.0) - 2.0 / 7.0).abs() < 1e-14);
    }
}

#[test]
fn apply_inverse_round_trip() {
    let s = NilStructure::heisenberg3();
    let cons = build_construction(&s, 1, 2).unwrap();
    let f = cons.conjugated_rotation(3, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let z = random_point(&s, &mut rng);
        assert!(close(&s, &f.apply_inverse(&f.apply(&z)), &z) < 1e-12);
        assert!(close(&s, &f.apply(&f.apply_inverse(&z)), &z) < 1e-12);
    }
}

#[test]
fn composition_rules() {
    let s = NilStructure::heisenberg3();
    let f = SkewProduct::new(0.3, wobble(&s, vec![0.0, 1.0, 0.5], 1.0));
    let g = SkewProduct::new(0.45, wobble(&s, vec![0.2, 0.0, -1.0], 2.0));
    let fg = f.compose(&g).unwrap();
    let ff = f.compose(&f.inverse()).unwrap();
    let ta = SkewProduct::rotation(s.clone(), Fraction::new(1, 5).unwrap());
    let tb = SkewProduct::rotation(s.clone(), Fraction::new(1, 3).unwrap());
    let tab = ta.compose(&tb).unwrap();
    assert_eq!(tab.exact_alpha().unwrap(), Fraction::new(8, 15).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let z = random_point(&s, &mut rng);
        assert!(close(&s, &fg.apply(&z), &f.apply(&g.apply(&z))) < 1e-12);
        assert!(close(&s, &ff.apply(&z), &z) < 1e-12);
    }
    assert!(f.compose(&SkewProduct::new(0.1, GroupLoop::identity(NilStructure::abelian(2)))).is_err());
}

#[test]
fn conjugated_rotation_properties() {
    let s = NilStructure::heisenberg3();
    let pq = Fraction::new(3, 8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    // trivial loop gives the bare rotation
    let bare = conjugated_rotation(&GroupLoop::identity(s.clone()), pq);
    let rot = SkewProduct::rotation(s.clone(), pq);
    let gamma = wobble(&s, vec![1.0, -0.5, 0.75], 1.0);
    let f = conjugated_rotation(&gamma, pq);
    let h = fiber_conjugacy(&gamma);
    let two_path = h.compose(&rot).unwrap().compose(&h.inverse()).unwrap();
    for _ in 0..100 {
        let z = random_point(&s, &mut rng);
        assert!(close(&s, &bare.apply(&z), &rot.apply(&z)) < 1e-14);
        assert!(close(&s, &f.iterate(&z, 8), &z) < 1e-11);
        assert!(close(&s, &f.apply(&z), &two_path.apply(&z)) < 1e-12);
    }
}

#[test]
fn birkhoff_cocycle_law() {
    let s = NilStructure::heisenberg3();
    let cons = build_construction(&s, 1, 2).unwrap();
    let f = SkewProduct::new(0.381966, cons.gamma().clone());
    let basis = pseudo_poly_basis(&s, 1).unwrap();
    let phi = tree_function(&s, &basis[7].tree);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let z = random_point(&s, &mut rng);
        let n: i64 = rng.gen_range(-5..=5);
        let m: i64 = rng.gen_range(-5..=5);
        let lhs = birkhoff_sum(&f, &phi, n + m, &z);
        let rhs = birkhoff_sum(&f, &phi, n, &z) + birkhoff_sum(&f, &phi, m, &f.iterate(&z, n));
        assert!((lhs - rhs).norm() < 1e-12, "n={n} m={m}");
    }
}

#[test]
fn telescoping_along_approximating_rationals() {
    let s = NilStructure::heisenberg3();
    let cons = build_construction(&s, 1, 2).unwrap();
    let params = AkSequenceParams::new(1, 2, cons.qbar()).unwrap();
    let basis = pseudo_poly_basis(&s, 1).unwrap();
    let grid = NilGrid { nt: 3, nx: 2 }.points(&s);
    for ell in [1u64, 2] {
        let pq = ak_rationals(&params, ell).unwrap();
        let f = conjugated_rotation(cons.gamma(), pq);
        let q = pq.denom() as i64;
        for el in basis.iter().step_by(5) {
            let phi = tree_function(&s, &el.tree);
            for z in &grid {
                let sum = birkhoff_sum(&f, &phi, q, z);
                assert!(sum.norm() < 1e-8, "{} ell={ell}: {}", el.label, sum.norm());
            }
        }
    }
}

#[test]
fn measure_preservation_on_su2_fibers() {
    let gamma = GroupLoop::custom(Su2, |t: f64| su2_exp([0.0, 4.0 * PI * t, 0.0]), 1);
    let f = SkewProduct::new(0.2, gamma);
    let nodes = haar_quadrature(Spin::from_twice(4));
    for tw in 1..=2 {
        let j = Spin::from_twice(tw);
        for it in 0..6 {
            let t = it as f64 / 6.0;
            let mut avg = Complex64::new(0.0, 0.0);
            for nd in &nodes {
                let w = f.apply(&FiberPoint::new(t, nd.point));
                avg += wigner(j, &w.p)[(0, 1)] * nd.weight;
            }
            assert!(avg.norm() < 1e-12);
        }
    }
    // the fiber map keeps points on the unit sphere
    let z = FiberPoint::new(0.3, CompactPoint::new(0.5, 0.5, 0.5, 0.5));
    assert!((f.iterate(&z, 50).p.norm() - 1.0).abs() < 1e-12);
}

#[test]
fn periodic_solver_and_least_squares_agree() {
    let s = NilStructure::abelian(1);
    let q = 5u64;
    let f = SkewProduct::rotation(s.clone(), Fraction::new(2, q as i128).unwrap());
    let phi: FiberFunction<NilPoint> = Arc::new(|z: &FiberPoint<NilPoint>| {
        Complex64::from_polar(1.0, 2.0 * PI * (z.t + z.p.0[0])) + Complex64::new((4.0 * PI * z.t).sin(), 0.0)
    });
    let grid: Vec<_> = (0..10)
        .flat_map(|i| (0..4).map(move |j| FiberPoint::new(i as f64 / 10.0, NilPoint(vec![j as f64 / 4.0]))))
        .collect();
    let p2 = phi.clone();
    let (_, rep) = solve_coboundary_periodic(&f, move |z: &FiberPoint<NilPoint>| p2(z), q, &grid, 1e-10).unwrap();
    assert!(rep.residual < 1e-12);
    let basis: Vec<FiberFunction<NilPoint>> = (0..q as i64)
        .map(|i| {
            let f = f.clone();
            let phi = phi.clone();
            Arc::new(move |z: &FiberPoint<NilPoint>| phi(&f.iterate(z, i))) as FiberFunction<NilPoint>
        })
        .collect();
    let lsq = due_residual(&f, &phi, &basis, &grid);
    assert!(lsq.sup < 1e-9, "{}", lsq.sup);
    // phi = 0 has zero residual and zero coefficients
    let zero: FiberFunction<NilPoint> = Arc::new(|_| Complex64::new(0.0, 0.0));
    let r0 = due_residual(&f, &zero, &basis, &grid);
    assert_eq!(r0.sup, 0.0);
    assert!(r0.coefficients.iter().all(|c| c.norm() == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn compose_matches_sequential_application(
        a in 0.0f64..1.0, b in 0.0f64..1.0,
        v in proptest::collection::vec(-2.0f64..2.0, 3),
        w in proptest::collection::vec(-2.0f64..2.0, 3),
        t in 0.0f64..1.0, y in proptest::collection::vec(0.0f64..1.0, 3),
    ) {
        let s = NilStructure::heisenberg3();
        let f = SkewProduct::new(a, wobble(&s, v, 1.0));
        let g = SkewProduct::new(b, wobble(&s, w, 3.0));
        let z = FiberPoint::new(t, s.from_second_kind(&y));
        let fg = f.compose(&g).unwrap();
        prop_assert!(close(&s, &fg.apply(&z), &f.apply(&g.apply(&z))) < 1e-12);
        prop_assert!(close(&s, &fg.inverse().apply(&fg.apply(&z)), &z) < 1e-11);
    }
}
