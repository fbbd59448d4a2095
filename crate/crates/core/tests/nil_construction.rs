use due_core::dynamics::{birkhoff_sum, solve_coboundary_periodic};
use due_core::nilconstruct::{
    build_construction, eta_exponential_sum, tree_function, verify_level_identity, EtaParams, NilGrid,
};
use due_core::nilfourier::{pseudo_poly_basis, trig_monomial_tree};
use due_core::nilgroup::NilStructure;
use due_core::FiberGroup;

#[test]
fn eta_sums_cancel_below_q0() {
    for q0 in [2u64, 3, 5, 7] {
        let p = EtaParams::with_q0(q0).unwrap();
        for i in 0..64 {
            let t = (i as f64 + 0.31) / 64.0;
            for m in 1..q0 as i64 {
                assert!(eta_exponential_sum(m, t, &p).norm() < 1e-12);
                assert!(eta_exponential_sum(-m, t, &p).norm() < 1e-12);
            }
        }
    }
    // |m| = q0 is outside the cancelling range
    let p = EtaParams::with_q0(3).unwrap();
    let v = eta_exponential_sum(3, 0.0, &p);
    assert!(v.norm() > 1.0, "{v}");
}

#[test]
fn level_identity_heisenberg_all_levels() {
    let s = NilStructure::heisenberg3();
    let cons = build_construction(&s, 1, 2).unwrap();
    let grid = NilGrid { nt: 4, nx: 3 };
    let basis = pseudo_poly_basis(&s, 1).unwrap();
    for el in basis.iter().step_by(3) {
        for k in 0..=3 {
            let r = verify_level_identity(&cons, k, &el.tree, 1, grid).unwrap();
            assert!(r.max_defect < r.budget, "{} level {k}: {}", el.label, r.max_defect);
        }
    }
}

#[test]
fn level_identity_abelian_torus() {
    let s = NilStructure::abelian(2);
    let cons = build_construction(&s, 1, 2).unwrap();
    assert_eq!(cons.qbars, vec![2, 8, 32]);
    let grid = NilGrid { nt: 8, nx: 4 };
    for el in pseudo_poly_basis(&s, 1).unwrap() {
        for k in 0..=2 {
            let r = verify_level_identity(&cons, k, &el.tree, 3, grid).unwrap();
            assert!(r.max_defect < 1e-11, "{} level {k}: {}", el.label, r.max_defect);
        }
    }
}

#[test]
fn full_level_sum_is_a_coboundary() {
    let s = NilStructure::heisenberg3();
    let cons = build_construction(&s, 1, 2).unwrap();
    let f = cons.conjugated_rotation(3, 1).unwrap();
    let grid = NilGrid { nt: 4, nx: 2 }.points(&s);
    let tree = trig_monomial_tree(3, 1, 1, &[0, 1, -1]);
    let phi = tree_function(&s, &tree);
    let (u, rep) = solve_coboundary_periodic(&f, &phi, cons.qbar(), &grid, 1e-8).unwrap();
    assert!(rep.residual < 1e-10);
    let z = &grid[5];
    let lhs = u.eval(&f.apply(z)) - u.eval(z);
    assert!((lhs - phi(z)).norm() < 1e-10);
    assert!(birkhoff_sum(&f, &phi, 128, z).norm() < 1e-8);
}

#[test]
fn p_sharing_a_factor_is_rejected() {
    let cons = build_construction(&NilStructure::heisenberg3(), 1, 2).unwrap();
    assert!(cons.conjugated_rotation(3, 2).is_err());
    let tree = trig_monomial_tree(3, 1, 1, &[0, 0, 0]);
    assert!(verify_level_identity(&cons, 1, &tree, 4, NilGrid { nt: 2, nx: 2 }).is_err());
}

#[test]
fn q0_replacement_for_large_n() {
    let s = NilStructure::heisenberg3();
    let cons = build_construction(&s, 3, 2).unwrap();
    assert_eq!(cons.q0_effective, 4);
    assert_eq!(cons.qbars[..2], [4, 32]);
    // the loop still commutes with the requested rotation by 1/q0
    let g = cons.gamma();
    for i in 0..32 {
        let t = i as f64 / 32.0;
        let d = s.fiber_distance(&g.eval(t + 0.5), &g.eval(t));
        assert!(d < 1e-12);
    }
}
