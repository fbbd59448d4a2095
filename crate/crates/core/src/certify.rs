//! End-to-end certificates: the level identities and coboundary for the
//! nilpotent construction, the full cancellation for compact fibers, and the
//! residual diagnostic separating constructed maps from the parabolic control.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::compactgroup::{wigner, CompactPoint, Spin, Su2};
use crate::dynamics::{
    coboundary_check_from_orbit, conjugated_rotation, due_residual, due_residual_from_rows, parabolic_map,
    torus_point, FiberFunction, FiberPoint, GroupLoop,
};
use crate::error::{Error, Result};
use crate::group::FiberGroup;
use crate::nilconstruct::{effective_q0, NilConstruction, NilGrid};
use crate::nilfourier::{pseudo_poly_basis, BasisElement};
use crate::nilgroup::NilPoint;
use crate::rationals::{is_coprime, Fraction};

fn check_p(p: i64, q: u64) -> Result<()> {
    if is_coprime(p, q) {
        Ok(())
    } else {
        Err(Error::NotCoprime { p, q })
    }
}

/// Per basis element: level defects, the full-level sum and the coboundary
/// residual of the closed formula.
#[derive(Debug, Clone, Serialize)]
pub struct NilElementRow {
    pub label: String,
    pub has_theta: bool,
    pub level_defects: Vec<f64>,
    pub budget: f64,
    pub max_full_sum: f64,
    pub coboundary_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NilCertificate {
    pub structure: String,
    pub n: usize,
    pub q0: u64,
    pub q0_effective: u64,
    pub p: i64,
    pub qbars: Vec<u64>,
    #[serde(rename = "C")]
    pub constants: Vec<f64>,
    pub grid: NilGrid,
    pub grid_points: usize,
    pub basis_size: usize,
    /// Largest level defect over elements without theta leaves.
    pub max_defect_plain: f64,
    /// Largest level defect over elements with theta leaves.
    pub max_defect_theta: f64,
    pub max_full_sum: f64,
    pub max_coboundary_residual: f64,
    pub full_sum_tol: f64,
    pub coboundary_tol: f64,
    pub rows: Vec<NilElementRow>,
    pub passed: bool,
}

/// Runs the level identity at every level over the whole `V_n` family, then
/// the periodic coboundary formula at the top level. Orbits are shared
/// between basis elements.
pub fn nil_certificate(cons: &NilConstruction, p: i64, grid: NilGrid, tol: f64) -> Result<NilCertificate> {
    let s = &cons.structure;
    let d = cons.depth();
    for &q in &cons.qbars {
        check_p(p, q)?;
    }
    let basis = pseudo_poly_basis(s, cons.n)?;
    let points = grid.points(s);
    let nb = basis.len();
    let zero = Complex64::new(0.0, 0.0);

    let mut level_defects = vec![vec![0.0f64; d + 1]; nb];
    let mut full = vec![0.0f64; nb];
    let mut cob = vec![0.0f64; nb];
    for k in 0..=d {
        let f = cons.conjugated_rotation(k, p)?;
        let q = cons.qbars[k] as usize;
        let c = cons.constants[k];
        let gamma_k = &cons.gammas[k];
        let top = k == d;
        let per_point: Vec<(Vec<f64>, Vec<f64>)> = points
            .par_iter()
            .map(|z| {
                let steps = if top { q + 1 } else { q };
                let mut coords = Vec::with_capacity(steps);
                let mut cur = z.clone();
                for i in 0..steps {
                    coords.push((cur.t, s.to_second_kind(&s.canonical(&cur.p))));
                    if i + 1 < steps {
                        cur = f.apply(&cur);
                    }
                }
                let moved = s.canonical(&s.mul(&s.inv(&gamma_k.eval(z.t)), &z.p).expect("dimensions agree"));
                let y = s.to_second_kind(&moved);
                let mut defects = Vec::with_capacity(nb);
                let mut cobs = Vec::with_capacity(if top { nb } else { 0 });
                let mut vals = vec![zero; steps];
                for el in &basis {
                    for (v, (t, yy)) in vals.iter_mut().zip(&coords) {
                        *v = el.tree.evaluate(*t, yy);
                    }
                    let sum: Complex64 = vals[..q].iter().sum();
                    let rhs = el.tree.zero_mode(k).eval(&y[k..]) * c;
                    defects.push((sum - rhs).norm());
                    if top {
                        cobs.push(coboundary_check_from_orbit(&vals).1);
                    }
                }
                (defects, cobs)
            })
            .collect();
        for (defects, cobs) in &per_point {
            for e in 0..nb {
                level_defects[e][k] = level_defects[e][k].max(defects[e]);
                if top {
                    full[e] = full[e].max(defects[e]);
                    cob[e] = cob[e].max(cobs[e]);
                }
            }
        }
    }

    let rows: Vec<NilElementRow> = basis
        .iter()
        .enumerate()
        .map(|(e, el)| {
            let has_theta = el.tree.has_theta();
            let budget = if has_theta { 1e-6 } else { 1e-8 };
            let passed = level_defects[e].iter().all(|&x| x < budget) && full[e] < tol && cob[e] < tol;
            NilElementRow {
                label: el.label.clone(),
                has_theta,
                level_defects: level_defects[e].clone(),
                budget,
                max_full_sum: full[e],
                coboundary_residual: cob[e],
                passed,
            }
        })
        .collect();
    let fold = |theta: bool| {
        rows.iter()
            .filter(|r| r.has_theta == theta)
            .flat_map(|r| r.level_defects.iter().cloned())
            .fold(0.0, f64::max)
    };
    Ok(NilCertificate {
        structure: if s.is_heisenberg3() { "heisenberg3".into() } else { format!("dim {}", d) },
        n: cons.n,
        q0: cons.q0,
        q0_effective: cons.q0_effective,
        p,
        qbars: cons.qbars.clone(),
        constants: cons.constants.clone(),
        grid,
        grid_points: points.len(),
        basis_size: nb,
        max_defect_plain: fold(false),
        max_defect_theta: fold(true),
        max_full_sum: full.iter().cloned().fold(0.0, f64::max),
        max_coboundary_residual: cob.iter().cloned().fold(0.0, f64::max),
        full_sum_tol: tol,
        coboundary_tol: tol,
        passed: rows.iter().all(|r| r.passed),
        rows,
    })
}

/// `e^{2 pi i ell t}` times a matrix coefficient `D^j_ab(g)`, or times `1`.
#[derive(Debug, Clone, Serialize)]
pub struct CompactTestFunction {
    pub label: String,
    pub ell: i64,
    #[serde(skip)]
    pub coefficient: Option<(Spin, usize, usize)>,
}

impl CompactTestFunction {
    pub fn eval(&self, t: f64, g: &CompactPoint) -> Complex64 {
        let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * self.ell as f64 * t);
        match self.coefficient {
            None => e,
            Some((j, a, b)) => e * wigner(j, g)[(a, b)],
        }
    }
}

/// The `V_n` family on `T x SU(2)` built from `E`: for `ell = 0` the matrix
/// coefficients of the listed spins, for `0 < |ell| <= n` the same together
/// with the constant.
pub fn compact_vn_basis(spins: &[Spin], n: usize) -> Result<Vec<CompactTestFunction>> {
    if spins.is_empty() || spins.iter().any(|j| j.twice() == 0) {
        return Err(Error::InvalidParameter("spins must be non-empty and nonzero".into()));
    }
    let ni = n as i64;
    let mut out = Vec::new();
    for ell in -ni..=ni {
        if ell != 0 {
            out.push(CompactTestFunction { label: format!("e(ell={ell})"), ell, coefficient: None });
        }
        for &j in spins {
            for a in 0..j.dim() {
                for b in 0..j.dim() {
                    out.push(CompactTestFunction {
                        label: format!("e(ell={ell}) D^{j}_{a}{b}"),
                        ell,
                        coefficient: Some((j, a, b)),
                    });
                }
            }
        }
    }
    Ok(out)
}

/// `nt` values of `t` times `ng` seeded Haar-random group points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CompactGrid {
    pub nt: usize,
    pub ng: usize,
    pub seed: u64,
}

impl CompactGrid {
    pub fn points(&self) -> Vec<FiberPoint<CompactPoint>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let gs: Vec<CompactPoint> = (0..self.ng).map(|_| CompactPoint::random(&mut rng)).collect();
        (0..self.nt)
            .flat_map(|i| {
                let t = (i as f64 + 0.5) / self.nt as f64;
                gs.iter().map(move |g| FiberPoint::new(t, *g))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactRow {
    pub label: String,
    pub max_full_sum: f64,
    pub coboundary_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactCertificate {
    pub m: usize,
    pub n: usize,
    pub q0: u64,
    pub q0_effective: u64,
    pub qbar: u64,
    pub p: i64,
    pub trivial_loop: bool,
    pub grid: CompactGrid,
    pub basis_size: usize,
    pub max_full_sum: f64,
    pub max_coboundary_residual: f64,
    pub tol: f64,
    pub rows: Vec<CompactRow>,
    pub passed: bool,
}

/// With `gamma(t) = theta(q0' t)` and `qbar = q0' m` (`q0'` the smallest
/// multiple of `q0` above `n`), measures `|S^qbar phi|` under
/// `H T_{p/qbar} H^-1` for every `phi` in the compact `V_n` family, then the
/// coboundary formula. `theta = None` runs the trivial loop.
#[allow(clippy::too_many_arguments)]
pub fn compact_certificate(
    theta: Option<&GroupLoop<Su2>>,
    m: usize,
    spins: &[Spin],
    n: usize,
    q0: u64,
    p: i64,
    grid: CompactGrid,
    tol: f64,
) -> Result<CompactCertificate> {
    if m == 0 || q0 == 0 {
        return Err(Error::InvalidParameter("m and q0 must be positive".into()));
    }
    let q0_eff = effective_q0(q0, n as u64);
    let qbar = q0_eff.checked_mul(m as u64).ok_or(Error::Overflow("qbar"))?;
    check_p(p, qbar)?;
    let gamma = match theta {
        Some(th) => th.rescale(q0_eff),
        None => GroupLoop::identity(Su2),
    };
    let f = conjugated_rotation(&gamma, Fraction::new(p as i128, qbar as i128)?);
    let basis = compact_vn_basis(spins, n)?;
    let points = grid.points();
    let q = qbar as usize;
    let nb = basis.len();
    let per_point: Vec<Vec<(f64, f64)>> = points
        .par_iter()
        .map(|z| {
            let mut orbit = Vec::with_capacity(q + 1);
            let mut cur = z.clone();
            for _ in 0..=q {
                orbit.push(cur.clone());
                cur = f.apply(&cur);
            }
            // matrices per spin along the orbit
            let mats: Vec<Vec<_>> = spins.iter().map(|&j| orbit.iter().map(|z| wigner(j, &z.p)).collect()).collect();
            let mut vals = vec![Complex64::new(0.0, 0.0); q + 1];
            basis
                .iter()
                .map(|b| {
                    for (i, (v, z)) in vals.iter_mut().zip(&orbit).enumerate() {
                        let e = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * b.ell as f64 * z.t);
                        *v = match b.coefficient {
                            None => e,
                            Some((j, a, c)) => {
                                let si = spins.iter().position(|&s| s == j).expect("listed spin");
                                e * mats[si][i][(a, c)]
                            }
                        };
                    }
                    coboundary_check_from_orbit(&vals)
                })
                .collect()
        })
        .collect();
    let rows: Vec<CompactRow> = (0..nb)
        .map(|e| {
            let full = per_point.iter().map(|r| r[e].0).fold(0.0, f64::max);
            let res = per_point.iter().map(|r| r[e].1).fold(0.0, f64::max);
            CompactRow {
                label: basis[e].label.clone(),
                max_full_sum: full,
                coboundary_residual: res,
                passed: full < tol && res < tol,
            }
        })
        .collect();
    Ok(CompactCertificate {
        m,
        n,
        q0,
        q0_effective: q0_eff,
        qbar,
        p,
        trivial_loop: theta.is_none(),
        grid,
        basis_size: nb,
        max_full_sum: rows.iter().map(|r| r.max_full_sum).fold(0.0, f64::max),
        max_coboundary_residual: rows.iter().map(|r| r.coboundary_residual).fold(0.0, f64::max),
        tol,
        passed: rows.iter().all(|r| r.passed),
        rows,
    })
}

/// One point of a residual-versus-truncation curve.
#[derive(Debug, Clone, Serialize)]
pub struct DueRow {
    pub case: String,
    pub truncation: usize,
    pub basis_size: usize,
    pub grid_points: usize,
    pub rank: usize,
    pub sup: f64,
    pub rms: f64,
    pub warning: Option<String>,
}

/// Parabolic map `(x, y) -> (x + alpha, y + x)` with `phi = e^{2 pi i y}` (or
/// `phi = 0`). Truncation `M` is the number of modes per variable: the basis
/// is the real cos/sin family with frequencies `|a|, |b| <= M/2`, on a
/// `(2M + 2) x (M + 2)` grid that integrates every product exactly.
pub fn parabolic_diagnostic(alpha: f64, truncations: &[usize], zero_phi: bool) -> Vec<DueRow> {
    let f = parabolic_map(alpha);
    let phi: FiberFunction<NilPoint> = if zero_phi {
        Arc::new(|_| Complex64::new(0.0, 0.0))
    } else {
        Arc::new(|z: &FiberPoint<NilPoint>| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * z.p.0[0]))
    };
    truncations
        .iter()
        .map(|&modes| {
            let kmax = (modes / 2) as i64;
            let mut basis: Vec<FiberFunction<NilPoint>> = Vec::new();
            for a in 0..=kmax {
                for b in -kmax..=kmax {
                    if a == 0 && b <= 0 {
                        continue;
                    }
                    let w = move |z: &FiberPoint<NilPoint>| {
                        2.0 * std::f64::consts::PI * (a as f64 * z.t + b as f64 * z.p.0[0])
                    };
                    basis.push(Arc::new(move |z| Complex64::new(w(z).cos(), 0.0)));
                    basis.push(Arc::new(move |z| Complex64::new(w(z).sin(), 0.0)));
                }
            }
            let mx = 4 * kmax as usize + 2;
            let my = 2 * kmax as usize + 2;
            let grid: Vec<_> = (0..mx)
                .flat_map(|i| (0..my).map(move |j| torus_point(i as f64 / mx as f64, j as f64 / my as f64)))
                .collect();
            let r = due_residual(&f, &phi, &basis, &grid);
            DueRow {
                case: "parabolic".into(),
                truncation: modes,
                basis_size: r.basis_size,
                grid_points: r.grid_points,
                rank: r.rank,
                sup: r.sup,
                rms: r.rms,
                warning: r.warning,
            }
        })
        .collect()
}

/// The top-level conjugated rotation of a construction with `phi` the given
/// `V_n` element (`None` for `phi = 0`). Truncation `K` uses the orbit
/// functions `phi o f^i`, `i < qbar`, together with the `V_K` family.
pub fn constructed_diagnostic(
    cons: &NilConstruction,
    p: i64,
    element: Option<usize>,
    truncations: &[usize],
    grid: NilGrid,
) -> Result<Vec<DueRow>> {
    let s = &cons.structure;
    let d = cons.depth();
    let f = cons.conjugated_rotation(d, p)?;
    let own = pseudo_poly_basis(s, cons.n)?;
    let phi: Option<&BasisElement> = match element {
        None => None,
        Some(i) => Some(own.get(i).ok_or(Error::OutOfRange { index: i, max: own.len().saturating_sub(1) })?),
    };
    let q = cons.qbar() as usize;
    let points = grid.points(s);
    let zero = Complex64::new(0.0, 0.0);
    let eval = |el: &BasisElement, z: &FiberPoint<NilPoint>| el.tree.evaluate(z.t, &s.to_second_kind(&s.canonical(&z.p)));
    // phi along each orbit, shared by all truncations
    let orbits: Vec<(Vec<Complex64>, FiberPoint<NilPoint>)> = points
        .par_iter()
        .map(|z| {
            let mut vals = Vec::with_capacity(q + 1);
            let mut cur = z.clone();
            for _ in 0..=q {
                vals.push(phi.map_or(zero, |el| eval(el, &cur)));
                cur = f.apply(&cur);
            }
            (vals, f.apply(z))
        })
        .collect();
    truncations
        .iter()
        .map(|&k| {
            let family = pseudo_poly_basis(s, k.max(1))?;
            let nb = q + family.len();
            let rows: Vec<(Vec<Complex64>, Complex64)> = points
                .par_iter()
                .zip(&orbits)
                .map(|(z, (vals, fz))| {
                    let mut row: Vec<Complex64> = (0..q).map(|i| vals[i + 1] - vals[i]).collect();
                    row.extend(family.iter().map(|el| eval(el, fz) - eval(el, z)));
                    (row, vals[0])
                })
                .collect();
            let r = due_residual_from_rows(&rows, nb);
            Ok(DueRow {
                case: "constructed".into(),
                truncation: k,
                basis_size: nb,
                grid_points: r.grid_points,
                rank: r.rank,
                sup: r.sup,
                rms: r.rms,
                warning: r.warning,
            })
        })
        .collect()
}

/// `max d(theta(t), theta(t + 1))` over `samples` points.
pub fn loop_closure_gap(theta: &GroupLoop<Su2>, samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let t = i as f64 / samples as f64;
            theta.eval(t).distance(&theta.eval(t + 1.0))
        })
        .fold(0.0, f64::max)
}
