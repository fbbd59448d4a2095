//! The staircase `eta`, the conjugating loops `gamma_k` and their periods, and
//! the level-by-level Birkhoff sum identity on `T x N/Gamma`.
//!
//! With `q = q0_eff` and `qbar_0 = q`, `qbar_k = 2 qbar_{k-1} q`,
//! `gamma_0 = 1`, `gamma_k(t) = gamma_{k-1}(t) exp(eta(qbar_{k-1} t) v_k)`, the
//! map `f_k = H_k T_{p/qbar_k} H_k^-1` satisfies, for `phi` in `V_n` with `n < q`,
//!
//! `S^{qbar_k}_{f_k} phi(t, x) = C_k phi_hat_0^(k)(gamma_k(t)^-1 x mod N_(k))`
//!
//! with `C_k = qbar_k` (test with `phi = 1`).

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::compactgroup::gauss_legendre;
use crate::dynamics::{conjugated_rotation, FiberPoint, GroupLoop, SkewProduct};
use crate::error::{Error, Result};
use crate::group::FiberGroup;
use crate::nilfourier::CoefficientTree;
use crate::nilgroup::{NilPoint, NilStructure};
use crate::rationals::Fraction;

/// Parameters of the staircase `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaParams {
    pub q0: u64,
    /// Width of the flat margins of `rho` near 0 and 1.
    pub delta: f64,
}

impl EtaParams {
    pub fn new(q0: u64, delta: f64) -> Result<Self> {
        if q0 == 0 {
            return Err(Error::InvalidParameter("q0 must be positive".into()));
        }
        if !(delta > 0.0 && delta < 0.25) {
            return Err(Error::InvalidParameter(format!("delta = {delta} must lie in (0, 1/4)")));
        }
        Ok(EtaParams { q0, delta })
    }

    /// Skips the margin check; used to build deliberately defective `rho`.
    pub fn new_unchecked(q0: u64, delta: f64) -> Self {
        EtaParams { q0, delta }
    }

    pub fn with_q0(q0: u64) -> Result<Self> {
        Self::new(q0, 0.1)
    }
}

const TABLE: usize = 8192;

fn bump(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        0.0
    } else {
        (-1.0 / (s * (1.0 - s))).exp()
    }
}

/// Cumulative integrals of the bump at `i / (2 TABLE)`, `i = 0..=TABLE`,
/// covering `[0, 1/2]`; each cell by 8-point Gauss-Legendre.
fn bump_table() -> &'static Vec<f64> {
    static TAB: OnceLock<Vec<f64>> = OnceLock::new();
    TAB.get_or_init(|| {
        let (x, w) = gauss_legendre(8);
        let h = 0.5 / TABLE as f64;
        let mut out = Vec::with_capacity(TABLE + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..TABLE {
            let a = i as f64 * h;
            let cell: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * bump(a + 0.5 * h * (xi + 1.0))).sum();
            acc += 0.5 * h * cell;
            out.push(acc);
        }
        out
    })
}

/// `int_0^u bump` for `u` in `[0, 1/2]`: cubic Hermite interpolation of the
/// table with the exact derivative, clipped to the cell's range.
fn bump_integral(u: f64) -> f64 {
    let tab = bump_table();
    let h = 0.5 / TABLE as f64;
    let x = (u / h).clamp(0.0, TABLE as f64);
    let i = (x.floor() as usize).min(TABLE - 1);
    let s = x - i as f64;
    let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
    let (fa, fb) = (tab[i], tab[i + 1]);
    let (da, db) = (bump(a) * h, bump(b) * h);
    let s2 = s * s;
    let s3 = s2 * s;
    let v = (2.0 * s3 - 3.0 * s2 + 1.0) * fa + (s3 - 2.0 * s2 + s) * da + (-2.0 * s3 + 3.0 * s2) * fb + (s3 - s2) * db;
    // the table is increasing; keep the interpolant inside each cell's range
    v.clamp(fa, fb)
}

/// Smooth step: `0` on `[0, delta]`, `1` on `[1 - delta, 1]`, nondecreasing,
/// `rho(1 - t) = 1 - rho(t)`. A normalized integral of `exp(-1/(s(1-s)))`.
pub fn rho(t: f64, delta: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    let width = 1.0 - 2.0 * delta;
    let u = ((t - delta) / width).clamp(0.0, 1.0);
    let total = 2.0 * bump_table()[TABLE];
    if u <= 0.5 {
        bump_integral(u) / total
    } else {
        1.0 - bump_integral(1.0 - u) / total
    }
}

/// The staircase: for `t` in `[0, 1/2)`, with `s = 2 q0 t`,
/// `eta(t) = (rho(frac s) + floor s) / q0`; mirrored by `eta(t) = eta(1 - t)`.
///
/// It climbs from 0 to 1 in `q0` smooth unit-`1/q0` steps and back, so that
/// the `2 q0` translates by `1/(2 q0)` cancel every frequency `0 < |m| < q0`.
pub fn eta(t: f64, params: &EtaParams) -> f64 {
    let t = t.rem_euclid(1.0);
    let q0 = params.q0 as f64;
    let branch = |u: f64| {
        let s = 2.0 * q0 * u;
        let fl = s.floor();
        (rho(s - fl, params.delta) + fl) / q0
    };
    if t < 0.5 {
        branch(t)
    } else {
        branch(1.0 - t)
    }
}

/// `sum_{l < 2 q0} e^{2 pi i m eta(t + l/(2 q0))}`.
pub fn eta_exponential_sum(m: i64, t: f64, params: &EtaParams) -> Complex64 {
    let n = 2 * params.q0;
    (0..n)
        .map(|l| {
            let e = eta(t + l as f64 / n as f64, params);
            Complex64::from_polar(1.0, 2.0 * PI * m as f64 * e)
        })
        .sum()
}

/// Report on the defining conditions of `rho`.
#[derive(Debug, Clone, Serialize)]
pub struct RhoCheck {
    pub delta: f64,
    pub flat_margins: bool,
    pub max_symmetry_defect: f64,
    pub monotone: bool,
}

/// Checks vanishing near 0 (on `[0, 1/20]` when `delta > 0`), symmetry and
/// monotonicity on a grid. A margin `delta = 0` fails the first test: `rho`
/// is then only flat to infinite order at a point, not on a neighbourhood.
pub fn check_rho(delta: f64, grid: usize) -> RhoCheck {
    let margin_ok = delta > 0.0 && {
        let probe = delta.min(0.05);
        (0..=grid).all(|i| {
            let t = probe * i as f64 / grid as f64;
            rho(t, delta) == 0.0 && rho(1.0 - t, delta) == 1.0
        })
    };
    let mut sym: f64 = 0.0;
    let mut mono = true;
    let mut prev = -1.0;
    for i in 0..=grid {
        let t = i as f64 / grid as f64;
        let r = rho(t, delta);
        sym = sym.max((r + rho(1.0 - t, delta) - 1.0).abs());
        if r < prev {
            mono = false;
        }
        prev = r;
    }
    RhoCheck { delta, flat_margins: margin_ok, max_symmetry_defect: sym, monotone: mono }
}

/// Smallest multiple of `q0` strictly greater than `n`.
pub fn effective_q0(q0: u64, n: u64) -> u64 {
    (n / q0 + 1) * q0
}

/// Output of [`build_construction`].
#[derive(Debug, Clone)]
pub struct NilConstruction {
    pub structure: NilStructure,
    pub n: usize,
    pub q0: u64,
    pub q0_effective: u64,
    pub eta: EtaParams,
    /// `gamma_0, ..., gamma_d`.
    pub gammas: Vec<GroupLoop<NilStructure>>,
    /// `qbar_0, ..., qbar_d`.
    pub qbars: Vec<u64>,
    /// `C_0, ..., C_d`.
    pub constants: Vec<f64>,
}

impl NilConstruction {
    pub fn depth(&self) -> usize {
        self.structure.dim()
    }

    /// The conjugating loop `gamma_d`.
    pub fn gamma(&self) -> &GroupLoop<NilStructure> {
        &self.gammas[self.depth()]
    }

    /// The period `qbar = qbar_d`.
    pub fn qbar(&self) -> u64 {
        self.qbars[self.depth()]
    }

    /// `H_k T_{p/qbar_k} H_k^-1`.
    pub fn conjugated_rotation(&self, k: usize, p: i64) -> Result<SkewProduct<NilStructure>> {
        if k > self.depth() {
            return Err(Error::OutOfRange { index: k, max: self.depth() });
        }
        let q = self.qbars[k];
        if !crate::rationals::is_coprime(p, q) {
            return Err(Error::NotCoprime { p, q });
        }
        Ok(conjugated_rotation(&self.gammas[k], Fraction::new(p as i128, q as i128)?))
    }
}

pub fn build_construction(s: &NilStructure, n: usize, q0: u64) -> Result<NilConstruction> {
    build_construction_with(s, n, EtaParams::with_q0(q0)?)
}

/// As [`build_construction`] with explicit `eta` parameters (`eta.q0` is the
/// requested `q0`; the effective one replaces it inside `eta`).
pub fn build_construction_with(s: &NilStructure, n: usize, eta_params: EtaParams) -> Result<NilConstruction> {
    if n == 0 {
        return Err(Error::InvalidParameter("degree n must be at least 1".into()));
    }
    let q0 = eta_params.q0;
    let q = effective_q0(q0, n as u64);
    let eta_eff = EtaParams { q0: q, delta: eta_params.delta };
    let d = s.dim();
    let mut qbars = vec![q];
    let mut gammas = vec![GroupLoop::identity(s.clone())];
    for k in 1..=d {
        let prev = qbars[k - 1];
        let step_qbar = prev;
        let profile: crate::dynamics::Profile = Arc::new(move |t: f64| eta(step_qbar as f64 * t, &eta_eff));
        let mut dir = vec![0.0; d];
        dir[k - 1] = 1.0;
        let step = GroupLoop::one_parameter(s.clone(), dir, profile, prev);
        gammas.push(gammas[k - 1].mul(&step));
        let next = prev
            .checked_mul(2)
            .and_then(|x| x.checked_mul(q))
            .ok_or(Error::Overflow("qbar"))?;
        qbars.push(next);
    }
    let constants = qbars.iter().map(|&x| x as f64).collect();
    Ok(NilConstruction {
        structure: s.clone(),
        n,
        q0,
        q0_effective: q,
        eta: eta_eff,
        gammas,
        qbars,
        constants,
    })
}

/// Uniform product grid: `nt` values of `t`, `nx` values per second-kind
/// fiber coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NilGrid {
    pub nt: usize,
    pub nx: usize,
}

impl NilGrid {
    pub fn points(&self, s: &NilStructure) -> Vec<FiberPoint<NilPoint>> {
        let d = s.dim();
        let per = self.nx.pow(d as u32);
        let mut out = Vec::with_capacity(self.nt * per);
        for it in 0..self.nt {
            let t = it as f64 / self.nt as f64;
            for idx in 0..per {
                let mut r = idx;
                let mut y = vec![0.0; d];
                for v in y.iter_mut().rev() {
                    *v = (r % self.nx) as f64 / self.nx as f64;
                    r /= self.nx;
                }
                out.push(FiberPoint::new(t, s.from_second_kind(&y)));
            }
        }
        out
    }
}

/// `phi` as a function on `T x N/Gamma`: evaluates the tower at the
/// second-kind coordinates of the reduced fiber point.
pub fn tree_function<'a>(
    s: &'a NilStructure,
    tree: &'a CoefficientTree,
) -> impl Fn(&FiberPoint<NilPoint>) -> Complex64 + Sync + 'a {
    move |z| tree.evaluate(z.t, &s.to_second_kind(&s.canonical(&z.p)))
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub qbar: u64,
    #[serde(rename = "C")]
    pub c: f64,
    pub p: i64,
    pub grid: NilGrid,
    pub max_defect: f64,
    pub budget: f64,
}

impl LevelReport {
    pub fn passed(&self) -> bool {
        self.max_defect < self.budget
    }
}

/// Measures `max |S^{qbar_k} phi - C_k phi_hat_0^(k)(gamma_k(t)^-1 x)|` over
/// the grid for `f_k = H_k T_{p/qbar_k} H_k^-1`.
pub fn verify_level_identity(
    cons: &NilConstruction,
    k: usize,
    phi: &CoefficientTree,
    p: i64,
    grid: NilGrid,
) -> Result<LevelReport> {
    verify_level_identity_with_constant(cons, k, phi, p, grid, None)
}

/// As [`verify_level_identity`] with the constant `C_k` overridden.
pub fn verify_level_identity_with_constant(
    cons: &NilConstruction,
    k: usize,
    phi: &CoefficientTree,
    p: i64,
    grid: NilGrid,
    constant: Option<f64>,
) -> Result<LevelReport> {
    let f = cons.conjugated_rotation(k, p)?;
    let s = &cons.structure;
    let q = cons.qbars[k];
    let c = constant.unwrap_or(cons.constants[k]);
    let zero_mode = phi.zero_mode(k);
    let eval = tree_function(s, phi);
    let gamma_k = &cons.gammas[k];
    let defect = grid
        .points(s)
        .par_iter()
        .map(|z| {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut cur = z.clone();
            for i in 0..q {
                acc += eval(&cur);
                if i + 1 < q {
                    cur = f.apply(&cur);
                }
            }
            let moved = s.canonical(&s.mul(&s.inv(&gamma_k.eval(z.t)), &z.p).expect("dimensions agree"));
            let y = s.to_second_kind(&moved);
            let rhs = zero_mode.eval(&y[k..]) * c;
            (acc - rhs).norm()
        })
        .reduce(|| 0.0, f64::max);
    let budget = if phi.has_theta() { 1e-6 } else { 1e-8 };
    Ok(LevelReport { level: k, qbar: q, c, p, grid, max_defect: defect, budget })
}

/// `max |gamma(t + 1/q0) - gamma(t)|` in the fiber over `samples` points.
pub fn rotation_commutation_defect(gamma: &GroupLoop<NilStructure>, q0: u64, samples: usize) -> f64 {
    (0..samples)
        .map(|i| {
            let t = i as f64 / samples as f64;
            let a = gamma.eval(t + 1.0 / q0 as f64);
            let b = gamma.eval(t);
            a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}
