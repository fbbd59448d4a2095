//! Equidistributed loops in `SU(2)`: zeros of `Phi^(m)(x) = sum_k Phi(x_k)`,
//! a continuation path from a zero `z` to its cyclic shift `sigma(z)`, and the
//! loop `theta` read off that path.
//!
//! If `theta_tilde : [0, 1/m] -> Z^(m)` runs from `z` to `sigma(z)` and is
//! extended by `theta_tilde(t + 1/m) = sigma(theta_tilde(t))`, its first
//! coordinate `theta` satisfies `sum_j phi(theta(t + j/m)) = 0` for every
//! `phi` in `E` and every `t`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compactgroup::{
    haar_quadrature, sphere_section, su2_exp, su2_generator, su2_geodesic, su2_inv,
    su2_log, su2_mul, wigner, wigner_algebra, CompactPoint, QuotientSpec, Spin, Su2, Subgroup,
};
use crate::dynamics::GroupLoop;
use crate::error::{Error, Result};
use crate::nilconstruct::rho;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Re,
    Im,
}

/// `g -> Re D^j_{row, col}(g)` or its imaginary part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealCoefficient {
    pub spin: Spin,
    pub row: usize,
    pub col: usize,
    pub part: Part,
}

/// Real-valued zero-mean functions on `SU(2)` spanning the real parts of
/// `E_{j_1} + ... + E_{j_r}`, selected to be linearly independent.
#[derive(Debug, Clone)]
pub struct FunctionSpaceBasis {
    spins: Vec<Spin>,
    functions: Vec<RealCoefficient>,
    min_gram_eigenvalue: f64,
    /// Appends the constant function `1`, which is not in `L^2_0`; only for
    /// negative controls.
    with_constant: bool,
}

impl FunctionSpaceBasis {
    /// Greedy Gram-Schmidt over `Re D^j_{ab}`, `Im D^j_{ab}` under Haar
    /// quadrature. Each spin contributes `(2j+1)^2` real functions.
    pub fn from_spins(spins: &[Spin]) -> Result<Self> {
        if spins.is_empty() {
            return Err(Error::InvalidParameter("at least one spin is required".into()));
        }
        let mut spins: Vec<Spin> = spins.to_vec();
        spins.sort();
        spins.dedup();
        if spins.iter().any(|s| s.twice() == 0) {
            return Err(Error::InvalidParameter("spin 0 (constants) is not allowed".into()));
        }
        let top = *spins.last().expect("non-empty");
        let nodes = haar_quadrature(Spin::from_twice(2 * top.twice()));
        let tables: Vec<Vec<DMatrix<Complex64>>> = spins
            .iter()
            .map(|&s| nodes.iter().map(|n| wigner(s, &n.point)).collect())
            .collect();
        let sw: Vec<f64> = nodes.iter().map(|n| n.weight.sqrt()).collect();
        let mut accepted: Vec<(RealCoefficient, Vec<f64>)> = Vec::new();
        let mut ortho: Vec<Vec<f64>> = Vec::new();
        for (si, &spin) in spins.iter().enumerate() {
            let dim = spin.dim();
            for row in 0..dim {
                for col in 0..dim {
                    for part in [Part::Re, Part::Im] {
                        let v: Vec<f64> = tables[si]
                            .iter()
                            .zip(&sw)
                            .map(|(d, w)| {
                                let z = d[(row, col)];
                                w * if part == Part::Re { z.re } else { z.im }
                            })
                            .collect();
                        let norm0: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if norm0 < 1e-12 {
                            continue;
                        }
                        let mut r = v.clone();
                        for q in &ortho {
                            let c: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
                            r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
                        }
                        let nr: f64 = r.iter().map(|x| x * x).sum::<f64>().sqrt();
                        if nr > 1e-6 * norm0 {
                            ortho.push(r.iter().map(|x| x / nr).collect());
                            accepted.push((RealCoefficient { spin, row, col, part }, v));
                        }
                    }
                }
            }
        }
        let n = accepted.len();
        let gram = DMatrix::from_fn(n, n, |i, j| {
            accepted[i].1.iter().zip(&accepted[j].1).map(|(a, b)| a * b).sum::<f64>()
        });
        let min_eig = gram.symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        Ok(FunctionSpaceBasis {
            spins,
            functions: accepted.into_iter().map(|(c, _)| c).collect(),
            min_gram_eigenvalue: min_eig,
            with_constant: false,
        })
    }

    /// The same family with the constant function appended.
    pub fn with_constant(mut self) -> Self {
        self.with_constant = true;
        self
    }

    pub fn has_constant(&self) -> bool {
        self.with_constant
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn functions(&self) -> &[RealCoefficient] {
        &self.functions
    }

    /// `N`, the number of real functions.
    pub fn len(&self) -> usize {
        self.functions.len() + usize::from(self.with_constant)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn min_gram_eigenvalue(&self) -> f64 {
        self.min_gram_eigenvalue
    }

    /// Dimension of the ambient manifold `SU(2)`.
    pub fn manifold_dim(&self) -> usize {
        3
    }

    pub fn descriptor(&self) -> String {
        let s: Vec<String> = self.spins.iter().map(|s| s.to_string()).collect();
        format!("SU(2) matrix coefficients, spins [{}], N = {}", s.join(", "), self.len())
    }

    /// `Phi(g)`.
    pub fn values(&self, g: &CompactPoint) -> Vec<f64> {
        let mats: Vec<DMatrix<Complex64>> = self.spins.iter().map(|&s| wigner(s, g)).collect();
        let mut out: Vec<f64> = self
            .functions
            .iter()
            .map(|f| {
                let z = mats[self.spin_index(f.spin)][(f.row, f.col)];
                pick(z, f.part)
            })
            .collect();
        if self.with_constant {
            out.push(1.0);
        }
        out
    }

    /// `Phi(g)` and the derivatives along left perturbations `exp(e X_a) g`.
    pub fn values_and_gradients(&self, g: &CompactPoint) -> (Vec<f64>, Vec<[f64; 3]>) {
        let mut mats = Vec::with_capacity(self.spins.len());
        for &s in &self.spins {
            let d = wigner(s, g);
            let grads: [DMatrix<Complex64>; 3] =
                std::array::from_fn(|a| wigner_algebra(s, &su2_generator(a)) * &d);
            mats.push((d, grads));
        }
        let mut vals = Vec::with_capacity(self.len());
        let mut grads = Vec::with_capacity(self.len());
        for f in &self.functions {
            let (d, dd) = &mats[self.spin_index(f.spin)];
            vals.push(pick(d[(f.row, f.col)], f.part));
            grads.push(std::array::from_fn(|a| pick(dd[a][(f.row, f.col)], f.part)));
        }
        if self.with_constant {
            vals.push(1.0);
            grads.push([0.0; 3]);
        }
        (vals, grads)
    }

    fn spin_index(&self, s: Spin) -> usize {
        self.spins.iter().position(|&x| x == s).expect("spin in basis")
    }
}

fn pick(z: Complex64, part: Part) -> f64 {
    match part {
        Part::Re => z.re,
        Part::Im => z.im,
    }
}

/// `m` points of `SU(2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub points: Vec<CompactPoint>,
}

impl Configuration {
    pub fn new(points: Vec<CompactPoint>) -> Self {
        Configuration { points: points.iter().map(CompactPoint::normalized).collect() }
    }

    pub fn random(m: usize, rng: &mut ChaCha8Rng) -> Self {
        Configuration { points: (0..m).map(|_| CompactPoint::random(rng)).collect() }
    }

    /// `(g, -g)`: a zero of `Phi^(2)` for every family of half-integer spins.
    pub fn antipodal(g: CompactPoint) -> Self {
        Configuration { points: vec![g, g.neg()] }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `sigma(x_1, ..., x_m) = (x_2, ..., x_m, x_1)`.
    pub fn shifted(&self) -> Self {
        let mut p = self.points.clone();
        p.rotate_left(1);
        Configuration { points: p }
    }

    /// Largest chordal distance between corresponding points.
    pub fn distance(&self, other: &Configuration) -> f64 {
        self.points.iter().zip(&other.points).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }

    /// `Phi^(m)`.
    pub fn phi(&self, basis: &FunctionSpaceBasis) -> DVector<f64> {
        let mut acc = DVector::zeros(basis.len());
        for p in &self.points {
            acc += DVector::from_vec(basis.values(p));
        }
        acc
    }

    /// `Phi^(m)` and its `N x 3m` Jacobian in left-perturbation coordinates.
    pub fn phi_and_jacobian(&self, basis: &FunctionSpaceBasis) -> (DVector<f64>, DMatrix<f64>) {
        let n = basis.len();
        let m = self.points.len();
        let mut acc = DVector::zeros(n);
        let mut jac = DMatrix::zeros(n, 3 * m);
        for (k, p) in self.points.iter().enumerate() {
            let (v, g) = basis.values_and_gradients(p);
            for i in 0..n {
                acc[i] += v[i];
                for a in 0..3 {
                    jac[(i, 3 * k + a)] = g[i][a];
                }
            }
        }
        (acc, jac)
    }

    /// `x_k -> exp(delta_k) x_k`.
    pub fn perturbed(&self, delta: &DVector<f64>) -> Self {
        Configuration {
            points: self
                .points
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    su2_mul(&su2_exp([delta[3 * k], delta[3 * k + 1], delta[3 * k + 2]]), p).normalized()
                })
                .collect(),
        }
    }

    /// Reorders the points along a greedy nearest-neighbour tour starting at
    /// the first point. `Phi^(m)` is unchanged.
    pub fn nearest_neighbor_order(&self) -> Self {
        let m = self.points.len();
        if m == 0 {
            return self.clone();
        }
        let mut used = vec![false; m];
        let mut order = vec![0usize];
        used[0] = true;
        for _ in 1..m {
            let last = self.points[*order.last().expect("non-empty")];
            let next = (0..m)
                .filter(|&i| !used[i])
                .min_by(|&a, &b| {
                    last.distance(&self.points[a]).total_cmp(&last.distance(&self.points[b]))
                })
                .expect("unused point remains");
            used[next] = true;
            order.push(next);
        }
        Configuration { points: order.into_iter().map(|i| self.points[i]).collect() }
    }
}

fn regularized_solve(jac: &DMatrix<f64>, rhs: &DVector<f64>, rel_mu: f64) -> DVector<f64> {
    let n = jac.nrows();
    let mut g = jac * jac.transpose();
    let scale = (0..n).map(|i| g[(i, i)]).sum::<f64>() / n.max(1) as f64;
    let mu = rel_mu * scale.max(1e-300);
    for i in 0..n {
        g[(i, i)] += mu;
    }
    let y = g.cholesky().expect("regularized Gram matrix is positive definite").solve(rhs);
    jac.transpose() * y
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZeroSearchOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub retries: usize,
    pub max_doublings: usize,
    /// Threshold on the smallest singular value of the Jacobian.
    pub sigma_min: f64,
    /// Reject zeros whose Jacobian is not certified surjective.
    pub require_surjective: bool,
}

impl Default for ZeroSearchOptions {
    fn default() -> Self {
        ZeroSearchOptions {
            tol: 1e-10,
            max_iter: 300,
            retries: 8,
            max_doublings: 3,
            sigma_min: 1e-6,
            require_surjective: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroConfig {
    pub config: Configuration,
    pub m: usize,
    pub residual: f64,
    /// Smallest singular value of the Jacobian at the zero.
    pub sigma_min: f64,
    /// Whether the zero lies in `Y^(m)` (surjective differential).
    pub surjective: bool,
    pub iterations: usize,
    pub attempts: usize,
}

fn smallest_singular_value(jac: &DMatrix<f64>) -> f64 {
    let k = jac.nrows().min(jac.ncols());
    let sv = jac.clone().svd(false, false).singular_values;
    if jac.nrows() > jac.ncols() {
        return 0.0;
    }
    sv.iter().take(k).cloned().fold(f64::INFINITY, f64::min)
}

fn levenberg_marquardt(
    basis: &FunctionSpaceBasis,
    start: Configuration,
    opts: &ZeroSearchOptions,
) -> (Configuration, f64, usize) {
    let mut x = start;
    let (mut f, mut jac) = x.phi_and_jacobian(basis);
    let mut norm = f.norm();
    let mut mu = 1e-3;
    let mut it = 0;
    while it < opts.max_iter && norm >= opts.tol {
        it += 1;
        let delta = -regularized_solve(&jac, &f, mu);
        let trial = x.perturbed(&delta);
        let (tf, tj) = trial.phi_and_jacobian(basis);
        let tn = tf.norm();
        if tn < norm {
            x = trial;
            f = tf;
            jac = tj;
            norm = tn;
            mu = (mu / 3.0).max(1e-15);
        } else {
            mu *= 4.0;
            if mu > 1e8 {
                break;
            }
        }
    }
    (x, norm, it)
}

/// Randomized Levenberg-Marquardt on `SU(2)^m` for `Phi^(m) = 0`, with
/// retries and then doubling of `m`.
pub fn find_zero_config(
    basis: &FunctionSpaceBasis,
    m: usize,
    seed: u64,
    opts: &ZeroSearchOptions,
) -> Result<ZeroConfig> {
    let n = basis.len();
    if m * basis.manifold_dim() < n || m < 2 {
        return Err(Error::InvalidParameter(format!(
            "m = {m} is too small: m * dim(SU(2)) = {} must be at least N = {n}",
            m * basis.manifold_dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mm = m;
    let mut attempts = 0;
    let mut best: Option<ZeroConfig> = None;
    for _ in 0..=opts.max_doublings {
        for _ in 0..opts.retries.max(1) {
            attempts += 1;
            let start = Configuration::random(mm, &mut rng);
            let (x, res, its) = levenberg_marquardt(basis, start, opts);
            if res >= opts.tol {
                continue;
            }
            let (_, jac) = x.phi_and_jacobian(basis);
            let smin = smallest_singular_value(&jac);
            let found = ZeroConfig {
                config: x,
                m: mm,
                residual: res,
                sigma_min: smin,
                surjective: smin > opts.sigma_min,
                iterations: its,
                attempts,
            };
            if found.surjective || !opts.require_surjective {
                return Ok(found);
            }
            if best.is_none() {
                best = Some(found);
            }
        }
        mm *= 2;
    }
    Err(Error::SolverFailure(match best {
        Some(b) => format!(
            "zeros found (best residual {:.3e}) but none with a surjective differential: \
             smallest singular value {:.3e} after {attempts} attempts up to m = {}",
            b.residual, b.sigma_min, mm / 2
        ),
        None => format!("no zero of Phi^(m) found after {attempts} attempts up to m = {}", mm / 2),
    }))
}

/// Gauss-Newton iteration for the point of `Z^(m)` nearest to `anchor`,
/// started at `start`. Returns the point and the final `|Phi^(m)|`.
fn project_to_zero_set(
    basis: &FunctionSpaceBasis,
    start: &Configuration,
    anchor: &Configuration,
    tol: f64,
) -> Option<(Configuration, f64)> {
    let mut x = start.clone();
    let m = x.len();
    let mut last_step = f64::INFINITY;
    let mut fnorm = f64::INFINITY;
    for _ in 0..120 {
        let (f, jac) = x.phi_and_jacobian(basis);
        fnorm = f.norm();
        let mut d = DVector::zeros(3 * m);
        for k in 0..m {
            let v = su2_log(&su2_mul(&anchor.points[k], &su2_inv(&x.points[k])));
            for a in 0..3 {
                d[3 * k + a] = v[a];
            }
        }
        let rhs = &f + &jac * &d;
        let mut delta = d - regularized_solve(&jac, &rhs, 1e-14);
        let big = (0..m)
            .map(|k| (delta[3 * k].powi(2) + delta[3 * k + 1].powi(2) + delta[3 * k + 2].powi(2)).sqrt())
            .fold(0.0, f64::max);
        if big > 0.5 {
            delta *= 0.5 / big;
        }
        last_step = big;
        if big < 1e-12 && fnorm < tol {
            return Some((x, fnorm));
        }
        if !fnorm.is_finite() {
            return None;
        }
        x = x.perturbed(&delta);
    }
    let fnorm_final = x.phi(basis).norm();
    if fnorm_final < tol && last_step < 1e-7 {
        Some((x, fnorm_final.min(fnorm)))
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PathOptions {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Largest chordal move of any point between consecutive nodes.
    pub max_move: f64,
    pub max_nodes: usize,
    pub tol: f64,
}

impl Default for PathOptions {
    fn default() -> Self {
        PathOptions {
            initial_step: 1.0 / 16.0,
            min_step: 1e-7,
            max_step: 0.25,
            max_move: 0.25,
            max_nodes: 20_000,
            tol: 1e-11,
        }
    }
}

/// Nodes of a continuation path in `Z^(m)` from `z` to `sigma(z)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShiftPath {
    pub start: Configuration,
    /// Path parameters of the nodes, from 0 to 1.
    pub lambdas: Vec<f64>,
    pub nodes: Vec<Configuration>,
    pub max_defect: f64,
}

impl ShiftPath {
    fn anchor(&self, lambda: f64) -> Configuration {
        anchor_at(&self.start, lambda)
    }
}

/// Coordinatewise one-parameter interpolation from `z` to `sigma(z)`.
fn anchor_at(z: &Configuration, lambda: f64) -> Configuration {
    let m = z.len();
    Configuration {
        points: (0..m)
            .map(|k| su2_geodesic(&z.points[k], &z.points[(k + 1) % m], lambda))
            .collect(),
    }
}

/// Predictor-corrector continuation: the anchor moves each `x_k` towards
/// `x_{k+1}` along a one-parameter path; every node is the nearest point of
/// `Z^(m)` to its anchor, found from the previous node.
pub fn shift_path(basis: &FunctionSpaceBasis, zbar: &Configuration, opts: &PathOptions) -> Result<ShiftPath> {
    let start_defect = zbar.phi(basis).norm();
    if !(start_defect < 1e-9) {
        return Err(Error::InvalidParameter(format!(
            "start configuration is not a zero: |Phi| = {start_defect:.3e}"
        )));
    }
    let target = zbar.shifted();
    let mut path = ShiftPath {
        start: zbar.clone(),
        lambdas: vec![0.0],
        nodes: vec![zbar.clone()],
        max_defect: start_defect,
    };
    if zbar.distance(&target) < 1e-14 {
        return Ok(path);
    }
    let mut lambda = 0.0;
    let mut h = opts.initial_step;
    let mut x = zbar.clone();
    while lambda < 1.0 {
        if path.nodes.len() >= opts.max_nodes {
            return Err(Error::SolverFailure(format!(
                "continuation exceeded {} nodes at lambda = {lambda:.6}",
                opts.max_nodes
            )));
        }
        let next = (lambda + h).min(1.0);
        let a0 = path.anchor(lambda);
        let a1 = path.anchor(next);
        // translate the current node along with the anchor
        let predicted = Configuration {
            points: (0..x.len())
                .map(|k| su2_mul(&su2_mul(&a1.points[k], &su2_inv(&a0.points[k])), &x.points[k]).normalized())
                .collect(),
        };
        match project_to_zero_set(basis, &predicted, &a1, opts.tol) {
            Some((y, defect)) if y.distance(&x) <= opts.max_move => {
                lambda = next;
                x = y;
                path.max_defect = path.max_defect.max(defect);
                path.lambdas.push(lambda);
                path.nodes.push(x.clone());
                h = (h * 1.5).min(opts.max_step);
            }
            _ => {
                h *= 0.5;
                if h < opts.min_step {
                    return Err(Error::SolverFailure(format!(
                        "continuation obstructed at lambda = {lambda:.6}: the corrector does not \
                         converge for steps down to {:.1e}",
                        opts.min_step
                    )));
                }
            }
        }
    }
    let gap = x.distance(&target);
    if gap > 1e-8 {
        return Err(Error::SolverFailure(format!(
            "continuation ended {gap:.3e} away from sigma(z)"
        )));
    }
    *path.nodes.last_mut().expect("non-empty") = target;
    Ok(path)
}

/// A loop `theta` with `sum_{j<m} phi(theta(t + j/m)) = 0` for `phi` in `E`.
#[derive(Debug, Clone)]
pub struct EquidistributedLoop {
    pub basis: FunctionSpaceBasis,
    pub m: usize,
    pub path: ShiftPath,
    /// Flat margin of the reparametrization `rho`.
    pub delta: f64,
    pub seed: Option<u64>,
    pub defect: f64,
}

/// `theta_tilde` restricted to `[0, 1/m]`, with `s = m t` in `[0, 1]`:
/// the nearest point of `Z^(m)` to the anchor at `rho(s)`.
pub fn synthesize_loop(basis: &FunctionSpaceBasis, path: ShiftPath, delta: f64, seed: Option<u64>) -> EquidistributedLoop {
    let m = path.start.len();
    let mut l = EquidistributedLoop { basis: basis.clone(), m, path, delta, seed, defect: 0.0 };
    l.defect = l.path.max_defect;
    l
}

impl EquidistributedLoop {
    /// `theta_tilde(s / m)` for `s` in `[0, 1]`.
    pub fn segment(&self, s: f64) -> Configuration {
        let tau = rho(s.clamp(0.0, 1.0), self.delta);
        let lambdas = &self.path.lambdas;
        let nodes = &self.path.nodes;
        if nodes.len() == 1 {
            return nodes[0].clone();
        }
        if tau <= 0.0 {
            return nodes[0].clone();
        }
        if tau >= 1.0 {
            return nodes[nodes.len() - 1].clone();
        }
        let i = match lambdas.binary_search_by(|l| l.total_cmp(&tau)) {
            Ok(i) => return nodes[i].clone(),
            Err(i) => i - 1,
        };
        let u = (tau - lambdas[i]) / (lambdas[i + 1] - lambdas[i]);
        let warm = Configuration {
            points: nodes[i]
                .points
                .iter()
                .zip(&nodes[i + 1].points)
                .map(|(a, b)| su2_geodesic(a, b, u))
                .collect(),
        };
        let anchor = self.path.anchor(tau);
        match project_to_zero_set(&self.basis, &warm, &anchor, 1e-12) {
            Some((y, _)) => y,
            None => {
                log::warn!("projection failed at s = {s}; using the interpolated nodes");
                warm
            }
        }
    }

    /// `theta_tilde(t)` on all of `T`, using `theta_tilde(t + 1/m) = sigma(theta_tilde(t))`.
    pub fn theta_tilde(&self, t: f64) -> Configuration {
        let x = t.rem_euclid(1.0) * self.m as f64;
        let r = (x.floor() as usize).min(self.m - 1);
        let mut c = self.segment(x - r as f64);
        c.points.rotate_left(r);
        c
    }

    /// `theta(t)`, the first coordinate of `theta_tilde(t)`.
    pub fn theta(&self, t: f64) -> CompactPoint {
        let x = t.rem_euclid(1.0) * self.m as f64;
        let r = (x.floor() as usize).min(self.m - 1);
        self.segment(x - r as f64).points[r]
    }

    /// `samples` equally spaced values of `theta` over `[0, 1)`.
    pub fn samples(&self, samples: usize) -> Vec<(f64, CompactPoint)> {
        (0..samples)
            .into_par_iter()
            .map(|i| {
                let t = i as f64 / samples as f64;
                (t, self.theta(t))
            })
            .collect()
    }

    pub fn as_group_loop(self: &Arc<Self>) -> GroupLoop<Su2> {
        let me = Arc::clone(self);
        GroupLoop::custom(Su2, move |t| me.theta(t), 1)
    }

    pub fn manifest(&self) -> LoopManifest {
        LoopManifest {
            m: self.m,
            spins: self.basis.spins().iter().map(|s| s.to_string()).collect(),
            basis: self.basis.descriptor(),
            delta: self.delta,
            seed: self.seed,
            defect: self.defect,
            path: self.path.clone(),
        }
    }

    pub fn from_manifest(man: &LoopManifest) -> Result<Self> {
        let spins = man.spins.iter().map(|s| Spin::parse(s)).collect::<Result<Vec<_>>>()?;
        let basis = FunctionSpaceBasis::from_spins(&spins)?;
        if man.path.start.len() != man.m || man.path.nodes.len() != man.path.lambdas.len() {
            return Err(Error::InvalidParameter("inconsistent loop manifest".into()));
        }
        Ok(EquidistributedLoop {
            basis,
            m: man.m,
            path: man.path.clone(),
            delta: man.delta,
            seed: man.seed,
            defect: man.defect,
        })
    }
}

/// Serializable description of a loop, sufficient to rebuild it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoopManifest {
    pub m: usize,
    pub spins: Vec<String>,
    pub basis: String,
    pub delta: f64,
    pub seed: Option<u64>,
    pub defect: f64,
    pub path: ShiftPath,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquidistributionReport {
    pub m: usize,
    pub grid: usize,
    pub translates: usize,
    /// `max_t max_phi |sum_j phi(theta(t + j/m))|`.
    pub max_defect: f64,
    /// Same with `theta` replaced by `theta x` for random `x`.
    pub max_translated_defect: f64,
    /// `max |sum_j phi(theta(t + j/m)) - Phi^(m)(theta_tilde(t))|`.
    pub equivariance_gap: f64,
    pub contains_constant: bool,
    pub passed: bool,
}

/// Checks `sum_{j<m} phi(theta(t + j/m) x) = 0` on `grid` values of `t`, for
/// `x = 1` and `translates` random `x`.
pub fn verify_equidistribution_fn<F>(
    theta: F,
    m: usize,
    basis: &FunctionSpaceBasis,
    translates: usize,
    grid: usize,
    seed: u64,
    tol: f64,
) -> EquidistributionReport
where
    F: Fn(f64) -> CompactPoint + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<CompactPoint> = (0..translates).map(|_| CompactPoint::random(&mut rng)).collect();
    let per_t: Vec<(f64, f64)> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let t = (i as f64 + 0.5) / grid as f64;
            let pts: Vec<CompactPoint> = (0..m).map(|j| theta(t + j as f64 / m as f64)).collect();
            let sum_at = |x: Option<&CompactPoint>| {
                let mut acc = vec![0.0; basis.len()];
                for p in &pts {
                    let g = match x {
                        Some(x) => su2_mul(p, x),
                        None => *p,
                    };
                    for (a, v) in acc.iter_mut().zip(basis.values(&g)) {
                        *a += v;
                    }
                }
                acc.iter().map(|v| v.abs()).fold(0.0, f64::max)
            };
            let plain = sum_at(None);
            let moved = xs.iter().map(|x| sum_at(Some(x))).fold(0.0, f64::max);
            (plain, moved)
        })
        .collect();
    let max_defect = per_t.iter().map(|p| p.0).fold(0.0, f64::max);
    let max_translated = per_t.iter().map(|p| p.1).fold(0.0, f64::max);
    EquidistributionReport {
        m,
        grid,
        translates,
        max_defect,
        max_translated_defect: max_translated,
        equivariance_gap: 0.0,
        contains_constant: basis.has_constant(),
        passed: max_defect < tol && max_translated < tol && !basis.has_constant(),
    }
}

/// [`verify_equidistribution_fn`] for a synthesized loop, also comparing the
/// `m`-point sums with `Phi^(m)(theta_tilde(t))`.
pub fn verify_equidistribution(
    lp: &EquidistributedLoop,
    basis: &FunctionSpaceBasis,
    translates: usize,
    grid: usize,
    seed: u64,
    tol: f64,
) -> EquidistributionReport {
    let mut rep = verify_equidistribution_fn(|t| lp.theta(t), lp.m, basis, translates, grid, seed, tol);
    let gap = (0..grid.min(64))
        .into_par_iter()
        .map(|i| {
            let t = (i as f64 + 0.5) / grid as f64;
            let direct: Vec<f64> = (0..lp.m)
                .map(|j| basis.values(&lp.theta(t + j as f64 / lp.m as f64)))
                .fold(vec![0.0; basis.len()], |mut acc, v| {
                    acc.iter_mut().zip(v).for_each(|(a, b)| *a += b);
                    acc
                });
            let tilde = lp.theta_tilde(t).phi(basis);
            direct.iter().zip(tilde.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    rep.equivariance_gap = gap;
    rep
}

#[derive(Debug, Clone, Serialize)]
pub struct QuotientReport {
    pub subgroup: Subgroup,
    /// Numerical dimension of `Pi_H(E)`.
    pub projected_dim: usize,
    /// `Pi_H(E) = {0}`: the check is empty.
    pub vacuous: bool,
    pub max_defect: f64,
    pub passed: bool,
}

/// Composes `theta` with the coset map and checks the `m`-point sums of
/// `Pi_H(E)` along the projected loop.
pub fn project_loop_to_quotient<F>(
    theta: F,
    m: usize,
    basis: &FunctionSpaceBasis,
    spec: QuotientSpec,
    grid: usize,
    tol: f64,
) -> QuotientReport
where
    F: Fn(f64) -> CompactPoint + Sync,
{
    let band = Spin::from_twice(2 * basis.spins().last().map(|s| s.twice()).unwrap_or(1));
    let nodes = haar_quadrature(band);
    let hs = spec.nodes();
    // Pi_H Phi(g) = average over H of Phi(g h)
    let projected = |g: &CompactPoint| {
        let mut acc = vec![0.0; basis.len()];
        for h in &hs {
            for (a, v) in acc.iter_mut().zip(basis.values(&su2_mul(g, h))) {
                *a += v;
            }
        }
        acc.iter_mut().for_each(|a| *a /= hs.len() as f64);
        acc
    };
    let vals: Vec<Vec<f64>> = nodes.iter().map(|n| projected(&n.point)).collect();
    let k = basis.len();
    let gram = DMatrix::from_fn(k, k, |i, j| {
        vals.iter().zip(&nodes).map(|(v, n)| v[i] * v[j] * n.weight).sum::<f64>()
    });
    let eig = gram.symmetric_eigenvalues();
    let top = eig.iter().cloned().fold(0.0, f64::max);
    let projected_dim = eig.iter().filter(|&&e| e > 1e-12 && e > 1e-10 * top).count();
    let represent = |g: &CompactPoint| match spec.subgroup {
        Subgroup::Trivial => *g,
        Subgroup::DiagonalCircle => sphere_section(spec.coset_point(g)),
    };
    let max_defect = (0..grid)
        .into_par_iter()
        .map(|i| {
            let t = (i as f64 + 0.5) / grid as f64;
            let mut acc = vec![0.0; k];
            for j in 0..m {
                let p = represent(&theta(t + j as f64 / m as f64));
                acc.iter_mut().zip(projected(&p)).for_each(|(a, v)| *a += v);
            }
            acc.iter().map(|v| v.abs()).fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    QuotientReport {
        subgroup: spec.subgroup,
        projected_dim,
        vacuous: projected_dim == 0,
        max_defect,
        passed: max_defect < tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_dimensions() {
        let half = FunctionSpaceBasis::from_spins(&[Spin::from_twice(1)]).unwrap();
        assert_eq!(half.len(), 4);
        let one = FunctionSpaceBasis::from_spins(&[Spin::from_twice(2)]).unwrap();
        assert_eq!(one.len(), 9);
        assert!(one.min_gram_eigenvalue() > 1e-8);
    }

    #[test]
    fn antipodal_zero() {
        let half = FunctionSpaceBasis::from_spins(&[Spin::from_twice(1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = Configuration::antipodal(CompactPoint::random(&mut rng));
        assert!(z.phi(&half).norm() < 1e-15);
        // the differential has rank 3 < N = 4 there
        let (_, j) = z.phi_and_jacobian(&half);
        assert!(smallest_singular_value(&j) < 1e-12);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let b = FunctionSpaceBasis::from_spins(&[Spin::from_twice(1), Spin::from_twice(2)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = Configuration::random(3, &mut rng);
        let (_, j) = x.phi_and_jacobian(&b);
        let h = 1e-6;
        for c in 0..9 {
            let mut e = DVector::zeros(9);
            e[c] = h;
            let fp = x.perturbed(&e).phi(&b);
            e[c] = -h;
            let fm = x.perturbed(&e).phi(&b);
            let fd = (fp - fm) / (2.0 * h);
            for i in 0..b.len() {
                assert!((fd[i] - j[(i, c)]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn too_small_m_is_rejected() {
        let one = FunctionSpaceBasis::from_spins(&[Spin::from_twice(2)]).unwrap();
        assert!(find_zero_config(&one, 2, 0, &ZeroSearchOptions::default()).is_err());
    }
}
