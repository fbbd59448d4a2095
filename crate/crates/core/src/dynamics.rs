//! Homogeneous skew-products `(t, p) -> (t + alpha, gamma(t) p)`, Birkhoff
//! sums, the periodic coboundary formula and least-squares residuals of the
//! cohomological equation.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::FiberGroup;
use crate::nilgroup::{NilPoint, NilStructure};
use crate::rationals::Fraction;

/// Real profile `t -> s(t)` used by one-parameter loop pieces.
pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

enum LoopNode<G: FiberGroup> {
    Identity,
    Constant(G::Point),
    /// `exp(profile(t) * direction)`.
    OneParameter { direction: Vec<f64>, profile: Profile },
    /// Pointwise product, left to right.
    Product(Vec<GroupLoop<G>>),
    /// `t -> gamma(t + shift)`.
    Shift(GroupLoop<G>, f64),
    Inverse(GroupLoop<G>),
    /// `t -> gamma(n t)`.
    Rescale(GroupLoop<G>, u64),
    Custom(Arc<dyn Fn(f64) -> G::Point + Send + Sync>),
}

/// A closed curve `T -> G` stored as a small evaluation program.
///
/// `period_divisor` is a declared integer `P` with `gamma(t + 1/P) = gamma(t)`;
/// `0` marks a constant loop, which is periodic for every `P`.
#[derive(Clone)]
pub struct GroupLoop<G: FiberGroup> {
    group: G,
    node: Arc<LoopNode<G>>,
    period_divisor: u64,
}

impl<G: FiberGroup> fmt::Debug for GroupLoop<G> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &*self.node {
            LoopNode::Identity => "identity",
            LoopNode::Constant(_) => "constant",
            LoopNode::OneParameter { .. } => "one-parameter",
            LoopNode::Product(_) => "product",
            LoopNode::Shift(..) => "shift",
            LoopNode::Inverse(_) => "inverse",
            LoopNode::Rescale(..) => "rescale",
            LoopNode::Custom(_) => "custom",
        };
        write!(f, "GroupLoop({kind}, period divisor {})", self.period_divisor)
    }
}

impl<G: FiberGroup> GroupLoop<G> {
    fn wrap(group: G, node: LoopNode<G>, period_divisor: u64) -> Self {
        GroupLoop { group, node: Arc::new(node), period_divisor }
    }

    pub fn identity(group: G) -> Self {
        Self::wrap(group, LoopNode::Identity, 0)
    }

    pub fn constant(group: G, p: G::Point) -> Self {
        Self::wrap(group, LoopNode::Constant(p), 0)
    }

    /// `t -> exp(profile(t) v)`; the caller declares the period divisor of the
    /// profile, which must be 1-periodic.
    pub fn one_parameter(group: G, direction: Vec<f64>, profile: Profile, period_divisor: u64) -> Self {
        Self::wrap(group, LoopNode::OneParameter { direction, profile }, period_divisor)
    }

    pub fn custom<F>(group: G, f: F, period_divisor: u64) -> Self
    where
        F: Fn(f64) -> G::Point + Send + Sync + 'static,
    {
        Self::wrap(group, LoopNode::Custom(Arc::new(f)), period_divisor)
    }

    pub fn product(factors: Vec<GroupLoop<G>>) -> Self {
        let group = factors.first().expect("non-empty product").group.clone();
        let p = factors.iter().fold(0u64, |acc, f| acc.gcd(&f.period_divisor));
        Self::wrap(group, LoopNode::Product(factors), p)
    }

    pub fn mul(&self, other: &GroupLoop<G>) -> Self {
        Self::product(vec![self.clone(), other.clone()])
    }

    pub fn shift(&self, s: f64) -> Self {
        Self::wrap(self.group.clone(), LoopNode::Shift(self.clone(), s), self.period_divisor)
    }

    pub fn inverse(&self) -> Self {
        Self::wrap(self.group.clone(), LoopNode::Inverse(self.clone()), self.period_divisor)
    }

    pub fn rescale(&self, n: u64) -> Self {
        Self::wrap(
            self.group.clone(),
            LoopNode::Rescale(self.clone(), n),
            self.period_divisor.saturating_mul(n),
        )
    }

    pub fn group(&self) -> &G {
        &self.group
    }

    pub fn period_divisor(&self) -> u64 {
        self.period_divisor
    }

    /// Whether the loop is declared `1/q`-periodic.
    pub fn commutes_with_rotation(&self, q: u64) -> bool {
        self.period_divisor == 0 || self.period_divisor.is_multiple_of(q)
    }

    pub fn eval(&self, t: f64) -> G::Point {
        match &*self.node {
            LoopNode::Identity => self.group.identity(),
            LoopNode::Constant(p) => p.clone(),
            LoopNode::OneParameter { direction, profile } => {
                let s = profile(t.rem_euclid(1.0));
                let v: Vec<f64> = direction.iter().map(|x| x * s).collect();
                self.group.exp(&v)
            }
            LoopNode::Product(fs) => {
                let mut acc = fs[0].eval(t);
                for f in &fs[1..] {
                    acc = self.group.mul(&acc, &f.eval(t));
                }
                acc
            }
            LoopNode::Shift(g, s) => g.eval(t + s),
            LoopNode::Inverse(g) => self.group.inv(&g.eval(t)),
            LoopNode::Rescale(g, n) => g.eval((*n as f64 * t).rem_euclid(1.0)),
            LoopNode::Custom(f) => f(t.rem_euclid(1.0)),
        }
    }
}

/// A point of `T x P`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberPoint<P> {
    pub t: f64,
    pub p: P,
}

impl<P> FiberPoint<P> {
    pub fn new(t: f64, p: P) -> Self {
        FiberPoint { t: t.rem_euclid(1.0), p }
    }
}

/// The map `(t, p) -> (t + alpha, gamma(t) p)`.
#[derive(Clone, Debug)]
pub struct SkewProduct<G: FiberGroup> {
    alpha: f64,
    exact_alpha: Option<Fraction>,
    gamma: GroupLoop<G>,
}

impl<G: FiberGroup> SkewProduct<G> {
    pub fn new(alpha: f64, gamma: GroupLoop<G>) -> Self {
        SkewProduct { alpha, exact_alpha: None, gamma }
    }

    pub fn rational(alpha: Fraction, gamma: GroupLoop<G>) -> Self {
        SkewProduct { alpha: alpha.fract(), exact_alpha: Some(alpha), gamma }
    }

    /// The rotation `T_alpha` with trivial fiber action.
    pub fn rotation(group: G, alpha: Fraction) -> Self {
        Self::rational(alpha, GroupLoop::identity(group))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn exact_alpha(&self) -> Option<Fraction> {
        self.exact_alpha
    }

    pub fn gamma(&self) -> &GroupLoop<G> {
        &self.gamma
    }

    pub fn group(&self) -> &G {
        self.gamma.group()
    }

    pub fn apply(&self, z: &FiberPoint<G::Point>) -> FiberPoint<G::Point> {
        let g = self.group();
        let p = g.mul(&self.gamma.eval(z.t), &z.p);
        FiberPoint::new(z.t + self.alpha, g.canonical(&p))
    }

    pub fn apply_inverse(&self, z: &FiberPoint<G::Point>) -> FiberPoint<G::Point> {
        let g = self.group();
        let t = (z.t - self.alpha).rem_euclid(1.0);
        let p = g.mul(&g.inv(&self.gamma.eval(t)), &z.p);
        FiberPoint::new(t, g.canonical(&p))
    }

    /// Iterates `f^n` for any integer `n`.
    pub fn iterate(&self, z: &FiberPoint<G::Point>, n: i64) -> FiberPoint<G::Point> {
        let mut cur = z.clone();
        for _ in 0..n.unsigned_abs() {
            cur = if n > 0 { self.apply(&cur) } else { self.apply_inverse(&cur) };
        }
        cur
    }

    /// `f o g`: `alpha = alpha_f + alpha_g`, `gamma(t) = gamma_f(t + alpha_g) gamma_g(t)`.
    pub fn compose(&self, other: &SkewProduct<G>) -> Result<SkewProduct<G>> {
        if !self.group().compatible(other.group()) {
            return Err(Error::IncompatibleGroups);
        }
        let gamma = GroupLoop::product(vec![self.gamma.shift(other.alpha), other.gamma.clone()]);
        let exact = match (self.exact_alpha, other.exact_alpha) {
            (Some(a), Some(b)) => Fraction::new(
                a.numer() * b.denom() + b.numer() * a.denom(),
                a.denom() * b.denom(),
            )
            .ok(),
            _ => None,
        };
        Ok(SkewProduct { alpha: (self.alpha + other.alpha).rem_euclid(1.0), exact_alpha: exact, gamma })
    }

    /// The inverse map as a skew-product: `alpha -> -alpha`,
    /// `gamma(t) -> gamma(t - alpha)^-1`.
    pub fn inverse(&self) -> SkewProduct<G> {
        let exact = self.exact_alpha.and_then(|a| Fraction::new(-a.numer(), a.denom()).ok());
        SkewProduct {
            alpha: (-self.alpha).rem_euclid(1.0),
            exact_alpha: exact,
            gamma: self.gamma.shift(-self.alpha).inverse(),
        }
    }
}

/// `H_gamma T_{p/q} H_gamma^-1`: `(t, x) -> (t + p/q, gamma(t + p/q) gamma(t)^-1 x)`.
pub fn conjugated_rotation<G: FiberGroup>(gamma: &GroupLoop<G>, pq: Fraction) -> SkewProduct<G> {
    let alpha = pq.fract();
    let loop_ = GroupLoop::product(vec![gamma.shift(alpha), gamma.inverse()]);
    SkewProduct::rational(pq, loop_)
}

/// The fiber map `H_gamma(t, x) = (t, gamma(t) x)` as a skew-product with `alpha = 0`.
pub fn fiber_conjugacy<G: FiberGroup>(gamma: &GroupLoop<G>) -> SkewProduct<G> {
    SkewProduct::new(0.0, gamma.clone())
}

/// `S^n phi(z)` with the conventions `S^0 = 0` and
/// `S^n = -sum_{i=1}^{-n} phi o f^{-i}` for `n < 0`.
pub fn birkhoff_sum<G, F>(f: &SkewProduct<G>, phi: F, n: i64, z: &FiberPoint<G::Point>) -> Complex64
where
    G: FiberGroup,
    F: Fn(&FiberPoint<G::Point>) -> Complex64,
{
    let mut acc = Complex64::new(0.0, 0.0);
    if n > 0 {
        let mut cur = z.clone();
        for i in 0..n {
            acc += phi(&cur);
            if i + 1 < n {
                cur = f.apply(&cur);
            }
        }
    } else if n < 0 {
        let mut cur = z.clone();
        for _ in 0..(-n) {
            cur = f.apply_inverse(&cur);
            acc -= phi(&cur);
        }
    }
    acc
}

/// The solution `u = -(1/q) sum_{j=1}^{q} S^j phi` of `u o f - u = phi`
/// when `f^q = id` and `S^q phi = 0`.
pub struct PeriodicCoboundary<G: FiberGroup, F> {
    f: SkewProduct<G>,
    phi: F,
    q: u64,
}

impl<G, F> PeriodicCoboundary<G, F>
where
    G: FiberGroup,
    F: Fn(&FiberPoint<G::Point>) -> Complex64,
{
    /// `u(z) = -(1/q) sum_{i<q} (q - i) phi(f^i z)`, one orbit of length `q`.
    pub fn eval(&self, z: &FiberPoint<G::Point>) -> Complex64 {
        let q = self.q as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut cur = z.clone();
        for i in 0..self.q {
            acc += (self.phi)(&cur) * (q - i as f64);
            if i + 1 < self.q {
                cur = self.f.apply(&cur);
            }
        }
        -acc / q
    }

    pub fn period(&self) -> u64 {
        self.q
    }
}

/// From the orbit values `phi(f^i z)`, `i = 0..=q`, returns `|S^q phi(z)|` and
/// `|u(f z) - u(z) - phi(z)|` for `u = -(1/q) sum_{i<q} (q - i) phi o f^i`.
pub fn coboundary_check_from_orbit(vals: &[Complex64]) -> (f64, f64) {
    let q = vals.len() - 1;
    let qf = q as f64;
    let full: Complex64 = vals[..q].iter().sum();
    let weighted = |s: &[Complex64]| -> Complex64 {
        -s.iter().enumerate().map(|(i, v)| v * (qf - i as f64)).sum::<Complex64>() / qf
    };
    let u0 = weighted(&vals[..q]);
    let u1 = weighted(&vals[1..]);
    (full.norm(), (u1 - u0 - vals[0]).norm())
}

#[derive(Debug, Clone, Serialize)]
pub struct CoboundaryReport {
    pub q: u64,
    pub grid_points: usize,
    /// `max |S^q phi|` over the grid.
    pub max_full_sum: f64,
    /// `max |u o f - u - phi|` over the grid.
    pub residual: f64,
}

/// Lemma-style periodic solver: checks `S^q phi = 0` on the grid, builds `u`
/// by the closed formula and measures the residual of `u o f - u = phi`.
pub fn solve_coboundary_periodic<G, F>(
    f: &SkewProduct<G>,
    phi: F,
    q: u64,
    grid: &[FiberPoint<G::Point>],
    tol: f64,
) -> Result<(PeriodicCoboundary<G, F>, CoboundaryReport)>
where
    G: FiberGroup,
    F: Fn(&FiberPoint<G::Point>) -> Complex64 + Sync,
{
    if q == 0 {
        return Err(Error::InvalidParameter("period q must be positive".into()));
    }
    let sums: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|z| {
            let mut vals = Vec::with_capacity(q as usize + 1);
            let mut cur = z.clone();
            for _ in 0..=q {
                vals.push(phi(&cur));
                cur = f.apply(&cur);
            }
            coboundary_check_from_orbit(&vals)
        })
        .collect();
    let max_full = sums.iter().map(|s| s.0).fold(0.0, f64::max);
    let residual = sums.iter().map(|s| s.1).fold(0.0, f64::max);
    if !(max_full < tol) {
        return Err(Error::NotCoboundary { max_sum: max_full, tol });
    }
    let report = CoboundaryReport { q, grid_points: grid.len(), max_full_sum: max_full, residual };
    Ok((PeriodicCoboundary { f: f.clone(), phi, q }, report))
}

/// A test function on `T x P` shared across threads.
pub type FiberFunction<P> = Arc<dyn Fn(&FiberPoint<P>) -> Complex64 + Send + Sync>;

#[derive(Debug, Clone, Serialize)]
pub struct DueResidual {
    /// `max |u o f - u - phi|` over the grid at the least-squares minimizer.
    pub sup: f64,
    /// Root mean square of the same residual.
    pub rms: f64,
    pub basis_size: usize,
    pub rank: usize,
    pub grid_points: usize,
    #[serde(skip)]
    pub coefficients: Vec<Complex64>,
    pub warning: Option<String>,
}

/// Minimizes `||u o f - u - phi||` over `u` in the span of `basis`, in the
/// least-squares sense on the grid, and reports the sup and RMS residuals.
///
/// If every basis function and `phi` are real on the grid a regularized real
/// normal-equation solve is used; otherwise a complex SVD with rank
/// truncation.
pub fn due_residual<G: FiberGroup>(
    f: &SkewProduct<G>,
    phi: &FiberFunction<G::Point>,
    basis: &[FiberFunction<G::Point>],
    grid: &[FiberPoint<G::Point>],
) -> DueResidual {
    let rows: Vec<(Vec<Complex64>, Complex64)> = grid
        .par_iter()
        .map(|z| {
            let fz = f.apply(z);
            let row = basis.iter().map(|b| b(&fz) - b(z)).collect();
            (row, phi(z))
        })
        .collect();
    due_residual_from_rows(&rows, basis.len())
}

/// Same as [`due_residual`] with the difference matrix `psi(f z) - psi(z)` and
/// right side `phi(z)` already tabulated, one row per grid point.
pub fn due_residual_from_rows(rows: &[(Vec<Complex64>, Complex64)], nb: usize) -> DueResidual {
    let ng = rows.len();
    let zero = DueResidual {
        sup: rows.iter().map(|r| r.1.norm()).fold(0.0, f64::max),
        rms: (rows.iter().map(|r| r.1.norm_sqr()).sum::<f64>() / ng.max(1) as f64).sqrt(),
        basis_size: nb,
        rank: 0,
        grid_points: ng,
        coefficients: vec![Complex64::new(0.0, 0.0); nb],
        warning: None,
    };
    if nb == 0 || ng == 0 {
        return zero;
    }
    let real = rows.iter().all(|(r, _)| r.iter().all(|z| z.im == 0.0));
    let (coeffs, rank, warning) = if real { solve_real(rows, nb) } else { solve_complex(rows, nb) };
    let resid: Vec<f64> = rows
        .iter()
        .map(|(r, rhs)| {
            let fit: Complex64 = r.iter().zip(&coeffs).map(|(a, c)| a * c).sum();
            (fit - rhs).norm()
        })
        .collect();
    DueResidual {
        sup: resid.iter().cloned().fold(0.0, f64::max),
        rms: (resid.iter().map(|r| r * r).sum::<f64>() / ng as f64).sqrt(),
        basis_size: nb,
        rank,
        grid_points: ng,
        coefficients: coeffs,
        warning,
    }
}

fn solve_complex(rows: &[(Vec<Complex64>, Complex64)], nb: usize) -> (Vec<Complex64>, usize, Option<String>) {
    let ng = rows.len();
    let a = DMatrix::from_fn(ng, nb, |i, j| rows[i].0[j]);
    let b = DVector::from_fn(ng, |i, _| rows[i].1);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cut = smax * 1e-12 * (ng.max(nb) as f64);
    let rank = svd.singular_values.iter().filter(|&&s| s > cut).count();
    let x = svd.solve(&b, cut).expect("u and v were computed");
    let warning = (rank < nb.min(ng)).then(|| {
        format!("rank deficient basis: rank {rank} of {nb}; truncated pseudo-inverse used")
    });
    (x.iter().cloned().collect(), rank, warning)
}

fn solve_real(rows: &[(Vec<Complex64>, Complex64)], nb: usize) -> (Vec<Complex64>, usize, Option<String>) {
    let ng = rows.len();
    let a = DMatrix::from_fn(ng, nb, |i, j| rows[i].0[j].re);
    let br = DVector::from_fn(ng, |i, _| rows[i].1.re);
    let bi = DVector::from_fn(ng, |i, _| rows[i].1.im);
    let at = a.transpose();
    let mut n = &at * &a;
    let scale = (0..nb).map(|i| n[(i, i)]).fold(0.0, f64::max).max(1e-300);
    let mu = scale * 1e-13;
    let weak = (0..nb).filter(|&i| n[(i, i)] < 1e-10 * scale).count();
    for i in 0..nb {
        n[(i, i)] += mu;
    }
    let chol = n.cholesky().expect("regularized normal matrix is positive definite");
    let xr = chol.solve(&(&at * br));
    let xi = chol.solve(&(&at * bi));
    let warning = (weak > 0).then(|| {
        format!("{weak} basis functions are nearly invisible on the grid; Tikhonov regularization applied")
    });
    let coeffs = xr.iter().zip(xi.iter()).map(|(r, i)| Complex64::new(*r, *i)).collect();
    (coeffs, nb - weak, warning)
}

/// The parabolic map `(x, y) -> (x + alpha, y + x)` on `T^2`, written as a
/// skew-product over the rotation with fiber `T = R/Z` and loop `t -> frac(t)`.
pub fn parabolic_map(alpha: f64) -> SkewProduct<NilStructure> {
    let g = NilStructure::abelian(1);
    let gamma = GroupLoop::one_parameter(g, vec![1.0], Arc::new(|t: f64| t), 1);
    SkewProduct::new(alpha, gamma)
}

/// Point of `T x T` for the parabolic map.
pub fn torus_point(x: f64, y: f64) -> FiberPoint<NilPoint> {
    FiberPoint::new(x, NilPoint(vec![y.rem_euclid(1.0)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle() -> NilStructure {
        NilStructure::trivial()
    }

    #[test]
    fn birkhoff_conventions() {
        let f = SkewProduct::rotation(circle(), Fraction::new(1, 3).unwrap());
        let z = FiberPoint::new(0.1, NilPoint(vec![]));
        let phi = |z: &FiberPoint<NilPoint>| Complex64::new((2.0 * PI * z.t).cos(), 0.0);
        assert_eq!(birkhoff_sum(&f, phi, 0, &z), Complex64::new(0.0, 0.0));
        assert_eq!(birkhoff_sum(&f, phi, 1, &z), phi(&z));
        assert!(birkhoff_sum(&f, phi, 3, &z).norm() < 1e-14);
        let back = birkhoff_sum(&f, phi, -1, &z);
        assert!((back + phi(&f.apply_inverse(&z))).norm() < 1e-15);
    }

    #[test]
    fn half_rotation_controls() {
        let f = SkewProduct::rotation(circle(), Fraction::new(1, 2).unwrap());
        let grid: Vec<_> = (0..16).map(|i| FiberPoint::new(i as f64 / 16.0, NilPoint(vec![]))).collect();
        let cos2 = |z: &FiberPoint<NilPoint>| Complex64::new((2.0 * PI * z.t).cos(), 0.0);
        let (_, rep) = solve_coboundary_periodic(&f, cos2, 2, &grid, 1e-10).unwrap();
        assert!(rep.residual < 1e-13);
        let cos4 = |z: &FiberPoint<NilPoint>| Complex64::new((4.0 * PI * z.t).cos(), 0.0);
        match solve_coboundary_periodic(&f, cos4, 2, &grid, 1e-10) {
            Err(Error::NotCoboundary { max_sum, .. }) => assert!((max_sum - 2.0).abs() < 1e-12),
            _ => panic!("expected rejection"),
        }
    }

    #[test]
    fn parabolic_apply() {
        let f = parabolic_map(0.25);
        let z = torus_point(0.5, 0.75);
        let w = f.apply(&z);
        assert!((w.t - 0.75).abs() < 1e-15);
        assert!((w.p.0[0] - 0.25).abs() < 1e-15);
    }
}
