//! `SU(2)` as unit quaternions, its irreducible representations, Haar
//! quadrature, and the averaging projection onto `SU(2)/U(1) = S^2`.
//!
//! Conventions: the quaternion `w + x i + y j + z k` is the matrix
//! `[[a, -conj(b)], [b, conj(a)]]` with `a = w - i z`, `b = y - i x`, and
//! [`su2_exp`] maps a rotation vector `v` to the element rotating by `|v|`
//! about `v / |v|`, so `su2_exp(2 pi n) = -1`.
//!
//! The spin-`j` representation acts on homogeneous polynomials of degree `2j`
//! in `(u, v)` by `P(w) -> P(w U)`, in the orthonormal basis
//! `u^(j+m) v^(j-m) / sqrt((j+m)! (j-m)!)` ordered `m = j, j-1, ..., -j`.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiberGroup;

/// A unit quaternion `(w, x, y, z)` representing an element of `SU(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactPoint(pub [f64; 4]);

impl CompactPoint {
    pub const IDENTITY: CompactPoint = CompactPoint([1.0, 0.0, 0.0, 0.0]);

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        CompactPoint([w, x, y, z]).normalized()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        CompactPoint(self.0.map(|c| c / n))
    }

    pub fn neg(&self) -> Self {
        CompactPoint(self.0.map(|c| -c))
    }

    pub fn dot(&self, other: &CompactPoint) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Chordal distance in `R^4`.
    pub fn distance(&self, other: &CompactPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// The entries `(a, b)` of the defining matrix `[[a, -conj b], [b, conj a]]`.
    pub fn cayley_klein(&self) -> (Complex64, Complex64) {
        let [w, x, y, z] = self.0;
        (Complex64::new(w, -z), Complex64::new(y, -x))
    }

    /// The defining 2x2 unitary matrix.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let (a, b) = self.cayley_klein();
        DMatrix::from_row_slice(2, 2, &[a, -b.conj(), b, a.conj()])
    }

    /// Rotation of `R^3` induced by conjugation `v -> g v g^-1`.
    pub fn rotate(&self, v: [f64; 3]) -> [f64; 3] {
        let [w, x, y, z] = self.0;
        let q = [x, y, z];
        let t = cross(&q, &v).map(|c| 2.0 * c);
        let qt = cross(&q, &t);
        [v[0] + w * t[0] + qt[0], v[1] + w * t[1] + qt[1], v[2] + w * t[2] + qt[2]]
    }

    /// Uniform (Haar) random element, Shoemake's method.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let u3: f64 = rng.gen();
        let (s1, s2) = ((1.0 - u1).sqrt(), u1.sqrt());
        CompactPoint([
            s2 * (2.0 * PI * u3).cos(),
            s1 * (2.0 * PI * u2).sin(),
            s1 * (2.0 * PI * u2).cos(),
            s2 * (2.0 * PI * u3).sin(),
        ])
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub fn su2_mul(a: &CompactPoint, b: &CompactPoint) -> CompactPoint {
    let [w1, x1, y1, z1] = a.0;
    let [w2, x2, y2, z2] = b.0;
    CompactPoint([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])
}

pub fn su2_inv(a: &CompactPoint) -> CompactPoint {
    let [w, x, y, z] = a.0;
    CompactPoint([w, -x, -y, -z])
}

/// Element rotating by `|v|` about `v / |v|`.
pub fn su2_exp(v: [f64; 3]) -> CompactPoint {
    let theta = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if theta < 1e-300 {
        return CompactPoint::IDENTITY;
    }
    let half = 0.5 * theta;
    let s = half.sin() / theta;
    CompactPoint([half.cos(), s * v[0], s * v[1], s * v[2]])
}

/// Rotation vector `v` with `su2_exp(v) = g` and `|v|` in `[0, 2 pi]`.
/// At `g = -1` the axis is not determined and `e_x` is used.
pub fn su2_log(g: &CompactPoint) -> [f64; 3] {
    let [w, x, y, z] = g.0;
    let s = (x * x + y * y + z * z).sqrt();
    let theta = 2.0 * s.atan2(w);
    if s < 1e-12 {
        if w > 0.0 {
            // near identity: v = 2 * vec / w to first order
            return [2.0 * x, 2.0 * y, 2.0 * z];
        }
        return [theta, 0.0, 0.0];
    }
    let f = theta / s;
    [f * x, f * y, f * z]
}

/// Point at fraction `s` of the one-parameter path from `a` to `b`:
/// `exp(s log(b a^-1)) a`.
/// When `b a^-1` is within `1e-6` of `-1` the axis `e_x` is used, so that
/// antipodal pairs are carried along the same great circle.
pub fn su2_geodesic(a: &CompactPoint, b: &CompactPoint, s: f64) -> CompactPoint {
    let rel = su2_mul(b, &su2_inv(a));
    let v = if rel.distance(&CompactPoint::IDENTITY.neg()) < 1e-6 {
        [2.0 * PI, 0.0, 0.0]
    } else {
        su2_log(&rel)
    };
    su2_mul(&su2_exp(v.map(|c| s * c)), a)
}

/// Marker type for `SU(2)` as a fiber group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Su2;

impl FiberGroup for Su2 {
    type Point = CompactPoint;

    fn identity(&self) -> CompactPoint {
        CompactPoint::IDENTITY
    }

    fn mul(&self, a: &CompactPoint, b: &CompactPoint) -> CompactPoint {
        su2_mul(a, b)
    }

    fn inv(&self, a: &CompactPoint) -> CompactPoint {
        su2_inv(a)
    }

    fn exp(&self, v: &[f64]) -> CompactPoint {
        su2_exp([v[0], v[1], v[2]])
    }

    fn algebra_dim(&self) -> usize {
        3
    }

    fn canonical(&self, p: &CompactPoint) -> CompactPoint {
        p.normalized()
    }

    fn fiber_distance(&self, a: &CompactPoint, b: &CompactPoint) -> f64 {
        a.distance(b)
    }

    fn compatible(&self, _other: &Self) -> bool {
        true
    }
}

/// A spin `j` stored as the integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Spin(u32);

impl Spin {
    pub fn from_twice(twice: u32) -> Self {
        Spin(twice)
    }

    /// Parses `"1/2"`, `"1"`, `"3/2"`, `"0.5"`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidParameter(format!("cannot parse spin {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: u32 = n.trim().parse().map_err(|_| bad())?;
            let d: u32 = d.trim().parse().map_err(|_| bad())?;
            return match d {
                1 => Ok(Spin(2 * n)),
                2 => Ok(Spin(n)),
                _ => Err(bad()),
            };
        }
        let v: f64 = s.parse().map_err(|_| bad())?;
        let t = 2.0 * v;
        if t < 0.0 || t.fract() != 0.0 {
            return Err(bad());
        }
        Ok(Spin(t as u32))
    }

    pub fn twice(&self) -> u32 {
        self.0
    }

    pub fn value(&self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.0 as usize + 1
    }

    /// `m` value of row/column index `r`.
    pub fn m_of_index(&self, r: usize) -> f64 {
        self.value() - r as f64
    }
}

impl std::fmt::Display for Spin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

fn cpow(z: Complex64, n: u32) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        acc *= z;
    }
    acc
}

/// The Wigner matrix `D^j(g)`, rows and columns indexed by `m = j, ..., -j`.
pub fn wigner(spin: Spin, g: &CompactPoint) -> DMatrix<Complex64> {
    let t = spin.twice();
    let dim = spin.dim();
    let (a, b) = g.cayley_klein();
    let (nb, ab) = (-b.conj(), a.conj());
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        // e_m with m = j - col has u-degree p = 2j - col, v-degree q = col
        let p = t - col as u32;
        let q = col as u32;
        let norm_in = (factorial(p) * factorial(q)).sqrt();
        for s in 0..=p {
            let left = binomial(p, s) * cpow(a, s) * cpow(b, p - s);
            for r in 0..=q {
                let right = binomial(q, r) * cpow(nb, r) * cpow(ab, q - r);
                let pu = s + r;
                let row = (t - pu) as usize;
                let norm_out = (factorial(pu) * factorial(t - pu)).sqrt();
                out[(row, col)] += left * right * (norm_out / norm_in);
            }
        }
    }
    out
}

/// Derivative of the spin-`j` representation along the 2x2 traceless
/// matrix `generator`: `d/de D^j(exp(e A))` at `e = 0`.
pub fn wigner_algebra(spin: Spin, generator: &[[Complex64; 2]; 2]) -> DMatrix<Complex64> {
    let t = spin.twice();
    let dim = spin.dim();
    let [[a11, a12], [a21, a22]] = *generator;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let p = (t - col as u32) as f64;
        let q = col as f64;
        out[(col, col)] = a11 * p + a22 * q;
        if col + 1 < dim {
            // u^(p-1) v^(q+1)
            out[(col + 1, col)] = a21 * (p * (q + 1.0)).sqrt();
        }
        if col > 0 {
            // u^(p+1) v^(q-1)
            out[(col - 1, col)] = a12 * ((p + 1.0) * q).sqrt();
        }
    }
    out
}

/// `d/de U(su2_exp(e e_a))` at `e = 0`, i.e. `-(i/2) sigma_a`.
pub fn su2_generator(axis: usize) -> [[Complex64; 2]; 2] {
    let z = Complex64::new(0.0, 0.0);
    let h = 0.5;
    match axis {
        0 => [[z, Complex64::new(0.0, -h)], [Complex64::new(0.0, -h), z]],
        1 => [[z, Complex64::new(-h, 0.0)], [Complex64::new(h, 0.0), z]],
        2 => [[Complex64::new(0.0, -h), z], [z, Complex64::new(0.0, h)]],
        _ => panic!("su(2) has three generators"),
    }
}

/// The span `E_j` of the matrix coefficients `g -> D^j_{ab}(g)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IrrepSpace {
    spin: Spin,
}

impl IrrepSpace {
    pub fn spin(&self) -> Spin {
        self.spin
    }

    /// Number of coefficient functions, `(2j+1)^2`.
    pub fn len(&self) -> usize {
        self.spin.dim() * self.spin.dim()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// All coefficients at `g`, flattened row-major.
    pub fn eval_all(&self, g: &CompactPoint) -> Vec<Complex64> {
        let d = wigner(self.spin, g);
        let n = self.spin.dim();
        (0..n * n).map(|i| d[(i / n, i % n)]).collect()
    }

    pub fn coefficient(&self, a: usize, b: usize, g: &CompactPoint) -> Complex64 {
        wigner(self.spin, g)[(a, b)]
    }
}

pub fn peter_weyl_space(spin: Spin) -> Result<IrrepSpace> {
    if spin.twice() == 0 {
        return Err(Error::InvalidParameter(
            "spin 0 is the constants, which are not in L^2_0".into(),
        ));
    }
    Ok(IrrepSpace { spin })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            if n == 0 {
                break;
            }
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// A quadrature node on `SU(2)` with its Haar weight.
#[derive(Debug, Clone, Copy)]
pub struct HaarNode {
    pub point: CompactPoint,
    pub weight: f64,
}

/// Product rule in Euler angles `g = exp(a e_z) exp(b e_y) exp(c e_z)`:
/// uniform in `a, c` over `[0, 4 pi)` and Gauss-Legendre in `cos b`.
/// Exact for every matrix coefficient of spin at most `band_limit`.
pub fn haar_quadrature(band_limit: Spin) -> Vec<HaarNode> {
    let t = band_limit.twice().max(1) as usize;
    let n_angle = t + 2;
    let n_beta = t / 2 + 2;
    let (xs, ws) = gauss_legendre(n_beta);
    let mut out = Vec::with_capacity(n_angle * n_angle * n_beta);
    let w_angle = 1.0 / (n_angle * n_angle) as f64;
    for ia in 0..n_angle {
        let a = 4.0 * PI * ia as f64 / n_angle as f64;
        let ga = su2_exp([0.0, 0.0, a]);
        for (x, wb) in xs.iter().zip(&ws) {
            let gb = su2_mul(&ga, &su2_exp([0.0, x.acos(), 0.0]));
            for ic in 0..n_angle {
                let c = 4.0 * PI * ic as f64 / n_angle as f64;
                out.push(HaarNode {
                    point: su2_mul(&gb, &su2_exp([0.0, 0.0, c])),
                    weight: 0.5 * wb * w_angle,
                });
            }
        }
    }
    out
}

/// Haar integral of `f` using a rule exact up to `band_limit`.
pub fn haar_integral<F: Fn(&CompactPoint) -> Complex64>(band_limit: Spin, f: F) -> Complex64 {
    haar_quadrature(band_limit)
        .iter()
        .map(|n| f(&n.point) * n.weight)
        .sum()
}

/// Fits every right translate `g -> D^j_ab(g h)` by least squares in the span
/// of the spin-`j` coefficients over `samples` and returns the largest
/// pointwise residual.
pub fn right_translation_residual(spin: Spin, h: &CompactPoint, samples: &[CompactPoint]) -> f64 {
    let n = spin.dim();
    let a = DMatrix::from_fn(samples.len(), n * n, |i, k| wigner(spin, &samples[i])[(k / n, k % n)]);
    let b = DMatrix::from_fn(samples.len(), n * n, |i, k| {
        wigner(spin, &su2_mul(&samples[i], h))[(k / n, k % n)]
    });
    let svd = a.clone().svd(true, true);
    let x = svd.solve(&b, 1e-12).expect("u and v were computed");
    (a * x - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Closed subgroup `H` defining the quotient `G/H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subgroup {
    Trivial,
    /// `{ exp(theta e_z) }`, the diagonal `U(1)`; `G/H = S^2`.
    DiagonalCircle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuotientSpec {
    pub subgroup: Subgroup,
    /// Number of nodes in the uniform rule on `H`.
    pub order: usize,
}

impl QuotientSpec {
    /// Rule exact for functions of spin at most `band_limit`.
    pub fn sphere(band_limit: Spin) -> Self {
        QuotientSpec { subgroup: Subgroup::DiagonalCircle, order: band_limit.twice() as usize + 2 }
    }

    pub fn trivial() -> Self {
        QuotientSpec { subgroup: Subgroup::Trivial, order: 1 }
    }

    /// Nodes `h` of `H` with equal weights.
    pub fn nodes(&self) -> Vec<CompactPoint> {
        match self.subgroup {
            Subgroup::Trivial => vec![CompactPoint::IDENTITY],
            Subgroup::DiagonalCircle => (0..self.order)
                .map(|k| su2_exp([0.0, 0.0, 4.0 * PI * k as f64 / self.order as f64]))
                .collect(),
        }
    }

    /// Canonical projection `G -> G/H` as a point of `S^2` (`g e_z g^-1`).
    /// For the trivial subgroup the coset is the element itself and this
    /// returns the rotated axis only for display purposes.
    pub fn coset_point(&self, g: &CompactPoint) -> [f64; 3] {
        g.rotate([0.0, 0.0, 1.0])
    }
}

/// A coset representative `g` with `g e_z g^-1 = p`.
pub fn sphere_section(p: [f64; 3]) -> CompactPoint {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    let p = p.map(|c| c / n);
    let axis = cross(&[0.0, 0.0, 1.0], &p);
    let s = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    if s < 1e-14 {
        return if p[2] > 0.0 { CompactPoint::IDENTITY } else { su2_exp([PI, 0.0, 0.0]) };
    }
    let angle = s.atan2(p[2]);
    su2_exp(axis.map(|c| c / s * angle))
}

/// `Pi_H phi(g H) = integral over H of phi(g h)`, evaluated at a representative.
pub fn project_pi_h<F>(phi: F, spec: QuotientSpec) -> impl Fn(&CompactPoint) -> Complex64
where
    F: Fn(&CompactPoint) -> Complex64,
{
    let nodes = spec.nodes();
    let w = 1.0 / nodes.len() as f64;
    move |g| nodes.iter().map(|h| phi(&su2_mul(g, h))).sum::<Complex64>() * w
}
