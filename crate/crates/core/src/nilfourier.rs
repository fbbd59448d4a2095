//! Fourier-like towers on `T x N/Gamma`, theta lifts and the pseudo-polynomial
//! family `V_n`.
//!
//! A function `phi(t, y_1, ..., y_d)` (second-kind cover coordinates) is
//! expanded in `t`, then the zero mode is expanded in `y_1`, its zero mode in
//! `y_2`, and so on. Only the zero branch recurses: the non-zero modes at level
//! `j` are [`LeafFunction`]s of the variables after the level variable.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nilgroup::NilStructure;

/// A complex field on `R^r`, shared between threads.
pub type ScalarField = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

fn cis(x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * x)
}

/// A non-zero-mode coefficient `phi_hat_k^(j)` as a function of the remaining
/// variables.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LeafFunction {
    Constant { value: Complex64 },
    /// `sum c e^{2 pi i <freqs, x>}`.
    TrigPolynomial { terms: Vec<(Vec<i64>, Complex64)> },
    /// `coeff e^{2 pi i k z} sum_{|j|<=J} h(x+j) e^{-2 pi i k j y}` on `(z, x, y)`,
    /// or without the central factor on `(x, y)` when `central` is false;
    /// `h(u) = exp(-pi (u/width)^2)`.
    Theta { k: i64, truncation: u32, width: f64, coeff: Complex64, central: bool },
    /// Trigonometric interpolant of samples on the uniform grid of `[0,1)^r`.
    Samples { shape: Vec<usize>, values: Vec<Complex64> },
    Sum { parts: Vec<(Complex64, LeafFunction)> },
    /// Uniform-grid Fourier coefficient of `f` in variable `var`, as a
    /// function of the other variables. Not serializable.
    #[serde(skip)]
    Quadrature { f: ScalarField, var: usize, k: i64, m: usize },
}

impl fmt::Debug for LeafFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LeafFunction::Constant { value } => write!(f, "Constant({value})"),
            LeafFunction::TrigPolynomial { terms } => write!(f, "TrigPolynomial({terms:?})"),
            LeafFunction::Theta { k, truncation, width, coeff, central } => write!(
                f,
                "Theta(k={k}, J={truncation}, width={width}, coeff={coeff}, central={central})"
            ),
            LeafFunction::Samples { shape, .. } => write!(f, "Samples({shape:?})"),
            LeafFunction::Sum { parts } => f.debug_list().entries(parts).finish(),
            LeafFunction::Quadrature { var, k, m, .. } => {
                write!(f, "Quadrature(var={var}, k={k}, m={m})")
            }
        }
    }
}

fn interpolation_kernel(m: usize, u: f64) -> f64 {
    let half = m.div_ceil(2);
    let mut s = 1.0;
    for k in 1..half {
        s += 2.0 * (2.0 * PI * k as f64 * u).cos();
    }
    if m.is_multiple_of(2) {
        s += (PI * m as f64 * u).cos();
    }
    s / m as f64
}

impl LeafFunction {
    pub fn constant(value: Complex64) -> Self {
        LeafFunction::Constant { value }
    }

    pub fn monomial(coeff: Complex64, freqs: Vec<i64>) -> Self {
        LeafFunction::TrigPolynomial { terms: vec![(freqs, coeff)] }
    }

    /// Samples `f` on the uniform grid with the given shape.
    pub fn from_samples<F: Fn(&[f64]) -> Complex64>(shape: Vec<usize>, f: F) -> Self {
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; shape.len()];
        for idx in 0..total {
            let mut r = idx;
            for i in (0..shape.len()).rev() {
                x[i] = (r % shape[i]) as f64 / shape[i] as f64;
                r /= shape[i];
            }
            values.push(f(&x));
        }
        LeafFunction::Samples { shape, values }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        match self {
            LeafFunction::Constant { value } => *value,
            LeafFunction::TrigPolynomial { terms } => terms
                .iter()
                .map(|(freqs, c)| {
                    let phase: f64 = freqs.iter().zip(x).map(|(&k, &v)| k as f64 * v).sum();
                    c * cis(phase)
                })
                .sum(),
            LeafFunction::Theta { k, truncation, width, coeff, central } => {
                let (z, rest) = if *central { (x[0], &x[1..]) } else { (0.0, x) };
                coeff * cis(*k as f64 * z) * theta_profile(*k, *truncation, *width, rest[0], rest[1])
            }
            LeafFunction::Samples { shape, values } => {
                let weights: Vec<Vec<f64>> = shape
                    .iter()
                    .zip(x)
                    .map(|(&m, &v)| {
                        (0..m).map(|a| interpolation_kernel(m, v - a as f64 / m as f64)).collect()
                    })
                    .collect();
                let mut acc = Complex64::new(0.0, 0.0);
                for (idx, val) in values.iter().enumerate() {
                    let mut r = idx;
                    let mut w = 1.0;
                    for i in (0..shape.len()).rev() {
                        w *= weights[i][r % shape[i]];
                        r /= shape[i];
                    }
                    acc += val * w;
                }
                acc
            }
            LeafFunction::Sum { parts } => parts.iter().map(|(c, l)| c * l.eval(x)).sum(),
            LeafFunction::Quadrature { f, var, k, m } => {
                let mut full = Vec::with_capacity(x.len() + 1);
                full.extend_from_slice(&x[..*var]);
                full.push(0.0);
                full.extend_from_slice(&x[*var..]);
                let mut acc = Complex64::new(0.0, 0.0);
                for a in 0..*m {
                    let u = a as f64 / *m as f64;
                    full[*var] = u;
                    acc += f(&full) * cis(-(*k as f64) * u);
                }
                acc / *m as f64
            }
        }
    }

    pub fn has_theta(&self) -> bool {
        match self {
            LeafFunction::Theta { .. } => true,
            LeafFunction::Sum { parts } => parts.iter().any(|(_, l)| l.has_theta()),
            _ => false,
        }
    }

    fn scaled(&self, c: Complex64) -> Self {
        LeafFunction::Sum { parts: vec![(c, self.clone())] }
    }
}

fn theta_profile(k: i64, truncation: u32, width: f64, x: f64, y: f64) -> Complex64 {
    let j = truncation as i64;
    (-j..=j)
        .map(|j| {
            let u = (x + j as f64) / width;
            (-PI * u * u).exp() * cis(-(k * j) as f64 * y)
        })
        .sum()
}

/// Bound on the right-`Gamma` invariance defect of a truncated theta lift on
/// the fundamental domain: the largest dropped Gaussian term.
pub fn theta_tail(truncation: u32, width: f64) -> f64 {
    if truncation == 0 {
        return 1.0;
    }
    let u = (truncation as f64 - 1.0) / width;
    (-PI * u * u).exp()
}

/// The theta lift `f(z, x, y) = e^{2 pi i k z} sum_{|j|<=J} h(x+j) e^{-2 pi i k j y}`
/// on the Heisenberg cover, right-invariant under the lattice up to
/// [`theta_tail`].
pub fn theta_function(k: i64, truncation: u32, width: f64) -> Result<LeafFunction> {
    if k == 0 {
        return Err(Error::InvalidParameter(
            "theta lifts need a non-zero central frequency; use torus pullbacks for k = 0".into(),
        ));
    }
    if !(width > 0.0) {
        return Err(Error::InvalidParameter("theta width must be positive".into()));
    }
    Ok(LeafFunction::Theta { k, truncation, width, coeff: Complex64::new(1.0, 0.0), central: true })
}

/// Coefficient `(1/m) sum_a f(..., a/m, ...) e^{-2 pi i k a/m}` in variable `var`.
pub fn fourier_coefficient(f: ScalarField, var: usize, k: i64, m: usize) -> LeafFunction {
    if 2 * k.unsigned_abs() as usize >= m {
        log::warn!("fourier coefficient k = {k} aliases on a grid of {m} points");
    }
    LeafFunction::Quadrature { f, var, k, m }
}

/// The `k = 0` entry of a tree level.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroBranch {
    Zero,
    Scalar(Complex64),
    Child(Box<CoefficientTree>),
}

/// One level of the tower. Level `0` expands in `t`; level `j >= 1` expands
/// in `y_j`, and its leaves are functions of `y_{j+1}, ..., y_d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientTree {
    pub level: usize,
    pub dim: usize,
    pub degree: usize,
    pub modes: BTreeMap<i64, LeafFunction>,
    pub zero: ZeroBranch,
}

/// `phi_hat_0^(k)` read off a tower.
#[derive(Debug, Clone, Copy)]
pub enum ZeroMode<'a> {
    Tree(&'a CoefficientTree),
    Constant(Complex64),
}

impl ZeroMode<'_> {
    /// Evaluates at the variables `y_{k+1}, ..., y_d`.
    pub fn eval(&self, y: &[f64]) -> Complex64 {
        match self {
            ZeroMode::Constant(c) => *c,
            ZeroMode::Tree(t) => t.eval_level(y[0], &y[1..]),
        }
    }
}

impl CoefficientTree {
    pub fn empty(level: usize, dim: usize, degree: usize) -> Self {
        CoefficientTree { level, dim, degree, modes: BTreeMap::new(), zero: ZeroBranch::Zero }
    }

    /// The constant function `c` on `T x N/Gamma` of dimension `dim`.
    pub fn constant(dim: usize, c: Complex64) -> Self {
        let mut t = Self::empty(0, dim, 0);
        t.zero = ZeroBranch::Scalar(c);
        t
    }

    /// Checks level numbering, frequency bounds and leaf arity.
    pub fn validate(&self) -> Result<()> {
        if self.level > self.dim {
            return Err(Error::InvalidParameter(format!(
                "tree level {} exceeds dimension {}",
                self.level, self.dim
            )));
        }
        for (&k, leaf) in &self.modes {
            if k == 0 {
                return Err(Error::InvalidParameter("frequency 0 must use the zero branch".into()));
            }
            if k.unsigned_abs() as usize > self.degree {
                return Err(Error::InvalidParameter(format!(
                    "frequency {k} exceeds degree {}",
                    self.degree
                )));
            }
            if let LeafFunction::Samples { shape, values } = leaf {
                let arity = self.dim - self.level;
                if shape.len() != arity || shape.iter().product::<usize>() != values.len() {
                    return Err(Error::DimensionMismatch { expected: arity, got: shape.len() });
                }
            }
        }
        match &self.zero {
            ZeroBranch::Child(c) => {
                if self.level == self.dim || c.level != self.level + 1 || c.dim != self.dim {
                    return Err(Error::InvalidParameter("malformed zero branch".into()));
                }
                c.validate()
            }
            _ => Ok(()),
        }
    }

    /// Evaluates this level with level variable `lead` and the later
    /// variables `rest`.
    pub fn eval_level(&self, lead: f64, rest: &[f64]) -> Complex64 {
        let mut acc: Complex64 = self
            .modes
            .iter()
            .map(|(&k, leaf)| leaf.eval(rest) * cis(k as f64 * lead))
            .sum();
        acc += match &self.zero {
            ZeroBranch::Zero => Complex64::new(0.0, 0.0),
            ZeroBranch::Scalar(c) => *c,
            ZeroBranch::Child(child) => child.eval_level(rest[0], &rest[1..]),
        };
        acc
    }

    /// `phi(t, y)` for a level-0 tree, `y` in second-kind cover coordinates.
    pub fn evaluate(&self, t: f64, y: &[f64]) -> Complex64 {
        debug_assert_eq!(self.level, 0);
        self.eval_level(t, y)
    }

    /// `phi_hat_0^(k)`, reached by following the zero branch `k + 1` times.
    pub fn zero_mode(&self, k: usize) -> ZeroMode<'_> {
        let mut cur = self;
        for _ in 0..=k {
            match &cur.zero {
                ZeroBranch::Zero => return ZeroMode::Constant(Complex64::new(0.0, 0.0)),
                ZeroBranch::Scalar(c) => return ZeroMode::Constant(*c),
                ZeroBranch::Child(c) => cur = c,
            }
        }
        ZeroMode::Tree(cur)
    }

    pub fn has_theta(&self) -> bool {
        self.modes.values().any(LeafFunction::has_theta)
            || matches!(&self.zero, ZeroBranch::Child(c) if c.has_theta())
    }

    /// `a * self + b * other`, merging the towers level by level.
    pub fn linear_combination(&self, a: Complex64, other: &CoefficientTree, b: Complex64) -> Self {
        let mut modes = BTreeMap::new();
        for (&k, l) in &self.modes {
            modes.insert(k, l.scaled(a));
        }
        for (&k, l) in &other.modes {
            let entry = match modes.remove(&k) {
                Some(LeafFunction::Sum { mut parts }) => {
                    parts.push((b, l.clone()));
                    LeafFunction::Sum { parts }
                }
                _ => l.scaled(b),
            };
            modes.insert(k, entry);
        }
        let zero = match (&self.zero, &other.zero) {
            (ZeroBranch::Zero, ZeroBranch::Zero) => ZeroBranch::Zero,
            (ZeroBranch::Child(x), ZeroBranch::Child(y)) => {
                ZeroBranch::Child(Box::new(x.linear_combination(a, y, b)))
            }
            (ZeroBranch::Child(x), z) | (z, ZeroBranch::Child(x)) => {
                let (cx, cz) = if matches!(self.zero, ZeroBranch::Child(_)) { (a, b) } else { (b, a) };
                let mut child = (**x).clone();
                child.scale_in_place(cx);
                if let ZeroBranch::Scalar(s) = z {
                    child.add_constant(cz * s);
                }
                ZeroBranch::Child(Box::new(child))
            }
            (x, y) => ZeroBranch::Scalar(scalar_of(x) * a + scalar_of(y) * b),
        };
        CoefficientTree {
            level: self.level,
            dim: self.dim,
            degree: self.degree.max(other.degree),
            modes,
            zero,
        }
    }

    fn scale_in_place(&mut self, c: Complex64) {
        for l in self.modes.values_mut() {
            *l = l.scaled(c);
        }
        match &mut self.zero {
            ZeroBranch::Zero => {}
            ZeroBranch::Scalar(s) => *s *= c,
            ZeroBranch::Child(child) => child.scale_in_place(c),
        }
    }

    fn add_constant(&mut self, c: Complex64) {
        match &mut self.zero {
            ZeroBranch::Zero => self.zero = ZeroBranch::Scalar(c),
            ZeroBranch::Scalar(s) => *s += c,
            ZeroBranch::Child(child) => child.add_constant(c),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: CoefficientTree = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }
}

fn scalar_of(z: &ZeroBranch) -> Complex64 {
    match z {
        ZeroBranch::Scalar(s) => *s,
        _ => Complex64::new(0.0, 0.0),
    }
}

/// Builds the tower of `e^{2 pi i (ell t + <freqs, y>)}`: the first non-zero
/// frequency decides the level of the single leaf.
pub fn trig_monomial_tree(dim: usize, degree: usize, ell: i64, freqs: &[i64]) -> CoefficientTree {
    assert_eq!(freqs.len(), dim);
    let one = Complex64::new(1.0, 0.0);
    // level 0 variable is t, level j variable is y_j
    let mut all = Vec::with_capacity(dim + 1);
    all.push(ell);
    all.extend_from_slice(freqs);
    let first = all.iter().position(|&k| k != 0);
    build_chain(dim, degree, 0, first, &all, one)
}

fn build_chain(
    dim: usize,
    degree: usize,
    level: usize,
    first: Option<usize>,
    all: &[i64],
    coeff: Complex64,
) -> CoefficientTree {
    let mut tree = CoefficientTree::empty(level, dim, degree);
    match first {
        None => {
            tree.zero = ZeroBranch::Scalar(coeff);
        }
        Some(f) if f == level => {
            tree.modes.insert(all[level], LeafFunction::monomial(coeff, all[level + 1..].to_vec()));
        }
        Some(_) => {
            tree.zero = ZeroBranch::Child(Box::new(build_chain(dim, degree, level + 1, first, all, coeff)));
        }
    }
    tree
}

/// One element of the `V_n` family with bookkeeping.
#[derive(Debug, Clone)]
pub struct BasisElement {
    pub label: String,
    pub tree: CoefficientTree,
    /// Mean before any correction, measured by product quadrature.
    pub measured_mean: f64,
    pub mean_corrected: bool,
}

/// Product-rule mean of `phi` over `T x [0,1)^d` with `m` nodes per variable.
pub fn quadrature_mean(tree: &CoefficientTree, m: usize) -> Complex64 {
    let d = tree.dim;
    let total = m.pow(d as u32 + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut y = vec![0.0; d];
    for idx in 0..total {
        let mut r = idx;
        for v in y.iter_mut().rev() {
            *v = (r % m) as f64 / m as f64;
            r /= m;
        }
        let t = (r % m) as f64 / m as f64;
        acc += tree.evaluate(t, &y);
    }
    acc / total as f64
}

/// Spanning family of `V_n`: (a) `e^{2 pi i ell t}` times pullbacks of torus
/// characters in the non-central coordinates, all frequencies in `[-n, n]`
/// and not all zero; (b) on the Heisenberg group, `e^{2 pi i ell t}` times the
/// theta lifts of central frequency `1 <= |k| <= n`, `|ell| <= n`.
pub fn pseudo_poly_basis(s: &NilStructure, n: usize) -> Result<Vec<BasisElement>> {
    if n == 0 {
        return Err(Error::InvalidParameter("degree n must be at least 1".into()));
    }
    let d = s.dim();
    let c = s.central_dim();
    let ni = n as i64;
    let free = 1 + d - c;
    let side = 2 * n + 1;
    let mut out = Vec::new();
    let mut quad = 4 * n + 4;
    if s.is_heisenberg3() {
        quad = quad.max(8);
    }
    for idx in 0..side.pow(free as u32) {
        let mut r = idx;
        let mut digits = vec![0i64; free];
        for v in digits.iter_mut().rev() {
            *v = (r % side) as i64 - ni;
            r /= side;
        }
        if digits.iter().all(|&k| k == 0) {
            continue;
        }
        let ell = digits[0];
        let mut freqs = vec![0i64; d];
        freqs[c..].copy_from_slice(&digits[1..]);
        let tree = trig_monomial_tree(d, n, ell, &freqs);
        let mean = quadrature_mean(&tree, quad).norm();
        out.push(BasisElement {
            label: format!("char(ell={ell}, a={:?})", &digits[1..]),
            tree,
            measured_mean: mean,
            mean_corrected: false,
        });
    }
    if s.is_heisenberg3() {
        for k in (-ni..=ni).filter(|&k| k != 0) {
            for ell in -ni..=ni {
                let tree = theta_tree(n, ell, k, 6, 1.0);
                let mean = quadrature_mean(&tree, quad).norm();
                out.push(BasisElement {
                    label: format!("theta(ell={ell}, k={k})"),
                    tree,
                    measured_mean: mean,
                    mean_corrected: false,
                });
            }
        }
    }
    Ok(out)
}

/// `e^{2 pi i ell t} theta_k` as a tower on the Heisenberg group.
pub fn theta_tree(degree: usize, ell: i64, k: i64, truncation: u32, width: f64) -> CoefficientTree {
    let one = Complex64::new(1.0, 0.0);
    let mut root = CoefficientTree::empty(0, 3, degree);
    if ell != 0 {
        root.modes.insert(
            ell,
            LeafFunction::Theta { k, truncation, width, coeff: one, central: true },
        );
    } else {
        let mut level1 = CoefficientTree::empty(1, 3, degree);
        level1.modes.insert(
            k,
            LeafFunction::Theta { k, truncation, width, coeff: one, central: false },
        );
        root.zero = ZeroBranch::Child(Box::new(level1));
    }
    root
}

/// Outcome of [`is_pseudo_polynomial`].
#[derive(Debug, Clone, Serialize)]
pub struct PseudoPolyReport {
    pub holds: bool,
    pub degree: usize,
    /// Largest stored frequency along the zero tower.
    pub max_stored_frequency: u64,
    /// Largest quadrature coefficient with `|k|` in `(n, 2n]` along the tower.
    pub max_excess_coefficient: f64,
}

/// Scans the zero tower for frequencies above `n`, both in the stored modes
/// and by quadrature of each level in its own variable.
pub fn is_pseudo_polynomial(tree: &CoefficientTree, n: usize) -> PseudoPolyReport {
    let m = 4 * n + 4;
    let probe = 3usize;
    let mut max_stored = 0u64;
    let mut max_excess = 0.0f64;
    let mut cur = Some(tree);
    while let Some(level) = cur {
        for &k in level.modes.keys() {
            max_stored = max_stored.max(k.unsigned_abs());
        }
        let arity = level.dim - level.level;
        let samples = probe.pow(arity as u32);
        let mut rest = vec![0.0; arity];
        for idx in 0..samples {
            let mut r = idx;
            for (i, v) in rest.iter_mut().enumerate().rev() {
                *v = ((r % probe) as f64 + 0.37 * (i as f64 + 1.0)) / probe as f64;
                r /= probe;
            }
            for k in (n as i64 + 1)..=(2 * n as i64) {
                for kk in [k, -k] {
                    let coeff: Complex64 = (0..m)
                        .map(|a| {
                            let u = a as f64 / m as f64;
                            level.eval_level(u, &rest) * cis(-(kk as f64) * u)
                        })
                        .sum::<Complex64>()
                        / m as f64;
                    max_excess = max_excess.max(coeff.norm());
                }
            }
        }
        cur = match &level.zero {
            ZeroBranch::Child(c) => Some(c),
            _ => None,
        };
    }
    PseudoPolyReport {
        holds: max_stored <= n as u64 && max_excess < 1e-10,
        degree: n,
        max_stored_frequency: max_stored,
        max_excess_coefficient: max_excess,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn constant_and_single_mode() {
        let c = CoefficientTree::constant(3, one());
        assert_eq!(c.evaluate(0.3, &[0.1, 0.2, 0.3]), one());
        let mut t = CoefficientTree::empty(0, 3, 1);
        t.modes.insert(1, LeafFunction::constant(one()));
        let v = t.evaluate(0.125, &[0.4, 0.5, 0.6]);
        assert!((v - cis(0.125)).norm() < 1e-15);
    }

    #[test]
    fn quadrature_coefficients() {
        let f: ScalarField = Arc::new(|x: &[f64]| cis(3.0 * x[0]));
        let c3 = fourier_coefficient(f.clone(), 0, 3, 16);
        let c2 = fourier_coefficient(f, 0, 2, 16);
        assert!((c3.eval(&[]) - one()).norm() < 1e-14);
        assert!(c2.eval(&[]).norm() < 1e-14);
    }

    #[test]
    fn theta_rejects_zero_frequency() {
        assert!(theta_function(0, 6, 1.0).is_err());
        assert!(theta_tail(6, 1.0) < 1e-30);
        assert_eq!(theta_tail(0, 1.0), 1.0);
    }

    #[test]
    fn basis_count_heisenberg() {
        let b = pseudo_poly_basis(&NilStructure::heisenberg3(), 1).unwrap();
        assert_eq!(b.len(), 32);
        let b2 = pseudo_poly_basis(&NilStructure::heisenberg3(), 2).unwrap();
        assert_eq!(b2.len(), 5usize.pow(3) - 1 + 4 * 5);
        let ab = pseudo_poly_basis(&NilStructure::abelian(2), 1).unwrap();
        assert_eq!(ab.len(), 26);
    }

    #[test]
    fn pseudo_polynomial_scan() {
        let c = CoefficientTree::constant(3, one());
        assert!(is_pseudo_polynomial(&c, 1).holds);
        let t = trig_monomial_tree(3, 2, 2, &[0, 0, 0]);
        assert!(!is_pseudo_polynomial(&t, 1).holds);
        assert!(is_pseudo_polynomial(&t, 2).holds);
    }

    #[test]
    fn samples_interpolate_trig_polynomials() {
        let f = |x: &[f64]| cis(2.0 * x[0] - x[1]) + cis(x[1]) * 0.5;
        let leaf = LeafFunction::from_samples(vec![8, 6], f);
        for (a, b) in [(0.13, 0.77), (0.5, 0.01), (0.91, 0.33)] {
            assert!((leaf.eval(&[a, b]) - f(&[a, b])).norm() < 1e-13);
        }
        let odd = LeafFunction::from_samples(vec![7], |x: &[f64]| cis(-3.0 * x[0]));
        assert!((odd.eval(&[0.29]) - cis(-3.0 * 0.29)).norm() < 1e-13);
    }
}
