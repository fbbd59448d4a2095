//! Step-2 nilpotent Lie groups in Mal'cev coordinates.
//!
//! A structure is a basis `v_1, ..., v_d` whose first `c` vectors are central
//! and contain every bracket. Group elements are stored in exponential
//! (first-kind) coordinates, where the product is the truncated
//! Baker-Campbell-Hausdorff formula `a + b + [a, b]/2`, exact in step 2.
//! The lattice is `exp(Z v_1) ... exp(Z v_d)` and its fundamental domain is
//! `[0, 1)^d` in second-kind coordinates `exp(y_1 v_1) ... exp(y_d v_d)`.
//!
//! Indices are 0-based in the Rust API. The JSON description uses the 1-based
//! labels `v_1..v_d`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::FiberGroup;
use crate::rationals::torus_norm;

/// Structure constants of a step-2 nilpotent Lie algebra with a Mal'cev basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NilStructureSpec", into = "NilStructureSpec")]
pub struct NilStructure {
    d: usize,
    c: usize,
    /// `table[(i * d + j) * d + k]` is the coefficient of `v_k` in `[v_i, v_j]`.
    table: Vec<f64>,
}

/// JSON form: `{ "d": 3, "c": 1, "brackets": [[2, 3, 1, 1.0]] }`, 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NilStructureSpec {
    pub d: usize,
    pub c: usize,
    pub brackets: Vec<(usize, usize, usize, f64)>,
}

impl TryFrom<NilStructureSpec> for NilStructure {
    type Error = Error;

    fn try_from(spec: NilStructureSpec) -> Result<Self> {
        let mut entries = Vec::with_capacity(spec.brackets.len());
        for &(i, j, k, v) in &spec.brackets {
            if i == 0 || j == 0 || k == 0 {
                return Err(Error::InvalidStructure("basis labels are 1-based".into()));
            }
            entries.push((i - 1, j - 1, k - 1, v));
        }
        NilStructure::new(spec.d, spec.c, &entries)
    }
}

impl From<NilStructure> for NilStructureSpec {
    fn from(s: NilStructure) -> Self {
        let mut brackets = Vec::new();
        for i in 0..s.d {
            for j in (i + 1)..s.d {
                for k in 0..s.d {
                    let v = s.coeff(i, j, k);
                    if v != 0.0 {
                        brackets.push((i + 1, j + 1, k + 1, v));
                    }
                }
            }
        }
        NilStructureSpec { d: s.d, c: s.c, brackets }
    }
}

/// A group element in exponential coordinates: `exp(sum_i x_i v_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NilPoint(pub Vec<f64>);

impl NilPoint {
    pub fn zeros(d: usize) -> Self {
        NilPoint(vec![0.0; d])
    }

    pub fn basis(d: usize, i: usize, scale: f64) -> Self {
        let mut v = vec![0.0; d];
        v[i] = scale;
        NilPoint(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// The lattice element `exp(n_1 v_1) ... exp(n_d v_d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeElement(pub Vec<i64>);

impl NilStructure {
    /// Validates and builds a structure from 0-based bracket entries
    /// `(i, j, k, value)` meaning `[v_i, v_j]` has `value` along `v_k`.
    /// A missing antisymmetric partner is filled in.
    pub fn new(d: usize, c: usize, entries: &[(usize, usize, usize, f64)]) -> Result<Self> {
        if c > d {
            return Err(Error::InvalidStructure(format!("c = {c} exceeds d = {d}")));
        }
        let mut table = vec![0.0; d * d * d];
        let mut seen = vec![false; d * d * d];
        for &(i, j, k, v) in entries {
            if i >= d || j >= d || k >= d {
                return Err(Error::InvalidStructure(format!(
                    "bracket index ({i}, {j}, {k}) outside dimension {d}"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidStructure("non-finite structure constant".into()));
            }
            if i == j && v != 0.0 {
                return Err(Error::InvalidStructure(format!("[v_{i}, v_{i}] must vanish")));
            }
            if v != 0.0 && (k >= c || i < c || j < c) {
                return Err(Error::InvalidStructure(format!(
                    "bracket [v_{}, v_{}] has a component along v_{}; brackets must lie in the \
                     central span v_1..v_{} and vanish on it",
                    i + 1,
                    j + 1,
                    k + 1,
                    c
                )));
            }
            if v.fract() != 0.0 {
                return Err(Error::InvalidStructure(
                    "the lattice exp(Z v_1)...exp(Z v_d) needs integral structure constants".into(),
                ));
            }
            let a = (i * d + j) * d + k;
            let b = (j * d + i) * d + k;
            if seen[a] && table[a] != v {
                return Err(Error::InvalidStructure("conflicting bracket entries".into()));
            }
            if seen[b] && table[b] != -v {
                return Err(Error::InvalidStructure(format!(
                    "bracket table is not antisymmetric at ({}, {}, {})",
                    i + 1,
                    j + 1,
                    k + 1
                )));
            }
            table[a] = v;
            table[b] = -v;
            seen[a] = true;
            seen[b] = true;
        }
        Ok(NilStructure { d, c, table })
    }

    /// The 3-dimensional Heisenberg algebra: `[v_2, v_3] = v_1`.
    pub fn heisenberg3() -> Self {
        NilStructure::new(3, 1, &[(1, 2, 0, 1.0)]).expect("valid structure")
    }

    /// `R^d` with lattice `Z^d`; the quotient is the torus `T^d`.
    pub fn abelian(d: usize) -> Self {
        NilStructure { d, c: 0, table: vec![0.0; d * d * d] }
    }

    /// The trivial group, used when the fiber is a point.
    pub fn trivial() -> Self {
        Self::abelian(0)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn central_dim(&self) -> usize {
        self.c
    }

    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        self.table[(i * self.d + j) * self.d + k]
    }

    pub fn is_heisenberg3(&self) -> bool {
        *self == Self::heisenberg3()
    }

    fn check(&self, a: &NilPoint) -> Result<()> {
        if a.dim() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: a.dim() });
        }
        Ok(())
    }

    /// Lie bracket of two algebra elements.
    pub fn bracket(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d];
        for i in self.c..d {
            if a[i] == 0.0 {
                continue;
            }
            for j in self.c..d {
                if b[j] == 0.0 {
                    continue;
                }
                let w = a[i] * b[j];
                for (k, o) in out.iter_mut().enumerate().take(self.c) {
                    *o += w * self.coeff(i, j, k);
                }
            }
        }
        out
    }

    /// Group product in exponential coordinates.
    pub fn mul(&self, a: &NilPoint, b: &NilPoint) -> Result<NilPoint> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    fn mul_unchecked(&self, a: &NilPoint, b: &NilPoint) -> NilPoint {
        let br = self.bracket(&a.0, &b.0);
        NilPoint(
            a.0.iter()
                .zip(&b.0)
                .zip(&br)
                .map(|((x, y), z)| x + y + 0.5 * z)
                .collect(),
        )
    }

    pub fn inv(&self, a: &NilPoint) -> NilPoint {
        NilPoint(a.0.iter().map(|x| -x).collect())
    }

    /// Exponential coordinates to `(y_1..y_d)` with
    /// `point = exp(y_1 v_1) ... exp(y_d v_d)`.
    ///
    /// In step 2, `exp(y_1 v_1) ... exp(y_d v_d) = exp(y + (1/2) sum_{i<j} y_i y_j [v_i, v_j])`,
    /// and the correction is central and depends only on the non-central
    /// coordinates, which agree in both charts.
    pub fn to_second_kind(&self, a: &NilPoint) -> Vec<f64> {
        let corr = self.ordered_correction(&a.0);
        a.0.iter().zip(&corr).map(|(x, c)| x - c).collect()
    }

    pub fn from_second_kind(&self, y: &[f64]) -> NilPoint {
        let corr = self.ordered_correction(y);
        NilPoint(y.iter().zip(&corr).map(|(x, c)| x + c).collect())
    }

    fn ordered_correction(&self, y: &[f64]) -> Vec<f64> {
        let d = self.d;
        let mut out = vec![0.0; d];
        for i in self.c..d {
            for j in (i + 1)..d {
                let w = 0.5 * y[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate().take(self.c) {
                    *o += w * self.coeff(i, j, k);
                }
            }
        }
        out
    }

    pub fn embed(&self, g: &LatticeElement) -> NilPoint {
        let y: Vec<f64> = g.0.iter().map(|&n| n as f64).collect();
        self.from_second_kind(&y)
    }

    /// Writes `a = r * gamma` with `gamma` in the lattice and the second-kind
    /// coordinates of `r` in `[0, 1)^d`, reducing from `v_d` down to `v_1`.
    pub fn reduce_mod_lattice(&self, a: &NilPoint) -> Result<(NilPoint, LatticeElement)> {
        self.check(a)?;
        Ok(self.reduce_unchecked(a))
    }

    fn reduce_unchecked(&self, a: &NilPoint) -> (NilPoint, LatticeElement) {
        let d = self.d;
        let mut cur = a.clone();
        let mut n = vec![0i64; d];
        for i in (0..d).rev() {
            let y = self.to_second_kind(&cur)[i];
            let mut k = y.floor();
            if y - k >= 1.0 {
                k += 1.0;
            }
            if k != 0.0 {
                cur = self.mul_unchecked(&cur, &NilPoint::basis(d, i, -k));
            }
            n[i] = k as i64;
        }
        (cur, LatticeElement(n))
    }

    /// The induced structure on `n / span(v_1..v_i)`.
    pub fn quotient(&self, i: usize) -> Result<NilStructure> {
        if i > self.d {
            return Err(Error::OutOfRange { index: i, max: self.d });
        }
        let d = self.d - i;
        let mut entries = Vec::new();
        for a in 0..d {
            for b in (a + 1)..d {
                for k in 0..d {
                    let v = self.coeff(a + i, b + i, k + i);
                    if v != 0.0 {
                        entries.push((a, b, k, v));
                    }
                }
            }
        }
        NilStructure::new(d, self.c.saturating_sub(i), &entries)
    }

    /// Image of `a` in `N / N_(i)`: drop the first `i` exponential coordinates.
    pub fn project_quotient(&self, a: &NilPoint, i: usize) -> Result<NilPoint> {
        self.check(a)?;
        if i > self.d {
            return Err(Error::OutOfRange { index: i, max: self.d });
        }
        Ok(NilPoint(a.0[i..].to_vec()))
    }
}

impl FiberGroup for NilStructure {
    type Point = NilPoint;

    fn identity(&self) -> NilPoint {
        NilPoint::zeros(self.d)
    }

    fn mul(&self, a: &NilPoint, b: &NilPoint) -> NilPoint {
        debug_assert_eq!(a.dim(), self.d);
        debug_assert_eq!(b.dim(), self.d);
        self.mul_unchecked(a, b)
    }

    fn inv(&self, a: &NilPoint) -> NilPoint {
        NilStructure::inv(self, a)
    }

    fn exp(&self, v: &[f64]) -> NilPoint {
        NilPoint(v.to_vec())
    }

    fn algebra_dim(&self) -> usize {
        self.d
    }

    fn canonical(&self, p: &NilPoint) -> NilPoint {
        self.reduce_unchecked(p).0
    }

    fn fiber_distance(&self, a: &NilPoint, b: &NilPoint) -> f64 {
        let diff = self.mul_unchecked(&NilStructure::inv(self, b), a);
        let (r, _) = self.reduce_unchecked(&diff);
        torus_norm(&self.to_second_kind(&r))
    }

    fn compatible(&self, other: &Self) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_point(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> NilPoint {
        NilPoint((0..d).map(|_| rng.gen_range(-scale..scale)).collect())
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn heisenberg_table() {
        let h = NilStructure::heisenberg3();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let expected = match (i, j, k) {
                        (1, 2, 0) => 1.0,
                        (2, 1, 0) => -1.0,
                        _ => 0.0,
                    };
                    assert_eq!(h.coeff(i, j, k), expected);
                }
            }
        }
        assert!(NilStructure::new(2, 0, &[]).is_ok());
        // [v_2, v_3] with a component along v_3 is not central
        assert!(NilStructure::new(3, 1, &[(1, 2, 2, 1.0)]).is_err());
        assert!(NilStructure::new(3, 1, &[(1, 2, 0, 1.0), (2, 1, 0, 1.0)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let h = NilStructure::heisenberg3();
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"d":3,"c":1,"brackets":[[2,3,1,1.0]]}"#);
        let back: NilStructure = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
        assert!(serde_json::from_str::<NilStructure>(r#"{"d":3,"c":1,"brackets":[[2,3,3,1.0]]}"#).is_err());
    }

    #[test]
    fn product_examples() {
        let h = NilStructure::heisenberg3();
        let b = NilPoint(vec![0.3, -1.2, 2.0]);
        assert_eq!(h.mul(&NilPoint::zeros(3), &b).unwrap(), b);
        let e2 = NilPoint::basis(3, 1, 1.0);
        let e3 = NilPoint::basis(3, 2, 1.0);
        assert_eq!(h.mul(&e2, &e3).unwrap().0, vec![0.5, 1.0, 1.0]);
        let ab = h.mul(&e2, &e3).unwrap();
        let ba = h.mul(&e3, &e2).unwrap();
        let comm = h.mul(&ab, &h.inv(&ba)).unwrap();
        assert!(close(&comm.0, &[1.0, 0.0, 0.0], 1e-15));
        assert!(h.mul(&e2, &NilPoint::zeros(2)).is_err());
    }

    #[test]
    fn inverse_examples() {
        let h = NilStructure::heisenberg3();
        assert_eq!(h.inv(&NilPoint::zeros(3)), NilPoint::zeros(3));
        assert_eq!(h.inv(&NilPoint(vec![1.0, 2.0, 3.0])).0, vec![-1.0, -2.0, -3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let a = random_point(&mut rng, 3, 5.0);
            let e = h.mul(&a, &h.inv(&a)).unwrap();
            assert!(e.0.iter().all(|x| x.abs() < 1e-14));
        }
    }

    #[test]
    fn second_kind_against_iterated_products() {
        let h = NilStructure::heisenberg3();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(h.to_second_kind(&NilPoint::zeros(3)), vec![0.0; 3]);
        for _ in 0..1000 {
            let y: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            // oracle: multiply the one-parameter factors explicitly
            let mut p = NilPoint::zeros(3);
            for (i, yi) in y.iter().enumerate() {
                p = h.mul(&p, &NilPoint::basis(3, i, *yi)).unwrap();
            }
            let q = h.from_second_kind(&y);
            assert!(close(&p.0, &q.0, 1e-13));
            assert!(close(&h.to_second_kind(&q), &y, 1e-13));
        }
    }

    #[test]
    fn reduction_examples() {
        let h = NilStructure::heisenberg3();
        let (r, g) = h.reduce_mod_lattice(&NilPoint::basis(3, 1, 1.0)).unwrap();
        assert!(r.0.iter().all(|x| x.abs() < 1e-15));
        assert_eq!(g, LatticeElement(vec![0, 1, 0]));
        let inside = h.from_second_kind(&[0.2, 0.4, 0.6]);
        let (r, g) = h.reduce_mod_lattice(&inside).unwrap();
        assert!(close(&r.0, &inside.0, 1e-15));
        assert_eq!(g, LatticeElement(vec![0, 0, 0]));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a = random_point(&mut rng, 3, 20.0);
            let (r, g) = h.reduce_mod_lattice(&a).unwrap();
            let back = h.mul(&r, &h.embed(&g)).unwrap();
            assert!(close(&back.0, &a.0, 1e-11));
            for y in h.to_second_kind(&r) {
                assert!((-1e-12..1.0 + 1e-12).contains(&y), "{y}");
            }
        }
    }

    #[test]
    fn quotient_projection() {
        let h = NilStructure::heisenberg3();
        let a = NilPoint(vec![0.1, 0.2, 0.3]);
        assert_eq!(h.project_quotient(&a, 0).unwrap(), a);
        assert_eq!(h.project_quotient(&a, 3).unwrap().dim(), 0);
        assert!(h.project_quotient(&a, 4).is_err());
        let q = h.quotient(1).unwrap();
        assert_eq!(q, NilStructure::abelian(2));
        assert_eq!(h.quotient(3).unwrap(), NilStructure::trivial());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn point() -> impl Strategy<Value = NilPoint> {
            proptest::collection::vec(-10.0f64..10.0, 3).prop_map(NilPoint)
        }

        fn lattice() -> impl Strategy<Value = LatticeElement> {
            proptest::collection::vec(-5i64..5, 3).prop_map(LatticeElement)
        }

        proptest! {
            #[test]
            fn associative(a in point(), b in point(), c in point()) {
                let h = NilStructure::heisenberg3();
                let l = h.mul(&h.mul(&a, &b).unwrap(), &c).unwrap();
                let r = h.mul(&a, &h.mul(&b, &c).unwrap()).unwrap();
                prop_assert!(close(&l.0, &r.0, 1e-12));
            }

            #[test]
            fn lattice_closed(g1 in lattice(), g2 in lattice()) {
                let h = NilStructure::heisenberg3();
                let p = h.mul(&h.embed(&g1), &h.embed(&g2)).unwrap();
                for y in h.to_second_kind(&p) {
                    prop_assert!((y - y.round()).abs() < 1e-12);
                }
            }

            #[test]
            fn quotient_is_homomorphism(a in point(), b in point(), i in 0usize..=3) {
                let h = NilStructure::heisenberg3();
                let q = h.quotient(i).unwrap();
                let lhs = h.project_quotient(&h.mul(&a, &b).unwrap(), i).unwrap();
                let rhs = q.mul(&h.project_quotient(&a, i).unwrap(), &h.project_quotient(&b, i).unwrap()).unwrap();
                prop_assert!(close(&lhs.0, &rhs.0, 1e-12));
            }

            #[test]
            fn reduction_right_invariant(a in point(), g in lattice()) {
                let h = NilStructure::heisenberg3();
                let shifted = h.mul(&a, &h.embed(&g)).unwrap();
                let (r1, _) = h.reduce_mod_lattice(&a).unwrap();
                let (r2, _) = h.reduce_mod_lattice(&shifted).unwrap();
                // identical unless a coordinate sits on the boundary of [0, 1)
                prop_assert!(h.fiber_distance(&r1, &r2) < 1e-9);
            }
        }
    }
}
