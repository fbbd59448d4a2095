//! Integer and rational bookkeeping: reduced fractions, the distance to the
//! integer lattice, and the rational approximating sequence used by the
//! approximation-by-conjugation scheme.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A reduced fraction `p/q` with `q >= 1` and `gcd(p, q) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Fraction {
    p: i128,
    q: i128,
}

impl Fraction {
    /// Builds `p/q` in lowest terms with a positive denominator.
    pub fn new(p: i128, q: i128) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("zero denominator".into()));
        }
        let g = p.gcd(&q);
        let (mut p, mut q) = (p / g, q / g);
        if q < 0 {
            p = p.checked_neg().ok_or(Error::Overflow("fraction sign"))?;
            q = q.checked_neg().ok_or(Error::Overflow("fraction sign"))?;
        }
        Ok(Fraction { p, q })
    }

    pub fn numer(&self) -> i128 {
        self.p
    }

    pub fn denom(&self) -> i128 {
        self.q
    }

    pub fn to_f64(&self) -> f64 {
        self.p as f64 / self.q as f64
    }

    /// Representative of `p/q mod 1` in `[0, 1)`.
    pub fn fract(&self) -> f64 {
        self.p.rem_euclid(self.q) as f64 / self.q as f64
    }
}

impl std::fmt::Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// Target rotation `p0/q0` together with the period `qbar` delivered by the
/// conjugation lemma.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AkSequenceParams {
    target: Fraction,
    qbar: u64,
}

impl AkSequenceParams {
    pub fn new(p0: i64, q0: u64, qbar: u64) -> Result<Self> {
        if q0 == 0 || qbar == 0 {
            return Err(Error::InvalidParameter("q0 and qbar must be positive".into()));
        }
        if (p0 as i128).gcd(&(q0 as i128)) != 1 {
            return Err(Error::NotCoprime { p: p0, q: q0 });
        }
        Ok(AkSequenceParams {
            target: Fraction::new(p0 as i128, q0 as i128)?,
            qbar,
        })
    }

    pub fn target(&self) -> Fraction {
        self.target
    }

    pub fn qbar(&self) -> u64 {
        self.qbar
    }

    /// Exact distance `|p_ell/q_ell - p0/q0|`, which equals `1/(qbar q0 ell)`.
    pub fn error_bound(&self, ell: u64) -> f64 {
        1.0 / (self.qbar as f64 * self.target.q as f64 * ell as f64)
    }
}

/// Euclidean distance from `v` to the nearest point of `Z^d`.
pub fn torus_norm(v: &[f64]) -> f64 {
    v.iter()
        .map(|x| {
            let r = x - x.round();
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// The `ell`-th term `p_ell/q_ell` of the approximating sequence:
/// `p_hat = qbar p0 ell + 1`, `q_hat = qbar q0 ell`, reduced by their gcd.
///
/// The result is coprime, `qbar` divides `q_ell` (since `p_hat` is `1 mod qbar`,
/// the gcd is coprime to `qbar`), and it tends to `p0/q0`.
pub fn ak_rationals(params: &AkSequenceParams, ell: u64) -> Result<Fraction> {
    if ell == 0 {
        return Err(Error::InvalidParameter("ell must be >= 1".into()));
    }
    let qbar = params.qbar as i128;
    let ell = ell as i128;
    let p_hat = qbar
        .checked_mul(params.target.p)
        .and_then(|x| x.checked_mul(ell))
        .and_then(|x| x.checked_add(1))
        .ok_or(Error::Overflow("p_hat"))?;
    let q_hat = qbar
        .checked_mul(params.target.q)
        .and_then(|x| x.checked_mul(ell))
        .ok_or(Error::Overflow("q_hat"))?;
    Fraction::new(p_hat, q_hat)
}

/// `gcd` on machine integers, used for coprimality preconditions.
pub fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

pub fn is_coprime(p: i64, q: u64) -> bool {
    (p.unsigned_abs()).gcd(&q) == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force over the 3^d nearest lattice points.
    fn brute_torus_norm(v: &[f64]) -> f64 {
        let d = v.len();
        let mut best = f64::INFINITY;
        for code in 0..3usize.pow(d as u32) {
            let mut c = code;
            let mut s = 0.0;
            for x in v {
                let off = (c % 3) as f64 - 1.0;
                c /= 3;
                let n = x.floor() + off;
                s += (x - n).powi(2);
            }
            best = best.min(s.sqrt());
        }
        best
    }

    #[test]
    fn torus_norm_examples() {
        assert_eq!(torus_norm(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(torus_norm(&[0.5]), 0.5);
        let v = [0.75, 0.25];
        let brute = brute_torus_norm(&v);
        assert!((brute - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert!((torus_norm(&v) - brute).abs() < 1e-15);
    }

    #[test]
    fn ak_examples() {
        let params = AkSequenceParams::new(1, 2, 4).unwrap();
        assert_eq!(ak_rationals(&params, 1).unwrap(), Fraction::new(5, 8).unwrap());
        assert_eq!(ak_rationals(&params, 2).unwrap(), Fraction::new(9, 16).unwrap());
        for ell in 1..=100 {
            let f = ak_rationals(&params, ell).unwrap();
            assert_eq!(f.denom() % 4, 0);
            assert_eq!(f.numer().gcd(&f.denom()), 1);
        }
    }

    #[test]
    fn ak_rejects_zero_and_overflow() {
        let params = AkSequenceParams::new(1, 2, 4).unwrap();
        assert!(ak_rationals(&params, 0).is_err());
        let big = AkSequenceParams::new(1, u64::MAX, u64::MAX).unwrap();
        assert!(matches!(ak_rationals(&big, u64::MAX), Err(Error::Overflow(_))));
        assert!(AkSequenceParams::new(2, 4, 1).is_err());
    }

    #[test]
    fn ak_converges() {
        let params = AkSequenceParams::new(3, 7, 12).unwrap();
        let f = ak_rationals(&params, 1_000_000).unwrap();
        assert!((f.to_f64() - 3.0 / 7.0).abs() < 1e-5);
        // exact: |p/q - 3/7| = |7p - 3q| / (7q)
        let gap = (7 * f.numer() - 3 * f.denom()).abs() as f64 / (7 * f.denom()) as f64;
        assert!(gap <= params.error_bound(1_000_000) * (1.0 + 1e-12));
    }

    proptest! {
        #[test]
        fn torus_norm_integer_invariant(v in proptest::collection::vec(-10.0f64..10.0, 1..5),
                                        n in proptest::collection::vec(-50i32..50, 5)) {
            let shifted: Vec<f64> = v.iter().zip(&n).map(|(x, k)| x + *k as f64).collect();
            prop_assert!((torus_norm(&v) - torus_norm(&shifted)).abs() < 1e-12);
            prop_assert!((torus_norm(&v) - brute_torus_norm(&v)).abs() < 1e-12);
        }

        #[test]
        fn ak_terms_coprime_and_divisible(p0 in -50i64..50, q0 in 1u64..50, qbar in 1u64..200, ell in 1u64..1000) {
            prop_assume!(is_coprime(p0, q0));
            let params = AkSequenceParams::new(p0, q0, qbar).unwrap();
            let f = ak_rationals(&params, ell).unwrap();
            prop_assert_eq!(f.numer().gcd(&f.denom()), 1);
            prop_assert_eq!(f.denom() % qbar as i128, 0);
        }
    }
}
