//! Exact arithmetic in the Eisenstein integers `Z[ω]`, `ω = (-1 + √-3)/2`.
//!
//! All coefficient arithmetic is checked; the `std::ops` impls panic on
//! overflow while the `checked_*` methods report it as [`Error::Overflow`].

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::numeric::is_prime;
use crate::{Error, Result};

pub const SQRT3_OVER_2: f64 = 0.866_025_403_784_438_6;

/// The element `a + bω` of `Z[ω]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct EisensteinInt {
    pub a: i64,
    pub b: i64,
}

impl EisensteinInt {
    pub const ZERO: Self = Self { a: 0, b: 0 };
    pub const ONE: Self = Self { a: 1, b: 0 };
    pub const OMEGA: Self = Self { a: 0, b: 1 };

    pub const fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }

    pub const fn from_int(a: i64) -> Self {
        Self { a, b: 0 }
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn checked_add(self, rhs: Self) -> Result<Self> {
        Ok(Self {
            a: self.a.checked_add(rhs.a).ok_or(Error::Overflow("eisenstein add"))?,
            b: self.b.checked_add(rhs.b).ok_or(Error::Overflow("eisenstein add"))?,
        })
    }

    pub fn checked_sub(self, rhs: Self) -> Result<Self> {
        Ok(Self {
            a: self.a.checked_sub(rhs.a).ok_or(Error::Overflow("eisenstein sub"))?,
            b: self.b.checked_sub(rhs.b).ok_or(Error::Overflow("eisenstein sub"))?,
        })
    }

    /// `(a + bω)(c + dω) = (ac - bd) + (ad + bc - bd)ω`, using `ω² = -1 - ω`.
    pub fn checked_mul(self, rhs: Self) -> Result<Self> {
        let ovf = || Error::Overflow("eisenstein mul");
        let ac = self.a.checked_mul(rhs.a).ok_or_else(ovf)?;
        let bd = self.b.checked_mul(rhs.b).ok_or_else(ovf)?;
        let ad = self.a.checked_mul(rhs.b).ok_or_else(ovf)?;
        let bc = self.b.checked_mul(rhs.a).ok_or_else(ovf)?;
        Ok(Self {
            a: ac.checked_sub(bd).ok_or_else(ovf)?,
            b: ad.checked_add(bc).and_then(|s| s.checked_sub(bd)).ok_or_else(ovf)?,
        })
    }

    pub fn checked_scale(self, k: i64) -> Result<Self> {
        Ok(Self {
            a: self.a.checked_mul(k).ok_or(Error::Overflow("eisenstein scale"))?,
            b: self.b.checked_mul(k).ok_or(Error::Overflow("eisenstein scale"))?,
        })
    }

    pub fn checked_pow(self, exp: u32) -> Result<Self> {
        (0..exp).try_fold(Self::ONE, |acc, _| acc.checked_mul(self))
    }

    /// Complex conjugate: `conj(a + bω) = (a - b) - bω`.
    pub fn conj(self) -> Self {
        Self {
            a: self.a - self.b,
            b: -self.b,
        }
    }

    /// Field norm `a² - ab + b²`, i.e. the squared complex modulus.
    pub fn checked_norm(self) -> Result<i64> {
        let (a, b) = (self.a as i128, self.b as i128);
        let n = (a * a)
            .checked_sub(a * b)
            .and_then(|t| t.checked_add(b * b))
            .ok_or(Error::Overflow("eisenstein norm"))?;
        i64::try_from(n).map_err(|_| Error::Overflow("eisenstein norm"))
    }

    pub fn norm(self) -> i64 {
        self.checked_norm().expect("Eisenstein norm overflow")
    }

    /// Real part of `self · conj(other)`, the Euclidean inner product of the
    /// two embedded points, doubled so that it stays integral.
    pub fn twice_inner(self, other: Self) -> i64 {
        // Re((a+bω)(c+dω̄)) = ac + bd - (ad + bc)/2
        2 * (self.a * other.a + self.b * other.b) - (self.a * other.b + self.b * other.a)
    }

    /// Exact division, if `rhs` divides `self` in `Z[ω]`.
    pub fn checked_div_exact(self, rhs: Self) -> Option<Self> {
        let n = rhs.checked_norm().ok()?;
        if n == 0 {
            return None;
        }
        let num = self.checked_mul(rhs.conj()).ok()?;
        if num.a % n == 0 && num.b % n == 0 {
            Some(Self::new(num.a / n, num.b / n))
        } else {
            None
        }
    }

    pub fn divides(self, x: Self) -> bool {
        x.checked_div_exact(self).is_some()
    }

    /// Position in the plane under `u + ωv ↦ (u - v/2, (√3/2)v)`.
    pub fn to_point(self) -> [f64; 2] {
        embed(self.a as f64, self.b as f64)
    }
}

/// Identifies `u + ωv` with `(u - v/2, (√3/2) v)` in `R²`; the Euclidean
/// length of the image equals the complex modulus.
pub fn embed(u: f64, v: f64) -> [f64; 2] {
    [u - 0.5 * v, SQRT3_OVER_2 * v]
}

impl Add for EisensteinInt {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.checked_add(rhs).expect("Eisenstein add overflow")
    }
}

impl Sub for EisensteinInt {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.checked_sub(rhs).expect("Eisenstein sub overflow")
    }
}

impl Mul for EisensteinInt {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.checked_mul(rhs).expect("Eisenstein mul overflow")
    }
}

impl Neg for EisensteinInt {
    type Output = Self;
    fn neg(self) -> Self {
        Self::ZERO - self
    }
}

impl fmt::Display for EisensteinInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a, self.b) {
            (a, 0) => write!(f, "{a}"),
            (0, 1) => write!(f, "ω"),
            (0, -1) => write!(f, "-ω"),
            (0, b) => write!(f, "{b}ω"),
            (a, 1) => write!(f, "{a}+ω"),
            (a, -1) => write!(f, "{a}-ω"),
            (a, b) if b > 0 => write!(f, "{a}+{b}ω"),
            (a, b) => write!(f, "{a}{b}ω"),
        }
    }
}

/// How a rational prime decomposes in `Q(√-3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimeKind {
    Split,
    Inert,
    Ramified,
}

impl fmt::Display for PrimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PrimeKind::Split => "split",
            PrimeKind::Inert => "inert",
            PrimeKind::Ramified => "ramified",
        })
    }
}

/// A prime ideal `(t)` lying over the rational prime `p`, together with a
/// fixed residue alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeIdealInfo {
    pub p: u64,
    pub kind: PrimeKind,
    /// Generator of the ideal.
    pub t: EisensteinInt,
    /// Absolute norm, the size of the residue field.
    pub q: u64,
    /// Residue representatives; `reps[0]` is zero.
    pub reps: Vec<EisensteinInt>,
}

/// Norm of a prime ideal over `p` without building the residue alphabet.
pub fn residue_field_size(p: u64) -> Result<u64> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(match p % 3 {
        0 | 1 => p,
        _ => p.checked_mul(p).ok_or(Error::Overflow("residue_field_size"))?,
    })
}

/// Splitting data for `p`.
///
/// Split and ramified generators are the lexicographically smallest `(a, b)`
/// with `a >= 0` and `a² - ab + b² = p`; for `p = 3` that is `1 - ω`.
pub fn split_prime(p: u64) -> Result<PrimeIdealInfo> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let p_i = i64::try_from(p).map_err(|_| Error::Overflow("split_prime"))?;
    let kind = match p % 3 {
        0 => PrimeKind::Ramified,
        1 => PrimeKind::Split,
        _ => PrimeKind::Inert,
    };
    match kind {
        PrimeKind::Inert => {
            let q = p_i.checked_mul(p_i).ok_or(Error::Overflow("split_prime"))?;
            let reps = (0..p_i)
                .flat_map(|b| (0..p_i).map(move |a| EisensteinInt::new(a, b)))
                .collect();
            Ok(PrimeIdealInfo {
                p,
                kind,
                t: EisensteinInt::from_int(p_i),
                q: q as u64,
                reps,
            })
        }
        PrimeKind::Split | PrimeKind::Ramified => {
            let bound = (p as f64).sqrt().ceil() as i64 + 1;
            let t = (0..=bound)
                .flat_map(|a| (-bound..=bound).map(move |b| EisensteinInt::new(a, b)))
                .find(|t| t.norm() == p_i)
                .expect("primes p ≢ 2 mod 3 are norms from Z[ω]");
            Ok(PrimeIdealInfo {
                p,
                kind,
                t,
                q: p,
                reps: (0..p_i).map(EisensteinInt::from_int).collect(),
            })
        }
    }
}

impl PrimeIdealInfo {
    /// Index `j` with `x ≡ reps[j] (mod t)`.
    pub fn reduce(&self, x: EisensteinInt) -> usize {
        let p = self.p as i64;
        match self.kind {
            PrimeKind::Inert => {
                let a = x.a.rem_euclid(p);
                let b = x.b.rem_euclid(p);
                (a + p * b) as usize
            }
            PrimeKind::Split | PrimeKind::Ramified => {
                // x - j ∈ (t)  iff  (x - j)·conj(t) ≡ 0 (mod p) coordinatewise.
                let tc = self.t.conj();
                let y = x * tc;
                (0..p)
                    .find(|&j| (y.a - j * tc.a).rem_euclid(p) == 0 && (y.b - j * tc.b).rem_euclid(p) == 0)
                    .expect("residue classes are represented by 0..p") as usize
            }
        }
    }

    pub fn rep(&self, index: usize) -> EisensteinInt {
        self.reps[index]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn norms() {
        assert_eq!(EisensteinInt::new(1, 1).norm(), 1);
        assert_eq!(EisensteinInt::new(2, 0).norm(), 4);
        assert_eq!(EisensteinInt::new(1, -1).norm(), 3);
        assert_eq!(EisensteinInt::ZERO.norm(), 0);
    }

    #[test]
    fn square_of_one_plus_omega() {
        // (1+ω)² = 1 + 2ω + ω² = 1 + 2ω - 1 - ω = ω
        let x = EisensteinInt::new(1, 1);
        assert_eq!(x * x, EisensteinInt::new(0, 1));
        assert_eq!(EisensteinInt::OMEGA * EisensteinInt::OMEGA, EisensteinInt::new(-1, -1));
    }

    #[test]
    fn overflow_is_reported() {
        let big = EisensteinInt::new(i64::MAX, 1);
        assert!(matches!(big.checked_add(big), Err(Error::Overflow(_))));
        assert!(matches!(big.checked_mul(big), Err(Error::Overflow(_))));
        assert!(EisensteinInt::new(i64::MAX, i64::MIN).checked_norm().is_err());
    }

    #[test]
    fn embedding_examples() {
        assert_eq!(embed(1.0, 0.0), [1.0, 0.0]);
        let [x, y] = embed(0.0, 1.0);
        assert!((x + 0.5).abs() < 1e-15 && (y - 3f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((x.hypot(y) - 1.0).abs() < 1e-15);
        let [x, y] = embed(1.0, 2.0);
        assert!(x.abs() < 1e-15 && (y - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(EisensteinInt::new(1, 2).norm(), 3);
    }

    #[test]
    fn splitting_of_small_primes() {
        let two = split_prime(2).unwrap();
        assert_eq!(two.kind, PrimeKind::Inert);
        assert_eq!(two.t, EisensteinInt::new(2, 0));
        assert_eq!(two.q, 4);
        assert_eq!(
            two.reps,
            vec![
                EisensteinInt::new(0, 0),
                EisensteinInt::new(1, 0),
                EisensteinInt::new(0, 1),
                EisensteinInt::new(1, 1)
            ]
        );

        let three = split_prime(3).unwrap();
        assert_eq!(three.kind, PrimeKind::Ramified);
        assert_eq!(three.t, EisensteinInt::new(1, -1));
        assert_eq!(three.q, 3);

        let seven = split_prime(7).unwrap();
        assert_eq!(seven.kind, PrimeKind::Split);
        assert_eq!(seven.q, 7);
        assert_eq!(seven.t.norm(), 7);

        assert!(matches!(split_prime(9), Err(Error::NotPrime(9))));
        assert!(matches!(split_prime(1), Err(Error::NotPrime(1))));
    }

    #[test]
    fn generator_norm_matches_q_for_primes_below_200() {
        for p in crate::numeric::primes_up_to(200) {
            let info = split_prime(p).unwrap();
            assert_eq!(info.t.norm() as u64, info.q);
            assert_eq!(info.reps.len() as u64, info.q);
            assert_eq!(info.q, residue_field_size(p).unwrap());
            let expected = match p % 3 {
                0 => 3,
                1 => p,
                _ => p * p,
            };
            assert_eq!(info.q, expected);
        }
    }

    #[test]
    fn reduce_examples() {
        let two = split_prime(2).unwrap();
        assert_eq!(two.reduce(EisensteinInt::ZERO), 0);
        assert_eq!(two.reduce(EisensteinInt::new(2, 2)), 0);
        let j = two.reduce(EisensteinInt::new(3, 1));
        assert_eq!(two.reps[j], EisensteinInt::new(1, 1));
    }

    #[test]
    fn reps_are_pairwise_incongruent() {
        for p in [2, 3, 5, 7, 13] {
            let info = split_prime(p).unwrap();
            for (i, &x) in info.reps.iter().enumerate() {
                assert_eq!(info.reduce(x), i);
                for &y in &info.reps[..i] {
                    assert!(!info.t.divides(x - y));
                    assert!((x - y).norm() >= 1);
                }
            }
        }
    }

    fn small() -> impl Strategy<Value = EisensteinInt> {
        (-1000i64..1000, -1000i64..1000).prop_map(|(a, b)| EisensteinInt::new(a, b))
    }

    proptest! {
        #[test]
        fn norm_is_multiplicative(x in small(), y in small()) {
            prop_assert_eq!((x * y).norm(), x.norm() * y.norm());
        }

        #[test]
        fn norm_is_positive_definite(x in small()) {
            prop_assert!(x.norm() >= 0);
            prop_assert_eq!(x.norm() == 0, x.is_zero());
            prop_assert_eq!(x.norm(), (x * x.conj()).a);
            prop_assert_eq!((x * x.conj()).b, 0);
        }

        #[test]
        fn embedding_preserves_squared_length(x in small()) {
            let [u, v] = x.to_point();
            let len2 = u * u + v * v;
            prop_assert!((len2 - x.norm() as f64).abs() <= 1e-9 * (1.0 + x.norm() as f64));
        }

        #[test]
        fn twice_inner_is_polarisation(x in small(), y in small()) {
            let lhs = (x + y).norm() - x.norm() - y.norm();
            prop_assert_eq!(lhs, x.twice_inner(y));
        }

        #[test]
        fn residues_respect_addition(x in small(), y in small(), p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13])) {
            let info = split_prime(p).unwrap();
            let induced = info.reduce(info.reps[info.reduce(x)] + info.reps[info.reduce(y)]);
            prop_assert_eq!(info.reduce(x + y), induced);
        }
    }
}
