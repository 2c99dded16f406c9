//! Exact special values of ζ and quadratic Dirichlet L-functions, carried
//! as `rational · π^a · D^{b/2}`.
//!
//! For positive even `k`,
//!
//! ```text
//! ζ(k) = (-1)^{k/2+1} · B_k · 2^k / (2 · k!) · π^k .
//! ```
//!
//! For the odd primitive character `χ = (-D/·)` of conductor `D` (with `D`
//! squarefree, `D ≡ 3 (mod 4)`) and odd `k ≥ 1`, the functional-equation
//! evaluation reads
//!
//! ```text
//! L(k, χ) = (-1)^{1+(k-1)/2} · (2π/D)^k · √D · B_{k,χ} / (2 · k!)
//!         = (-1)^{1+(k-1)/2} · 2^{k-1} · B_{k,χ} / (k! · D^{k-1}) · π^k · D^{-1/2},
//! ```
//!
//! see Washington, *Introduction to Cyclotomic Fields*, Theorem 4.2.
//! Both families are represented by [`AlgebraicValue`], whose numeric
//! evaluation goes through the certified interval engine.

use crate::bernoulli::{bernoulli_number, generalized_bernoulli};
use crate::interval::Interval;
use crate::{factorial, is_valid_odd_disc, rat_pow, rational_to_decimal_trunc, Rational};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use std::fmt;

/// An exact real of the shape `coeff · π^{pi_exp} · D^{sqrt_d_exp / 2}`.
///
/// `d` is the positive integer under the square root; it is `0` (unused)
/// whenever `sqrt_d_exp == 0`.  Multiplication unifies the `d` fields and
/// rejects mixing distinct radicands.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraicValue {
    pub coeff: Rational,
    pub pi_exp: i64,
    pub sqrt_d_exp: i64,
    pub d: u64,
}

impl AlgebraicValue {
    pub fn one() -> Self {
        AlgebraicValue {
            coeff: Rational::one(),
            pi_exp: 0,
            sqrt_d_exp: 0,
            d: 0,
        }
    }

    pub fn from_rational(coeff: Rational) -> Self {
        AlgebraicValue {
            coeff,
            pi_exp: 0,
            sqrt_d_exp: 0,
            d: 0,
        }
    }

    /// Product, unifying radicands.
    pub fn mul(&self, other: &Self) -> Self {
        let d = match (self.sqrt_d_exp != 0, other.sqrt_d_exp != 0) {
            (false, false) => 0,
            (true, false) => self.d,
            (false, true) => other.d,
            (true, true) => {
                assert_eq!(
                    self.d, other.d,
                    "cannot multiply algebraic values over distinct radicands"
                );
                self.d
            }
        };
        let sqrt_d_exp = self.sqrt_d_exp + other.sqrt_d_exp;
        AlgebraicValue {
            coeff: &self.coeff * &other.coeff,
            pi_exp: self.pi_exp + other.pi_exp,
            sqrt_d_exp: if sqrt_d_exp == 0 { 0 } else { sqrt_d_exp },
            d: if sqrt_d_exp == 0 { 0 } else { d },
        }
    }

    /// Reciprocal; the coefficient must be nonzero.
    pub fn recip(&self) -> Self {
        assert!(!self.coeff.is_zero(), "reciprocal of zero algebraic value");
        AlgebraicValue {
            coeff: self.coeff.recip(),
            pi_exp: -self.pi_exp,
            sqrt_d_exp: -self.sqrt_d_exp,
            d: self.d,
        }
    }

    pub fn div(&self, other: &Self) -> Self {
        self.mul(&other.recip())
    }

    /// Scales by an exact rational.
    pub fn scale(&self, r: &Rational) -> Self {
        AlgebraicValue {
            coeff: &self.coeff * r,
            ..self.clone()
        }
    }

    /// True when the value is rational: no π and an integral power of `D`.
    pub fn is_rational(&self) -> bool {
        self.pi_exp == 0 && self.sqrt_d_exp % 2 == 0
    }

    /// The exact rational value, when [`Self::is_rational`] holds.
    pub fn as_rational(&self) -> Option<Rational> {
        if !self.is_rational() {
            return None;
        }
        let d_pow = rat_pow(
            &Rational::from_integer(BigInt::from(self.d.max(1))),
            self.sqrt_d_exp / 2,
        );
        Some(&self.coeff * d_pow)
    }

    /// Certified interval enclosure with roughly `prec` digits.
    pub fn interval(&self, prec: u32) -> Interval {
        // Fold the integral part of the D-power into the rational factor.
        let half_leftover = self.sqrt_d_exp.rem_euclid(2);
        let int_d_exp = (self.sqrt_d_exp - half_leftover) / 2;
        let rational_part =
            &self.coeff * rat_pow(&Rational::from_integer(BigInt::from(self.d.max(1))), int_d_exp);
        let mut iv = Interval::from_rational(&rational_part, prec + 8);
        if self.pi_exp != 0 {
            let pi = Interval::pi(prec + 8);
            let pi_pow = pi.pow_u64(self.pi_exp.unsigned_abs(), prec + 8);
            let pi_pow = if self.pi_exp < 0 {
                pi_pow.recip(prec + 8)
            } else {
                pi_pow
            };
            iv = iv.mul(&pi_pow, prec + 8);
        }
        if half_leftover != 0 {
            let sqrt_d = Interval::exact_int(self.d).root(2, prec + 8);
            iv = iv.mul(&sqrt_d, prec + 8);
        }
        iv.normalize(prec)
    }
}

impl fmt::Display for AlgebraicValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.coeff)?;
        if self.pi_exp != 0 {
            write!(f, " * pi^{}", self.pi_exp)?;
        }
        if self.sqrt_d_exp != 0 {
            write!(f, " * {}^({}/2)", self.d, self.sqrt_d_exp)?;
        }
        Ok(())
    }
}

/// `ζ(k)` for positive even `k`, as an exact multiple of `π^k`.
pub fn zeta_even(k: u64) -> AlgebraicValue {
    assert!(k >= 2 && k % 2 == 0, "zeta_even requires positive even k, got {k}");
    let sign = if (k / 2 + 1) % 2 == 0 { 1 } else { -1 };
    let coeff = bernoulli_number(k)
        * Rational::new(
            BigInt::from(sign) * BigInt::from(2u32).pow(u32::try_from(k).expect("k fits u32")),
            BigInt::from(2) * factorial(k),
        );
    AlgebraicValue {
        coeff,
        pi_exp: k as i64,
        sqrt_d_exp: 0,
        d: 0,
    }
}

/// `L(k, χ_{-D})` for odd `k ≥ 1`, as an exact multiple of `π^k · D^{-1/2}`.
pub fn dirichlet_l_odd(d: u64, k: u64) -> AlgebraicValue {
    assert!(k % 2 == 1, "dirichlet_l_odd requires odd k, got {k}");
    assert!(
        is_valid_odd_disc(d),
        "dirichlet_l_odd: D = {d} is not squarefree with D ≡ 3 (mod 4)"
    );
    let sign = if (1 + (k - 1) / 2) % 2 == 0 { 1 } else { -1 };
    let coeff = generalized_bernoulli(d, k)
        * Rational::new(
            BigInt::from(sign) * BigInt::from(2u32).pow(u32::try_from(k - 1).expect("k fits u32")),
            factorial(k) * BigInt::from(d).pow(u32::try_from(k - 1).expect("k fits u32")),
        );
    AlgebraicValue {
        coeff,
        pi_exp: k as i64,
        sqrt_d_exp: -1,
        d,
    }
}

/// Decimal evaluation of an algebraic value, truncated toward zero to
/// `digits` fractional digits.
///
/// The working precision escalates until both interval endpoints agree on
/// the truncation, so the returned digits are exact.
pub fn numeric_eval(value: &AlgebraicValue, digits: u32) -> String {
    if value.coeff.is_zero() {
        return "0.0".to_string();
    }
    if value.is_rational() {
        let r = value.as_rational().expect("rational by construction");
        return rational_to_decimal_trunc(&r, digits);
    }
    let mut wp = digits + 12;
    for _ in 0..8 {
        if let Some(s) = value.interval(wp).to_decimal_trunc(digits) {
            return s;
        }
        wp = wp * 2 + 32;
    }
    unreachable!("interval refinement failed to settle {digits} digits of {value}")
}
