//! Exact rational arithmetic and special values for covolume computations.
//!
//! This crate supplies the numerical backbone shared by the lattice and
//! covolume crates:
//!
//! * arbitrary-precision rationals (re-exported from [`num_rational`])
//!   together with small construction helpers,
//! * Bernoulli numbers, Bernoulli polynomials, and generalized Bernoulli
//!   numbers attached to the quadratic character of an imaginary quadratic
//!   field of odd discriminant,
//! * closed-form special values of the Riemann zeta function at positive
//!   even integers and of the quadratic Dirichlet L-function at positive
//!   odd integers, carried exactly as `rational · π^a · D^{b/2}`,
//! * outward-rounded decimal interval arithmetic with certified π, used to
//!   decide inequalities between such values without floating-point trust.
//!
//! # Conventions
//!
//! * Bernoulli numbers use the convention `B_1 = -1/2`.
//! * For a squarefree positive integer `D ≡ 3 (mod 4)` the character
//!   `χ_{-D} = (-D/·)` is the Kronecker symbol; it is odd and primitive of
//!   conductor `D`.
//! * All decimal output truncates toward zero; no floating point enters any
//!   comparison.
//!
//! # References
//!
//! * Washington, *Introduction to Cyclotomic Fields*, ch. 4 (generalized
//!   Bernoulli numbers and L-values).
//! * Cohen, *A Course in Computational Algebraic Number Theory*, §1.4
//!   (Kronecker symbol algorithm).

pub mod bernoulli;
pub mod interval;
pub mod special;

pub use bernoulli::{bernoulli_number, bernoulli_poly, generalized_bernoulli, kronecker};
pub use interval::{Interval, Undecided};
pub use special::{dirichlet_l_odd, numeric_eval, zeta_even, AlgebraicValue};

use num_bigint::BigInt;
pub use num_rational::BigRational as Rational;
use num_traits::{One, Signed, Zero};

/// Builds a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Builds a rational from a machine integer.
pub fn rat_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Exact factorial.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Integer power of a rational; negative exponents invert.
pub fn rat_pow(base: &Rational, exp: i64) -> Rational {
    if exp == 0 {
        return Rational::one();
    }
    base.pow(i32::try_from(exp).expect("exponent fits i32"))
}

/// Whether `-d` is the discriminant of an imaginary quadratic field with odd
/// discriminant, i.e. `d` is squarefree and `d ≡ 3 (mod 4)`.
pub fn is_valid_odd_disc(d: u64) -> bool {
    if d % 4 != 3 {
        return false;
    }
    // Squarefree test by trial division; d ≡ 3 (mod 4) is odd.
    let mut m = d;
    let mut p = 3u64;
    while p.saturating_mul(p) <= m {
        if m % p == 0 {
            m /= p;
            if m % p == 0 {
                return false;
            }
        }
        p += 2;
    }
    true
}

/// Exact truncation of a rational toward zero to `digits` fractional decimal
/// digits, rendered with at least one fractional digit (`7 → "7.0"`).
pub fn rational_to_decimal_trunc(r: &Rational, digits: u32) -> String {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (r.numer() * &scale) / r.denom(); // BigInt division truncates toward zero
    let neg = scaled.is_negative();
    let mag = scaled.abs();
    let (int_part, frac_part) = (&mag / &scale, &mag % &scale);
    let mut frac = format!("{:0width$}", frac_part, width = digits as usize);
    while frac.len() > 1 && frac.ends_with('0') {
        frac.pop();
    }
    if frac.is_empty() {
        frac.push('0');
    }
    format!("{}{}.{}", if neg { "-" } else { "" }, int_part, frac)
}
