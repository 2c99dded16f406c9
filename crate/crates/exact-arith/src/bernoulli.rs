//! Bernoulli numbers, Bernoulli polynomials, the Kronecker symbol, and
//! generalized Bernoulli numbers of quadratic characters.
//!
//! Conventions: `B_1 = -1/2`; `B_k = 0` for odd `k ≥ 3`.  For `χ` the
//! Kronecker symbol `(-D/·)` of odd fundamental discriminant `-D`, the
//! generalized Bernoulli number is defined through
//!
//! ```text
//! B_{k,χ} = D^{k-1} · Σ_{a=1}^{D} χ(a) · B_k(a/D)
//! ```
//!
//! where `B_k(x)` is the `k`-th Bernoulli polynomial.

use crate::{binomial, is_valid_odd_disc, rat_pow, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::sync::Mutex;

static BERNOULLI_CACHE: Mutex<Vec<Rational>> = Mutex::new(Vec::new());

/// The `k`-th Bernoulli number with the convention `B_1 = -1/2`.
///
/// Computed by the defining recurrence
/// `Σ_{j=0}^{m} C(m+1, j) B_j = 0` for `m ≥ 1`, with results memoized.
pub fn bernoulli_number(k: u64) -> Rational {
    let mut cache = BERNOULLI_CACHE.lock().expect("Bernoulli cache poisoned");
    if cache.is_empty() {
        cache.push(Rational::one());
    }
    while (cache.len() as u64) <= k {
        let m = cache.len() as u64;
        let mut acc = Rational::zero();
        for (j, b) in cache.iter().enumerate() {
            acc += b * Rational::from_integer(binomial(m + 1, j as u64));
        }
        let next = -acc / Rational::from_integer(BigInt::from(m + 1));
        cache.push(next);
    }
    cache[k as usize].clone()
}

/// The Bernoulli polynomial `B_k(x) = Σ_{j=0}^{k} C(k, j) B_j x^{k-j}`
/// evaluated at a rational argument.
pub fn bernoulli_poly(k: u64, x: &Rational) -> Rational {
    let mut acc = Rational::zero();
    for j in 0..=k {
        let term = Rational::from_integer(binomial(k, j))
            * bernoulli_number(j)
            * rat_pow(x, (k - j) as i64);
        acc += term;
    }
    acc
}

/// The Kronecker symbol `(a/n)`, extending the Jacobi symbol to all integers.
///
/// Follows the binary algorithm of Cohen, *A Course in Computational
/// Algebraic Number Theory*, Algorithm 1.4.10.
pub fn kronecker(a: &BigInt, n: &BigInt) -> i32 {
    // (a/0) = 1 iff a = ±1.
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut a = a.clone();
    let mut n = n.clone();
    if a.is_even() && n.is_even() {
        return 0;
    }
    // Strip factors of 2 from n, each contributing (2/a).
    let mut k = 1i32;
    let mut twos = 0u64;
    while n.is_even() {
        n /= 2;
        twos += 1;
    }
    if twos % 2 == 1 {
        k = two_symbol(&a);
    }
    if n.is_negative() {
        n = -n;
        if a.is_negative() {
            k = -k;
        }
    }
    // Main quadratic-reciprocity loop: n is now odd and positive.
    loop {
        if a.is_zero() {
            return if n.is_one() { k } else { 0 };
        }
        let mut v = 0u64;
        while a.is_even() {
            a /= 2;
            v += 1;
        }
        if v % 2 == 1 {
            k *= two_symbol(&n);
        }
        // Reciprocity for odd a, n; sign flips iff both are 3 (mod 4).
        if mod4(&a) == 3 && mod4(&n) == 3 {
            k = -k;
        }
        let r = a.abs();
        a = n.mod_floor(&r);
        n = r;
    }
}

/// `(2/m)` for odd `m`: `+1` if `m ≡ ±1 (mod 8)`, `-1` if `m ≡ ±3 (mod 8)`.
fn two_symbol(m: &BigInt) -> i32 {
    match mod_floor_u(m, 8) {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => unreachable!("two_symbol called on even argument"),
    }
}

fn mod4(m: &BigInt) -> u64 {
    mod_floor_u(m, 4)
}

fn mod_floor_u(m: &BigInt, modulus: u64) -> u64 {
    let r = m.mod_floor(&BigInt::from(modulus));
    u64::try_from(r).expect("nonnegative remainder fits in u64")
}

/// The quadratic character `χ_{-D}(a) = (-D/a)` for odd fundamental
/// discriminant `-D`.
pub fn chi(d: u64, a: &BigInt) -> i32 {
    kronecker(&BigInt::from(-(d as i64)), a)
}

/// The generalized Bernoulli number `B_{k,χ}` for `χ = χ_{-D}`.
///
/// `D` must be squarefree with `D ≡ 3 (mod 4)`; other inputs are a caller
/// error and panic.  Since `χ` is odd, `B_{k,χ} = 0` for even `k ≥ 2`.
pub fn generalized_bernoulli(d: u64, k: u64) -> Rational {
    assert!(
        is_valid_odd_disc(d),
        "generalized_bernoulli: D = {d} is not squarefree with D ≡ 3 (mod 4)"
    );
    let big_d = Rational::from_integer(BigInt::from(d));
    let mut acc = Rational::zero();
    for a in 1..=d {
        let c = chi(d, &BigInt::from(a));
        if c == 0 {
            continue;
        }
        let x = Rational::new(BigInt::from(a), BigInt::from(d));
        let term = bernoulli_poly(k, &x);
        acc += if c > 0 { term } else { -term };
    }
    rat_pow(&big_d, k as i64 - 1) * acc
}
