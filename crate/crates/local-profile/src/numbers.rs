//! Modular arithmetic and integer factorization utilities.
//!
//! Everything here is deterministic: Miller–Rabin uses the known-sufficient
//! base set for 64-bit integers, Tonelli–Shanks is exact, and Pollard's rho
//! (Brent variant) retries with incremented offsets until a factor splits,
//! which terminates for any composite input.

use exact_arith::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// `v_p(x)` for a nonzero integer.
pub fn v_p_big(x: &BigInt, p: u64) -> u64 {
    assert!(!x.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut m = x.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// `v_p(r)` for a nonzero rational (numerator minus denominator valuation).
pub fn v_p_rational(r: &Rational, p: u64) -> i64 {
    assert!(!r.is_zero(), "valuation of zero");
    v_p_big(r.numer(), p) as i64 - v_p_big(r.denom(), p) as i64
}

/// Strips all powers of `p`, returning `(unit, v_p)`.
pub fn strip_p(x: &BigInt, p: u64) -> (BigInt, u64) {
    let v = v_p_big(x, p);
    let unit = x / BigInt::from(p).pow(u32::try_from(v).expect("valuation fits u32"));
    (unit, v)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for `u64`.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Pollard rho (Brent) on `u64`; `n` must be odd composite > 1.
fn rho_u64(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let mut x = 2u64;
        let mut y = 2u64;
        let mut d = 1u64;
        while d == 1 {
            x = f(x);
            y = f(f(y));
            d = gcd_u64(x.abs_diff(y), n);
        }
        if d != n {
            return d;
        }
        c += 1;
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_u64(b, a % b)
    }
}

fn factor_u64_into(n: u64, out: &mut BTreeMap<u64, u32>) {
    let mut n = n;
    for p in [2u64, 3, 5] {
        while n % p == 0 {
            *out.entry(p).or_insert(0) += 1;
            n /= p;
        }
    }
    let mut stack = vec![n];
    while let Some(m) = stack.pop() {
        if m == 1 {
            continue;
        }
        if is_prime_u64(m) {
            *out.entry(m).or_insert(0) += 1;
            continue;
        }
        // Small trial division first; rho for the hard part.
        let mut found = 0u64;
        let mut p = 7u64;
        while p * p <= m && p < 100_000 {
            if m % p == 0 {
                found = p;
                break;
            }
            p += 2;
        }
        if found == 0 {
            found = rho_u64(m);
        }
        stack.push(found);
        stack.push(m / found);
    }
}

/// Prime factorization of a nonzero integer's absolute value.
///
/// Factors must fit `u64`; lattices whose determinants carry larger primes
/// are outside the supported range and raise a clear panic.
pub fn factor(n: &BigInt) -> BTreeMap<u64, u32> {
    assert!(!n.is_zero(), "factoring zero");
    let mut out = BTreeMap::new();
    let mut m = n.abs();
    // Peel small primes with big arithmetic, then drop to u64.
    for p in [2u64, 3, 5, 7, 11, 13] {
        let pb = BigInt::from(p);
        loop {
            let (q, r) = m.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            *out.entry(p).or_insert(0) += 1;
            m = q;
        }
    }
    let m64 = u64::try_from(&m).unwrap_or_else(|_| {
        panic!("determinant cofactor {m} exceeds the supported factoring range")
    });
    if m64 > 1 {
        factor_u64_into(m64, &mut out);
    }
    out
}

/// Modular inverse of `a` modulo `m` (must be coprime).
pub fn mod_inv(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    assert!(e.gcd.is_one(), "mod_inv of non-unit {a} mod {m}");
    e.x.mod_floor(m)
}

/// Tonelli–Shanks square root modulo an odd prime: `r² ≡ a (mod p)`.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    if p % 4 == 3 {
        return Some(pow_mod(a, (p + 1) / 4, p));
    }
    // Write p − 1 = q·2^s with q odd.
    let s = (p - 1).trailing_zeros() as u64;
    let q = (p - 1) >> s;
    // Find a quadratic non-residue z.
    let mut z = 2u64;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        // Find least i with t^{2^i} = 1.
        let mut i = 0u64;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul_mod(t2, t2, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Hensel-lifted root of `x² − x + (1+D)/4` modulo `p^k`, for split `p`.
///
/// The discriminant of the quadratic is `−D`, a unit square modulo split
/// primes, so the root is simple and Newton iteration doubles precision.
pub fn hensel_omega_root(d: u64, p: u64, k: u32) -> BigInt {
    let c = BigInt::from((1 + d) / 4);
    // Root modulo p.
    let t0: u64 = if p == 2 {
        // (1+D)/4 must be even here (D ≡ 7 mod 8 splits at 2): x² − x ≡ 0.
        assert!((1 + d) / 4 % 2 == 0, "p = 2 does not split for D = {d}");
        0
    } else {
        let md = (p - (d % p)) % p; // −D mod p
        let s = sqrt_mod(md, p).expect("split prime has square −D");
        // t = (1 + s)/2 mod p.
        mul_mod(1 + s, pow_mod(2, p - 2, p), p)
    };
    let mut t = BigInt::from(t0);
    let mut prec = 1u32;
    let p_big = BigInt::from(p);
    while prec < k {
        prec = (prec * 2).min(k);
        let modulus = p_big.pow(prec);
        // Newton step: t ← t − f(t)/f'(t).
        let f = (&t * &t - &t + &c).mod_floor(&modulus);
        let two_t: BigInt = &t + &t;
        let fp: BigInt = (two_t - BigInt::one()).mod_floor(&modulus);
        let inv = mod_inv(&fp, &modulus);
        t = (&t - f * inv).mod_floor(&modulus);
    }
    t
}
