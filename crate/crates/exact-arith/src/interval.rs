//! Outward-rounded decimal interval arithmetic with certified π.
//!
//! An [`Interval`] is a pair of integer endpoints together with a power of
//! ten: it denotes the closed set `[lo, hi] · 10^exp`.  Mantissas are kept
//! near a caller-chosen working length and every operation rounds outward,
//! so a real number bracketed on input stays bracketed through arbitrary
//! compositions.  Inequalities between bracketed values are decided by
//! escalating the working precision; when brackets still overlap at the
//! cap, the caller receives [`Undecided`] rather than a guess.
//!
//! π comes from Machin's formula `π = 16·atan(1/5) − 4·atan(1/239)` with an
//! explicit alternating-tail bound; the tests cross-check it against the
//! independent identity `π = 8·atan(1/3) + 4·atan(1/7)` and a stored digit
//! string.
//!
//! Rational exponents (needed for expressions like `(N/4)^{721/10000}`) are
//! bracketed by certified bisection: candidate midpoints are exact decimal
//! points whose integer powers are interval-compared against the radicand,
//! so the bracket never relies on floating point.

use crate::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

/// Result of a comparison that could not be separated at the precision cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Undecided {
    /// Working decimal digits in force when the comparison was abandoned.
    pub digits: u32,
}

impl fmt::Display for Undecided {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "inequality undecided after escalating to {} working digits",
            self.digits
        )
    }
}

impl std::error::Error for Undecided {}

/// Closed interval `[lo, hi] · 10^exp` with `lo ≤ hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    exp: i64,
}

fn pow10(e: u32) -> BigInt {
    BigInt::from(10u32).pow(e)
}

fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -(-a).div_floor(b)
}

/// Decimal length of `|x|` (`0` has length 1), exact.
fn dec_len(x: &BigInt) -> i64 {
    if x.is_zero() {
        return 1;
    }
    x.magnitude().to_string().len() as i64
}

/// Renders `q · 10^{-digits}` with sign, trimming trailing zeros but keeping
/// at least one fractional digit.
pub(crate) fn format_scaled(q: &BigInt, digits: u32) -> String {
    let scale = pow10(digits);
    let neg = q.is_negative();
    let mag = q.abs();
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

impl Interval {
    /// Degenerate interval holding an exact integer.
    pub fn exact_int(v: impl Into<BigInt>) -> Self {
        let v = v.into();
        Interval {
            lo: v.clone(),
            hi: v,
            exp: 0,
        }
    }

    /// Outward enclosure of a rational with `prec` fractional digits.
    pub fn from_rational(r: &Rational, prec: u32) -> Self {
        let scale = pow10(prec);
        let num = r.numer() * &scale;
        let (q, rem) = num.div_rem(r.denom());
        let (lo, hi) = if rem.is_zero() {
            (q.clone(), q)
        } else if num.is_negative() {
            // Truncating division rounded toward zero, i.e. up for negatives.
            (&q - 1, q)
        } else {
            (q.clone(), &q + 1)
        };
        Interval {
            lo,
            hi,
            exp: -(prec as i64),
        }
    }

    /// The midpoint's position `floor(log10 |·|)` bounds, used as a coarse
    /// magnitude filter.  Returns `(lowest possible, highest possible)`
    /// positions of the interval's absolute values; meaningless if the
    /// interval straddles zero.
    fn magnitude_band(&self) -> (i64, i64) {
        let small = if self.lo.is_negative() { &self.hi } else { &self.lo };
        let large = if self.lo.is_negative() { &self.lo } else { &self.hi };
        (dec_len(small) - 1 + self.exp, dec_len(large) + self.exp)
    }

    /// Truncates mantissas outward to roughly `prec` digits.
    pub fn normalize(mut self, prec: u32) -> Self {
        let len = dec_len(&self.lo).max(dec_len(&self.hi));
        let excess = len - prec as i64 - 2;
        if excess > 0 {
            let shift = pow10(excess as u32);
            self.lo = floor_div(&self.lo, &shift);
            self.hi = ceil_div(&self.hi, &shift);
            self.exp += excess;
        }
        self
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
            exp: self.exp,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (big, small) = if self.exp >= other.exp {
            (self, other)
        } else {
            (other, self)
        };
        let delta = big.exp - small.exp;
        let small_len = dec_len(&small.lo).max(dec_len(&small.hi));
        if delta > small_len + 16 {
            // The small term is far below one unit in the big term's last
            // place; absorb it by widening one ulp outward.
            return Interval {
                lo: &big.lo - 1,
                hi: &big.hi + 1,
                exp: big.exp,
            };
        }
        let shift = pow10(delta as u32);
        Interval {
            lo: &big.lo * &shift + &small.lo,
            hi: &big.hi * &shift + &small.hi,
            exp: small.exp,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        let candidates = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = candidates.iter().min().expect("nonempty").clone();
        let hi = candidates.iter().max().expect("nonempty").clone();
        Interval {
            lo,
            hi,
            exp: self.exp + other.exp,
        }
        .normalize(prec)
    }

    /// Integer power by repeated squaring.
    pub fn pow_u64(&self, e: u64, prec: u32) -> Self {
        let mut acc = Interval::exact_int(1);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, prec);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, prec);
            }
        }
        acc
    }

    /// Multiplicative inverse; the interval must have definite sign.
    pub fn recip(&self, prec: u32) -> Self {
        let sign = self
            .sign()
            .expect("recip requires an interval of definite sign");
        if sign == Ordering::Less {
            return self.neg().recip(prec).neg();
        }
        let n = prec as i64 + dec_len(&self.hi) + 2;
        let scale = pow10(u32::try_from(n).expect("recip scale fits u32"));
        Interval {
            lo: floor_div(&scale, &self.hi),
            hi: ceil_div(&scale, &self.lo),
            exp: -n - self.exp,
        }
        .normalize(prec)
    }

    pub fn div(&self, other: &Self, prec: u32) -> Self {
        self.mul(&other.recip(prec), prec)
    }

    /// Sign of every point in the interval, or `None` if it meets zero.
    pub fn sign(&self) -> Option<Ordering> {
        if self.lo.is_positive() {
            Some(Ordering::Greater)
        } else if self.hi.is_negative() {
            Some(Ordering::Less)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// Compares two bracketed values; `None` when the brackets overlap.
    pub fn cmp_interval(&self, other: &Self) -> Option<Ordering> {
        if self.lo == self.hi && other.lo == other.hi && self.exp == other.exp && self.lo == other.lo
        {
            return Some(Ordering::Equal);
        }
        if Self::point_cmp(&self.hi, self.exp, &other.lo, other.exp) == Ordering::Less {
            return Some(Ordering::Less);
        }
        if Self::point_cmp(&self.lo, self.exp, &other.hi, other.exp) == Ordering::Greater {
            return Some(Ordering::Greater);
        }
        None
    }

    /// Compares against an exact rational; `None` when a non-degenerate
    /// bracket contains it.
    pub fn cmp_rational(&self, r: &Rational) -> Option<Ordering> {
        // Compare value·den against num at exponent 0.
        let lo_scaled = &self.lo * r.denom();
        let hi_scaled = &self.hi * r.denom();
        if self.lo == self.hi {
            return Some(Self::point_cmp(&lo_scaled, self.exp, r.numer(), 0));
        }
        if Self::point_cmp(&hi_scaled, self.exp, r.numer(), 0) == Ordering::Less {
            return Some(Ordering::Less);
        }
        if Self::point_cmp(&lo_scaled, self.exp, r.numer(), 0) == Ordering::Greater {
            return Some(Ordering::Greater);
        }
        None
    }

    /// Exact comparison of `a·10^{ea}` with `b·10^{eb}`.
    fn point_cmp(a: &BigInt, ea: i64, b: &BigInt, eb: i64) -> Ordering {
        match (a.sign(), b.sign()) {
            (num_bigint::Sign::Minus, num_bigint::Sign::NoSign | num_bigint::Sign::Plus) => {
                return Ordering::Less
            }
            (num_bigint::Sign::NoSign, num_bigint::Sign::Plus) => return Ordering::Less,
            (num_bigint::Sign::Plus, num_bigint::Sign::Minus | num_bigint::Sign::NoSign) => {
                return Ordering::Greater
            }
            (num_bigint::Sign::NoSign, num_bigint::Sign::Minus) => return Ordering::Greater,
            (num_bigint::Sign::NoSign, num_bigint::Sign::NoSign) => return Ordering::Equal,
            _ => {}
        }
        // Same strict sign; compare magnitudes with a coarse digit-count
        // filter before materializing any power of ten.
        let negative = a.is_negative();
        let (pa_lo, pa_hi) = (dec_len(a) - 1 + ea, dec_len(a) + ea);
        let (pb_lo, pb_hi) = (dec_len(b) - 1 + eb, dec_len(b) + eb);
        let mag = if pa_hi < pb_lo {
            Ordering::Less
        } else if pa_lo > pb_hi {
            Ordering::Greater
        } else {
            let delta = ea - eb;
            let (a_sh, b_sh);
            if delta >= 0 {
                a_sh = a.magnitude() * pow10(delta as u32).magnitude();
                b_sh = b.magnitude().clone();
            } else {
                a_sh = a.magnitude().clone();
                b_sh = b.magnitude() * pow10((-delta) as u32).magnitude();
            }
            a_sh.cmp(&b_sh)
        };
        if negative {
            mag.reverse()
        } else {
            mag
        }
    }

    /// Truncation toward zero to `digits` fractional digits, if both
    /// endpoints agree on it.
    pub fn to_decimal_trunc(&self, digits: u32) -> Option<String> {
        let t_lo = self.trunc_endpoint(&self.lo, digits);
        let t_hi = self.trunc_endpoint(&self.hi, digits);
        (t_lo == t_hi).then(|| format_scaled(&t_lo, digits))
    }

    fn trunc_endpoint(&self, m: &BigInt, digits: u32) -> BigInt {
        let k = self.exp + digits as i64;
        if k >= 0 {
            m * pow10(k as u32)
        } else {
            // BigInt division truncates toward zero, which is what we want.
            m / pow10((-k) as u32)
        }
    }

    /// `k`-th root of a positive interval by exact integer roots.
    pub fn root(&self, k: u32, prec: u32) -> Self {
        assert!(
            self.sign() == Some(Ordering::Greater),
            "root requires a strictly positive interval"
        );
        assert!(k >= 1);
        let mut p = prec as i64 + 2;
        // Shift so the scaled exponent is a nonnegative multiple adjustment.
        while self.exp + (k as i64) * p < 0 {
            p += prec as i64 + 2;
        }
        let shift = self.exp + (k as i64) * p;
        let scale = pow10(u32::try_from(shift).expect("root shift fits u32"));
        let lo_sh = &self.lo * &scale;
        let hi_sh = &self.hi * &scale;
        let r_lo = lo_sh.nth_root(k);
        let mut r_hi = hi_sh.nth_root(k);
        if r_hi.clone().pow(k) < hi_sh {
            r_hi += 1;
        }
        Interval {
            lo: r_lo,
            hi: r_hi,
            exp: -p,
        }
        .normalize(prec)
    }

    /// `self^{num/den}` for a strictly positive interval.
    ///
    /// Small denominators use exact integer roots; large ones (such as the
    /// `x^{721/10000}` arising from the exponent ε = 721/10000) are bracketed
    /// by bisection on exact decimal points whose `den`-th powers are
    /// interval-compared against `self^{num}`.
    pub fn ratio_pow(&self, num: u64, den: u64, prec: u32) -> Self {
        assert!(
            self.sign() == Some(Ordering::Greater),
            "ratio_pow requires a strictly positive interval"
        );
        assert!(den >= 1);
        let wp = prec + 10;
        let u = self.pow_u64(num, wp + 10);
        if den == 1 {
            return u.normalize(prec);
        }
        if den <= 64 {
            return u.root(den as u32, prec);
        }
        // Initial bracket from the magnitude band: 10^L ≤ u ≤ 10^H gives
        // 10^{floor(L/den)} ≤ u^{1/den} ≤ 10^{ceil(H/den)}.
        let (l, h) = u.magnitude_band();
        let den_i = den as i64;
        let fa = floor_div(&BigInt::from(l), &BigInt::from(den_i));
        let fb = ceil_div(&BigInt::from(h), &BigInt::from(den_i));
        let fa = i64::try_from(fa).expect("root magnitude fits i64");
        let fb = i64::try_from(fb).expect("root magnitude fits i64");
        // Bisection state: exact decimal points A ≤ u^{1/den} ≤ B at scale
        // 10^{-w}.
        let w = wp as i64;
        let mut a = shifted_pow10(fa, w);
        let mut b = shifted_pow10(fb, w);
        debug_assert!(a <= b);
        let max_iter = 64 + 4 * (wp as usize) * 2;
        for _ in 0..max_iter {
            // Stop once relatively tight: (B - A)·10^prec ≤ B.
            let gap = &b - &a;
            if &gap * pow10(prec) <= b {
                break;
            }
            let mid: BigInt = (&a + &b) >> 1u32;
            let mid_iv = Interval {
                lo: mid.clone(),
                hi: mid.clone(),
                exp: -w,
            };
            match mid_iv.pow_u64(den, wp + 10).cmp_interval(&u) {
                Some(Ordering::Less) | Some(Ordering::Equal) => a = mid,
                Some(Ordering::Greater) => b = mid,
                None => break,
            }
        }
        Interval {
            lo: a,
            hi: b,
            exp: -w,
        }
        .normalize(prec)
    }

    /// Certified enclosure of π with roughly `prec` mantissa digits.
    pub fn pi(prec: u32) -> Self {
        static CACHE: Mutex<Option<HashMap<u32, Interval>>> = Mutex::new(None);
        let mut guard = CACHE.lock().expect("pi cache poisoned");
        let cache = guard.get_or_insert_with(HashMap::new);
        if let Some(iv) = cache.get(&prec) {
            return iv.clone();
        }
        let p = prec + 12;
        let (a5_lo, a5_hi) = atan_inv_scaled(5, p);
        let (a239_lo, a239_hi) = atan_inv_scaled(239, p);
        let iv = Interval {
            lo: a5_lo * BigInt::from(16) - a239_hi * BigInt::from(4),
            hi: a5_hi * BigInt::from(16) - a239_lo * BigInt::from(4),
            exp: -(p as i64),
        }
        .normalize(prec + 4);
        cache.insert(prec, iv.clone());
        iv
    }

    /// Lower endpoint as `(mantissa, exp)`, for diagnostics.
    pub fn bounds(&self) -> (BigInt, BigInt, i64) {
        (self.lo.clone(), self.hi.clone(), self.exp)
    }
}

/// The exact decimal point `10^f` represented at scale `10^{-w}` (requires
/// `f + w ≥ 0`).
fn shifted_pow10(f: i64, w: i64) -> BigInt {
    let k = f + w;
    assert!(k >= 0, "shifted_pow10 underflow: 10^{f} at scale 10^-{w}");
    pow10(u32::try_from(k).expect("pow10 exponent fits u32"))
}

/// Integer enclosure of `atan(1/x) · 10^scale` with an alternating-series
/// tail bound: returns `(lo, hi)`.
fn atan_inv_scaled(x: u64, scale: u32) -> (BigInt, BigInt) {
    let s = pow10(scale);
    let x2 = BigInt::from(x) * BigInt::from(x);
    let mut power = BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut terms: u64 = 0;
    let mut j: u64 = 0;
    loop {
        let denom = BigInt::from(2 * j + 1) * &power;
        let term = &s / &denom;
        if term.is_zero() {
            break;
        }
        if j % 2 == 0 {
            sum += &term;
        } else {
            sum -= &term;
        }
        terms += 1;
        power *= &x2;
        j += 1;
    }
    // Each floored term errs by less than 1 and the alternating tail is
    // bounded by the first omitted term, itself below 1.
    let err = BigInt::from(terms + 1);
    (&sum - &err, &sum + &err)
}
