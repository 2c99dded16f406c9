//! Non-freeness criterion for graded algebras of unitary modular forms.
//!
//! Let `L` be a Hermitian lattice of signature `(1, n)`, `n > 2`, over the
//! ring of integers of `E = Q(√−D)` with odd discriminant `−D`.  If the
//! algebra `M_*(Γ)` of modular forms for an arithmetic subgroup
//! `Γ < U(L)` is free, the Jacobian of a set of generators is a cusp form
//! vanishing with multiplicity `r_l − 1` along each ramification divisor
//! `H_l`, and a degree computation against the Hirzebruch–Mumford volume
//! forces
//!
//! ```text
//! Σ_{[l]}  (r_l − 1)/r_l · volHM(Γ^l)/volHM(Γ)  =  n + 1 + Σ k_i  ≥  2(n + 1) .
//! ```
//!
//! The weighted sum on the left is in turn bounded by explicit constants.
//! With `N(L) = Π_v q_v^{N_v}` the exponent of the discriminant group and
//! `ε` the constant returned by [`epsilon`], the bound reads
//!
//! ```text
//! Σ  <  C_D(n) · 2² · (2π)^{n+1} / ( n! · D^{n/2} · max{1, (N(L)/b_D)^ε} )
//! ```
//!
//! where `C_D(n) = 1 + 2·2^{2n+1} + 4^{2n+1}` and `b_D = 4` for `D ≠ 3`,
//! and `C_3(n) = 5 + 4·3^{2n+1} + 3·4^{2n+1}`, `b_3 = 9` (the Eisenstein
//! ramification indices `r_l ∈ {2, 3, 6}` are folded into the constants).
//! `M_*(Γ)` is therefore **not free** whenever this right-hand side is
//! strictly below `2(n + 1)`, equivalently whenever
//!
//! ```text
//! f(n, D) := C_D(n) · 2 · (2π)^{n+1} / ((n+1)! · D^{n/2})  <  max{1, (N(L)/b_D)^ε} ,
//! ```
//!
//! the form in which [`f_bound`] carries the criterion.  The criterion is
//! one-directional: the complement verdict is `INCONCLUSIVE`, never "free".
//!
//! All comparisons between transcendental-bearing quantities go through
//! certified outward-rounded intervals at escalating precision; ties are
//! impossible (π is transcendental over the field generated by the
//! algebraic factors) and an undecided comparison at maximal precision is
//! a hard error, never a guess.

mod cubic;
mod scan;
mod slope;

pub use cubic::{cubic_example, CubicReport, LambdaVariants};
pub use scan::{exception_search, threshold_scan, ExceptionTriple, ThresholdReport};
pub use slope::{g_slope_bound, reflective_check, SlopeReport, SlopeVerdict};

use exact_arith::{
    factorial, is_valid_odd_disc, rat, AlgebraicValue, Interval, Rational,
};
use hermitian::HermitianLattice;
use local_profile::{PlaceType, QuadraticValue};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use std::cmp::Ordering;
use std::fmt;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FreenessError {
    #[error("NOT_SIGNATURE_1N: signature ({pos}, {neg}) is not (1, n) with n > 2")]
    NotSignature1N { pos: usize, neg: usize },
    #[error("UNDECIDED_COMPARISON: certified intervals at maximal precision cannot separate {0}")]
    Undecided(String),
    #[error(transparent)]
    Lattice(#[from] hermitian::LatticeError),
}

/// Decimal precisions for certified comparisons, escalated in order.
const PRECISIONS: [u32; 3] = [30, 60, 120];

// ---------------------------------------------------------------------------
// The constant ε.
// ---------------------------------------------------------------------------

/// Exact admissibility of `ε = a/b` for the three estimation constraints
///
/// ```text
/// (16/5)·2^{−(1−ε)} < √3 ,
/// max{ (16/5)·3^{−(1−ε)} , 5·3^{−(3/2−ε)} } ≤ 2/√3 ,
/// max{ (16/5)·5^{−(1−ε)} , 5·5^{−(3/2−ε)} } < 1 .
/// ```
///
/// Clearing denominators and squaring where a square root appears, the five
/// scalar inequalities become pure integer comparisons:
///
/// ```text
/// (16/5)·2^{ε−1} < √3    ⟺  256^b·2^{2a} < 300^b
/// (16/5)·3^{ε−1} ≤ 2/√3  ⟺  256^b·3^{2a} ≤ 300^b
/// 5·3^{ε−3/2}    ≤ 2/√3  ⟺  5^b·3^a ≤ 6^b
/// (16/5)·5^{ε−1} < 1     ⟺  16^b·5^a < 25^b
/// 5·5^{ε−3/2}    < 1     ⟺  2a < b .
/// ```
///
/// Every left-hand side is strictly increasing in ε, so the admissible set
/// is downward closed.
pub fn epsilon_admissible(eps: &Rational) -> bool {
    assert!(eps.is_positive(), "epsilon candidates must be positive");
    let a = u32::try_from(eps.numer().to_u64().expect("numerator fits u64"))
        .expect("numerator fits u32");
    let b = u32::try_from(eps.denom().to_u64().expect("denominator fits u64"))
        .expect("denominator fits u32");
    let pow = |base: u32, e: u32| BigInt::from(base).pow(e);
    2 * a < b
        && pow(256, b) * pow(2, 2 * a) < pow(300, b)
        && pow(256, b) * pow(3, 2 * a) <= pow(300, b)
        && pow(5, b) * pow(3, a) <= pow(6, b)
        && pow(16, b) * pow(5, a) < pow(25, b)
}

/// The largest rational with denominator `10⁴` (rounding the real optimum
/// down) satisfying all constraints of [`epsilon_admissible`].
///
/// The binding constraint is `256·3^{2ε} ≤ 300`, whose real solution is
/// `ε ≤ ln(300/256)/(2 ln 3) = 0.07217…`; the returned value is
/// `721/10000`.
pub fn epsilon() -> Rational {
    static EPS: OnceLock<Rational> = OnceLock::new();
    EPS.get_or_init(|| {
        // Binary search the downward-closed admissible set over a/10⁴.
        let (mut lo, mut hi) = (1i64, 5_000i64);
        assert!(epsilon_admissible(&rat(lo, 10_000)));
        assert!(!epsilon_admissible(&rat(hi, 10_000)));
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if epsilon_admissible(&rat(mid, 10_000)) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        rat(lo, 10_000)
    })
    .clone()
}

// ---------------------------------------------------------------------------
// Exact bound values.
// ---------------------------------------------------------------------------

/// An exact positive quantity `base · x^{−ε}` with `base` an
/// [`AlgebraicValue`] (`coeff · π^k · D^{m/2}`) and `x` an optional rational
/// penalty base `> 1` raised to the global constant `−ε`.
///
/// Comparisons are certified: outward-rounded intervals at the precisions
/// in [`PRECISIONS`], escalating until the sides separate.
#[derive(Debug, Clone)]
pub struct BoundValue {
    pub base: AlgebraicValue,
    /// When present, the value is divided by `eps_divisor^ε`; the base is
    /// always `> 1` so the penalty genuinely shrinks the value.
    pub eps_divisor: Option<Rational>,
}

impl BoundValue {
    pub fn from_algebraic(base: AlgebraicValue) -> Self {
        BoundValue { base, eps_divisor: None }
    }

    /// Certified enclosure at roughly `prec` digits.
    pub fn interval(&self, prec: u32) -> Interval {
        let mut iv = self.base.interval(prec + 8);
        if let Some(x) = &self.eps_divisor {
            let e = epsilon();
            let num = e.numer().to_u64().expect("epsilon numerator fits u64");
            let den = e.denom().to_u64().expect("epsilon denominator fits u64");
            let penalty = Interval::from_rational(x, prec + 8).ratio_pow(num, den, prec + 8);
            iv = iv.div(&penalty, prec + 8);
        }
        iv.normalize(prec)
    }

    /// Certified comparison against an exact rational.
    pub fn cmp_rational(&self, r: &Rational) -> Result<Ordering, FreenessError> {
        // A value free of π, √D and penalty is itself rational: compare
        // exactly, since no interval can separate a tie.
        if self.base.pi_exp == 0 && self.base.sqrt_d_exp == 0 && self.eps_divisor.is_none() {
            return Ok(self.base.coeff.cmp(r));
        }
        for &prec in &PRECISIONS {
            if let Some(o) = self.interval(prec).cmp_rational(r) {
                return Ok(o);
            }
        }
        Err(FreenessError::Undecided(format!("{self} against {r}")))
    }

    /// Certified comparison of two bound values.
    pub fn cmp_value(&self, other: &BoundValue) -> Result<Ordering, FreenessError> {
        // When the transcendental parts coincide structurally the values
        // differ by a positive rational factor and compare exactly by
        // coefficient; intervals could never separate the equal case.
        if self.eps_divisor == other.eps_divisor
            && self.base.pi_exp == other.base.pi_exp
            && self.base.sqrt_d_exp == other.base.sqrt_d_exp
            && (self.base.sqrt_d_exp == 0 || self.base.d == other.base.d)
        {
            return Ok(self.base.coeff.cmp(&other.base.coeff));
        }
        for &prec in &PRECISIONS {
            if let Some(o) = self.interval(prec).cmp_interval(&other.interval(prec)) {
                return Ok(o);
            }
        }
        Err(FreenessError::Undecided(format!("{self} against {other}")))
    }

    /// Decimal evaluation truncated toward zero to `digits` fractional
    /// digits, escalating the working precision until the digits are exact.
    pub fn numeric(&self, digits: u32) -> String {
        let mut wp = digits + 12;
        for _ in 0..8 {
            if let Some(s) = self.interval(wp).to_decimal_trunc(digits) {
                return s;
            }
            wp = wp * 2 + 32;
        }
        unreachable!("interval refinement failed to settle {digits} digits of {self}")
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        if let Some(x) = &self.eps_divisor {
            write!(f, " / ({x})^eps")?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// The threshold function f.
// ---------------------------------------------------------------------------

/// The normalizing constant `b_D` inside `max{1, (N/b_D)^ε}`.
pub fn b_d(d: u64) -> u64 {
    if d == 3 {
        9
    } else {
        4
    }
}

/// The reflective-counting constant `C_D(n)`:
/// `1 + 2·2^{2n+1} + 4^{2n+1}` for `D ≠ 3` and
/// `5 + 4·3^{2n+1} + 3·4^{2n+1}` for `D = 3`.
pub fn counting_constant(n: u64, d: u64) -> BigInt {
    let e = u32::try_from(2 * n + 1).expect("2n+1 fits u32");
    if d == 3 {
        BigInt::from(5) + 4 * BigInt::from(3u32).pow(e) + 3 * BigInt::from(4u32).pow(e)
    } else {
        BigInt::from(1) + 2 * BigInt::from(2u32).pow(e) + BigInt::from(4u32).pow(e)
    }
}

/// `f(n, D) = C_D(n) · 2(2π)^{n+1} / ((n+1)! · D^{n/2})`, carried exactly as
/// `rational · π^{n+1} · D^{−n/2}`.
fn f_plain(n: u64, d: u64) -> AlgebraicValue {
    assert!(n > 2, "the criterion requires signature (1, n) with n > 2");
    assert!(is_valid_odd_disc(d), "invalid odd discriminant {d}");
    let coeff = Rational::new(
        counting_constant(n, d) * BigInt::from(2u32).pow(u32::try_from(n + 2).expect("n fits")),
        factorial(n + 1),
    );
    AlgebraicValue {
        coeff,
        pi_exp: i64::try_from(n + 1).expect("n fits i64"),
        sqrt_d_exp: -i64::try_from(n).expect("n fits i64"),
        d,
    }
}

/// `f_bound(n, D, N) = f(n, D) / max{1, (N/b_D)^ε}`.
///
/// The graded algebra of modular forms for any arithmetic subgroup of
/// `U(L)` is not free whenever this value is strictly below `1`.
pub fn f_bound(n: u64, d: u64, n_of_l: impl Into<BigInt>) -> BoundValue {
    let nn: BigInt = n_of_l.into();
    assert!(nn >= BigInt::one(), "N(L) is a positive integer");
    let b = BigInt::from(b_d(d));
    let eps_divisor = (nn > b).then(|| Rational::new(nn, b));
    BoundValue { base: f_plain(n, d), eps_divisor }
}

/// Certified check `f_bound(n, D, N) < 1`.
pub fn f_below_one(n: u64, d: u64, n_of_l: impl Into<BigInt>) -> Result<bool, FreenessError> {
    Ok(f_bound(n, d, n_of_l).cmp_rational(&Rational::one())? == Ordering::Less)
}

// ---------------------------------------------------------------------------
// N(L) and the criterion report.
// ---------------------------------------------------------------------------

/// `N(L) = Π_v q_v^{N_v}` over the relevant primes, where `N_v` is the
/// exponent of the local discriminant group, i.e. the width
/// `max I − min I` of the Jordan scale interval.  Invariant under rescaling.
pub fn n_of_l(lattice: &HermitianLattice) -> BigInt {
    covolume::local_summary(lattice)
        .iter()
        .map(|(p, _, n_v, _)| BigInt::from(*p).pow(u32::try_from(*n_v).expect("N_v fits u32")))
        .product()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NotFree,
    Inconclusive,
    NotFreeUnimodular,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::NotFree => "NOT_FREE",
            Verdict::Inconclusive => "INCONCLUSIVE",
            Verdict::NotFreeUnimodular => "NOT_FREE_UNIMODULAR",
        })
    }
}

/// Everything the non-freeness criterion establishes about one lattice.
#[derive(Debug, Clone)]
pub struct CriterionReport {
    /// Exact input echo (JSON rendering of the lattice).
    pub lattice: String,
    /// Signature is `(1, n)`.
    pub n: u64,
    pub d: u64,
    pub n_of_l: BigInt,
    pub epsilon: Rational,
    /// The ramification-weighted volume-sum bound
    /// `C_D(n)·2²(2π)^{n+1}/(n!·D^{n/2}·max{1,(N/b_D)^ε}) = 2(n+1)·f_bound`.
    pub bound_value: BoundValue,
    pub bound_numeric: String,
    /// `2(n + 1)`: the weighted sum reaches this when the algebra is free.
    pub threshold: Rational,
    pub verdict: Verdict,
    /// Per-prime local data `(p, place, N_v, Σ_m φ(m))`.
    pub phi_table: Vec<(u64, PlaceType, u64, QuadraticValue)>,
}

/// Evaluates the non-freeness criterion for `L`.
///
/// A unimodular lattice over `D ≠ 3` short-circuits to
/// `NOT_FREE_UNIMODULAR`: such groups have no branch divisors at all, so
/// the weighted volume sum is zero.  Otherwise the verdict is `NOT_FREE`
/// exactly when `bound_value < 2(n+1)` holds strictly, and `INCONCLUSIVE`
/// in the remaining cases (the criterion never certifies freeness).
pub fn nonfree_criterion(lattice: &HermitianLattice) -> Result<CriterionReport, FreenessError> {
    let (pos, neg) = hermitian::signature(lattice)?;
    if pos != 1 || neg <= 2 {
        return Err(FreenessError::NotSignature1N { pos, neg });
    }
    let n = neg as u64;
    let d = lattice.field().d();
    let big_n = n_of_l(lattice);
    let fb = f_bound(n, d, big_n.clone());
    let threshold = rat(2 * i64::try_from(n + 1).expect("n fits i64"), 1);
    let bound_value = BoundValue {
        base: fb.base.scale(&threshold),
        eps_divisor: fb.eps_divisor.clone(),
    };
    let verdict = if hermitian::is_unimodular(lattice) && d != 3 {
        Verdict::NotFreeUnimodular
    } else {
        match bound_value.cmp_rational(&threshold)? {
            Ordering::Less => Verdict::NotFree,
            _ => Verdict::Inconclusive,
        }
    };
    // The two phrasings of the criterion must agree: bound_value < 2(n+1)
    // exactly when f_bound < 1.
    assert_eq!(
        bound_value.cmp_rational(&threshold)?,
        fb.cmp_rational(&Rational::one())?,
        "criterion scaling drifted between f_bound and the weighted sum bound"
    );
    Ok(CriterionReport {
        lattice: lattice.to_json(),
        n,
        d,
        n_of_l: big_n,
        epsilon: epsilon(),
        bound_numeric: bound_value.numeric(12),
        bound_value,
        threshold,
        verdict,
        phi_table: covolume::local_summary(lattice),
    })
}

/// The split-vector part of the volume sum is bounded by
/// `2²(2π)^{n+1} / (n! · D^{n/2} · N(L)^ε)`; this returns that bound.
pub fn split_sum_bound(lattice: &HermitianLattice) -> Result<BoundValue, FreenessError> {
    let (pos, neg) = hermitian::signature(lattice)?;
    if pos != 1 || neg <= 2 {
        return Err(FreenessError::NotSignature1N { pos, neg });
    }
    let n = neg as u64;
    let d = lattice.field().d();
    let big_n = n_of_l(lattice);
    let coeff = Rational::new(
        BigInt::from(2u32).pow(u32::try_from(n + 3).expect("n fits")),
        factorial(n),
    );
    let base = AlgebraicValue {
        coeff,
        pi_exp: i64::try_from(n + 1).expect("n fits i64"),
        sqrt_d_exp: -i64::try_from(n).expect("n fits i64"),
        d,
    };
    let eps_divisor = (big_n > BigInt::one()).then(|| Rational::from(big_n));
    Ok(BoundValue { base, eps_divisor })
}
