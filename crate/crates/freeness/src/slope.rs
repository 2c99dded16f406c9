//! Slope bounds for reflective modular forms.
//!
//! The slope of a reflective modular form `f` of weight `κ` with divisor
//! `Σ a_l H_l` is `ρ(f) = max{a_l / κ}`.  Existence of such a form forces
//! the volume relation `Σ (a_l − 1) · volHM(Γ^l)/volHM(Γ) = κ`, and feeding
//! the explicit volume-sum bounds through it shows no reflective modular
//! form can satisfy `ρ(f) ≤ g(n, D)` with
//!
//! ```text
//! 1/g(n, D) = [2²(2π)^{n+1} / (n!·D^{n/2})] · K_D(n) ,
//!   K_D(n) = 2·(1 + 2·2^{2n+1} + 4^{2n+1})     for D ≠ 3,
//!   K_3(n) = 6·(1 + 3^{2n+1} + 4^{2n+1})        for D = 3.
//! ```
//!
//! The exclusion is boundary-inclusive: slope exactly `g(n, D)` is still
//! excluded.  The value `g` carries a factor `π^{−(n+1)}`, so it is
//! irrational and a rational queried slope can never tie with it; the
//! inclusive branch is nevertheless implemented (and unit-tested) so the
//! decision rule matches the statement `ρ(f) ≤ g`.
//!
//! When `g(n, D) ≥ 1/(n + 1)`, every slope up to the Fano threshold
//! `1/(n + 1)` is excluded; reflective modular forms whose slope is below
//! that threshold certify Fano-type birational geometry of the Baily–Borel
//! compactification, so the flag is reported separately.

use crate::{counting_constant, BoundValue, FreenessError};
use exact_arith::{factorial, is_valid_odd_disc, rat, AlgebraicValue, Rational};
use num_bigint::BigInt;
use num_traits::Signed;
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeVerdict {
    NoSuchForm,
    Inconclusive,
}

impl fmt::Display for SlopeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlopeVerdict::NoSuchForm => "NO_SUCH_FORM",
            SlopeVerdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SlopeReport {
    pub n: u64,
    pub d: u64,
    pub g_value: BoundValue,
    pub g_numeric: String,
    pub slope_queried: Rational,
    pub verdict: SlopeVerdict,
    /// `g(n, D) ≥ 1/(n + 1)`: every special reflective form with slope
    /// below the Fano threshold is excluded.
    pub excludes_fano_slope: bool,
}

/// The slope bound `g(n, D)`, carried exactly as
/// `rational · π^{−(n+1)} · D^{n/2}`.
pub fn g_slope_bound(n: u64, d: u64) -> BoundValue {
    assert!(n > 2, "the slope bound requires signature (1, n) with n > 2");
    assert!(is_valid_odd_disc(d), "invalid odd discriminant {d}");
    let e = u32::try_from(2 * n + 1).expect("2n+1 fits u32");
    let k_d = if d == 3 {
        6 * (BigInt::from(1) + BigInt::from(3u32).pow(e) + BigInt::from(4u32).pow(e))
    } else {
        2 * counting_constant(n, d)
    };
    // 1/g = K_D · 2^{n+3} · π^{n+1} · D^{−n/2} / n!
    let coeff = Rational::new(
        factorial(n),
        k_d * BigInt::from(2u32).pow(u32::try_from(n + 3).expect("n fits")),
    );
    BoundValue::from_algebraic(AlgebraicValue {
        coeff,
        pi_exp: -i64::try_from(n + 1).expect("n fits i64"),
        sqrt_d_exp: i64::try_from(n).expect("n fits i64"),
        d,
    })
}

/// Boundary-inclusive decision: `slope ≤ g` excludes the form.
pub(crate) fn slope_decision(slope_vs_g: Ordering) -> SlopeVerdict {
    match slope_vs_g {
        Ordering::Less | Ordering::Equal => SlopeVerdict::NoSuchForm,
        Ordering::Greater => SlopeVerdict::Inconclusive,
    }
}

/// Decides whether a reflective modular form of the queried slope can
/// exist on some lattice of signature `(1, n)` over discriminant `−D`.
pub fn reflective_check(n: u64, d: u64, slope: &Rational) -> Result<SlopeReport, FreenessError> {
    assert!(slope.is_positive(), "slopes are positive rationals");
    let g = g_slope_bound(n, d);
    let slope_vs_g = g.cmp_rational(slope)?.reverse();
    let fano = rat(1, i64::try_from(n + 1).expect("n fits i64"));
    let excludes_fano_slope = g.cmp_rational(&fano)? != Ordering::Less;
    Ok(SlopeReport {
        n,
        d,
        g_numeric: g.numeric(12),
        g_value: g,
        slope_queried: slope.clone(),
        verdict: slope_decision(slope_vs_g),
        excludes_fano_slope,
    })
}
