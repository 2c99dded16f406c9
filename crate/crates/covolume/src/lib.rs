//! Exact covolumes of special unitary groups of Hermitian lattices.
//!
//! For a Hermitian `O_E`-lattice `L` of signature `(1, n)` over an imaginary
//! quadratic field `E = Q(√−D)` with odd discriminant, the covolume of
//! `SU(L)` in `SU(1, n)` is assembled from Prasad's volume formula in the
//! form
//!
//! ```text
//! μ = D^{⌊n/2⌋(⌊n/2⌋ + 3/2)} · ∏_{i=1}^{n} i!/(2π)^{i+1}
//!       · ∏_{i=1}^{⌊(n+1)/2⌋} ζ(2i) · ∏_{i=1}^{⌊n/2⌋} L_{E/Q}(2i + 1)
//!       · ∏_v λ_v ,
//! ```
//!
//! where `λ_v` are the local density factors of [`local_profile`].  Every
//! ingredient is exact: the special values contribute known powers of `π`
//! and `√D` which must cancel identically, and each local factor must be
//! rational on its own (distinct primes contribute multiplicatively
//! independent surds).  Both cancellations are asserted on every call, which
//! makes the assembly a strong end-to-end oracle for the local machinery.
//!
//! The Hirzebruch–Mumford volume of the ball quotient by `SU(L)` is the
//! covolume times the order of the central subgroup `SU(L) ∩ Z`, and the
//! corresponding volume for the full unitary group is pinned between the
//! SU-covolume and a small central multiple.
//!
//! References: Prasad, *Volumes of S-arithmetic quotients of semi-simple
//! groups* (Publ. IHÉS 69); Gan–Yu, *Group schemes and local densities*
//! (Duke Math. J. 105).

use std::collections::BTreeMap;

use exact_arith::{
    dirichlet_l_odd, factorial, numeric_eval, rat_pow, zeta_even, AlgebraicValue, Rational,
};
use hermitian::HermitianLattice;
use local_profile::{jordan_ranks, lambda, relevant_primes, LocalValue, PlaceType};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CovolumeError {
    /// The covolume formula applies to lattices of signature `(1, n)` with
    /// `n > 2`.
    #[error("NOT_SIGNATURE_1N: signature is ({pos}, {neg}), expected (1, n) with n > 2")]
    NotSignature1N { pos: usize, neg: usize },
    /// Assembly failed to cancel a transcendental or surd factor.  This is
    /// never a property of the input lattice; it signals a bug in a local
    /// factor and is surfaced rather than swallowed.
    #[error("RATIONALITY_VIOLATION: {0}")]
    RationalityViolation(String),
    #[error(transparent)]
    Lattice(#[from] hermitian::LatticeError),
    #[error(transparent)]
    Local(#[from] local_profile::LocalError),
}

/// One named multiplicand of the assembled formula, kept for audit: the
/// product of all trace values equals the reported exact value.
#[derive(Debug, Clone)]
pub struct TraceFactor {
    pub name: String,
    pub value: AlgebraicValue,
}

/// The exact covolume together with its audit trail.
#[derive(Debug, Clone)]
pub struct CovolumeResult {
    /// The assembled value; rationality (no `π`, integral `D`-power) is
    /// guaranteed by construction.
    pub exact: AlgebraicValue,
    /// Decimal mirror of `exact`, truncated to 30 significant digits.
    pub numeric: String,
    /// The local density factor at each relevant prime.
    pub local_factors: BTreeMap<u64, LocalValue>,
    /// `|SU(L) ∩ Z|`, the central order used by the Hirzebruch–Mumford
    /// normalization.
    pub center_order: u64,
    pub formula_trace: Vec<TraceFactor>,
}

impl CovolumeResult {
    /// The covolume as an exact rational.
    pub fn rational(&self) -> Rational {
        self.exact
            .as_rational()
            .expect("assembly asserts rationality")
    }
}

const NUMERIC_DIGITS: u32 = 30;

/// `|Z(U(L))(Q) ∩ O_E^×|`: the roots of unity of `O_E`, so 6 for `D = 3`
/// and 2 otherwise (odd discriminants only).
pub fn center_order(lattice: &HermitianLattice) -> u64 {
    if lattice.field().d() == 3 {
        6
    } else {
        2
    }
}

/// `|SU(L) ∩ Z|`: scalars `z` with `z^{n+1} = 1` among the roots of unity,
/// i.e. `gcd(n + 1, |Z|)`.
pub fn su_center_order(lattice: &HermitianLattice) -> u64 {
    let rank = lattice.rank() as u64;
    rank.gcd(&center_order(lattice))
}

fn numeric_mirror(value: &AlgebraicValue) -> String {
    numeric_eval(value, NUMERIC_DIGITS)
}

/// The covolume of `SU(L)` in `SU(1, n)` for a lattice of signature
/// `(1, n)`, `n > 2`.
///
/// The local product runs over the primes dividing `D · det L`; at every
/// other prime the lattice is unimodular and unramified, where the density
/// factor is exactly 1 (hyperspecial calibration, unit-tested in
/// [`local_profile`]).  Ramified primes always lie in the product since
/// `p | D`, and are always profiled: their factor differs from 1 even for
/// unimodular lattices.
pub fn su_covolume(lattice: &HermitianLattice) -> Result<CovolumeResult, CovolumeError> {
    let (pos, neg) = hermitian::signature(lattice)?;
    if pos != 1 || neg <= 2 {
        return Err(CovolumeError::NotSignature1N { pos, neg });
    }
    let n = neg as i64;
    let d = lattice.field().d();
    let m = n / 2; // ⌊n/2⌋
    let half = (n + 1) / 2; // ⌊(n+1)/2⌋

    let mut trace: Vec<TraceFactor> = Vec::new();

    // D^{m(m + 3/2)} carried as (√D)^{m(2m + 3)}.
    let d_power = AlgebraicValue {
        coeff: Rational::one(),
        pi_exp: 0,
        sqrt_d_exp: m * (2 * m + 3),
        d,
    };
    trace.push(TraceFactor { name: "D_power".into(), value: d_power.clone() });

    // ∏_{i=1}^{n} i!/(2π)^{i+1}: the rational part is ∏ i!/2^{i+1} and the
    // π-exponent is −Σ(i+1) = −n(n+3)/2.
    let mut gamma_coeff = Rational::one();
    for i in 1..=n {
        gamma_coeff = gamma_coeff * Rational::from(factorial(i as u64));
    }
    let two_exp = n * (n + 3) / 2;
    gamma_coeff = gamma_coeff / rat_pow(&Rational::from(BigInt::from(2)), two_exp);
    let gamma = AlgebraicValue {
        coeff: gamma_coeff,
        pi_exp: -two_exp,
        sqrt_d_exp: 0,
        d: 0,
    };
    trace.push(TraceFactor { name: "gamma_product".into(), value: gamma.clone() });

    let mut acc = d_power.mul(&gamma);
    for i in 1..=half {
        let z = zeta_even(2 * i as u64);
        trace.push(TraceFactor { name: format!("zeta({})", 2 * i), value: z.clone() });
        acc = acc.mul(&z);
    }
    for i in 1..=m {
        let l = dirichlet_l_odd(d, 2 * i as u64 + 1);
        trace.push(TraceFactor { name: format!("L({})", 2 * i + 1), value: l.clone() });
        acc = acc.mul(&l);
    }

    // Local densities, in parallel across the relevant primes.
    let primes = relevant_primes(lattice);
    let locals: Vec<(u64, Result<LocalValue, CovolumeError>)> = primes
        .par_iter()
        .map(|&p| {
            let profile = jordan_ranks(lattice, p);
            let value = lambda(&profile).map_err(CovolumeError::from);
            (p, value)
        })
        .collect();
    let mut local_factors = BTreeMap::new();
    for (p, value) in locals {
        let value = value?;
        let rational = value.as_rational().ok_or_else(|| {
            CovolumeError::RationalityViolation(format!(
                "local factor at p = {p} carries an odd power of √{p}: {value:?}"
            ))
        })?;
        if !rational.is_positive() {
            return Err(CovolumeError::RationalityViolation(format!(
                "local factor at p = {p} is not positive: {rational}"
            )));
        }
        trace.push(TraceFactor {
            name: format!("lambda({p})"),
            value: AlgebraicValue::from_rational(rational),
        });
        acc = acc.scale(&value.as_rational().unwrap());
        local_factors.insert(p, value);
    }

    if acc.pi_exp != 0 {
        return Err(CovolumeError::RationalityViolation(format!(
            "π-exponent {} did not cancel (n = {n})",
            acc.pi_exp
        )));
    }
    if acc.sqrt_d_exp % 2 != 0 {
        return Err(CovolumeError::RationalityViolation(format!(
            "√D-exponent {} did not reduce to an integral power of D",
            acc.sqrt_d_exp
        )));
    }

    // Audit: the trace multiplies back to the assembled value.
    let mut audit = AlgebraicValue::one();
    for f in &trace {
        audit = audit.mul(&f.value);
    }
    assert_eq!(
        audit.as_rational(),
        acc.as_rational(),
        "formula trace does not reproduce the assembled value"
    );

    let exact_rational = acc.as_rational().expect("checked above");
    assert!(
        exact_rational.is_positive(),
        "covolume must be strictly positive, got {exact_rational}"
    );

    Ok(CovolumeResult {
        numeric: numeric_mirror(&acc),
        exact: acc,
        local_factors,
        center_order: su_center_order(lattice),
        formula_trace: trace,
    })
}

/// `vol_HM(SU(L)) = |SU(L) ∩ Z| · μ`: the Hirzebruch–Mumford normalization
/// of the covolume.
pub fn hm_volume_su(lattice: &HermitianLattice) -> Result<CovolumeResult, CovolumeError> {
    let mut result = su_covolume(lattice)?;
    let factor = Rational::from(BigInt::from(result.center_order));
    result.exact = result.exact.scale(&factor);
    result.numeric = numeric_mirror(&result.exact);
    result.formula_trace.push(TraceFactor {
        name: "center_order".into(),
        value: AlgebraicValue::from_rational(factor),
    });
    Ok(result)
}

/// Exact two-sided bounds for the Hirzebruch–Mumford volume of the full
/// unitary quotient: `μ ≤ vol_HM(U(L)) ≤ |Z| · μ` with `|Z| = 2` for
/// `D ≠ 3` and `6` for `D = 3`.
pub fn hm_bounds_u(
    lattice: &HermitianLattice,
) -> Result<(CovolumeResult, CovolumeResult), CovolumeError> {
    let lower = su_covolume(lattice)?;
    let mut upper = lower.clone();
    let factor = Rational::from(BigInt::from(center_order(lattice)));
    upper.exact = upper.exact.scale(&factor);
    upper.numeric = numeric_mirror(&upper.exact);
    upper.formula_trace.push(TraceFactor {
        name: "center_bound".into(),
        value: AlgebraicValue::from_rational(factor),
    });
    Ok((lower, upper))
}

/// Convenience used by reports: `true` when every local factor of the
/// lattice is 1, i.e. the lattice is unimodular away from the ramified
/// primes and the ramified factors are trivial.
pub fn all_local_factors_trivial(result: &CovolumeResult) -> bool {
    result
        .local_factors
        .values()
        .all(|v| v.as_rational().map(|r| r.is_one()).unwrap_or(false))
}

/// The split-place part of the local data consumed by the global bounds:
/// for each relevant prime, the profile's place type, `N_v`, and the exact
/// `Σ_m φ(m)` needed by consumers that compare covolume ratios.
pub fn local_summary(
    lattice: &HermitianLattice,
) -> Vec<(u64, PlaceType, u64, local_profile::QuadraticValue)> {
    let primes = relevant_primes(lattice);
    primes
        .into_iter()
        .map(|p| {
            let profile = jordan_ranks(lattice, p);
            let mut sum = local_profile::QuadraticValue::zero(p);
            for &s in &profile.relevant_indices() {
                sum = sum.add(&local_profile::QuadraticValue::from_local(
                    &local_profile::phi(&profile, s).expect("relevant index"),
                ));
            }
            (p, profile.place(), profile.n_v(), sum)
        })
        .collect()
}
