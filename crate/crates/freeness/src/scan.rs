//! Grid scans over the threshold function `f`.
//!
//! Both scans are embarrassingly parallel over their grids; per-cell work
//! is a pure certified comparison, and results are merged in a fixed
//! deterministic order.
//!
//! Termination of the per-discriminant search in [`exception_search`] rests
//! on an exact decrease certificate: the consecutive ratio satisfies
//!
//! ```text
//! f(n+1, D)/f(n, D) = 2π · C_D(n+1) / (C_D(n) · (n+2) · √D) < 32π/((n+2)√D)
//! ```
//!
//! because `C_D(n+1) < 16·C_D(n)` for both constant families, so once
//! `(n+2)²·D ≥ 10107 > 1024π²` the function is strictly decreasing in `n`
//! forever; combined with `f < 1` at the current `n`, no later `n` can
//! produce an exception.

use crate::{b_d, counting_constant, BoundValue, FreenessError};
use exact_arith::{is_valid_odd_disc, AlgebraicValue, Rational};
use num_bigint::BigInt;
use num_traits::One;
use rayon::prelude::*;
use std::cmp::Ordering;

/// Outcome of scanning `f_bound(·, D, 1)` over `n ∈ [3, n_max]`.
#[derive(Debug, Clone)]
pub struct ThresholdReport {
    pub d: u64,
    pub n_max: u64,
    /// Minimal `n₀` with `f_bound(n, D, 1) < 1` for **all** `n ∈ [n₀, n_max]`;
    /// `None` when the criterion still fails at `n_max`.
    pub threshold_n: Option<u64>,
    /// Per-`n` verdicts `(n, f_bound(n, D, 1) < 1)` over the scanned range.
    pub below: Vec<(u64, bool)>,
    /// Exact verification that `f(n+1)/f(n) < 1` for every
    /// `n ∈ [n₀, n_max)`: the tail is provably monotone within the range.
    pub monotone_tail_verified: bool,
}

/// Exact check `f(n+1, D)/f(n, D) < 1` via the closed ratio
/// `2π·C_D(n+1)/(C_D(n)·(n+2)·√D)`.
fn f_ratio_below_one(n: u64, d: u64) -> Result<bool, FreenessError> {
    let ratio = AlgebraicValue {
        coeff: Rational::new(
            2 * counting_constant(n + 1, d),
            counting_constant(n, d) * BigInt::from(n + 2),
        ),
        pi_exp: 1,
        sqrt_d_exp: -1,
        d,
    };
    Ok(BoundValue::from_algebraic(ratio).cmp_rational(&Rational::one())? == Ordering::Less)
}

/// Scans the unimodular criterion `f_bound(n, D, 1) < 1` for
/// `n ∈ [3, n_max]` and locates the stable threshold.
pub fn threshold_scan(d: u64, n_max: u64) -> Result<ThresholdReport, FreenessError> {
    assert!(n_max >= 10, "threshold_scan needs n_max ≥ 10");
    assert!(is_valid_odd_disc(d), "invalid odd discriminant {d}");
    let below: Vec<(u64, bool)> = (3..n_max + 1)
        .into_par_iter()
        .map(|n| Ok((n, crate::f_below_one(n, d, 1u32)?)))
        .collect::<Result<_, FreenessError>>()?;
    let last_fail = below.iter().rev().find(|(_, ok)| !ok).map(|(n, _)| *n);
    let threshold_n = match last_fail {
        None => Some(3),
        Some(nf) if nf < n_max => Some(nf + 1),
        Some(_) => None,
    };
    let monotone_tail_verified = match threshold_n {
        Some(n0) => (n0..n_max)
            .into_par_iter()
            .map(|n| f_ratio_below_one(n, d))
            .collect::<Result<Vec<_>, _>>()?
            .into_iter()
            .all(|ok| ok),
        None => false,
    };
    Ok(ThresholdReport { d, n_max, threshold_n, below, monotone_tail_verified })
}

/// One grid cell on which the non-freeness criterion fails:
/// `f_bound(n, D, N) ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExceptionTriple {
    pub n: u64,
    pub d: u64,
    pub n_of_l: u64,
}

/// Largest `N ∈ [1, n_max_of_l]` with `f_bound(n, D, N) ≥ 1`, or `None`
/// when even `N = 1` already satisfies the criterion.  Uses monotonicity of
/// the penalty `(N/b_D)^ε` in `N` beyond the clamp.
fn max_failing_n_of_l(
    n: u64,
    d: u64,
    n_max_of_l: u64,
) -> Result<Option<u64>, FreenessError> {
    if crate::f_below_one(n, d, 1u32)? {
        return Ok(None);
    }
    let b = b_d(d);
    if n_max_of_l <= b || !crate::f_below_one(n, d, n_max_of_l)? {
        // The penalty never catches up within range: every N fails.
        return Ok(Some(n_max_of_l));
    }
    // Binary search the first N in (b, n_max_of_l] with f_bound < 1; all
    // smaller N fail the criterion, all larger ones satisfy it.
    let (mut lo, mut hi) = (b, n_max_of_l);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if crate::f_below_one(n, d, mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(lo))
}

/// Exhaustive search for grid cells `(n, D, N)` on which the generic
/// criterion fails: valid odd discriminants `D ≤ d_max`, `n ≥ n_min`
/// (closed off per discriminant by the decrease certificate), and
/// `N(L) ≤ n_max_of_l`.  Returned sorted by `(D, n, N)` ascending; outside
/// the returned finite set, non-freeness is proved on the whole grid.
pub fn exception_search(
    n_min: u64,
    d_max: u64,
    n_max_of_l: u64,
) -> Result<Vec<ExceptionTriple>, FreenessError> {
    assert!(n_min >= 3, "the criterion requires n > 2");
    assert!(n_max_of_l >= 1);
    let ds: Vec<u64> = (3..=d_max).filter(|&d| is_valid_odd_disc(d)).collect();
    let per_d: Vec<Vec<ExceptionTriple>> = ds
        .par_iter()
        .map(|&d| -> Result<Vec<ExceptionTriple>, FreenessError> {
            let mut rows = Vec::new();
            let mut n = n_min;
            loop {
                match max_failing_n_of_l(n, d, n_max_of_l)? {
                    Some(top) => {
                        rows.extend((1..=top).map(|n_of_l| ExceptionTriple { n, d, n_of_l }));
                    }
                    None => {
                        // f(n, D) < 1; stop once the tail is certified to
                        // keep decreasing.
                        if (n + 2) * (n + 2) * d >= 10_107 {
                            break;
                        }
                    }
                }
                n += 1;
                assert!(
                    n <= n_min + 4_000,
                    "exception_search: decrease certificate never engaged for D = {d}"
                );
            }
            Ok(rows)
        })
        .collect::<Result<_, _>>()?;
    let mut out: Vec<ExceptionTriple> = per_d.into_iter().flatten().collect();
    out.sort_by_key(|t| (t.d, t.n, t.n_of_l));
    Ok(out)
}
