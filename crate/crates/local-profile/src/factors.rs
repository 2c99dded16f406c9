//! Local density factors: `λ`, the index `Ind`, and the comparison
//! function `φ` with its summed bounds.
//!
//! Throughout, `n = rank − 1` and `q = p`.  Values are carried as rational
//! multiples of half-integral powers of `q` ([`crate::LocalValue`]); the
//! ramified formulas genuinely produce half powers, which must cancel in
//! any global product.

use crate::groups::{reductive_quotient, QuotientTarget};
use crate::{LocalError, LocalProfile, LocalValue, PlaceType};
use exact_arith::{rat, rat_int, rat_pow, Rational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// `(±q)^{-e}` as an exact rational.
fn signed_q_inv_pow(q: u64, sign: i64, e: u64) -> Rational {
    let base = Rational::new(BigInt::from(sign), BigInt::from(q));
    rat_pow(&base, i64::try_from(e).expect("exponent fits i64"))
}

/// The density of the collapsed lattice `M_L`, expressed through the order
/// and dimension of its determinant-one reductive quotient.
pub fn lambda_m(profile: &LocalProfile) -> Result<LocalValue, LocalError> {
    let q = profile.q();
    let n = profile.rank() - 1;
    let g = reductive_quotient(profile, QuotientTarget::Collapsed)?;
    let order = Rational::from(g.order.clone());
    match profile.place() {
        PlaceType::Inert | PlaceType::Split => {
            let sign: i64 = if profile.place() == PlaceType::Inert { -1 } else { 1 };
            let mut num = Rational::one();
            for i in 2..=(n as u64 + 1) {
                let s = if sign == -1 && i % 2 == 1 { 1 } else { -1 };
                num *= Rational::from(BigInt::from(q).pow(i as u32) + BigInt::from(s));
            }
            Ok(LocalValue::new(q, num / order, g.dim - n as i64))
        }
        PlaceType::Ramified => {
            let k = (n as u64 + 1) / 2;
            let mut num = Rational::one();
            for i in 1..=k {
                num *= Rational::from(BigInt::from(q).pow(2 * i as u32) - BigInt::one());
            }
            Ok(LocalValue::new(q, num / order, g.dim - k as i64))
        }
    }
}

/// The exponent `Σ_{i<j} ⌊(j − i − 1)/2⌋ · n_i n_j` over the Jordan scales.
pub fn exponent_s(profile: &LocalProfile) -> u64 {
    let blocks = profile.jordan();
    let mut s = 0u64;
    for (a, bi) in blocks.iter().enumerate() {
        for bj in blocks.iter().skip(a + 1) {
            s += (bj.index - bi.index - 1) / 2 * (bi.rank as u64) * (bj.rank as u64);
        }
    }
    s
}

/// The index `Ind = q_E^s · |G_{M_L}| / |G_L|`, an exact rational (the
/// determinant-one corrections cancel between numerator and denominator).
pub fn ind(profile: &LocalProfile) -> Result<LocalValue, LocalError> {
    let g_m = reductive_quotient(profile, QuotientTarget::Collapsed)?;
    let g_l = reductive_quotient(profile, QuotientTarget::Lattice)?;
    let ratio = Rational::new(g_m.order, g_l.order);
    let s = exponent_s(profile);
    let half = 2 * profile.d() as i64 * i64::try_from(s).expect("exponent fits i64");
    Ok(LocalValue::new(profile.q(), ratio, half))
}

/// The local density `λ(L) = Ind · λ(M_L)`.
pub fn lambda(profile: &LocalProfile) -> Result<LocalValue, LocalError> {
    Ok(lambda_m(profile)?.mul(&ind(profile)?))
}

/// The density with the `q_E^s` normalization removed:
/// `λ'(L) = λ(M_L) · |G_{M_L}|/|G_L|`.
pub fn lambda_prime(profile: &LocalProfile) -> Result<LocalValue, LocalError> {
    let s = exponent_s(profile);
    let half = 2 * profile.d() as i64 * i64::try_from(s).expect("exponent fits i64");
    Ok(lambda(profile)?.times_q_pow(-half / 2))
}

/// All values of `λ` over the possible discriminant classes of ambiguous
/// ramified blocks.  Each entry records the assignment (scale → class) that
/// produced it.  Unambiguous profiles yield a single entry with an empty
/// assignment.
pub fn lambda_variants(
    profile: &LocalProfile,
) -> Result<Vec<(Vec<(u64, i8)>, LocalValue)>, LocalError> {
    let open: Vec<u64> = if profile.place() == PlaceType::Ramified {
        profile
            .jordan()
            .iter()
            .filter(|b| b.index % 2 == 0 && b.disc_class.is_none())
            .map(|b| b.index)
            .collect()
    } else {
        Vec::new()
    };
    if open.is_empty() {
        return Ok(vec![(Vec::new(), lambda(profile)?)]);
    }
    let mut out = Vec::new();
    for mask in 0..(1u32 << open.len()) {
        let assignment: Vec<(u64, i8)> = open
            .iter()
            .enumerate()
            .map(|(pos, &idx)| (idx, if mask >> pos & 1 == 0 { 1 } else { -1 }))
            .collect();
        let data: Vec<(u64, usize, Option<i8>)> = profile
            .jordan()
            .iter()
            .map(|b| {
                let disc = b
                    .disc_class
                    .or_else(|| assignment.iter().find(|(i, _)| *i == b.index).map(|&(_, c)| c));
                (b.index, b.rank, disc)
            })
            .collect();
        let assigned = LocalProfile::new(profile.p(), profile.place(), &data)
            .expect("assignment preserves validity");
        out.push((assignment, lambda(&assigned)?));
    }
    Ok(out)
}

/// The comparison function `φ(m)` attached to a relevant scale `m`.
///
/// With `N = max I − min I`, `i_m = |I ∖ {min I, max I, m}|`, and
/// `n_m` the rank at scale `m`:
///
/// * inert: `q^{−(N + i_m)} (1 − (−q)^{−n_m}) / (1 − (−q)^{−(n+1)})`,
/// * split: the same with `q` in place of `−q`,
/// * ramified, `n` even: `q^{−(N + i_m)/2} q^{n/2} (1 + q^{−⌊n_m/2⌋})`,
/// * ramified, `n` odd:
///   `q^{−(N + i_m)/2} q^{−(n+1)/2} (1 + q^{−⌊n_m/2⌋}) / (1 − q^{−(n+1)})`.
pub fn phi(profile: &LocalProfile, m: u64) -> Result<LocalValue, LocalError> {
    let n_m = profile.block_rank(m);
    if n_m == 0 {
        return Err(LocalError::IndexNotRelevant { index: m });
    }
    let q = profile.q();
    let n = profile.rank() - 1;
    let spread = profile.n_v() + profile.i_rel_m(m) as u64;
    let spread_i = i64::try_from(spread).expect("spread fits i64");
    match profile.place() {
        PlaceType::Inert | PlaceType::Split => {
            let sign: i64 = if profile.place() == PlaceType::Inert { -1 } else { 1 };
            let num = Rational::one() - signed_q_inv_pow(q, sign, n_m as u64);
            let den = Rational::one() - signed_q_inv_pow(q, sign, n as u64 + 1);
            Ok(LocalValue::new(q, num / den, -2 * spread_i))
        }
        PlaceType::Ramified => {
            let frac = Rational::one() + signed_q_inv_pow(q, 1, n_m as u64 / 2);
            if n % 2 == 0 {
                Ok(LocalValue::new(q, frac, -spread_i + n as i64))
            } else {
                let den = Rational::one() - signed_q_inv_pow(q, 1, n as u64 + 1);
                Ok(LocalValue::new(q, frac / den, -spread_i - (n as i64 + 1)))
            }
        }
    }
}

/// A closed upper bound for `Σ_{m ∈ I} φ(m)`.
///
/// Unramified places: `1` when the profile is unimodular-like (`N = 0`),
/// otherwise `(16/5)·q^{−N}`.  Ramified places carry the same `q^{±(n…)/2}`
/// carrier as `φ` itself, with constants 2 (single-scale) and 5.
///
/// The constants are calibrated for rank ≥ 4 (`n ≥ 3`, the signature-(1,n)
/// range of interest): the unramified estimate bounds `1/(1 − q^{−(n+1)})`
/// by `16/15` using `n + 1 ≥ 4`.  Rank-2 profiles can exceed the stated
/// value — `diag(1, 8)` at an inert 2 has `Σφ = 1/2 > (16/5)·2^{−3}`.
pub fn phi_sum_bound(profile: &LocalProfile) -> LocalValue {
    let q = profile.q();
    let n = profile.rank() - 1;
    let nv = profile.n_v();
    let nv_i = i64::try_from(nv).expect("spread fits i64");
    match profile.place() {
        PlaceType::Inert | PlaceType::Split => {
            if nv == 0 {
                LocalValue::one(q)
            } else {
                LocalValue::new(q, rat(16, 5), -2 * nv_i)
            }
        }
        PlaceType::Ramified => {
            let carrier = if n % 2 == 0 { n as i64 } else { -(n as i64 + 1) };
            if nv == 0 {
                LocalValue::new(q, rat_int(2), carrier)
            } else {
                LocalValue::new(q, rat_int(5), -nv_i + carrier)
            }
        }
    }
}

/// An exact element of `Q(√q)`: `rat + irr·√q`.  Used to sum and compare
/// [`LocalValue`]s whose half powers differ in parity.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticValue {
    pub rat: Rational,
    pub irr: Rational,
    pub q: u64,
}

impl QuadraticValue {
    pub fn zero(q: u64) -> Self {
        QuadraticValue { rat: Rational::zero(), irr: Rational::zero(), q }
    }

    pub fn from_local(v: &LocalValue) -> Self {
        let q = Rational::from(BigInt::from(v.q));
        if v.half_q_exp % 2 == 0 {
            QuadraticValue {
                rat: &v.coeff * rat_pow(&q, v.half_q_exp / 2),
                irr: Rational::zero(),
                q: v.q,
            }
        } else {
            // half = 2k + 1 with k = ⌊half/2⌋: coeff·q^k·√q.
            let k = v.half_q_exp.div_euclid(2);
            QuadraticValue {
                rat: Rational::zero(),
                irr: &v.coeff * rat_pow(&q, k),
                q: v.q,
            }
        }
    }

    pub fn add(&self, o: &QuadraticValue) -> QuadraticValue {
        assert_eq!(self.q, o.q, "mixed radicands in quadratic sum");
        QuadraticValue { rat: &self.rat + &o.rat, irr: &self.irr + &o.irr, q: self.q }
    }

    pub fn sub(&self, o: &QuadraticValue) -> QuadraticValue {
        assert_eq!(self.q, o.q, "mixed radicands in quadratic difference");
        QuadraticValue { rat: &self.rat - &o.rat, irr: &self.irr - &o.irr, q: self.q }
    }

    /// Exact sign: `√q` is irrational for prime `q`, so a mixed value can
    /// be signed by comparing `rat²` with `irr²·q`.
    pub fn sign(&self) -> Ordering {
        match (self.rat.is_zero(), self.irr.is_zero()) {
            (true, true) => Ordering::Equal,
            (false, true) => self.rat.cmp(&Rational::zero()),
            (true, false) => self.irr.cmp(&Rational::zero()),
            (false, false) => {
                if self.rat.is_positive() == self.irr.is_positive() {
                    return self.rat.cmp(&Rational::zero());
                }
                let lhs = &self.rat * &self.rat;
                let rhs = &self.irr * &self.irr * rat_int(self.q as i64);
                match lhs.cmp(&rhs) {
                    Ordering::Equal => {
                        unreachable!("√q is irrational: |rat| = |irr|√q is impossible")
                    }
                    Ordering::Greater => self.rat.cmp(&Rational::zero()),
                    Ordering::Less => self.irr.cmp(&Rational::zero()),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::PlaceType;

    fn profile(p: u64, place: PlaceType, data: &[(u64, usize, Option<i8>)]) -> LocalProfile {
        LocalProfile::new(p, place, data).unwrap()
    }

    #[test]
    fn unimodular_densities_are_one_at_unramified_and_odd_ramified_places() {
        for q in [2u64, 3, 5, 7] {
            for rank in 1..=6 {
                for place in [PlaceType::Inert, PlaceType::Split] {
                    let pr = profile(q, place, &[(0, rank, None)]);
                    let l = lambda(&pr).unwrap();
                    assert_eq!(
                        l.as_rational(),
                        Some(Rational::one()),
                        "λ = 1 for unimodular {place:?} rank {rank} at q = {q}"
                    );
                }
            }
        }
        for q in [3u64, 5, 7] {
            for rank in [1usize, 3, 5] {
                for disc in [1i8, -1] {
                    let pr = profile(q, PlaceType::Ramified, &[(0, rank, Some(disc))]);
                    let l = lambda(&pr).unwrap();
                    assert_eq!(
                        l.as_rational(),
                        Some(Rational::one()),
                        "λ = 1 for odd unimodular ramified rank {rank} at q = {q}"
                    );
                }
            }
        }
    }

    #[test]
    fn even_rank_ramified_unimodular_density_is_q_k_plus_minus_one() {
        // Rank 2k unimodular at a ramified place: λ = (q^{2k}−1)/(q^k ∓ 1),
        // i.e. q^k ± 1 depending on the Witt type.
        for q in [3u64, 5] {
            for k in [1usize, 2] {
                for disc in [1i8, -1] {
                    let pr = profile(q, PlaceType::Ramified, &[(0, 2 * k, Some(disc))]);
                    let g = reductive_quotient(&pr, QuotientTarget::Collapsed).unwrap();
                    let plus = matches!(g.factors[0], crate::GroupKind::OrthogonalPlus(_));
                    let l = lambda(&pr).unwrap().as_rational().unwrap();
                    let qk = BigInt::from(q).pow(k as u32);
                    let expect = if plus { &qk + 1 } else { &qk - 1 };
                    assert_eq!(l, Rational::from(expect), "q = {q}, k = {k}, disc = {disc}");
                }
            }
        }
    }

    #[test]
    fn index_factor_is_trivial_for_adjacent_scales() {
        for place in [PlaceType::Inert, PlaceType::Split] {
            let pr = profile(3, place, &[(0, 2, None), (1, 1, None)]);
            assert_eq!(ind(&pr).unwrap().as_rational(), Some(Rational::one()));
        }
        let pr = profile(3, PlaceType::Ramified, &[(0, 1, Some(1)), (1, 2, None)]);
        assert_eq!(ind(&pr).unwrap().as_rational(), Some(Rational::one()));
    }

    #[test]
    fn coset_index_for_the_spread_inert_profile() {
        // [(0,1),(2,1)] at inert p = 2: Ind = |U_2(2)| / |U_1(2)|² = 2.
        let pr = profile(2, PlaceType::Inert, &[(0, 1, None), (2, 1, None)]);
        assert_eq!(exponent_s(&pr), 0);
        assert_eq!(ind(&pr).unwrap().as_rational(), Some(rat_int(2)));
    }

    #[test]
    fn exponent_s_counts_gap_floors() {
        let pr = profile(3, PlaceType::Inert, &[(0, 2, None), (3, 1, None)]);
        // ⌊(3−0−1)/2⌋·2·1 = 2.
        assert_eq!(exponent_s(&pr), 2);
        let pr = profile(3, PlaceType::Inert, &[(0, 1, None), (2, 1, None), (4, 1, None)]);
        // Pairs: (0,2) → 0, (0,4) → 1, (2,4) → 0.
        assert_eq!(exponent_s(&pr), 1);
        // Ind carries q_E^s: lambda/lambda_prime differ by exactly that.
        let l = lambda(&pr).unwrap();
        let lp = lambda_prime(&pr).unwrap();
        assert_eq!(l.half_q_exp - lp.half_q_exp, 2 * 2 * 1);
    }

    #[test]
    fn phi_examples_and_error() {
        // Single unimodular block at unramified places: φ(0) = 1.
        for place in [PlaceType::Inert, PlaceType::Split] {
            let pr = profile(3, place, &[(0, 4, None)]);
            assert_eq!(phi(&pr, 0).unwrap().as_rational(), Some(Rational::one()));
            assert_eq!(
                phi(&pr, 1),
                Err(LocalError::IndexNotRelevant { index: 1 })
            );
        }
        // Split [(0,n),(1,1)], m = 1: q^{−1}(1 − q^{−1})/(1 − q^{−(n+1)}).
        for n in [2usize, 3, 4] {
            let pr = profile(5, PlaceType::Split, &[(0, n, None), (1, 1, None)]);
            let got = phi(&pr, 1).unwrap();
            let q = rat_int(5);
            let expect = rat_pow(&q, -1) * (Rational::one() - rat_pow(&q, -1))
                / (Rational::one() - rat_pow(&q, -(n as i64 + 1)));
            assert_eq!(got.as_rational(), Some(expect));
        }
    }

    #[test]
    fn phi_carriers_match_the_parity_of_the_ramified_displays() {
        // n even: φ carries q^{n/2 − (N+i)/2}.
        let pr = profile(3, PlaceType::Ramified, &[(0, 10, Some(-1)), (2, 1, None)]);
        let f0 = phi(&pr, 0).unwrap();
        assert_eq!(f0.half_q_exp, -2 + 10);
        assert_eq!(f0.coeff, Rational::one() + rat(1, 243));
        let f2 = phi(&pr, 2).unwrap();
        assert_eq!(f2.half_q_exp, -2 + 10);
        assert_eq!(f2.coeff, Rational::one() + Rational::one());
        // n odd (rank 4): negative carrier with the zeta-like denominator.
        let pr = profile(3, PlaceType::Ramified, &[(0, 2, Some(1)), (1, 2, None)]);
        let f = phi(&pr, 1).unwrap();
        assert_eq!(f.half_q_exp, -1 - 4);
        assert_eq!(
            f.coeff,
            (Rational::one() + rat(1, 3)) / (Rational::one() - rat(1, 81))
        );
    }

    #[test]
    fn phi_sum_bounds_specialize_by_spread_and_parity() {
        let pr = profile(3, PlaceType::Split, &[(0, 4, None)]);
        assert_eq!(phi_sum_bound(&pr).as_rational(), Some(Rational::one()));
        let pr = profile(3, PlaceType::Split, &[(0, 3, None), (2, 1, None)]);
        assert_eq!(phi_sum_bound(&pr).as_rational(), Some(rat(16, 45)));
        let pr = profile(3, PlaceType::Ramified, &[(0, 10, Some(-1)), (2, 1, None)]);
        let b = phi_sum_bound(&pr);
        assert_eq!((b.coeff.clone(), b.half_q_exp), (rat_int(5), 8));
        // Rank 5 (n = 4, even): single scale gives 2·q^{n/2}.
        let pr = profile(3, PlaceType::Ramified, &[(0, 5, Some(1))]);
        let b = phi_sum_bound(&pr);
        assert_eq!((b.coeff.clone(), b.half_q_exp), (rat_int(2), 4));
        // Rank 4 (n = 3, odd): single scale gives 2·q^{−(n+1)/2}.
        let pr = profile(3, PlaceType::Ramified, &[(0, 4, Some(1))]);
        let b = phi_sum_bound(&pr);
        assert_eq!((b.coeff.clone(), b.half_q_exp), (rat_int(2), -4));
    }

    #[test]
    fn lambda_variants_enumerate_ambiguous_blocks() {
        let pr = profile(3, PlaceType::Ramified, &[(0, 2, None)]);
        assert_eq!(lambda(&pr), Err(LocalError::AmbiguousDiscClass { index: 0 }));
        let vs = lambda_variants(&pr).unwrap();
        assert_eq!(vs.len(), 2);
        let values: Vec<Rational> = vs.iter().map(|(_, v)| v.as_rational().unwrap()).collect();
        // disc +1 → MINUS at p = 3 → q − 1 = 2; disc −1 → PLUS → q + 1 = 4.
        assert_eq!(values, vec![rat_int(2), rat_int(4)]);
        // Determined profiles give one variant with no assignment.
        let pr = profile(3, PlaceType::Ramified, &[(0, 2, Some(1))]);
        let vs = lambda_variants(&pr).unwrap();
        assert_eq!(vs.len(), 1);
        assert!(vs[0].0.is_empty());
    }

    #[test]
    fn quadratic_values_sum_and_sign_exactly() {
        // 5 − 2√5 > 0 (since 25 > 20); 4 − 2√5 < 0 (16 < 20).
        let a = QuadraticValue { rat: rat_int(5), irr: rat_int(-2), q: 5 };
        assert_eq!(a.sign(), Ordering::Greater);
        let b = QuadraticValue { rat: rat_int(4), irr: rat_int(-2), q: 5 };
        assert_eq!(b.sign(), Ordering::Less);
        // LocalValue comparison through the same machinery.
        let x = LocalValue::new(5, rat_int(2), 1); // 2√5 ≈ 4.47
        let y = LocalValue::new(5, rat_int(9), -2); // 9/5 = 1.8
        assert_eq!(x.cmp_value(&y), Ordering::Greater);
        assert_eq!(y.cmp_value(&x), Ordering::Less);
        let z = LocalValue::new(5, rat_int(2), 1);
        assert_eq!(x.cmp_value(&z), Ordering::Equal);
        // Sum of mixed parities: √5 + 9/5 − √5 = 9/5.
        let s = QuadraticValue::from_local(&x)
            .add(&QuadraticValue::from_local(&y))
            .sub(&QuadraticValue::from_local(&z));
        assert_eq!(s.rat, rat(9, 5));
        assert!(s.irr.is_zero());
    }
}
