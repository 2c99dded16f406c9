//! Orders and dimensions of the finite reductive groups attached to the
//! special fibre of the stabilizer scheme of a lattice.
//!
//! Per Jordan block the reduction contributes a classical group over the
//! residue field: unitary at inert places, general linear at split places,
//! and at ramified places orthogonal groups at even scales and symplectic
//! groups at odd scales.  Orthogonal groups here are the full orthogonal
//! groups (including −1), matching the component conventions of Gan–Yu.
//!
//! The quotient of interest is cut out by the determinant-one condition:
//! one global factor of `q + 1` (inert), `q − 1` (split), or `2` (ramified,
//! when an orthogonal factor is present) divides out of the product order,
//! and the dimension drops by one at inert and split places only.

use crate::{JordanBlock, LocalError, LocalProfile, PlaceType};
use num_bigint::BigInt;
use num_traits::One;

/// A classical group over a finite field, by type and rank of the natural
/// module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    GeneralLinear(usize),
    Unitary(usize),
    Symplectic(usize),
    OrthogonalOdd(usize),
    OrthogonalPlus(usize),
    OrthogonalMinus(usize),
}

fn pow_q(q: u64, e: usize) -> BigInt {
    BigInt::from(q).pow(u32::try_from(e).expect("exponent fits u32"))
}

/// Order of the group of `F_q`-points.
///
/// Unitary ranks refer to the natural module over `F_{q²}`; orthogonal
/// groups are the full orthogonal groups, hence the leading factor 2.
pub fn group_order(kind: GroupKind, q: u64) -> Result<BigInt, LocalError> {
    assert!(q >= 2, "residue field needs at least two elements");
    Ok(match kind {
        GroupKind::GeneralLinear(m) => {
            let mut acc = pow_q(q, m * (m.saturating_sub(1)) / 2);
            for i in 1..=m {
                acc *= pow_q(q, i) - 1;
            }
            acc
        }
        GroupKind::Unitary(m) => {
            let mut acc = pow_q(q, m * (m.saturating_sub(1)) / 2);
            for i in 1..=m {
                let sign = if i % 2 == 0 { 1 } else { -1 };
                acc *= pow_q(q, i) - sign;
            }
            acc
        }
        GroupKind::Symplectic(m) => {
            if m % 2 != 0 {
                return Err(LocalError::OddSymplecticRank { rank: m });
            }
            let k = m / 2;
            let mut acc = pow_q(q, k * k);
            for i in 1..=k {
                acc *= pow_q(q, 2 * i) - 1;
            }
            acc
        }
        GroupKind::OrthogonalOdd(m) => {
            if m % 2 == 0 {
                return Err(LocalError::InvalidProfile(format!(
                    "odd-type orthogonal group needs odd rank, got {m}"
                )));
            }
            let k = m / 2;
            let mut acc = BigInt::from(2) * pow_q(q, k * k);
            for i in 1..=k {
                acc *= pow_q(q, 2 * i) - 1;
            }
            acc
        }
        GroupKind::OrthogonalPlus(m) | GroupKind::OrthogonalMinus(m) => {
            if m % 2 != 0 {
                return Err(LocalError::InvalidProfile(format!(
                    "even-type orthogonal group needs even rank, got {m}"
                )));
            }
            let k = m / 2;
            if k == 0 {
                return Ok(BigInt::one());
            }
            let eps = if matches!(kind, GroupKind::OrthogonalPlus(_)) { 1 } else { -1 };
            let mut acc = BigInt::from(2) * pow_q(q, k * (k - 1));
            acc *= pow_q(q, k) - eps;
            for i in 1..(k) {
                acc *= pow_q(q, 2 * i) - 1;
            }
            acc
        }
    })
}

/// Dimension of the corresponding algebraic group.
pub fn group_dim(kind: GroupKind) -> Result<i64, LocalError> {
    Ok(match kind {
        GroupKind::GeneralLinear(m) | GroupKind::Unitary(m) => (m * m) as i64,
        GroupKind::Symplectic(m) => {
            if m % 2 != 0 {
                return Err(LocalError::OddSymplecticRank { rank: m });
            }
            let k = (m / 2) as i64;
            k * (2 * k + 1)
        }
        GroupKind::OrthogonalOdd(m) => {
            if m % 2 == 0 {
                return Err(LocalError::InvalidProfile(format!(
                    "odd-type orthogonal group needs odd rank, got {m}"
                )));
            }
            let k = (m / 2) as i64;
            k * (2 * k + 1)
        }
        GroupKind::OrthogonalPlus(m) | GroupKind::OrthogonalMinus(m) => {
            if m % 2 != 0 {
                return Err(LocalError::InvalidProfile(format!(
                    "even-type orthogonal group needs even rank, got {m}"
                )));
            }
            let k = (m / 2) as i64;
            k * (2 * k - 1)
        }
    })
}

/// Which lattice the special fibre is taken over: the lattice itself or the
/// two-block collapse obtained by summing even-scale and odd-scale parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuotientTarget {
    Lattice,
    Collapsed,
}

/// The reductive quotient of the special fibre, already cut down to the
/// determinant-one subgroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductiveQuotient {
    pub factors: Vec<GroupKind>,
    pub order: BigInt,
    pub dim: i64,
    pub q: u64,
}

/// Legendre symbol of `(−1)^k` modulo an odd prime.
fn chi_minus_one_pow(k: usize, p: u64) -> i8 {
    if k % 2 == 0 || p % 4 == 1 {
        1
    } else {
        -1
    }
}

/// The classical factor contributed by one (possibly merged) ramified block
/// of even scale: orthogonal of the rank, with Witt type selected by the
/// square class of `(−1)^{rank/2} · disc`.
fn ramified_even_factor(
    index: u64,
    rank: usize,
    disc: Option<i8>,
    p: u64,
) -> Result<GroupKind, LocalError> {
    if rank % 2 != 0 {
        return Ok(GroupKind::OrthogonalOdd(rank));
    }
    let disc = disc.ok_or(LocalError::AmbiguousDiscClass { index })?;
    let eps = disc * chi_minus_one_pow(rank / 2, p);
    Ok(if eps == 1 {
        GroupKind::OrthogonalPlus(rank)
    } else {
        GroupKind::OrthogonalMinus(rank)
    })
}

/// Classical factors of the special fibre over the chosen target.
fn quotient_factors(
    profile: &LocalProfile,
    target: QuotientTarget,
) -> Result<Vec<GroupKind>, LocalError> {
    let blocks: Vec<JordanBlock> = match target {
        QuotientTarget::Lattice => profile.jordan().to_vec(),
        QuotientTarget::Collapsed => {
            // Merge blocks by scale parity; discriminant classes multiply.
            let mut merged: Vec<JordanBlock> = Vec::new();
            for parity in [0u64, 1] {
                let parts: Vec<&JordanBlock> = profile
                    .jordan()
                    .iter()
                    .filter(|b| b.index % 2 == parity)
                    .collect();
                if parts.is_empty() {
                    continue;
                }
                let rank = parts.iter().map(|b| b.rank).sum();
                let disc_class = if profile.place() == PlaceType::Ramified && parity == 0 {
                    parts
                        .iter()
                        .map(|b| b.disc_class)
                        .try_fold(1i8, |acc, d| d.map(|d| acc * d))
                } else {
                    None
                };
                merged.push(JordanBlock { index: parity, rank, disc_class });
            }
            merged
        }
    };
    blocks
        .iter()
        .map(|b| match profile.place() {
            PlaceType::Inert => Ok(GroupKind::Unitary(b.rank)),
            PlaceType::Split => Ok(GroupKind::GeneralLinear(b.rank)),
            PlaceType::Ramified => {
                if b.index % 2 == 0 {
                    ramified_even_factor(b.index, b.rank, b.disc_class, profile.p())
                } else if b.rank % 2 != 0 {
                    Err(LocalError::OddSymplecticRank { rank: b.rank })
                } else {
                    Ok(GroupKind::Symplectic(b.rank))
                }
            }
        })
        .collect()
}

/// Order and dimension of the determinant-one reductive quotient over the
/// lattice (`Lattice`) or its two-block collapse (`Collapsed`).
pub fn reductive_quotient(
    profile: &LocalProfile,
    target: QuotientTarget,
) -> Result<ReductiveQuotient, LocalError> {
    let q = profile.q();
    let factors = quotient_factors(profile, target)?;
    let mut order = BigInt::one();
    let mut dim = 0i64;
    for &f in &factors {
        order *= group_order(f, q)?;
        dim += group_dim(f)?;
    }
    match profile.place() {
        PlaceType::Inert => {
            let (o, r) = num_integer::Integer::div_rem(&order, &BigInt::from(q + 1));
            assert!(num_traits::Zero::is_zero(&r), "q + 1 divides a product of unitary orders");
            order = o;
            dim -= 1;
        }
        PlaceType::Split => {
            let (o, r) = num_integer::Integer::div_rem(&order, &BigInt::from(q - 1));
            assert!(num_traits::Zero::is_zero(&r), "q − 1 divides a product of linear orders");
            order = o;
            dim -= 1;
        }
        PlaceType::Ramified => {
            let has_orthogonal = factors.iter().any(|f| {
                matches!(
                    f,
                    GroupKind::OrthogonalOdd(_)
                        | GroupKind::OrthogonalPlus(_)
                        | GroupKind::OrthogonalMinus(_)
                )
            });
            if has_orthogonal {
                let (o, r) = num_integer::Integer::div_rem(&order, &BigInt::from(2));
                assert!(num_traits::Zero::is_zero(&r), "orthogonal orders are even");
                order = o;
            }
        }
    }
    Ok(ReductiveQuotient { factors, order, dim, q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::LocalProfile;

    #[test]
    fn orders_match_the_classical_tables() {
        use GroupKind::*;
        let cases: [(GroupKind, u64, u64); 18] = [
            (GeneralLinear(2), 2, 6),
            (GeneralLinear(2), 3, 48),
            (GeneralLinear(3), 2, 168),
            (Unitary(1), 2, 3),
            (Unitary(1), 3, 4),
            (Unitary(2), 2, 18),
            (Unitary(2), 3, 96),
            (Unitary(3), 2, 648),
            (Symplectic(2), 3, 24),
            (Symplectic(2), 5, 120),
            (Symplectic(4), 3, 51840),
            (OrthogonalOdd(3), 3, 48),
            (OrthogonalOdd(3), 5, 240),
            (OrthogonalOdd(5), 3, 103680),
            (OrthogonalPlus(2), 3, 4),
            (OrthogonalMinus(2), 3, 8),
            (OrthogonalPlus(4), 3, 1152),
            (OrthogonalMinus(4), 3, 1440),
        ];
        for (kind, q, expect) in cases {
            assert_eq!(
                group_order(kind, q).unwrap(),
                BigInt::from(expect),
                "{kind:?} over F_{q}"
            );
        }
        assert_eq!(group_order(OrthogonalPlus(2), 5).unwrap(), BigInt::from(8));
        assert_eq!(group_order(OrthogonalMinus(2), 5).unwrap(), BigInt::from(12));
    }

    #[test]
    fn dims_match_the_classical_tables() {
        use GroupKind::*;
        assert_eq!(group_dim(GeneralLinear(3)).unwrap(), 9);
        assert_eq!(group_dim(Unitary(4)).unwrap(), 16);
        assert_eq!(group_dim(Symplectic(4)).unwrap(), 10);
        assert_eq!(group_dim(OrthogonalOdd(5)).unwrap(), 10);
        assert_eq!(group_dim(OrthogonalPlus(4)).unwrap(), 6);
        assert_eq!(group_dim(OrthogonalMinus(6)).unwrap(), 15);
    }

    #[test]
    fn parity_violations_are_rejected() {
        assert_eq!(
            group_order(GroupKind::Symplectic(3), 3),
            Err(LocalError::OddSymplecticRank { rank: 3 })
        );
        assert!(group_order(GroupKind::OrthogonalOdd(4), 3).is_err());
        assert!(group_order(GroupKind::OrthogonalPlus(3), 3).is_err());
        assert!(group_dim(GroupKind::Symplectic(5)).is_err());
    }

    #[test]
    fn inert_two_block_quotients_and_their_collapse() {
        // Profile [(0,1),(2,1)] at an inert p = 2.
        let pr = LocalProfile::new(2, PlaceType::Inert, &[(0, 1, None), (2, 1, None)]).unwrap();
        let g_l = reductive_quotient(&pr, QuotientTarget::Lattice).unwrap();
        assert_eq!(g_l.factors, vec![GroupKind::Unitary(1), GroupKind::Unitary(1)]);
        // (q+1)²/(q+1) = 3, dim 2 − 1 = 1.
        assert_eq!(g_l.order, BigInt::from(3));
        assert_eq!(g_l.dim, 1);
        // Both scales are even, so the collapse merges them into U_2.
        let g_m = reductive_quotient(&pr, QuotientTarget::Collapsed).unwrap();
        assert_eq!(g_m.factors, vec![GroupKind::Unitary(2)]);
        assert_eq!(g_m.order, BigInt::from(6));
        assert_eq!(g_m.dim, 3);
    }

    #[test]
    fn unimodular_quotients_are_special_groups() {
        // Inert unimodular rank m: SU_m with order |U_m|/(q+1), dim m² − 1.
        let pr = LocalProfile::new(3, PlaceType::Inert, &[(0, 3, None)]).unwrap();
        let g = reductive_quotient(&pr, QuotientTarget::Lattice).unwrap();
        assert_eq!(g.order, BigInt::from(3 * 3 * 3 * (3 * 3 - 1) * (3 * 3 * 3 + 1)));
        assert_eq!(g.dim, 8);
        // Split unimodular rank m: SL_m.
        let pr = LocalProfile::new(3, PlaceType::Split, &[(0, 2, None)]).unwrap();
        let g = reductive_quotient(&pr, QuotientTarget::Lattice).unwrap();
        assert_eq!(g.order, BigInt::from(24)); // |SL_2(3)|
        assert_eq!(g.dim, 3);
        // Ramified unimodular odd rank with square discriminant: SO_{2k+1}.
        let pr = LocalProfile::new(3, PlaceType::Ramified, &[(0, 3, Some(1))]).unwrap();
        let g = reductive_quotient(&pr, QuotientTarget::Lattice).unwrap();
        assert_eq!(g.order, BigInt::from(24)); // |O_3(3)|/2
        assert_eq!(g.dim, 3);
    }

    #[test]
    fn ramified_witt_type_follows_the_square_class_of_signed_disc() {
        // Rank 2 (k = 1) at p = 3: χ(−1) = −1, so disc −1 gives PLUS.
        let pr = LocalProfile::new(3, PlaceType::Ramified, &[(0, 2, Some(-1))]).unwrap();
        let g = reductive_quotient(&pr, QuotientTarget::Lattice).unwrap();
        assert_eq!(g.factors, vec![GroupKind::OrthogonalPlus(2)]);
        // ... and disc +1 gives MINUS at p = 3.
        let pr = LocalProfile::new(3, PlaceType::Ramified, &[(0, 2, Some(1))]).unwrap();
        let g = reductive_quotient(&pr, QuotientTarget::Lattice).unwrap();
        assert_eq!(g.factors, vec![GroupKind::OrthogonalMinus(2)]);
        // At p ≡ 1 mod 4 the signs are not twisted: disc +1 gives PLUS.
        let pr = LocalProfile::new(5, PlaceType::Ramified, &[(0, 2, Some(1))]).unwrap();
        let g = reductive_quotient(&pr, QuotientTarget::Lattice).unwrap();
        assert_eq!(g.factors, vec![GroupKind::OrthogonalPlus(2)]);
    }

    #[test]
    fn collapse_merges_parities_and_multiplies_disc_classes() {
        let pr = LocalProfile::new(
            3,
            PlaceType::Ramified,
            &[(0, 1, Some(1)), (1, 2, None), (2, 2, Some(-1)), (3, 2, None)],
        )
        .unwrap();
        let g = reductive_quotient(&pr, QuotientTarget::Collapsed).unwrap();
        // Even part: rank 3 orthogonal (disc moot for odd rank); odd part:
        // rank 4 symplectic.
        assert_eq!(
            g.factors,
            vec![GroupKind::OrthogonalOdd(3), GroupKind::Symplectic(4)]
        );
        // Odd symplectic rank in the collapse is rejected.
        let bad = LocalProfile::new(3, PlaceType::Ramified, &[(1, 3, None)]).unwrap();
        assert_eq!(
            reductive_quotient(&bad, QuotientTarget::Collapsed),
            Err(LocalError::OddSymplecticRank { rank: 3 })
        );
        // Ambiguous even-rank even-scale blocks refuse to pick a Witt type.
        let amb = LocalProfile::new(3, PlaceType::Ramified, &[(0, 2, None)]).unwrap();
        assert_eq!(
            reductive_quotient(&amb, QuotientTarget::Lattice),
            Err(LocalError::AmbiguousDiscClass { index: 0 })
        );
    }
}
