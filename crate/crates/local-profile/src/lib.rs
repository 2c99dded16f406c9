//! Local invariants of Hermitian lattices at finite places.
//!
//! For a Hermitian lattice `L` over the ring of integers of `E = Q(√−D)` and
//! a rational prime `p`, this crate computes the data entering the local
//! factors of the covolume formula:
//!
//! * the splitting behaviour of `p` in `E` (inert, split, or ramified),
//! * the Jordan decomposition of `L ⊗ Z_p` — scales `i`, ranks `n_i`, and at
//!   ramified places the discriminant class of even-scale blocks,
//! * orders and dimensions of the finite reductive groups attached to the
//!   reduction of the stabilizer scheme, and
//! * the local densities `λ`, the index factors `Ind`, and the comparison
//!   function `φ` with its summed upper bounds.
//!
//! # Conventions
//!
//! The residue size is `q = p` at every place; the residue size of the étale
//! algebra upstairs is `q_E = q^d` with `d = 2` at inert and split places and
//! `d = 1` at ramified ones.  Values that are rational up to a half-integral
//! power of `q` are carried as [`LocalValue`]; global products must cancel
//! all half powers, and consumers assert this.
//!
//! Jordan scales are normalized valuations: at inert and split places the
//! scale of a block is its `p`-valuation, at ramified places its valuation
//! in the uniformizer upstairs (so rational scalars have even scale).
//!
//! # References
//!
//! * O'Meara, *Introduction to Quadratic Forms*, ch. IX (Jordan splittings).
//! * Jacobowitz, *Hermitian forms over local fields*, Amer. J. Math. 84 (1962).
//! * Gan–Yu, *Group schemes and local densities*, Duke Math. J. 105 (2000).

mod factors;
mod groups;
mod jordan;
pub mod numbers;

pub use factors::{
    exponent_s, ind, lambda, lambda_m, lambda_prime, lambda_variants, phi, phi_sum_bound,
    QuadraticValue,
};
pub use groups::{group_dim, group_order, reductive_quotient, GroupKind, ReductiveQuotient};
pub use jordan::jordan_ranks;

use exact_arith::{bernoulli::chi, Rational};
use hermitian::{HermitianLattice, ImagQuadField, RingElem};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

/// Errors raised by local-profile computations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LocalError {
    /// `φ` was queried at an index with `n_i = 0`.
    #[error("INDEX_NOT_RELEVANT: index {index} has rank 0 in the Jordan profile")]
    IndexNotRelevant { index: u64 },
    /// A symplectic factor was requested in odd rank.
    #[error("ODD_SYMPLECTIC_RANK: symplectic groups require even rank, got {rank}")]
    OddSymplecticRank { rank: usize },
    /// A discriminant-sensitive quantity was requested on a profile whose
    /// ramified even-scale blocks carry no discriminant class.
    #[error(
        "AMBIGUOUS_DISC_CLASS: ramified block at scale {index} has no discriminant \
         class; use lambda_variants to enumerate both candidates"
    )]
    AmbiguousDiscClass { index: u64 },
    /// Structurally invalid profile data.
    #[error("INVALID_PROFILE: {0}")]
    InvalidProfile(String),
}

/// Splitting behaviour of a rational prime in `E = Q(√−D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PlaceType {
    Inert,
    Split,
    Ramified,
}

/// One Jordan constituent: scale `index`, rank `n_i`, and (for ramified
/// even-scale blocks) the class of the discriminant unit in
/// `Z_p^× / (Z_p^×)²`, recorded as `+1` or `−1` via the Legendre symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JordanBlock {
    pub index: u64,
    pub rank: usize,
    pub disc_class: Option<i8>,
}

/// The local profile of a Hermitian lattice at a finite place.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalProfile {
    p: u64,
    place: PlaceType,
    jordan: Vec<JordanBlock>,
}

impl LocalProfile {
    /// Builds a profile from explicit Jordan data, validating structure.
    ///
    /// Discriminant classes may be omitted (`None`) on ramified even-scale
    /// blocks when only ranks are known; density functions that depend on
    /// the class then refuse to pick one silently.
    pub fn new(p: u64, place: PlaceType, blocks: &[(u64, usize, Option<i8>)]) -> Result<Self, LocalError> {
        if blocks.is_empty() {
            return Err(LocalError::InvalidProfile("empty Jordan data".into()));
        }
        let mut jordan = Vec::with_capacity(blocks.len());
        let mut prev: Option<u64> = None;
        for &(index, rank, disc_class) in blocks {
            if rank == 0 {
                return Err(LocalError::InvalidProfile(format!(
                    "Jordan block at scale {index} has rank 0"
                )));
            }
            if let Some(q) = prev {
                if index <= q {
                    return Err(LocalError::InvalidProfile(
                        "Jordan scales must be strictly increasing".into(),
                    ));
                }
            }
            if let Some(c) = disc_class {
                if c != 1 && c != -1 {
                    return Err(LocalError::InvalidProfile(format!(
                        "discriminant class must be ±1, got {c}"
                    )));
                }
                if place != PlaceType::Ramified || index % 2 != 0 {
                    return Err(LocalError::InvalidProfile(
                        "discriminant classes only apply to ramified even-scale blocks".into(),
                    ));
                }
            }
            prev = Some(index);
            jordan.push(JordanBlock { index, rank, disc_class });
        }
        if place == PlaceType::Ramified && p == 2 {
            return Err(LocalError::InvalidProfile(
                "p = 2 never ramifies for odd discriminants".into(),
            ));
        }
        Ok(LocalProfile { p, place, jordan })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn place(&self) -> PlaceType {
        self.place
    }

    /// Residue size of the base place; equals `p`.
    pub fn q(&self) -> u64 {
        self.p
    }

    /// Residue degree of the place upstairs: 2 when inert or split, 1 when
    /// ramified.
    pub fn d(&self) -> u32 {
        match self.place {
            PlaceType::Ramified => 1,
            _ => 2,
        }
    }

    /// Residue size upstairs, `q_E = q^d`.
    pub fn q_e(&self) -> u64 {
        self.p.pow(self.d())
    }

    pub fn jordan(&self) -> &[JordanBlock] {
        &self.jordan
    }

    pub fn rank(&self) -> usize {
        self.jordan.iter().map(|b| b.rank).sum()
    }

    /// Rank `n_i` of the block at scale `i` (zero when absent).
    pub fn block_rank(&self, index: u64) -> usize {
        self.jordan
            .iter()
            .find(|b| b.index == index)
            .map_or(0, |b| b.rank)
    }

    /// The relevant index set `I = {i : n_i > 0}`, ascending.
    pub fn relevant_indices(&self) -> Vec<u64> {
        self.jordan.iter().map(|b| b.index).collect()
    }

    pub fn min_index(&self) -> u64 {
        self.jordan.first().expect("nonempty").index
    }

    pub fn max_index(&self) -> u64 {
        self.jordan.last().expect("nonempty").index
    }

    /// The spread `N_v = max I − min I`.
    pub fn n_v(&self) -> u64 {
        self.max_index() - self.min_index()
    }

    /// `|I ∖ {min I, max I, m}|` for a queried index `m`.
    pub fn i_rel_m(&self, m: u64) -> usize {
        let lo = self.min_index();
        let hi = self.max_index();
        self.jordan
            .iter()
            .filter(|b| b.index != lo && b.index != hi && b.index != m)
            .count()
    }

    /// Total rank weighted by scale, `Σ i·n_i`; equals the valuation of the
    /// determinant in the local uniformizer.
    pub fn det_valuation(&self) -> u64 {
        self.jordan.iter().map(|b| b.index * b.rank as u64).sum()
    }

    /// True when some ramified even-scale block lacks a discriminant class.
    pub fn has_ambiguous_disc(&self) -> bool {
        self.place == PlaceType::Ramified
            && self
                .jordan
                .iter()
                .any(|b| b.index % 2 == 0 && b.disc_class.is_none())
    }
}

/// A rational multiple of a half-integral power of `q`: `coeff · q^{h/2}`.
///
/// Half powers arise individually at ramified places but always cancel in
/// global products; [`LocalValue::as_rational`] enforces the parity check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalValue {
    pub coeff: Rational,
    pub half_q_exp: i64,
    pub q: u64,
}

impl LocalValue {
    pub fn new(q: u64, coeff: Rational, half_q_exp: i64) -> Self {
        if coeff.is_zero() {
            return LocalValue { coeff, half_q_exp: 0, q };
        }
        LocalValue { coeff, half_q_exp, q }
    }

    pub fn one(q: u64) -> Self {
        LocalValue::new(q, Rational::one(), 0)
    }

    pub fn from_rational(q: u64, coeff: Rational) -> Self {
        LocalValue::new(q, coeff, 0)
    }

    pub fn mul(&self, other: &LocalValue) -> LocalValue {
        assert_eq!(self.q, other.q, "mixed residue sizes in LocalValue product");
        LocalValue::new(self.q, &self.coeff * &other.coeff, self.half_q_exp + other.half_q_exp)
    }

    pub fn div(&self, other: &LocalValue) -> LocalValue {
        assert_eq!(self.q, other.q, "mixed residue sizes in LocalValue quotient");
        assert!(!other.coeff.is_zero(), "division by zero LocalValue");
        LocalValue::new(self.q, &self.coeff / &other.coeff, self.half_q_exp - other.half_q_exp)
    }

    /// Rescale by an exact power `q^k`.
    pub fn times_q_pow(&self, k: i64) -> LocalValue {
        LocalValue::new(self.q, self.coeff.clone(), self.half_q_exp + 2 * k)
    }

    pub fn is_rational(&self) -> bool {
        self.half_q_exp % 2 == 0
    }

    /// Folds the `q`-power in when it is integral.  Returns `None` when a
    /// genuine half power remains.
    pub fn as_rational(&self) -> Option<Rational> {
        if !self.is_rational() {
            return None;
        }
        let k = self.half_q_exp / 2;
        let q = Rational::from(BigInt::from(self.q));
        Some(&self.coeff * exact_arith::rat_pow(&q, k))
    }

    /// Exact comparison of two local values over the same `q`, valid for
    /// arbitrary half powers (works in `Q(√q)`).
    pub fn cmp_value(&self, other: &LocalValue) -> std::cmp::Ordering {
        assert_eq!(self.q, other.q, "mixed residue sizes in LocalValue comparison");
        QuadraticValue::from_local(self)
            .sub(&QuadraticValue::from_local(other))
            .sign()
    }
}

/// Splitting behaviour of `p` in `Q(√−D)`: ramified iff `p | D`, otherwise
/// split or inert according to the Kronecker symbol `(−D / p)`.
pub fn place_type(d: u64, p: u64) -> PlaceType {
    assert!(exact_arith::is_valid_odd_disc(d), "invalid discriminant {d}");
    assert!(numbers::is_prime_u64(p), "place_type expects a prime, got {p}");
    if d % p == 0 {
        return PlaceType::Ramified;
    }
    match chi(d, &BigInt::from(p)) {
        1 => PlaceType::Split,
        -1 => PlaceType::Inert,
        _ => unreachable!("χ is a unit away from the conductor"),
    }
}

/// The primes where local factors can differ from 1: divisors of
/// `D · det(Gram)`.
pub fn relevant_primes(lattice: &HermitianLattice) -> Vec<u64> {
    let det = hermitian::det_gram(lattice);
    assert!(!det.is_zero(), "SINGULAR_GRAM: relevant primes of a degenerate lattice");
    let product = det * BigInt::from(lattice.field().d());
    numbers::factor(&product).into_keys().collect()
}

/// Valuation of a nonzero ring element in the completion at `p`, measured in
/// the local uniformizer upstairs.
///
/// Inert: `v_p(N(x))/2` (the norm valuation is even).  Ramified:
/// `v_p(N(x))`.  Split: the minimum of the valuations of the two projections
/// `a + b·t` with `t` a Hensel root of `x² − x + (1+D)/4`; the minimum is
/// recovered exactly from one projection since the two valuations sum to
/// `v_p(N(x))`.
pub fn elem_valuation(field: &ImagQuadField, x: &RingElem, p: u64) -> Option<u64> {
    if x.is_zero() {
        return None;
    }
    let norm = x.norm(field);
    let vn = numbers::v_p_big(&norm, p);
    let place = place_type(field.d(), p);
    Some(match place {
        PlaceType::Inert => {
            assert!(vn % 2 == 0, "norms from inert places have even valuation");
            vn / 2
        }
        PlaceType::Ramified => vn,
        PlaceType::Split => {
            let k = u32::try_from(vn + 2).expect("precision fits u32");
            let t = numbers::hensel_omega_root(field.d(), p, k);
            let modulus = BigInt::from(p).pow(k);
            let image = num_integer::Integer::mod_floor(&(&x.a + &x.b * t), &modulus);
            let v1 = if image.is_zero() {
                // Only possible when the true valuation exceeds v_p(N) + 1,
                // which forces the other projection to carry it all.
                vn + 2
            } else {
                numbers::v_p_big(&image, p)
            };
            v1.min(vn.saturating_sub(v1))
        }
    })
}
