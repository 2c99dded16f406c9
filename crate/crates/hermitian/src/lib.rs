//! Hermitian lattices over rings of integers of imaginary quadratic fields.
//!
//! For a squarefree positive integer `D ≡ 3 (mod 4)` let `E = Q(√-D)` with
//! ring of integers `O_E = Z[ω]`, `ω = (1 + √-D)/2`.  This crate provides
//! exact arithmetic in `O_E`, Hermitian Gram matrices over `O_E`, and the
//! global invariants needed downstream: determinants, real signatures,
//! direct sums, rescalings, and a JSON wire format.
//!
//! # Conventions
//!
//! * `ω² = ω − (1+D)/4` and `ω̄ = 1 − ω`, so `conj(a + bω) = (a+b) − bω`
//!   and `N(a + bω) = a² + ab + b²(1+D)/4`.
//! * Hermitian forms are linear in the **first** argument and conjugate
//!   linear in the second; Gram matrices satisfy `G[j][i] = conj(G[i][j])`
//!   with rational integer diagonal.
//! * A basis change `B` acts by `G ↦ B G B̄ᵀ`.
//!
//! # Wire format
//!
//! ```text
//! {"D": 7, "gram": [[[2,0],[0,1]], [[0,-1],[2,0]]]}
//! ```
//!
//! where each entry `[a, b]` denotes `a + bω`.

use exact_arith::Rational;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Errors raised by [`make_field`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    /// `D ≢ 3 (mod 4)`: the maximal order would not be `Z[(1+√-D)/2]`.
    #[error("EVEN_DISCRIMINANT: D = {0} is not congruent to 3 modulo 4")]
    EvenDiscriminant(u64),
    /// `D` has a square factor.
    #[error("NOT_SQUAREFREE: D = {0} is not squarefree")]
    NotSquarefree(u64),
}

/// Errors raised while building or analyzing lattices.
#[derive(Debug, Error)]
pub enum LatticeError {
    #[error(transparent)]
    Field(#[from] FieldError),
    /// Malformed JSON or wrong shape of the wire object.
    #[error("PARSE_ERROR: {0}")]
    Parse(String),
    /// Structurally invalid Gram data (not square, not Hermitian, empty).
    #[error("INVALID_GRAM: {0}")]
    InvalidGram(String),
    /// The Hermitian form is degenerate.
    #[error("SINGULAR_GRAM: the Hermitian form is degenerate")]
    Singular,
}

/// The imaginary quadratic field `Q(√-D)` with `D ≡ 3 (mod 4)` squarefree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ImagQuadField {
    d: u64,
}

/// Validates `D` and returns the field object.
pub fn make_field(d: u64) -> Result<ImagQuadField, FieldError> {
    if d % 4 != 3 {
        return Err(FieldError::EvenDiscriminant(d));
    }
    if !exact_arith::is_valid_odd_disc(d) {
        return Err(FieldError::NotSquarefree(d));
    }
    Ok(ImagQuadField { d })
}

impl ImagQuadField {
    pub fn d(&self) -> u64 {
        self.d
    }

    /// `N(ω) = ω ω̄ = (1 + D)/4`.
    pub fn omega_norm(&self) -> BigInt {
        BigInt::from((1 + self.d) / 4)
    }
}

/// An element `a + bω` of `O_E`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RingElem {
    pub a: BigInt,
    pub b: BigInt,
}

impl RingElem {
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Self {
        RingElem {
            a: a.into(),
            b: b.into(),
        }
    }

    pub fn zero() -> Self {
        RingElem::new(0, 0)
    }

    pub fn one() -> Self {
        RingElem::new(1, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// True when the element lies in `Z` (no `ω` part).
    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn add(&self, o: &Self) -> Self {
        RingElem::new(&self.a + &o.a, &self.b + &o.b)
    }

    pub fn sub(&self, o: &Self) -> Self {
        RingElem::new(&self.a - &o.a, &self.b - &o.b)
    }

    pub fn neg(&self) -> Self {
        RingElem::new(-&self.a, -&self.b)
    }

    /// Product in `O_E`, using `ω² = ω − (1+D)/4`.
    pub fn mul(&self, o: &Self, field: &ImagQuadField) -> Self {
        let wn = field.omega_norm();
        let a = &self.a * &o.a - &self.b * &o.b * &wn;
        let b = &self.a * &o.b + &self.b * &o.a + &self.b * &o.b;
        RingElem { a, b }
    }

    /// Complex conjugate `conj(a + bω) = (a+b) − bω`.
    pub fn conj(&self) -> Self {
        RingElem::new(&self.a + &self.b, -&self.b)
    }

    /// Field norm `N(a + bω) = a² + ab + b²(1+D)/4 ∈ Z`.
    pub fn norm(&self, field: &ImagQuadField) -> BigInt {
        &self.a * &self.a + &self.a * &self.b + &self.b * &self.b * field.omega_norm()
    }

    /// Exact quotient `self / o` in `O_E`; panics when `o` does not divide
    /// `self` in the ring.  Computed as `self · ō / N(o)`.
    pub fn div_exact(&self, o: &Self, field: &ImagQuadField) -> Self {
        assert!(!o.is_zero(), "division by zero in O_E");
        let num = self.mul(&o.conj(), field);
        let nn = o.norm(field);
        let div = |x: &BigInt| -> BigInt {
            assert!((x % &nn).is_zero(), "inexact division in O_E: {self} by {o}");
            x / &nn
        };
        RingElem::new(div(&num.a), div(&num.b))
    }

    /// Trace `2a + b ∈ Z`.
    pub fn trace(&self) -> BigInt {
        BigInt::from(2) * &self.a + &self.b
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        RingElem::new(&self.a * c, &self.b * c)
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else if self.a.is_zero() {
            write!(f, "{}w", self.b)
        } else {
            write!(f, "{}{:+}w", self.a, self.b)
        }
    }
}

/// An integral Hermitian lattice: a field together with a Hermitian Gram
/// matrix over `O_E`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HermitianLattice {
    field: ImagQuadField,
    gram: Vec<Vec<RingElem>>,
}

#[derive(Serialize, Deserialize)]
struct LatticeWire {
    #[serde(rename = "D")]
    d: u64,
    gram: Vec<Vec<[i64; 2]>>,
}

impl HermitianLattice {
    /// Builds a lattice after checking shape and Hermitian symmetry.
    pub fn new(field: ImagQuadField, gram: Vec<Vec<RingElem>>) -> Result<Self, LatticeError> {
        let n = gram.len();
        if n == 0 {
            return Err(LatticeError::InvalidGram("empty Gram matrix".into()));
        }
        if gram.iter().any(|row| row.len() != n) {
            return Err(LatticeError::InvalidGram(format!(
                "Gram matrix is not square: {n} rows"
            )));
        }
        for i in 0..n {
            for j in 0..n {
                if gram[j][i] != gram[i][j].conj() {
                    return Err(LatticeError::InvalidGram(format!(
                        "entry ({j},{i}) is not the conjugate of entry ({i},{j})"
                    )));
                }
            }
        }
        Ok(HermitianLattice { field, gram })
    }

    /// Convenience: a diagonal lattice `diag(d_1, …, d_m)`.
    pub fn diagonal(field: ImagQuadField, entries: &[i64]) -> Self {
        let n = entries.len();
        let gram = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            RingElem::new(entries[i], 0)
                        } else {
                            RingElem::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        HermitianLattice::new(field, gram).expect("diagonal Gram is Hermitian")
    }

    pub fn field(&self) -> &ImagQuadField {
        &self.field
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<RingElem>] {
        &self.gram
    }

    /// Serializes to the JSON wire format.
    pub fn to_json(&self) -> String {
        let wire = LatticeWire {
            d: self.field.d,
            gram: self
                .gram
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|e| {
                            [
                                i64::try_from(&e.a).expect("entry fits i64"),
                                i64::try_from(&e.b).expect("entry fits i64"),
                            ]
                        })
                        .collect()
                })
                .collect(),
        };
        serde_json::to_string(&wire).expect("wire struct serializes")
    }
}

/// Parses the JSON wire format `{"D": …, "gram": [[[a,b],…],…]}`.
pub fn parse_lattice(input: &str) -> Result<HermitianLattice, LatticeError> {
    let wire: LatticeWire =
        serde_json::from_str(input).map_err(|e| LatticeError::Parse(e.to_string()))?;
    let field = make_field(wire.d)?;
    let gram = wire
        .gram
        .into_iter()
        .map(|row| row.into_iter().map(|[a, b]| RingElem::new(a, b)).collect())
        .collect();
    HermitianLattice::new(field, gram)
}

/// Exact determinant of the Gram matrix.
///
/// Fraction-free Bareiss elimination over `O_E`.  The Sylvester identity
/// makes every intermediate entry an honest minor of the input matrix, so
/// each division is exact in the ring and entry sizes stay bounded by
/// determinant size; the whole computation is `O(n³)` ring operations.  A
/// Hermitian matrix has determinant in `Z`.
pub fn det_gram(lattice: &HermitianLattice) -> BigInt {
    let n = lattice.rank();
    let field = lattice.field;
    let mut m = lattice.gram.clone();
    let mut sign_neg = false;
    let mut prev = RingElem::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign_neg = !sign_neg;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = m[k][k]
                    .mul(&m[i][j], &field)
                    .sub(&m[i][k].mul(&m[k][j], &field));
                m[i][j] = t.div_exact(&prev, &field);
            }
            m[i][k] = RingElem::zero();
        }
        prev = m[k][k].clone();
    }
    let det = &m[n - 1][n - 1];
    assert!(
        det.is_rational(),
        "Hermitian determinant must be rational, got {det}"
    );
    if sign_neg {
        -det.a.clone()
    } else {
        det.a.clone()
    }
}

/// Real signature `(positive, negative)` of the Hermitian form, by exact
/// congruence diagonalization over `E`.
pub fn signature(lattice: &HermitianLattice) -> Result<(usize, usize), LatticeError> {
    // Work over E with rational coordinates in the basis {1, ω}.
    #[derive(Clone)]
    struct QElem {
        a: Rational,
        b: Rational,
    }
    impl QElem {
        fn is_zero(&self) -> bool {
            self.a.is_zero() && self.b.is_zero()
        }
        fn conj(&self) -> Self {
            QElem {
                a: &self.a + &self.b,
                b: -self.b.clone(),
            }
        }
        fn sub(&self, o: &Self) -> Self {
            QElem {
                a: &self.a - &o.a,
                b: &self.b - &o.b,
            }
        }
        fn mul(&self, o: &Self, wn: &Rational) -> Self {
            QElem {
                a: &self.a * &o.a - &self.b * &o.b * wn,
                b: &self.a * &o.b + &self.b * &o.a + &self.b * &o.b,
            }
        }
        fn div(&self, o: &Self, wn: &Rational) -> Self {
            // x/y = x·conj(y)/N(y).
            let n = &o.a * &o.a + &o.a * &o.b + &o.b * &o.b * wn;
            let num = self.mul(&o.conj(), wn);
            QElem {
                a: num.a / &n,
                b: num.b / &n,
            }
        }
    }

    let n = lattice.rank();
    let wn = Rational::from_integer(lattice.field.omega_norm());
    let mut m: Vec<Vec<QElem>> = lattice
        .gram
        .iter()
        .map(|row| {
            row.iter()
                .map(|e| QElem {
                    a: Rational::from_integer(e.a.clone()),
                    b: Rational::from_integer(e.b.clone()),
                })
                .collect()
        })
        .collect();

    let mut pos = 0usize;
    let mut neg = 0usize;
    for k in 0..n {
        // Find a nonzero diagonal pivot at or below k.
        let pivot = (k..n).find(|&i| !m[i][i].is_zero());
        let pivot = match pivot {
            Some(i) => i,
            None => {
                // All remaining diagonal entries vanish; pick any nonzero
                // off-diagonal entry and fold it onto the diagonal via
                // e_i ← e_i + G[i][j]·e_j, which yields 2·N(G[i][j]) > 0.
                let mut found = None;
                'outer: for i in k..n {
                    for j in k..n {
                        if i != j && !m[i][j].is_zero() {
                            found = Some((i, j));
                            break 'outer;
                        }
                    }
                }
                let (i, j) = found.ok_or(LatticeError::Singular)?;
                let c = m[i][j].clone();
                // Row operation e_i ← e_i + c e_j acts on the first slot…
                for t in 0..n {
                    let add = c.mul(&m[j][t], &wn);
                    m[i][t] = QElem {
                        a: &m[i][t].a + &add.a,
                        b: &m[i][t].b + &add.b,
                    };
                }
                // …and conjugated on the second slot.
                let cbar = c.conj();
                for t in 0..n {
                    let add = m[t][j].mul(&cbar, &wn);
                    m[t][i] = QElem {
                        a: &m[t][i].a + &add.a,
                        b: &m[t][i].b + &add.b,
                    };
                }
                i
            }
        };
        m.swap(k, pivot);
        for row in m.iter_mut() {
            row.swap(k, pivot);
        }
        let d = m[k][k].clone();
        debug_assert!(d.b.is_zero(), "diagonal of a Hermitian matrix is rational");
        if d.a.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        // Clear column k below the pivot: e_i ← e_i − (G[i][k]/d)·e_k.
        for i in (k + 1)..n {
            if m[i][k].is_zero() {
                continue;
            }
            let c = m[i][k].div(&d, &wn);
            for t in 0..n {
                let sub = c.mul(&m[k][t], &wn);
                m[i][t] = m[i][t].sub(&sub);
            }
            let cbar = c.conj();
            for t in 0..n {
                let sub = m[t][k].mul(&cbar, &wn);
                m[t][i] = m[t][i].sub(&sub);
            }
        }
    }
    Ok((pos, neg))
}

/// Orthogonal direct sum; both summands must live over the same field.
pub fn direct_sum(l1: &HermitianLattice, l2: &HermitianLattice) -> HermitianLattice {
    assert_eq!(
        l1.field, l2.field,
        "direct sum requires lattices over the same field"
    );
    let (n1, n2) = (l1.rank(), l2.rank());
    let n = n1 + n2;
    let mut gram = vec![vec![RingElem::zero(); n]; n];
    for i in 0..n1 {
        for j in 0..n1 {
            gram[i][j] = l1.gram[i][j].clone();
        }
    }
    for i in 0..n2 {
        for j in 0..n2 {
            gram[n1 + i][n1 + j] = l2.gram[i][j].clone();
        }
    }
    HermitianLattice::new(l1.field, gram).expect("block sum of Hermitian matrices is Hermitian")
}

/// Rescales the form by a nonzero integer: `L(c)` has Gram `c·G`.
pub fn rescale(lattice: &HermitianLattice, c: i64) -> HermitianLattice {
    assert!(c != 0, "rescaling by zero would degenerate the form");
    let c = BigInt::from(c);
    let gram = lattice
        .gram
        .iter()
        .map(|row| row.iter().map(|e| e.scale(&c)).collect())
        .collect();
    HermitianLattice::new(lattice.field, gram).expect("rescaled Gram stays Hermitian")
}

/// Whether `|det G| = 1`.
pub fn is_unimodular(lattice: &HermitianLattice) -> bool {
    det_gram(lattice).abs() == BigInt::one()
}

/// The hyperbolic plane `H` with Gram `[[0,1],[1,0]]`.
pub fn lattice_h(field: ImagQuadField) -> HermitianLattice {
    let gram = vec![
        vec![RingElem::zero(), RingElem::one()],
        vec![RingElem::one(), RingElem::zero()],
    ];
    HermitianLattice::new(field, gram).expect("H is Hermitian")
}

/// The rank-2 lattice `G` over `Q(√-3)` with Gram `[[0,3],[3,0]]`.
pub fn lattice_g() -> HermitianLattice {
    let field = make_field(3).expect("D = 3 is valid");
    let gram = vec![
        vec![RingElem::zero(), RingElem::new(3, 0)],
        vec![RingElem::new(3, 0), RingElem::zero()],
    ];
    HermitianLattice::new(field, gram).expect("G is Hermitian")
}
