//! Independent verification of the local-factor machinery.
//!
//! Group orders are recomputed from first principles: by direct matrix
//! enumeration, and by Witt's extension theorem (the orthogonal/unitary
//! group of a nondegenerate form acts transitively on vectors of a given
//! nonzero norm, with vector stabilizer the group of the complement, so the
//! order is a product of sphere counts).  The index factor is recomputed as
//! an orbit size over a finite quotient ring, and the density-ratio bounds
//! are exercised on lattices built from explicit Gram matrices.

use exact_arith::Rational;
use hermitian::{make_field, HermitianLattice, ImagQuadField, RingElem};
use local_profile::{
    exponent_s, group_order, ind, jordan_ranks, lambda, lambda_prime, phi, phi_sum_bound,
    place_type, GroupKind, LocalProfile, LocalValue, PlaceType, QuadraticValue,
};
use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;

// ---------------------------------------------------------------------
// Finite-field helpers: F_q and F_{q²} with Frobenius conjugation.
// ---------------------------------------------------------------------

/// Context for `F_{q²} = F_q(t)`: `t² = t + 1` when `q = 2`, otherwise
/// `t² = δ` for the least quadratic non-residue `δ`.
#[derive(Clone, Copy)]
struct Fq2 {
    q: u64,
    delta: u64,
}

impl Fq2 {
    fn new(q: u64) -> Self {
        if q == 2 {
            return Fq2 { q, delta: 0 };
        }
        let delta = (2..q)
            .find(|&d| {
                // d is a non-residue iff d^{(q−1)/2} = q − 1.
                let mut acc = 1u64;
                for _ in 0..(q - 1) / 2 {
                    acc = acc * d % q;
                }
                acc == q - 1
            })
            .expect("odd prime fields have non-residues");
        Fq2 { q, delta }
    }

    fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let q = self.q;
        if q == 2 {
            // (a₁+b₁t)(a₂+b₂t) with t² = t + 1.
            let a = (x.0 * y.0 + x.1 * y.1) % 2;
            let b = (x.0 * y.1 + x.1 * y.0 + x.1 * y.1) % 2;
            (a, b)
        } else {
            let a = (x.0 * y.0 + self.delta * x.1 % q * y.1) % q;
            let b = (x.0 * y.1 + x.1 * y.0) % q;
            (a, b)
        }
    }

    fn add(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        ((x.0 + y.0) % self.q, (x.1 + y.1) % self.q)
    }

    /// Frobenius `x ↦ x^q`, the conjugation of `F_{q²}/F_q`.
    fn conj(&self, x: (u64, u64)) -> (u64, u64) {
        if self.q == 2 {
            ((x.0 + x.1) % 2, x.1)
        } else {
            (x.0, (self.q - x.1) % self.q)
        }
    }

    /// `N(x) = x·x̄ ∈ F_q`.
    fn norm(&self, x: (u64, u64)) -> u64 {
        let n = self.mul(x, self.conj(x));
        assert_eq!(n.1, 0, "norms land in the base field");
        n.0
    }

    fn decode(&self, code: u64) -> (u64, u64) {
        (code % self.q, code / self.q % self.q)
    }
}

// ---------------------------------------------------------------------
// Sphere-count recursions (Witt's theorem).
// ---------------------------------------------------------------------

/// `|O(diag(d₁,…,dₙ), F_q)|` as a product of sphere counts: transitivity on
/// vectors of norm `d_k` (Witt) makes the order `Π_k #{x : Σ_{i≥k} dᵢxᵢ² = d_k}`.
fn orthogonal_order_by_spheres(diag: &[u64], q: u64) -> u64 {
    let mut acc = 1u64;
    for k in 0..diag.len() {
        let rest = &diag[k..];
        let mut count = 0u64;
        let total = q.pow(rest.len() as u32);
        for code in 0..total {
            let mut c = code;
            let mut s = 0u64;
            for &d in rest {
                let x = c % q;
                c /= q;
                s = (s + d % q * x % q * x) % q;
            }
            if s == diag[k] % q {
                count += 1;
            }
        }
        acc *= count;
    }
    acc
}

/// `|U_m(q)|` for the standard Hermitian form, by the same recursion over
/// Hermitian spheres `Σ N(xᵢ) = 1`.
fn unitary_order_by_spheres(m: usize, q: u64) -> u64 {
    let f = Fq2::new(q);
    let qq = q * q;
    let mut acc = 1u64;
    for k in 1..=m {
        let mut count = 0u64;
        let total = qq.pow(k as u32);
        for code in 0..total {
            let mut c = code;
            let mut s = 0u64;
            for _ in 0..k {
                let x = f.decode(c);
                c /= qq;
                s = (s + f.norm(x)) % q;
            }
            if s == 1 {
                count += 1;
            }
        }
        acc *= count;
    }
    acc
}

/// Direct count of matrices with orthonormal columns (identity Hermitian
/// form), for small sizes: an enumeration completely independent of the
/// recursion above.
fn unitary_order_by_matrices(m: usize, q: u64) -> u64 {
    let f = Fq2::new(q);
    let qq = q * q;
    let total = qq.pow((m * m) as u32);
    let mut count = 0u64;
    'mat: for code in 0..total {
        let mut c = code;
        let mut g = vec![vec![(0u64, 0u64); m]; m];
        for col in g.iter_mut() {
            for entry in col.iter_mut() {
                *entry = f.decode(c);
                c /= qq;
            }
        }
        for i in 0..m {
            for j in i..m {
                let mut s = (0u64, 0u64);
                for k in 0..m {
                    s = f.add(s, f.mul(g[i][k], f.conj(g[j][k])));
                }
                let expect = if i == j { (1, 0) } else { (0, 0) };
                if s != expect {
                    continue 'mat;
                }
            }
        }
        count += 1;
    }
    count
}

/// `⟨u, v⟩ = Σ_t (u_{2t} v_{2t+1} − u_{2t+1} v_{2t})` for the standard
/// symplectic pairing on `F_q^{2k}`.
fn symplectic_pairing(u: &[u64], v: &[u64], q: u64) -> u64 {
    let mut s = 0u64;
    for t in 0..u.len() / 2 {
        s = (s + u[2 * t] * v[2 * t + 1]) % q;
        s = (s + q * q - u[2 * t + 1] * v[2 * t] % (q * q)) % q;
    }
    s
}

/// `|Sp_{2k}(q)|` by backtracking over columns.
fn symplectic_order_by_backtracking(k: usize, q: u64) -> u64 {
    let n = 2 * k;
    let total = q.pow(n as u32);
    fn expect(i: usize, j: usize, q: u64) -> u64 {
        // Gram of the standard pairing on basis vectors.
        if i / 2 == j / 2 {
            if i + 1 == j {
                1
            } else if j + 1 == i {
                q - 1
            } else {
                0
            }
        } else {
            0
        }
    }
    fn recurse(cols: &mut Vec<Vec<u64>>, n: usize, total: u64, q: u64) -> u64 {
        if cols.len() == n {
            return 1;
        }
        let j = cols.len();
        let mut count = 0u64;
        'cand: for code in 0..total {
            let mut c = code;
            let v: Vec<u64> = (0..n)
                .map(|_| {
                    let x = c % q;
                    c /= q;
                    x
                })
                .collect();
            for (i, u) in cols.iter().enumerate() {
                if symplectic_pairing(u, &v, q) != expect(i, j, q) {
                    continue 'cand;
                }
            }
            cols.push(v);
            count += recurse(cols, n, total, q);
            cols.pop();
        }
        count
    }
    recurse(&mut Vec::new(), n, total, q)
}

/// Direct count of invertible matrices over `F_q`.
fn gl_order_by_det_count(m: usize, q: u64) -> u64 {
    fn det_mod(g: &[Vec<u64>], q: u64) -> u64 {
        let n = g.len();
        if n == 1 {
            return g[0][0] % q;
        }
        let mut acc = 0u64;
        for c in 0..n {
            let sub: Vec<Vec<u64>> = (1..n)
                .map(|r| {
                    (0..n)
                        .filter(|&x| x != c)
                        .map(|x| g[r][x])
                        .collect()
                })
                .collect();
            let term = g[0][c] % q * det_mod(&sub, q) % q;
            acc = if c % 2 == 0 {
                (acc + term) % q
            } else {
                (acc + q - term) % q
            };
        }
        acc
    }
    let total = q.pow((m * m) as u32);
    let mut count = 0u64;
    for code in 0..total {
        let mut c = code;
        let g: Vec<Vec<u64>> = (0..m)
            .map(|_| {
                (0..m)
                    .map(|_| {
                        let x = c % q;
                        c /= q;
                        x
                    })
                    .collect()
            })
            .collect();
        if det_mod(&g, q) != 0 {
            count += 1;
        }
    }
    count
}

fn legendre(a: i64, p: u64) -> i8 {
    let a = a.rem_euclid(p as i64) as u64;
    assert!(a != 0);
    let mut acc = 1u64;
    for _ in 0..(p - 1) / 2 {
        acc = acc * a % p;
    }
    if acc == 1 {
        1
    } else {
        -1
    }
}

// ---------------------------------------------------------------------
// Group-order oracles.
// ---------------------------------------------------------------------

#[test]
fn gl_orders_by_direct_count() {
    for (m, q) in [(2usize, 2u64), (2, 3), (3, 2), (3, 3)] {
        assert_eq!(
            BigInt::from(gl_order_by_det_count(m, q)),
            group_order(GroupKind::GeneralLinear(m), q).unwrap(),
            "GL_{m}(F_{q})"
        );
    }
}

#[test]
fn unitary_orders_by_sphere_recursion_and_enumeration() {
    for (m, q) in [(1usize, 2u64), (1, 3), (2, 2), (2, 3), (3, 2), (3, 3)] {
        assert_eq!(
            BigInt::from(unitary_order_by_spheres(m, q)),
            group_order(GroupKind::Unitary(m), q).unwrap(),
            "U_{m}(F_{q}) via spheres"
        );
    }
    for (m, q) in [(1usize, 2u64), (1, 3), (2, 2), (2, 3)] {
        assert_eq!(
            unitary_order_by_matrices(m, q),
            unitary_order_by_spheres(m, q),
            "U_{m}(F_{q}) enumeration vs recursion"
        );
    }
}

#[test]
fn symplectic_orders_by_backtracking() {
    for (k, q) in [(1usize, 2u64), (1, 3), (1, 5), (2, 3)] {
        assert_eq!(
            BigInt::from(symplectic_order_by_backtracking(k, q)),
            group_order(GroupKind::Symplectic(2 * k), q).unwrap(),
            "Sp_{}(F_{q})",
            2 * k
        );
    }
}

#[test]
fn orthogonal_orders_and_witt_types_by_sphere_recursion() {
    // Odd rank: the order does not depend on the discriminant.
    for (diag, q) in [
        (vec![1u64, 1, 1], 3u64),
        (vec![1, 1, 2], 3),
        (vec![1, 1, 1], 5),
        (vec![1, 2, 3], 5),
        (vec![1, 1, 1, 1, 1], 3),
        (vec![1, 1, 1, 2, 2], 3),
    ] {
        assert_eq!(
            BigInt::from(orthogonal_order_by_spheres(&diag, q)),
            group_order(GroupKind::OrthogonalOdd(diag.len()), q).unwrap(),
            "O_{}(F_{q}) for diag {diag:?}",
            diag.len()
        );
    }
    // Even rank: the Witt type is PLUS exactly when (−1)^k·disc is a square,
    // matching the convention used to pick the orthogonal factor.
    for (diag, q) in [
        (vec![1u64, 1], 3u64),
        (vec![1, 2], 3),
        (vec![2, 2], 3),
        (vec![1, 1], 5),
        (vec![1, 2], 5),
        (vec![1, 3], 5),
        (vec![1, 1, 1, 1], 3),
        (vec![1, 1, 1, 2], 3),
        (vec![1, 2, 1, 2], 3),
    ] {
        let k = diag.len() / 2;
        let disc: i64 = diag.iter().map(|&d| d as i64).product();
        let signed = if k % 2 == 0 { disc } else { -disc };
        let kind = if legendre(signed, q) == 1 {
            GroupKind::OrthogonalPlus(diag.len())
        } else {
            GroupKind::OrthogonalMinus(diag.len())
        };
        assert_eq!(
            BigInt::from(orthogonal_order_by_spheres(&diag, q)),
            group_order(kind, q).unwrap(),
            "O^±_{}(F_{q}) for diag {diag:?}",
            diag.len()
        );
    }
}

// ---------------------------------------------------------------------
// Coset-index oracle: orbit size over O_E/p².
// ---------------------------------------------------------------------

/// Arithmetic in `O_E / 4` for `D = 11` (inert at 2): pairs `(a, b)` mod 4
/// with `ω² = ω − 3`.
#[derive(Clone, Copy)]
struct RingMod4;

impl RingMod4 {
    fn mul(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        let a = (x.0 * y.0 + 4 * 4 - 3 * x.1 % 16 * y.1 % 16) % 4;
        let b = (x.0 * y.1 + x.1 * y.0 + x.1 * y.1) % 4;
        (a % 4, b)
    }

    fn add(&self, x: (u64, u64), y: (u64, u64)) -> (u64, u64) {
        ((x.0 + y.0) % 4, (x.1 + y.1) % 4)
    }

    fn conj(&self, x: (u64, u64)) -> (u64, u64) {
        ((x.0 + x.1) % 4, (4 - x.1) % 4)
    }

    fn decode(&self, code: u64) -> (u64, u64) {
        (code % 4, code / 4 % 4)
    }
}

#[test]
fn coset_index_by_orbit_enumeration_mod_p_squared() {
    // The lattice L = ⟨e₁, 2f₂⟩ inside the unimodular M = ⟨e₁, f₂⟩ with
    // h = diag(1,1) at the inert place 2 of Q(√−11).  Since 4M ⊆ L, the
    // index [U(M) : Stab(L)] is the orbit size of L/4M under the finite
    // unitary group over O/4 (the group scheme is smooth, so reduction is
    // surjective).  A matrix fixes L exactly when its lower-left entry is
    // divisible by 2.
    let r = RingMod4;
    let mut group = 0u64;
    let mut stab = 0u64;
    for code in 0..(16u64).pow(4) {
        let mut c = code;
        let mut g = [[(0u64, 0u64); 2]; 2];
        for row in g.iter_mut() {
            for entry in row.iter_mut() {
                *entry = r.decode(c);
                c /= 16;
            }
        }
        let mut ok = true;
        'outer: for i in 0..2 {
            for j in 0..2 {
                let mut s = (0, 0);
                for k in 0..2 {
                    s = r.add(s, r.mul(r.conj(g[k][i]), g[k][j]));
                }
                let expect = if i == j { (1, 0) } else { (0, 0) };
                if s != expect {
                    ok = false;
                    break 'outer;
                }
            }
        }
        if !ok {
            continue;
        }
        group += 1;
        if g[1][0].0 % 2 == 0 && g[1][0].1 % 2 == 0 {
            stab += 1;
        }
    }
    assert!(group > 0 && group % stab == 0);
    let orbit = group / stab;
    // Formula side: profile [(0,1),(2,1)] at inert p = 2.
    let pr = LocalProfile::new(2, PlaceType::Inert, &[(0, 1, None), (2, 1, None)]).unwrap();
    assert_eq!(exponent_s(&pr), 0);
    assert_eq!(
        ind(&pr).unwrap().as_rational(),
        Some(Rational::from(BigInt::from(orbit)))
    );
    assert_eq!(orbit, 2);
}

// ---------------------------------------------------------------------
// Density-ratio invariants for one-vector extensions.
// ---------------------------------------------------------------------

/// The closed form for `λ'(L')/λ'(L)` at unramified places, where
/// `L = L' ⊕ ⟨±p^m⟩` has rank `n + 1`: with `n_m` the rank at scale `m` and
/// `n_{≡m}` the total rank at scales of the parity of `m`,
/// `q^{−(n+1+n_{≡m}−2n_m)} · (1 − (εq)^{−n_m})/(1 − (εq)^{−(n+1)})`,
/// `ε = −1` inert, `ε = +1` split.
fn closed_form_unramified(profile: &LocalProfile, m: u64) -> Rational {
    let q = profile.q();
    let n1 = profile.rank() as i64; // n + 1
    let n_m = profile.block_rank(m) as i64;
    let n_eq: i64 = profile
        .jordan()
        .iter()
        .filter(|b| b.index % 2 == m % 2)
        .map(|b| b.rank as i64)
        .sum();
    let eps: i64 = if profile.place() == PlaceType::Inert { -1 } else { 1 };
    let base = Rational::new(BigInt::from(eps), BigInt::from(q));
    let num = Rational::one() - exact_arith::rat_pow(&base, n_m);
    let den = Rational::one() - exact_arith::rat_pow(&base, n1);
    let scale = exact_arith::rat_pow(
        &Rational::from(BigInt::from(q)),
        -(n1 + n_eq - 2 * n_m),
    );
    scale * num / den
}

fn local_ratio(num: &LocalValue, den: &LocalValue) -> LocalValue {
    num.div(den)
}

#[test]
fn one_vector_extension_ratios_bounded_by_phi_with_exact_unramified_form() {
    // (D, p) exercising each place type; diag(L') stays within rank 4.
    let cases: [(u64, u64); 8] = [
        (11, 2), // inert
        (7, 3),  // inert
        (7, 5),  // inert
        (7, 2),  // split
        (11, 3), // split
        (11, 5), // split
        (3, 3),  // ramified
        (7, 7),  // ramified
    ];
    let mut checked_eq = 0usize;
    let mut checked_dom = 0usize;
    for (d, p) in cases {
        let place = place_type(d, p);
        let f = make_field(d).unwrap();
        let pi = p as i64;
        let bases: Vec<Vec<i64>> = vec![
            vec![1],
            vec![1, 1],
            vec![1, -1],
            vec![1, pi],
            vec![1, 1, pi],
            vec![1, pi, pi * pi],
            vec![pi, pi],
            vec![1, 1, 1, pi],
            vec![1, -1, pi * pi],
        ];
        for base in &bases {
            for m in 1u64..=3 {
                for sign in [1i64, -1] {
                    let lp = HermitianLattice::diagonal(f.clone(), base);
                    let mut ext = base.clone();
                    ext.push(sign * pi.pow(m as u32));
                    let l = HermitianLattice::diagonal(f.clone(), &ext);
                    let pr_small = jordan_ranks(&lp, p);
                    let pr_big = jordan_ranks(&l, p);
                    // The summand ⟨±p^m⟩ sits at scale m (ramified: 2m).
                    let scale = if place == PlaceType::Ramified { 2 * m } else { m };
                    assert!(pr_big.block_rank(scale) >= 1);
                    let ratio = local_ratio(
                        &lambda(&pr_small).unwrap(),
                        &lambda(&pr_big).unwrap(),
                    );
                    let bound = phi(&pr_big, scale).unwrap();
                    assert_ne!(
                        ratio.cmp_value(&bound),
                        Ordering::Greater,
                        "φ must dominate λ(L')/λ(L): D={d} p={p} base={base:?} m={m} sign={sign}"
                    );
                    checked_dom += 1;
                    if place != PlaceType::Ramified {
                        let lratio = local_ratio(
                            &lambda_prime(&pr_small).unwrap(),
                            &lambda_prime(&pr_big).unwrap(),
                        );
                        let expect = closed_form_unramified(&pr_big, scale);
                        assert_eq!(
                            lratio.as_rational(),
                            Some(expect),
                            "closed form: D={d} p={p} base={base:?} m={m} sign={sign}"
                        );
                        checked_eq += 1;
                    }
                }
            }
        }
    }
    assert!(checked_dom > 400 && checked_eq > 300, "coverage: {checked_dom}/{checked_eq}");
}

// ---------------------------------------------------------------------
// Summed φ bounds on random profiles.
// ---------------------------------------------------------------------

fn phi_sum(pr: &LocalProfile) -> QuadraticValue {
    let mut sum = QuadraticValue::zero(pr.q());
    for &s in &pr.relevant_indices() {
        sum = sum.add(&QuadraticValue::from_local(&phi(pr, s).unwrap()));
    }
    sum
}

#[test]
fn phi_sums_stay_below_the_closed_bounds_on_random_lattices() {
    // The closed-form bound is proved under the standing rank assumption
    // n ≥ 3 (lattices of signature (1, n)): the unramified case ends by
    // bounding 1/(1 − q^{−(n+1)}) through n + 1 ≥ 4.  So the random
    // lattices here have rank 4 or 5.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1001);
    let pool: [i64; 17] = [1, -1, 2, 3, -3, 4, 5, -5, 6, 8, 9, -9, 10, 12, 25, 27, 45];
    for trial in 0..300 {
        let d = [3u64, 7, 11][rng.gen_range(0..3)];
        let f = make_field(d).unwrap();
        let rank = rng.gen_range(4..=5usize);
        let diag: Vec<i64> = (0..rank).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
        let l = HermitianLattice::diagonal(f, &diag);
        for p in local_profile::relevant_primes(&l) {
            let pr = jordan_ranks(&l, p);
            let sum = phi_sum(&pr);
            let bound = QuadraticValue::from_local(&phi_sum_bound(&pr));
            assert_ne!(
                bound.sub(&sum).sign(),
                Ordering::Less,
                "Σφ exceeded its bound on trial {trial}: diag {diag:?} over D={d} at p={p}"
            );
        }
    }
}

#[test]
fn phi_sum_bound_needs_the_rank_assumption() {
    // A rank-2 counterexample showing the constant 16/5 is not valid for
    // small n: at the inert place 2, the profile of diag(1, 8) has
    // Σφ = 1/2 while the closed form gives (16/5)·2^{−3} = 2/5.
    let pr = LocalProfile::new(2, PlaceType::Inert, &[(0, 1, None), (3, 1, None)]).unwrap();
    let sum = phi_sum(&pr);
    let bound = QuadraticValue::from_local(&phi_sum_bound(&pr));
    assert_eq!(
        phi(&pr, 0).unwrap().as_rational(),
        Some(Rational::new(BigInt::from(1), BigInt::from(4)))
    );
    assert_eq!(bound.sub(&sum).sign(), Ordering::Less);
}

// ---------------------------------------------------------------------
// Base-change invariance of Jordan profiles.
// ---------------------------------------------------------------------

fn mat_mul(
    a: &[Vec<RingElem>],
    b: &[Vec<RingElem>],
    field: &ImagQuadField,
) -> Vec<Vec<RingElem>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut s = RingElem::zero();
                    for k in 0..n {
                        s = s.add(&a[i][k].mul(&b[k][j], field));
                    }
                    s
                })
                .collect()
        })
        .collect()
}

fn conj_transpose(a: &[Vec<RingElem>]) -> Vec<Vec<RingElem>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| a[j][i].conj()).collect())
        .collect()
}

#[test]
fn jordan_profiles_invariant_under_unimodular_base_change() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2002);
    let starts: [(u64, Vec<i64>); 4] = [
        (3, vec![1, -1, 3]),
        (7, vec![1, 2, -4]),
        (11, vec![1, -1, 11]),
        (7, vec![1, 7, 14]),
    ];
    for (d, diag) in &starts {
        let f = make_field(*d).unwrap();
        let l = HermitianLattice::diagonal(f.clone(), diag);
        let primes = local_profile::relevant_primes(&l);
        let n = diag.len();
        for _ in 0..8 {
            // Random unimodular transform: a word in elementary matrices,
            // swaps, and sign flips.
            let mut u: Vec<Vec<RingElem>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| if i == j { RingElem::one() } else { RingElem::zero() })
                        .collect()
                })
                .collect();
            for _ in 0..6 {
                match rng.gen_range(0..3) {
                    0 => {
                        let i = rng.gen_range(0..n);
                        let mut j = rng.gen_range(0..n);
                        while j == i {
                            j = rng.gen_range(0..n);
                        }
                        let c = match rng.gen_range(0..4) {
                            0 => RingElem::new(1, 0),
                            1 => RingElem::new(-1, 0),
                            2 => RingElem::new(0, 1),
                            _ => RingElem::new(1, -1),
                        };
                        for t in 0..n {
                            let add = c.mul(&u[j][t], &f);
                            u[i][t] = u[i][t].add(&add);
                        }
                    }
                    1 => {
                        let i = rng.gen_range(0..n);
                        let j = rng.gen_range(0..n);
                        u.swap(i, j);
                    }
                    _ => {
                        let i = rng.gen_range(0..n);
                        for t in 0..n {
                            u[i][t] = u[i][t].neg();
                        }
                    }
                }
            }
            let g2 = mat_mul(&mat_mul(&u, l.gram(), &f), &conj_transpose(&u), &f);
            let l2 = HermitianLattice::new(f.clone(), g2).expect("transform preserves symmetry");
            assert_eq!(hermitian::det_gram(&l2), hermitian::det_gram(&l));
            for &p in &primes {
                let a = jordan_ranks(&l, p);
                let b = jordan_ranks(&l2, p);
                assert_eq!(
                    a.jordan(),
                    b.jordan(),
                    "profile changed under base change at p = {p} for D = {d}"
                );
            }
        }
    }
}

#[test]
fn jordan_profile_survives_deep_base_change_of_mixed_lattices() {
    // Deep random congruences of direct sums mixing hyperbolic planes with
    // diagonal blocks reach Gram matrices whose minimal-valuation entry
    // sits off the diagonal while some diagonal entry ties it — the shape
    // that requires the diagonal-preferred pivoting of the symmetric
    // reduction.  The reduction itself cross-asserts determinant valuations
    // and (at these ranks) determinantal-divisor multisets.
    let mut rng = ChaCha8Rng::seed_from_u64(0xba5e_c4a9);
    for _ in 0..60 {
        let d = *[3u64, 7, 11, 19, 23].get(rng.gen_range(0..5)).unwrap();
        let f = make_field(d).unwrap();
        let mut l = match rng.gen_range(0..3u8) {
            0 => hermitian::lattice_h(f),
            1 => HermitianLattice::diagonal(f, &[1, -1]),
            _ => HermitianLattice::diagonal(
                f,
                &[rng.gen_range(1i64..=3), -rng.gen_range(1i64..=6)],
            ),
        };
        while l.rank() < rng.gen_range(3..=5usize) {
            let next = match rng.gen_range(0..3u8) {
                0 => hermitian::lattice_h(f),
                1 => HermitianLattice::diagonal(f, &[-rng.gen_range(1i64..=9)]),
                _ => HermitianLattice::diagonal(f, &[-1]),
            };
            l = hermitian::direct_sum(&l, &next);
        }
        let n = l.rank();
        let mut g = l.gram().to_vec();
        for _ in 0..14 {
            let i = rng.gen_range(0..n);
            let j = rng.gen_range(0..n);
            if i == j {
                continue;
            }
            let c = RingElem::new(rng.gen_range(-2i64..=2), rng.gen_range(-1i64..=1));
            if c.is_zero() {
                continue;
            }
            for t in 0..n {
                let add = c.mul(&g[j][t], &f);
                g[i][t] = g[i][t].add(&add);
            }
            let cb = c.conj();
            for row in g.iter_mut() {
                let add = cb.mul(&row[j], &f);
                row[i] = row[i].add(&add);
            }
        }
        let l2 = HermitianLattice::new(f, g).expect("congruence preserves symmetry");
        assert_eq!(hermitian::det_gram(&l), hermitian::det_gram(&l2));
        for p in local_profile::relevant_primes(&l) {
            assert_eq!(
                jordan_ranks(&l, p).jordan(),
                jordan_ranks(&l2, p).jordan(),
                "profile changed at p = {p}, D = {d}"
            );
        }
    }
}
