//! Rings with several commuting p-derivations `δ_{p_1}, …, δ_{p_d}` over
//! the base variable `t`, the series `f^e` built in them, and the check
//! that a family of per-prime expansions comes from one series with
//! coefficients in `Z_(P)`.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::arith::{is_localized_at, rational_reconstruct, Coefficient, PadicTrunc, Residue};
use crate::deltajet::{log_one_plus_t, psi_serretate_in, BaseVar, JetRing, JetSeries, Monomial};
use crate::error::{Error, Result};

/// Series in the jets `δ_P^i t`; the same type as the single-prime rings.
pub type MultiJetSeries<C> = JetSeries<C>;

fn require_prime_set(primes: &[u64]) -> Result<()> {
    if primes.is_empty() {
        return Err(Error::Domain("the prime set is empty".into()));
    }
    for &p in primes {
        crate::arith::require_prime(p)?;
        if p < 5 {
            return Err(Error::Domain(format!("primes must be at least 5, got {p}")));
        }
    }
    Ok(())
}

/// The ring `Z_(P)[[δ_P^i t]]` for the ordered prime set `P`.
pub fn common_ring(primes: &[u64]) -> Result<Arc<JetRing>> {
    JetRing::new(primes, BaseVar::T)
}

fn prime_at<C: Coefficient>(f: &JetSeries<C>, k: usize) -> Result<u64> {
    f.ring()
        .primes()
        .get(k)
        .copied()
        .ok_or_else(|| Error::Domain(format!("no prime at position {k}")))
}

/// `φ_{p_k}`, with `k` the 0-based position in the ring's prime list.
pub fn phi_pk<C: Coefficient>(f: &JetSeries<C>, k: usize) -> Result<JetSeries<C>> {
    f.phi(prime_at(f, k)?)
}

/// `δ_{p_k} f = (φ_{p_k} f - f^{p_k}) / p_k`.
pub fn delta_pk<C: Coefficient>(f: &JetSeries<C>, k: usize) -> Result<JetSeries<C>> {
    f.delta(prime_at(f, k)?)
}

/// `f^e_0 = (1/Π p) Π (φ_p - p) log(1 + t)` below weight `n`, with
/// `Z_(P)`-integrality of every coefficient checked.
pub fn build_fe0(primes: &[u64], n: i64) -> Result<MultiJetSeries<BigRational>> {
    require_prime_set(primes)?;
    let ring = common_ring(primes)?;
    let mut f = log_one_plus_t(&ring, n)?;
    for &p in primes {
        f = f.phi_to(p, Some(n))?.sub(&f.scale_int(p as i64));
    }
    for &p in primes {
        f = f.div_prime(p)?;
    }
    f.require_integral(primes)?;
    Ok(f)
}

/// `f^e_k = (-1)^{d-1} Π_{l≠k} (1 - φ_{p_l}/p_l) Ψ_{p_k}`, built from the
/// single-prime Ψ of `p_k` moved into the ring of `P`. Only
/// `p_k`-integrality is required.
pub fn build_fe_k(primes: &[u64], k: usize, n: i64) -> Result<MultiJetSeries<BigRational>> {
    require_prime_set(primes)?;
    let pk = *primes
        .get(k)
        .ok_or_else(|| Error::Domain(format!("no prime at position {k}")))?;
    let single = JetRing::new(&[pk], BaseVar::T)?;
    let ring = common_ring(primes)?;
    let mut f = psi_serretate_in(&single, pk, n)?.embed_into(&ring)?;
    for (l, &pl) in primes.iter().enumerate() {
        if l != k {
            f = f.sub(&f.phi_to(pl, Some(n))?.div_prime(pl)?);
        }
    }
    if primes.len().is_multiple_of(2) {
        f = f.neg();
    }
    f.require_integral(&[pk])?;
    Ok(f)
}

/// One member of a family of per-prime expansions.
#[derive(Clone, Debug)]
pub enum FamilyMember {
    /// Exact coefficients, integral at `prime`.
    Exact { prime: u64, series: JetSeries<BigRational> },
    /// Coefficients known modulo a power of the carrier prime.
    Padic(JetSeries<PadicTrunc>),
}

impl FamilyMember {
    fn ring(&self) -> &Arc<JetRing> {
        match self {
            FamilyMember::Exact { series, .. } => series.ring(),
            FamilyMember::Padic(s) => s.ring(),
        }
    }

    fn bound(&self) -> Option<i64> {
        match self {
            FamilyMember::Exact { series, .. } => series.bound(),
            FamilyMember::Padic(s) => s.bound(),
        }
    }

    fn prime(&self) -> u64 {
        match self {
            FamilyMember::Exact { prime, .. } => *prime,
            FamilyMember::Padic(s) => s.ctx().p(),
        }
    }

    fn monomials(&self) -> Vec<Monomial> {
        match self {
            FamilyMember::Exact { series, .. } => series.terms().map(|(m, _)| m.clone()).collect(),
            FamilyMember::Padic(s) => s.terms().map(|(m, _)| m.clone()).collect(),
        }
    }

    fn describe(&self, m: &Monomial) -> String {
        match self {
            FamilyMember::Exact { prime, series } => {
                let c = series.coeff(m).cloned().unwrap_or_else(BigRational::zero);
                format!("{c} (exact, p = {prime})")
            }
            FamilyMember::Padic(s) => {
                let c = s
                    .coeff(m)
                    .cloned()
                    .unwrap_or_else(|| PadicTrunc::zero_in(s.ctx()).with_digits(s.precision().unwrap_or(0)));
                format!("{} mod {}^{}", c.residue(), c.p(), c.guaranteed_digits())
            }
        }
    }
}

/// Why a family does not continue to a single series.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Obstruction {
    pub monomial: String,
    pub reason: String,
    /// Each member's coefficient at the monomial.
    pub values: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum Continuation {
    Continued(MultiJetSeries<BigRational>),
    Obstructed(Obstruction),
}

impl Continuation {
    pub fn is_continued(&self) -> bool {
        matches!(self, Continuation::Continued(_))
    }
}

/// Looks for one series with `Z_(P)` coefficients that reduces to every
/// member of the family.
///
/// Monomials are visited by increasing weight. Exact members must agree on
/// the nose; p-adic members are matched against an exact value when there
/// is one, and otherwise combined by CRT and rational reconstruction with
/// the given height bound.
pub fn continuation_check(family: &[FamilyMember], height: Option<&BigInt>) -> Result<Continuation> {
    let first = family
        .first()
        .ok_or_else(|| Error::Missing("empty family".into()))?;
    let ring = first.ring().clone();
    let bound = first.bound();
    for m in family {
        if m.ring().primes() != ring.primes() || m.ring().base() != ring.base() {
            return Err(Error::Domain("family members live in different rings".into()));
        }
        if m.bound() != bound {
            return Err(Error::Domain("family members have different truncations".into()));
        }
    }
    let mut primes: Vec<u64> = family.iter().map(|m| m.prime()).collect();
    primes.sort_unstable();
    primes.dedup();

    let mut monomials: Vec<Monomial> = family
        .iter()
        .flat_map(|m| m.monomials())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    monomials.sort_by_key(|m| (ring.monomial_weight(m), m.clone()));

    let obstruct = |m: &Monomial, reason: String| {
        Continuation::Obstructed(Obstruction {
            monomial: ring.display_monomial(m),
            reason,
            values: family.iter().map(|f| f.describe(m)).collect(),
        })
    };

    let mut terms = Vec::new();
    for m in &monomials {
        let mut exact: Option<BigRational> = None;
        let mut residues = Vec::new();
        for member in family {
            match member {
                FamilyMember::Exact { series, .. } => {
                    let c = series.coeff(m).cloned().unwrap_or_else(BigRational::zero);
                    match &exact {
                        Some(x) if *x != c => {
                            return Ok(obstruct(m, "exact members disagree".into()));
                        }
                        _ => exact = Some(c),
                    }
                }
                FamilyMember::Padic(s) => {
                    let g = s.precision().unwrap_or(s.ctx().m());
                    let c = s.coeff(m).cloned();
                    let (r, g) = match c {
                        Some(c) => (c.residue().clone(), c.guaranteed_digits()),
                        None => (BigInt::zero(), g),
                    };
                    residues.push(Residue::new(s.ctx().p(), g, r));
                }
            }
        }
        let value = match exact {
            Some(x) => {
                if !is_localized_at(&x, &primes) {
                    return Ok(obstruct(m, format!("{x} is not integral at every prime")));
                }
                for r in &residues {
                    let image = Residue::of_rational(&x, r.p, r.exponent)?;
                    if image.residue != r.residue {
                        return Ok(obstruct(
                            m,
                            format!("{x} does not reduce to the {}-adic member", r.p),
                        ));
                    }
                }
                x
            }
            None => match rational_reconstruct(&residues, height) {
                Ok(x) => x.into_rational(),
                Err(Error::Reconstruction(msg)) => return Ok(obstruct(m, msg)),
                Err(e) => return Err(e),
            },
        };
        if !Zero::is_zero(&value) {
            terms.push((m.clone(), value));
        }
    }
    Ok(Continuation::Continued(JetSeries::from_terms(&ring, &(), terms, bound)?))
}

/// Rank of a list of rational vectors by exact Gaussian elimination.
pub fn exact_rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let ncols = rows.iter().map(Vec::len).max().unwrap_or(0);
    for r in &mut rows {
        r.resize(ncols, BigRational::zero());
    }
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&i| !Zero::is_zero(&rows[i][col])) else {
            continue;
        };
        rows.swap(rank, pivot);
        let inv = rows[rank][col].recip();
        for j in col..ncols {
            rows[rank][j] = &rows[rank][j] * &inv;
        }
        for i in 0..rows.len() {
            if i != rank && !Zero::is_zero(&rows[i][col]) {
                let factor = rows[i][col].clone();
                for j in col..ncols {
                    let delta = &factor * &rows[rank][j];
                    rows[i][j] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub primes: Vec<u64>,
    pub orders: Vec<u32>,
    pub bound: i64,
    pub vectors: usize,
    pub rank: usize,
    pub expected: usize,
    pub pass: bool,
}

/// Rank of the expansions `φ_P^j(f^e_0)` for `0 ≤ j ≤ r - 1`, all cut at
/// weight `n`; full rank is `Π r_k`.
pub fn basis_independence_check(primes: &[u64], orders: &[u32], n: i64) -> Result<RankReport> {
    if orders.len() != primes.len() {
        return Err(Error::Domain("one order per prime is required".into()));
    }
    if orders.contains(&0) {
        return Err(Error::Domain("orders must be at least 1".into()));
    }
    let fe0 = build_fe0(primes, n)?;
    let mut shifts: Vec<Vec<u32>> = vec![vec![]];
    for &r in orders {
        shifts = shifts
            .into_iter()
            .flat_map(|s| {
                (0..r).map(move |j| {
                    let mut s = s.clone();
                    s.push(j);
                    s
                })
            })
            .collect();
    }
    let mut images = Vec::with_capacity(shifts.len());
    for j in &shifts {
        let mut image = fe0.clone();
        for (&p, &e) in primes.iter().zip(j) {
            for _ in 0..e {
                image = image.phi_to(p, Some(n))?;
            }
        }
        images.push(image);
    }
    let columns: Vec<Monomial> = images
        .iter()
        .flat_map(|f| f.terms().map(|(m, _)| m.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let rows: Vec<Vec<BigRational>> = images
        .iter()
        .map(|f| {
            columns
                .iter()
                .map(|m| f.coeff(m).cloned().unwrap_or_else(BigRational::zero))
                .collect()
        })
        .collect();
    let rank = exact_rank(rows);
    let expected = orders.iter().map(|&r| r as usize).product();
    Ok(RankReport {
        primes: primes.to_vec(),
        orders: orders.to_vec(),
        bound: n,
        vectors: images.len(),
        rank,
        expected,
        pass: rank == expected,
    })
}
