//! Truncated polynomial/series rings in a base variable and its δ-jets.
//!
//! A ring is fixed by an ordered prime set `P = (p_1, …, p_d)`. Besides the
//! base variable `x` (written `q`, `t` or `z`) it has the jet variables
//! `x_i = δ_{p_1}^{i_1} ⋯ δ_{p_d}^{i_d} x` for nonzero multi-indices `i`,
//! and optionally one extra generator `c` of a free δ-ring of constants
//! with its own jets `c_i`.
//!
//! Truncation is by weighted degree: `wt(x) = 1`, `wt(x_i) = P^i`, and the
//! constant generator has weight 0. Every Frobenius lift `φ_k` multiplies
//! weights by `p_k`, so a bound on weights is preserved by all operations.

mod engine;
mod lemmas;
mod psi;
mod series;

pub use engine::Substitution;
pub use lemmas::{lemma_logder_check, lemma_xlaphi_check, LemmaReport, Varphi};
pub use psi::{
    fourier_to_serretate, log_one_plus_t, psi_fourier, psi_fourier_coefficient, psi_serretate,
    psi_serretate_in, weight_action,
};
pub(crate) use psi::require_large_prime;
pub use series::JetSeries;

use std::fmt;
use std::sync::Arc;

use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Maximum number of primes in a ring; each index lives in a 4-bit field.
pub const MAX_PRIMES: usize = 6;
/// Largest jet index per prime.
pub const MAX_INDEX: u32 = 15;

/// Name of the base variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseVar {
    /// Fourier side, Laurent in `q`.
    Q,
    /// Serre–Tate side, power series in `t`.
    T,
    /// Generic Laurent variable used for formal identities.
    Z,
}

impl BaseVar {
    pub fn name(self) -> &'static str {
        match self {
            BaseVar::Q => "q",
            BaseVar::T => "t",
            BaseVar::Z => "z",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "q" => Ok(BaseVar::Q),
            "t" => Ok(BaseVar::T),
            "z" => Ok(BaseVar::Z),
            _ => Err(Error::Parse(format!("unknown base variable {s:?}"))),
        }
    }

    /// Whether negative powers of the base variable are allowed.
    pub fn is_laurent(self) -> bool {
        !matches!(self, BaseVar::T)
    }
}

/// The shape of a jet ring: primes, base variable, extra constant
/// generator and the per-prime order budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetRing {
    primes: Vec<u64>,
    base: BaseVar,
    constant_generator: bool,
    budget: Vec<u32>,
}

impl JetRing {
    pub fn new(primes: &[u64], base: BaseVar) -> Result<Arc<Self>> {
        Self::build(primes, base, false, None)
    }

    /// A ring with jet indices limited to `budget` (componentwise).
    pub fn with_budget(primes: &[u64], base: BaseVar, budget: &[u32]) -> Result<Arc<Self>> {
        Self::build(primes, base, false, Some(budget))
    }

    /// A single-prime ring that also carries a free δ-constant `c`.
    pub fn with_constant(p: u64, base: BaseVar) -> Result<Arc<Self>> {
        Self::build(&[p], base, true, None)
    }

    fn build(
        primes: &[u64],
        base: BaseVar,
        constant_generator: bool,
        budget: Option<&[u32]>,
    ) -> Result<Arc<Self>> {
        if primes.is_empty() || primes.len() > MAX_PRIMES {
            return Err(Error::Domain(format!(
                "a jet ring needs between 1 and {MAX_PRIMES} primes"
            )));
        }
        for (k, &p) in primes.iter().enumerate() {
            crate::arith::require_prime(p)?;
            if primes[..k].contains(&p) {
                return Err(Error::Domain(format!("prime {p} listed twice")));
            }
        }
        let budget = match budget {
            Some(b) if b.len() != primes.len() => {
                return Err(Error::Domain("order budget length differs from prime count".into()))
            }
            Some(b) if b.iter().any(|&r| r > MAX_INDEX) => {
                return Err(Error::Domain(format!("jet orders are limited to {MAX_INDEX}")))
            }
            Some(b) => b.to_vec(),
            None => vec![MAX_INDEX; primes.len()],
        };
        Ok(Arc::new(JetRing {
            primes: primes.to_vec(),
            base,
            constant_generator,
            budget,
        }))
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn arity(&self) -> usize {
        self.primes.len()
    }

    pub fn base(&self) -> BaseVar {
        self.base
    }

    pub fn has_constant(&self) -> bool {
        self.constant_generator
    }

    pub fn budget(&self) -> &[u32] {
        &self.budget
    }

    /// Position of `p` in the prime list.
    pub fn index_of(&self, p: u64) -> Result<usize> {
        self.primes
            .iter()
            .position(|&q| q == p)
            .ok_or_else(|| Error::Domain(format!("{p} is not a prime of this ring")))
    }

    /// `P^i = Π p_k^{i_k}`.
    pub fn index_weight(&self, idx: &[u32]) -> i64 {
        idx.iter()
            .zip(&self.primes)
            .map(|(&e, &p)| (p as i64).pow(e))
            .product()
    }

    pub fn var_weight(&self, v: JetVar) -> i64 {
        if v.generator() != 0 {
            return 0;
        }
        (0..self.arity())
            .map(|k| (self.primes[k] as i64).pow(v.index(k)))
            .product()
    }

    pub fn monomial_weight(&self, m: &Monomial) -> i64 {
        m.base + m.factors.iter().map(|&(v, e)| e as i64 * self.var_weight(v)).sum::<i64>()
    }

    fn check_budget(&self, v: JetVar) -> Result<()> {
        for k in 0..self.arity() {
            if v.index(k) > self.budget[k] {
                return Err(Error::OrderBudget(format!(
                    "jet index {} at prime {} exceeds the budget {}",
                    v.index(k),
                    self.primes[k],
                    self.budget[k]
                )));
            }
        }
        Ok(())
    }

    pub fn var_name(&self, v: JetVar) -> String {
        let stem = if v.generator() == 0 { self.base.name() } else { "c" };
        let idx = v.indices(self.arity());
        if self.arity() == 1 {
            match idx[0] {
                0 => stem.to_string(),
                i @ 1..=3 => format!("{stem}{}", "'".repeat(i as usize)),
                i => format!("{stem}^({i})"),
            }
        } else {
            let mut s = String::new();
            for (k, &i) in idx.iter().enumerate() {
                match i {
                    0 => {}
                    1 => s.push_str(&format!("d{}", self.primes[k])),
                    i => s.push_str(&format!("d{}^{i}", self.primes[k])),
                }
            }
            s.push_str(stem);
            s
        }
    }

    pub fn display_monomial(&self, m: &Monomial) -> String {
        let mut parts = Vec::new();
        match m.base {
            0 => {}
            1 => parts.push(self.base.name().to_string()),
            e => parts.push(format!("{}^{e}", self.base.name())),
        }
        for &(v, e) in &m.factors {
            let name = self.var_name(v);
            if e == 1 {
                parts.push(name);
            } else if name.ends_with(')') || name.ends_with('\'') {
                parts.push(format!("({name})^{e}"));
            } else {
                parts.push(format!("{name}^{e}"));
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }
}

/// A variable of a jet ring: generator number plus a multi-index packed in
/// 4-bit fields. Generator 0 with the zero index is the base variable
/// itself, which monomials store separately.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetVar(u32);

impl JetVar {
    pub fn new(generator: u8, idx: &[u32]) -> Result<Self> {
        if idx.len() > MAX_PRIMES {
            return Err(Error::Domain("too many prime indices".into()));
        }
        let mut packed = (generator as u32) << 24;
        for (k, &i) in idx.iter().enumerate() {
            if i > MAX_INDEX {
                return Err(Error::OrderBudget(format!("jet index {i} exceeds {MAX_INDEX}")));
            }
            packed |= i << (4 * k);
        }
        Ok(JetVar(packed))
    }

    /// The jet `x_i` of the base variable.
    pub fn jet(idx: &[u32]) -> Result<Self> {
        Self::new(0, idx)
    }

    pub fn generator(self) -> u8 {
        (self.0 >> 24) as u8
    }

    pub fn index(self, k: usize) -> u32 {
        (self.0 >> (4 * k)) & 0xf
    }

    pub fn indices(self, arity: usize) -> Vec<u32> {
        (0..arity).map(|k| self.index(k)).collect()
    }

    pub fn is_base(self) -> bool {
        self.0 == 0
    }

    pub fn total_order(self) -> u32 {
        (0..MAX_PRIMES).map(|k| self.index(k)).sum()
    }

    /// The same generator with index `i + e_k`.
    pub(crate) fn shifted(self, k: usize) -> Result<Self> {
        if self.index(k) == MAX_INDEX {
            return Err(Error::OrderBudget(format!("jet index exceeds {MAX_INDEX}")));
        }
        Ok(JetVar(self.0 + (1 << (4 * k))))
    }

    /// The same generator with index `i - e_k`; `i_k` must be positive.
    pub(crate) fn lowered(self, k: usize) -> JetVar {
        debug_assert!(self.index(k) > 0);
        JetVar(self.0 - (1 << (4 * k)))
    }

    /// Smallest prime position with a nonzero index.
    pub(crate) fn first_index(self) -> Option<usize> {
        (0..MAX_PRIMES).find(|&k| self.index(k) > 0)
    }
}

impl fmt::Debug for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}{:?}", self.generator(), self.indices(MAX_PRIMES))
    }
}

/// `x^base · Π v^e` with factors sorted by variable and positive exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Monomial {
    pub(crate) base: i64,
    pub(crate) factors: SmallVec<[(JetVar, u32); 4]>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn base_power(e: i64) -> Self {
        Monomial {
            base: e,
            factors: SmallVec::new(),
        }
    }

    pub fn var(v: JetVar) -> Self {
        Self::from_parts(0, [(v, 1)])
    }

    /// Builds a monomial, merging repeated variables and absorbing the
    /// base variable into the base exponent.
    pub fn from_parts<I: IntoIterator<Item = (JetVar, u32)>>(base: i64, parts: I) -> Self {
        let mut m = Monomial::base_power(base);
        for (v, e) in parts {
            if e == 0 {
                continue;
            }
            if v.is_base() {
                m.base += e as i64;
                continue;
            }
            match m.factors.binary_search_by(|(w, _)| w.cmp(&v)) {
                Ok(pos) => m.factors[pos].1 += e,
                Err(pos) => m.factors.insert(pos, (v, e)),
            }
        }
        m
    }

    pub fn base_exponent(&self) -> i64 {
        self.base
    }

    pub fn factors(&self) -> &[(JetVar, u32)] {
        &self.factors
    }

    pub fn is_pure_base(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn exponent_of(&self, v: JetVar) -> u32 {
        if v.is_base() {
            return self.base.max(0) as u32;
        }
        self.factors
            .iter()
            .find(|(w, _)| *w == v)
            .map_or(0, |&(_, e)| e)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = SmallVec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.factors, &other.factors);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    factors.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    factors.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    factors.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        factors.extend_from_slice(&a[i..]);
        factors.extend_from_slice(&b[j..]);
        Monomial {
            base: self.base + other.base,
            factors,
        }
    }

    /// Highest jet index (total order) of the base generator's jets.
    pub fn max_jet_order(&self) -> u32 {
        self.factors
            .iter()
            .filter(|(v, _)| v.generator() == 0)
            .map(|(v, _)| v.total_order())
            .max()
            .unwrap_or(0)
    }
}

pub(crate) fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

pub(crate) fn min_opt_u32(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_variables() {
        let v = JetVar::jet(&[2, 1]).unwrap();
        assert_eq!(v.indices(2), vec![2, 1]);
        assert_eq!(v.first_index(), Some(0));
        assert_eq!(v.lowered(0).indices(2), vec![1, 1]);
        assert_eq!(v.shifted(1).unwrap().indices(2), vec![2, 2]);
        assert!(JetVar::jet(&[16]).is_err());
        let ring = JetRing::new(&[5, 7], BaseVar::T).unwrap();
        assert_eq!(ring.var_weight(v), 25 * 7);
        assert_eq!(ring.var_name(v), "d5^2d7t");
    }

    #[test]
    fn monomial_products_merge() {
        let a = JetVar::jet(&[1]).unwrap();
        let b = JetVar::jet(&[2]).unwrap();
        let m = Monomial::from_parts(-3, [(b, 1), (a, 2), (JetVar::jet(&[0]).unwrap(), 1)]);
        assert_eq!(m.base_exponent(), -2);
        assert_eq!(m.factors(), &[(a, 2), (b, 1)]);
        let n = m.mul(&Monomial::from_parts(5, [(a, 1)]));
        assert_eq!(n.base_exponent(), 3);
        assert_eq!(n.exponent_of(a), 3);
        let ring = JetRing::new(&[5], BaseVar::Q).unwrap();
        assert_eq!(ring.monomial_weight(&n), 3 + 3 * 5 + 25);
        assert_eq!(ring.display_monomial(&n), "q^3*(q')^3*q''");
    }
}
