use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;

use super::{min_opt, min_opt_u32, JetRing, JetVar, Monomial};
use crate::arith::{rational_valuation, Coefficient};
use crate::error::{Error, Result};

/// A truncated element of a jet ring.
///
/// `bound` is the exclusive weighted-degree bound: every monomial of weight
/// below it is exact, nothing is known at or above it. `None` means the
/// value is an exact polynomial. For p-adic coefficients `precision` is the
/// number of digits guaranteed for every coefficient, absent terms included.
#[derive(Clone)]
pub struct JetSeries<C: Coefficient> {
    ring: Arc<JetRing>,
    ctx: C::Ctx,
    terms: BTreeMap<Monomial, C>,
    bound: Option<i64>,
    precision: Option<u32>,
}

impl<C: Coefficient> JetSeries<C> {
    pub fn zero(ring: &Arc<JetRing>, ctx: &C::Ctx, bound: Option<i64>) -> Self {
        let precision = C::one_in(ctx).digits();
        JetSeries {
            ring: ring.clone(),
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
            bound,
            precision,
        }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, C)>>(
        ring: &Arc<JetRing>,
        ctx: &C::Ctx,
        terms: I,
        bound: Option<i64>,
    ) -> Result<Self> {
        let mut s = Self::zero(ring, ctx, bound);
        for (m, c) in terms {
            s.check_monomial(&m)?;
            s.accumulate(m, c);
        }
        s.normalize();
        Ok(s)
    }

    pub fn constant(ring: &Arc<JetRing>, ctx: &C::Ctx, c: C, bound: Option<i64>) -> Self {
        let mut s = Self::zero(ring, ctx, bound);
        s.terms.insert(Monomial::one(), c);
        s.normalize();
        s
    }

    pub fn one(ring: &Arc<JetRing>, ctx: &C::Ctx) -> Self {
        Self::constant(ring, ctx, C::one_in(ctx), None)
    }

    /// `c · m` as an exact series.
    pub fn monomial(ring: &Arc<JetRing>, ctx: &C::Ctx, m: Monomial, c: C) -> Result<Self> {
        Self::from_terms(ring, ctx, [(m, c)], None)
    }

    /// The base variable `x`.
    pub fn base_var(ring: &Arc<JetRing>, ctx: &C::Ctx) -> Self {
        Self::monomial(ring, ctx, Monomial::base_power(1), C::one_in(ctx))
            .expect("the base variable is always valid")
    }

    /// The jet variable `x_i`.
    pub fn jet_var(ring: &Arc<JetRing>, ctx: &C::Ctx, idx: &[u32]) -> Result<Self> {
        let v = JetVar::jet(idx)?;
        Self::monomial(ring, ctx, Monomial::var(v), C::one_in(ctx))
    }

    /// The `i`-th jet of the constant generator.
    pub fn constant_var(ring: &Arc<JetRing>, ctx: &C::Ctx, idx: &[u32]) -> Result<Self> {
        if !ring.has_constant() {
            return Err(Error::Domain("this ring has no constant generator".into()));
        }
        let v = JetVar::new(1, idx)?;
        Self::monomial(ring, ctx, Monomial::var(v), C::one_in(ctx))
    }

    fn check_monomial(&self, m: &Monomial) -> Result<()> {
        if m.base < 0 && !self.ring.base().is_laurent() {
            return Err(Error::Domain(format!(
                "negative power of {} in a power-series ring",
                self.ring.base().name()
            )));
        }
        for &(v, _) in &m.factors {
            if v.generator() > 1 || (v.generator() == 1 && !self.ring.has_constant()) {
                return Err(Error::Domain(format!("unknown generator in {v:?}")));
            }
            if (self.ring.arity()..super::MAX_PRIMES).any(|k| v.index(k) != 0) {
                return Err(Error::Domain(format!("{v:?} uses more primes than the ring")));
            }
            self.ring.check_budget(v)?;
        }
        Ok(())
    }

    fn accumulate(&mut self, m: Monomial, c: C) {
        match self.terms.get_mut(&m) {
            Some(x) => *x = x.plus(&c),
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    /// Enforces the truncation contract: drops terms at or above the bound,
    /// lowers the precision floor to the weakest coefficient and drops
    /// coefficients that vanish at that precision.
    fn normalize(&mut self) {
        if let Some(b) = self.bound {
            let ring = &self.ring;
            self.terms.retain(|m, _| ring.monomial_weight(m) < b);
        }
        let floor = self
            .terms
            .values()
            .fold(self.precision, |acc, c| min_opt_u32(acc, c.digits()));
        self.precision = floor;
        match floor {
            Some(g) => {
                let terms = std::mem::take(&mut self.terms);
                self.terms = terms
                    .into_iter()
                    .map(|(m, c)| (m, c.with_digits(g)))
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
            }
            None => self.terms.retain(|_, c| !c.is_zero()),
        }
    }

    pub fn ring(&self) -> &Arc<JetRing> {
        &self.ring
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    pub fn bound(&self) -> Option<i64> {
        self.bound
    }

    pub fn precision(&self) -> Option<u32> {
        self.precision
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&C> {
        self.terms.get(m)
    }

    pub fn weight(&self, m: &Monomial) -> i64 {
        self.ring.monomial_weight(m)
    }

    /// Smallest weight of a stored term.
    pub fn valuation(&self) -> Option<i64> {
        self.terms.keys().map(|m| self.weight(m)).min()
    }

    /// Valuation, or the bound for a truncated zero; `None` stands for +∞.
    fn effective_valuation(&self) -> Option<i64> {
        self.valuation().or(self.bound)
    }

    /// Smallest p-adic valuation of a coefficient; the precision for zero.
    fn coefficient_valuation(&self) -> Option<u32> {
        self.terms
            .values()
            .filter_map(|c| c.padic_valuation())
            .min()
            .or(self.precision)
    }

    /// Largest jet index per prime among the base generator's jets.
    pub fn order(&self) -> Vec<u32> {
        let d = self.ring.arity();
        let mut r = vec![0; d];
        for m in self.terms.keys() {
            for &(v, _) in &m.factors {
                if v.generator() == 0 {
                    for (k, rk) in r.iter_mut().enumerate() {
                        *rk = (*rk).max(v.index(k));
                    }
                }
            }
        }
        r
    }

    fn same_shape(&self, other: &Self) {
        assert!(
            self.ring == other.ring && self.ctx == other.ctx,
            "series from different rings"
        );
    }

    fn with_terms(&self, terms: BTreeMap<Monomial, C>, bound: Option<i64>, precision: Option<u32>) -> Self {
        let mut s = JetSeries {
            ring: self.ring.clone(),
            ctx: self.ctx.clone(),
            terms,
            bound,
            precision,
        };
        s.normalize();
        s
    }

    /// Lowers the bound; never raises it.
    pub fn truncate(&self, bound: Option<i64>) -> Self {
        self.with_terms(self.terms.clone(), min_opt(self.bound, bound), self.precision)
    }

    /// Lowers the precision floor to `g` digits.
    pub fn reduce_precision(&self, g: u32) -> Self {
        self.with_terms(
            self.terms.clone(),
            self.bound,
            min_opt_u32(self.precision, Some(g)),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_shape(other);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            match terms.get_mut(m) {
                Some(x) => *x = x.plus(c),
                None => {
                    terms.insert(m.clone(), c.clone());
                }
            }
        }
        self.with_terms(
            terms,
            min_opt(self.bound, other.bound),
            min_opt_u32(self.precision, other.precision),
        )
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.negated())).collect();
        self.with_terms(terms, self.bound, self.precision)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        let s = JetSeries::constant(&self.ring, &self.ctx, c.clone(), None);
        self.mul(&s)
    }

    pub fn scale_int(&self, n: i64) -> Self {
        self.scale(&C::from_i64(n, &self.ctx))
    }

    /// Multiplies by an exact monomial; the bound shifts by its weight.
    pub fn mul_monomial(&self, m: &Monomial, c: &C) -> Self {
        let w = self.weight(m);
        let terms = self
            .terms
            .iter()
            .map(|(n, d)| (n.mul(m), d.times(c)))
            .collect();
        let g = c.padic_valuation();
        let precision = match (self.precision, g) {
            (Some(p), Some(v)) => Some(p + v),
            (p, _) => p,
        };
        self.with_terms(terms, self.bound.map(|b| b + w), precision)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_shape(other);
        let (va, vb) = (self.effective_valuation(), other.effective_valuation());
        let bound = min_opt(
            self.bound.and_then(|b| vb.map(|v| b + v)),
            other.bound.and_then(|b| va.map(|v| b + v)),
        );
        let (ca, cb) = (self.coefficient_valuation(), other.coefficient_valuation());
        let precision = min_opt_u32(
            self.precision.and_then(|g| cb.map(|v| g + v)),
            other.precision.and_then(|g| ca.map(|v| g + v)),
        );
        let mut bs: Vec<(i64, &Monomial, &C)> = other
            .terms
            .iter()
            .map(|(m, c)| (other.weight(m), m, c))
            .collect();
        bs.sort_by_key(|&(w, _, _)| w);
        let mut acc: HashMap<Monomial, C> = HashMap::new();
        for (ma, ca) in &self.terms {
            let wa = self.weight(ma);
            for &(wb, mb, cb) in &bs {
                if bound.is_some_and(|b| wa + wb >= b) {
                    break;
                }
                let m = ma.mul(mb);
                let c = ca.times(cb);
                match acc.get_mut(&m) {
                    Some(x) => *x = x.plus(&c),
                    None => {
                        acc.insert(m, c);
                    }
                }
            }
        }
        self.with_terms(acc.into_iter().collect(), bound, precision)
    }

    pub fn square(&self) -> Self {
        self.mul(self)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = JetSeries::one(&self.ring, &self.ctx);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Exact division by a prime; p-adic coefficients lose a digit when it
    /// is their own prime.
    pub fn div_prime(&self, p: u64) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let q = c.div_prime(p).map_err(|e| match e {
                Error::Integrality(msg) => Error::Integrality(format!(
                    "coefficient of {}: {msg}",
                    self.ring.display_monomial(m)
                )),
                other => other,
            })?;
            terms.insert(m.clone(), q);
        }
        let loses_digit = C::one_in(&self.ctx)
            .div_prime(p)
            .map(|u| u.digits() != C::one_in(&self.ctx).digits())
            .unwrap_or(true);
        let precision = match self.precision {
            Some(0) if loses_digit => {
                return Err(Error::PrecisionExhausted(format!("no digits left to divide by {p}")))
            }
            Some(g) if loses_digit => Some(g - 1),
            g => g,
        };
        Ok(self.with_terms(terms, self.bound, precision))
    }

    /// Inverse of a unit series, truncated at `cap` when the exact inverse
    /// is infinite.
    ///
    /// The leading part must be `c · x^e` with `c` a unit; the remaining
    /// terms relative to it must have positive weight or p-adically small
    /// coefficients so the geometric series converges.
    pub fn inverse(&self, cap: Option<i64>) -> Result<Self> {
        let lead = self
            .terms
            .iter()
            .filter(|(m, c)| m.is_pure_base() && c.is_unit())
            .min_by_key(|(m, _)| self.weight(m))
            .ok_or_else(|| Error::NotInvertible("no unit monomial in the base variable".into()))?;
        let (m, c) = (lead.0.clone(), lead.1.clone());
        if m.base > 0 && !self.ring.base().is_laurent() {
            return Err(Error::NotInvertible(format!(
                "leading term {} is not a unit of the power-series ring",
                self.ring.display_monomial(&m)
            )));
        }
        let w = self.weight(&m);
        let c_inv = c.inverse()?;
        let m_inv = Monomial::base_power(-m.base);
        // h = u/(c m) - 1
        let mut h = self.mul_monomial(&m_inv, &c_inv);
        h.terms.remove(&Monomial::one());
        for (n, d) in &h.terms {
            let wn = h.weight(n);
            if wn < 0 || (wn == 0 && !d.is_nilpotent()) {
                return Err(Error::NotInvertible(format!(
                    "term {} does not shrink under powers",
                    self.ring.display_monomial(n)
                )));
            }
        }
        let bound = min_opt(self.bound.map(|b| b - 2 * w), cap);
        let inner_bound = bound.map(|b| b + w);
        let unbounded = h
            .terms
            .iter()
            .any(|(n, d)| h.weight(n) > 0 && !d.is_nilpotent());
        if inner_bound.is_none() && unbounded {
            return Err(Error::Domain("inverse is infinite; a truncation bound is required".into()));
        }
        let minus_h = h.neg().truncate(inner_bound);
        let mut acc = JetSeries::one(&self.ring, &self.ctx).truncate(inner_bound);
        let mut term = acc.clone();
        // Each power either gains weight or a factor of p, so this stops.
        loop {
            term = term.mul(&minus_h).truncate(inner_bound);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term);
        }
        let mut inv = acc.mul_monomial(&m_inv, &c_inv);
        inv.bound = bound;
        inv.precision = min_opt_u32(inv.precision, self.precision);
        inv.normalize();
        Ok(inv)
    }

    /// `u^e` for a signed exponent.
    pub fn pow_signed(&self, e: i64, cap: Option<i64>) -> Result<Self> {
        if e >= 0 {
            Ok(self.pow(e as u32))
        } else {
            Ok(self.inverse(cap)?.pow((-e) as u32))
        }
    }

    /// Sets every jet variable (and constant generator) to zero.
    pub fn base_part(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| m.is_pure_base())
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        self.with_terms(terms, self.bound, self.precision)
    }

    /// Keeps only the terms selected by `keep`.
    pub fn filter<F: Fn(&Monomial) -> bool>(&self, keep: F) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| keep(m))
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        self.with_terms(terms, self.bound, self.precision)
    }

    /// Coefficientwise change of domain, e.g. rationals to p-adics.
    pub fn map_coefficients<D: Coefficient, F: Fn(&C) -> Result<D>>(
        &self,
        ctx: &D::Ctx,
        f: F,
    ) -> Result<JetSeries<D>> {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            terms.insert(m.clone(), f(c)?);
        }
        let mut s = JetSeries {
            ring: self.ring.clone(),
            ctx: ctx.clone(),
            terms,
            bound: self.bound,
            precision: min_opt_u32(self.precision, D::one_in(ctx).digits()),
        };
        s.normalize();
        Ok(s)
    }

    /// Moves the series into another ring with the same variables (for
    /// example one with a larger order budget).
    pub fn in_ring(&self, ring: &Arc<JetRing>) -> Result<Self> {
        if ring.primes() != self.ring.primes() || ring.base() != self.ring.base() {
            return Err(Error::Domain("rings have different variables".into()));
        }
        JetSeries::from_terms(ring, &self.ctx, self.terms.clone(), self.bound).map(|mut s| {
            s.precision = self.precision;
            s.normalize();
            s
        })
    }

    /// Compares two series below their common bound and precision. Returns
    /// the smallest-weight monomial where they differ, if any.
    pub fn first_difference(&self, other: &Self) -> Option<Monomial> {
        let diff = self.sub(other);
        diff.terms
            .keys()
            .min_by_key(|m| (diff.weight(m), (*m).clone()))
            .cloned()
    }

    pub fn display_monomial(&self, m: &Monomial) -> String {
        self.ring.display_monomial(m)
    }
}

impl JetSeries<BigRational> {
    /// The first monomial whose coefficient has a denominator divisible by
    /// one of `primes`.
    pub fn non_integral_at(&self, primes: &[u64]) -> Option<(Monomial, u64)> {
        for (m, c) in &self.terms {
            for &p in primes {
                if rational_valuation(c, p).is_some_and(|v| v < 0) {
                    return Some((m.clone(), p));
                }
            }
        }
        None
    }

    /// Fails with an integrality error naming the offending monomial.
    pub fn require_integral(&self, primes: &[u64]) -> Result<()> {
        match self.non_integral_at(primes) {
            None => Ok(()),
            Some((m, p)) => Err(Error::Integrality(format!(
                "coefficient of {} is {} and not {p}-integral",
                self.display_monomial(&m),
                crate::arith::format_rational(&self.terms[&m])
            ))),
        }
    }
}

impl<C: Coefficient> PartialEq for JetSeries<C> {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.ctx == other.ctx
            && self.bound == other.bound
            && self.precision == other.precision
            && self.terms == other.terms
    }
}

impl<C: Coefficient> fmt::Debug for JetSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl<C: Coefficient> fmt::Display for JetSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(m, _)| (self.weight(m), (*m).clone()));
        let mut first = true;
        for (m, c) in ordered {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let cs = match c.to_rational() {
                Some(q) => q.to_string(),
                None => format!("({c:?})"),
            };
            write!(f, "{cs}*{}", self.ring.display_monomial(m))?;
        }
        if first {
            f.write_str("0")?;
        }
        if let Some(b) = self.bound {
            write!(f, " + O(wt {b})")?;
        }
        if let Some(g) = self.precision {
            write!(f, " [{g} digits]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{PadicCtx, PadicTrunc};
    use crate::deltajet::BaseVar;
    use num_bigint::BigInt;

    fn q(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn truncated_products() {
        let ring = JetRing::new(&[5], BaseVar::T).unwrap();
        let t = JetSeries::<BigRational>::base_var(&ring, &());
        let one = JetSeries::one(&ring, &());
        let a = one.add(&t).truncate(Some(6));
        let b = one.sub(&t);
        let p = a.mul(&b);
        assert_eq!(p.bound(), Some(6));
        assert_eq!(p.coeff(&Monomial::base_power(2)), Some(&q(-1)));
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn geometric_inverse() {
        let ring = JetRing::new(&[5], BaseVar::T).unwrap();
        let t = JetSeries::<BigRational>::base_var(&ring, &());
        let u = JetSeries::one(&ring, &()).sub(&t);
        let inv = u.inverse(Some(8)).unwrap();
        assert_eq!(inv.len(), 8);
        assert_eq!(inv.bound(), Some(8));
        assert!(u.mul(&inv).sub(&JetSeries::one(&ring, &())).is_zero());
        assert!(t.inverse(Some(8)).is_err());
    }

    #[test]
    fn laurent_inverse_shifts_valuation() {
        let ring = JetRing::new(&[5], BaseVar::Q).unwrap();
        let x = JetSeries::<BigRational>::base_var(&ring, &());
        let u = x.mul(&JetSeries::one(&ring, &()).add(&x)).truncate(Some(10));
        let inv = u.inverse(None).unwrap();
        assert_eq!(inv.valuation(), Some(-1));
        assert_eq!(inv.bound(), Some(8));
        let prod = u.mul(&inv);
        assert_eq!(prod.bound(), Some(9));
        assert!(prod.sub(&JetSeries::one(&ring, &())).is_zero());
    }

    #[test]
    fn padic_inverse_of_frobenius_image() {
        // (q^5 + 5 q')^{-1} = q^{-5} (1 - 5 q'/q^5 + 25 q'^2/q^10) + O(5^3)
        let ctx = PadicCtx::new(5, 3).unwrap();
        let ring = JetRing::new(&[5], BaseVar::Q).unwrap();
        let x = JetSeries::<PadicTrunc>::base_var(&ring, &ctx);
        let x1 = JetSeries::jet_var(&ring, &ctx, &[1]).unwrap();
        let u = x.pow(5).add(&x1.scale_int(5));
        let inv = u.inverse(None).unwrap();
        assert_eq!(inv.len(), 3);
        assert_eq!(inv.bound(), None);
        assert_eq!(inv.precision(), Some(3));
        let v = JetVar::jet(&[1]).unwrap();
        let c = inv.coeff(&Monomial::from_parts(-15, [(v, 2)])).unwrap();
        assert_eq!(c.symmetric(), BigInt::from(25));
        let one = JetSeries::one(&ring, &ctx);
        assert!(u.mul(&inv).sub(&one).is_zero());
    }

    #[test]
    fn exact_rational_inverse_needs_shrinking_terms() {
        let ring = JetRing::new(&[5], BaseVar::Q).unwrap();
        let x = JetSeries::<BigRational>::base_var(&ring, &());
        let x1 = JetSeries::jet_var(&ring, &(), &[1]).unwrap();
        let u = x.pow(5).add(&x1.scale_int(5));
        assert!(matches!(u.inverse(Some(20)), Err(Error::NotInvertible(_))));
    }

    #[test]
    fn padic_precision_tracks_division() {
        let ctx = PadicCtx::new(5, 2).unwrap();
        let ring = JetRing::new(&[5], BaseVar::T).unwrap();
        let t = JetSeries::<PadicTrunc>::base_var(&ring, &ctx).scale_int(25);
        let once = t.div_prime(5).unwrap();
        assert_eq!(once.precision(), Some(1));
        let twice = once.div_prime(5).unwrap();
        assert_eq!(twice.precision(), Some(0));
        assert!(twice.is_zero());
        assert!(matches!(twice.div_prime(5), Err(Error::PrecisionExhausted(_))));
    }
}
