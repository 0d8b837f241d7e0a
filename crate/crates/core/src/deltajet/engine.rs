use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use super::{min_opt, min_opt_u32, JetRing, JetSeries, JetVar, Monomial};
use crate::arith::Coefficient;
use crate::error::{Error, Result};

/// A ring homomorphism out of a jet ring, given by the images of the base
/// variable and of each jet variable. Coefficients are fixed.
///
/// `scale` records that a monomial of weight `w` maps to something of
/// weight at least `scale * w`; monomials whose images cannot reach below
/// the cap are skipped. `scale = 0` disables the pruning.
pub struct Substitution<C: Coefficient> {
    target: Arc<JetRing>,
    ctx: C::Ctx,
    base_image: JetSeries<C>,
    base_inverse: Option<JetSeries<C>>,
    images: HashMap<JetVar, JetSeries<C>>,
    scale: i64,
    cap: Option<i64>,
}

impl<C: Coefficient> Substitution<C> {
    pub fn new(base_image: JetSeries<C>, cap: Option<i64>) -> Self {
        Substitution {
            target: base_image.ring().clone(),
            ctx: base_image.ctx().clone(),
            base_image,
            base_inverse: None,
            images: HashMap::new(),
            scale: 0,
            cap,
        }
    }

    pub fn with_base_inverse(mut self, inv: JetSeries<C>) -> Self {
        self.base_inverse = Some(inv);
        self
    }

    pub fn with_scale(mut self, scale: i64) -> Self {
        self.scale = scale;
        self
    }

    pub fn set_image(&mut self, v: JetVar, image: JetSeries<C>) {
        self.images.insert(v, image);
    }

    fn skipped(&self, w: i64) -> bool {
        self.scale > 0 && self.cap.is_some_and(|c| self.scale * w >= c)
    }

    /// Variables of `f` whose images are needed.
    pub fn needed_vars(&self, f: &JetSeries<C>) -> Vec<JetVar> {
        let mut vars: Vec<JetVar> = f
            .terms()
            .filter(|(m, _)| !self.skipped(f.weight(m)))
            .flat_map(|(m, _)| m.factors().iter().map(|&(v, _)| v))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    pub fn needs_base_inverse(&self, f: &JetSeries<C>) -> bool {
        f.terms()
            .any(|(m, _)| m.base_exponent() < 0 && !self.skipped(f.weight(m)))
    }

    /// Applies the homomorphism. `tail_bound` is the weight below which the
    /// images of the unknown tail of `f` are known to vanish; the caller
    /// derives it from `f`'s bound and the map.
    pub fn apply(&self, f: &JetSeries<C>, tail_bound: Option<i64>) -> Result<JetSeries<C>> {
        let mut base_pows: HashMap<i64, JetSeries<C>> = HashMap::new();
        let mut var_pows: HashMap<(JetVar, u32), JetSeries<C>> = HashMap::new();
        let mut acc: BTreeMap<Monomial, C> = BTreeMap::new();
        let mut bound = min_opt(self.cap, tail_bound);
        let mut precision = f.precision();
        for (m, c) in f.terms() {
            if self.skipped(f.weight(m)) {
                continue;
            }
            let mut img = self.base_power(m.base_exponent(), &mut base_pows)?;
            for &(v, e) in m.factors() {
                let p = self.var_power(v, e, &mut var_pows)?;
                img = img.mul(&p).truncate(self.cap);
            }
            bound = min_opt(bound, img.bound());
            let cv = c.padic_valuation();
            precision = min_opt_u32(
                precision,
                match (img.precision(), cv) {
                    (Some(g), Some(v)) => Some(g + v),
                    (g, _) => g,
                },
            );
            for (n, d) in img.terms() {
                let t = c.times(d);
                match acc.get_mut(n) {
                    Some(x) => *x = x.plus(&t),
                    None => {
                        acc.insert(n.clone(), t);
                    }
                }
            }
        }
        let out = JetSeries::from_terms(&self.target, &self.ctx, acc, bound)?;
        Ok(match precision {
            Some(g) => out.reduce_precision(g),
            None => out,
        })
    }

    fn base_power(&self, e: i64, cache: &mut HashMap<i64, JetSeries<C>>) -> Result<JetSeries<C>> {
        if let Some(s) = cache.get(&e) {
            return Ok(s.clone());
        }
        let s = match e {
            0 => JetSeries::one(&self.target, &self.ctx),
            e if e > 0 => self
                .base_power(e - 1, cache)?
                .mul(&self.base_image)
                .truncate(self.cap),
            e => {
                let inv = self.base_inverse.as_ref().ok_or_else(|| {
                    Error::Domain("substitution has no image for negative base powers".into())
                })?;
                self.base_power(e + 1, cache)?.mul(inv).truncate(self.cap)
            }
        };
        cache.insert(e, s.clone());
        Ok(s)
    }

    fn var_power(
        &self,
        v: JetVar,
        e: u32,
        cache: &mut HashMap<(JetVar, u32), JetSeries<C>>,
    ) -> Result<JetSeries<C>> {
        if let Some(s) = cache.get(&(v, e)) {
            return Ok(s.clone());
        }
        let img = self
            .images
            .get(&v)
            .ok_or_else(|| Error::Missing(format!("no image for variable {v:?}")))?;
        let s = if e == 1 {
            img.truncate(self.cap)
        } else {
            self.var_power(v, e - 1, cache)?.mul(img).truncate(self.cap)
        };
        cache.insert((v, e), s.clone());
        Ok(s)
    }
}

/// Frobenius lifts and p-derivations of a jet ring, computed to a fixed
/// weight cap. Images of generators are memoized for the lifetime of the
/// value, which is one top-level call.
pub(crate) struct Frobenius<C: Coefficient> {
    ring: Arc<JetRing>,
    ctx: C::Ctx,
    cap: Option<i64>,
    images: HashMap<(usize, JetVar), JetSeries<C>>,
    base_inverses: HashMap<usize, JetSeries<C>>,
}

impl<C: Coefficient> Frobenius<C> {
    pub(crate) fn new(ring: &Arc<JetRing>, ctx: &C::Ctx, cap: Option<i64>) -> Self {
        Frobenius {
            ring: ring.clone(),
            ctx: ctx.clone(),
            cap,
            images: HashMap::new(),
            base_inverses: HashMap::new(),
        }
    }

    fn prime(&self, k: usize) -> u64 {
        self.ring.primes()[k]
    }

    /// `φ_k(x) = x^{p_k} + p_k x_{e_k}`.
    fn base_image(&self, k: usize) -> Result<JetSeries<C>> {
        let p = self.prime(k);
        let x = JetSeries::base_var(&self.ring, &self.ctx);
        let mut idx = vec![0; self.ring.arity()];
        idx[k] = 1;
        let jet = JetVar::jet(&idx)?;
        let mut out = x.pow(p as u32);
        if !self.cap.is_some_and(|c| self.ring.var_weight(jet) >= c) {
            self.ring.check_budget(jet)?;
            out = out.add(&JetSeries::monomial(
                &self.ring,
                &self.ctx,
                Monomial::var(jet),
                C::from_i64(p as i64, &self.ctx),
            )?);
        }
        Ok(out.truncate(self.cap))
    }

    fn base_inverse(&mut self, k: usize) -> Result<JetSeries<C>> {
        if let Some(s) = self.base_inverses.get(&k) {
            return Ok(s.clone());
        }
        let inv = self.base_image(k)?.inverse(self.cap)?;
        self.base_inverses.insert(k, inv.clone());
        Ok(inv)
    }

    /// `φ_k` of a jet variable of either generator.
    ///
    /// When every index before `k` vanishes, `φ_k(v) = v^{p_k} + p_k δ_k v`
    /// with `δ_k v` the next canonical variable. Otherwise `v = δ_l w` for
    /// the first `l` with a nonzero index, and `φ_k(v) = δ_l(φ_k(w))`
    /// since the lifts commute with the other primes' derivations.
    fn var_image(&mut self, k: usize, v: JetVar) -> Result<JetSeries<C>> {
        if let Some(s) = self.images.get(&(k, v)) {
            return Ok(s.clone());
        }
        let img = match v.first_index().filter(|&l| l < k) {
            None => {
                let p = self.prime(k);
                let vs = JetSeries::monomial(&self.ring, &self.ctx, Monomial::var(v), C::one_in(&self.ctx))?;
                let mut out = vs.pow(p as u32);
                let next = v.shifted(k)?;
                if !self.cap.is_some_and(|c| self.ring.var_weight(next) >= c) {
                    self.ring.check_budget(next)?;
                    out = out.add(&JetSeries::monomial(
                        &self.ring,
                        &self.ctx,
                        Monomial::var(next),
                        C::from_i64(p as i64, &self.ctx),
                    )?);
                }
                out.truncate(self.cap)
            }
            Some(l) => {
                let inner = self.var_image(k, v.lowered(l))?;
                self.delta(l, &inner)?
            }
        };
        self.images.insert((k, v), img.clone());
        Ok(img)
    }

    /// `φ_k(f)`, known below `min(p_k · bound(f), cap)`.
    pub(crate) fn phi(&mut self, k: usize, f: &JetSeries<C>) -> Result<JetSeries<C>> {
        let p = self.prime(k) as i64;
        let mut sub = Substitution::new(self.base_image(k)?, self.cap).with_scale(p);
        if sub.needs_base_inverse(f) {
            let inv = self.base_inverse(k)?;
            sub = sub.with_base_inverse(inv);
        }
        for v in sub.needed_vars(f) {
            let img = self.var_image(k, v)?;
            sub.set_image(v, img);
        }
        sub.apply(f, f.bound().map(|b| p * b))
    }

    /// `δ_k(f) = (φ_k(f) - f^{p_k}) / p_k`.
    pub(crate) fn delta(&mut self, k: usize, f: &JetSeries<C>) -> Result<JetSeries<C>> {
        let p = self.prime(k);
        let lifted = self.phi(k, f)?;
        let power = f.pow(p as u32).truncate(self.cap);
        lifted.sub(&power).div_prime(p)
    }
}

impl<C: Coefficient> JetSeries<C> {
    fn frobenius_cap(&self, p: u64) -> Option<i64> {
        self.bound().map(|b| b.max(p as i64 * b))
    }

    /// The Frobenius lift attached to the prime `p` of the ring.
    pub fn phi(&self, p: u64) -> Result<Self> {
        let k = self.ring().index_of(p)?;
        let cap = self.frobenius_cap(p);
        Frobenius::new(self.ring(), self.ctx(), cap).phi(k, self)
    }

    /// `φ_p` truncated at `cap` (which may be below the natural bound).
    pub fn phi_to(&self, p: u64, cap: Option<i64>) -> Result<Self> {
        let k = self.ring().index_of(p)?;
        let cap = min_opt(self.frobenius_cap(p), cap);
        Frobenius::new(self.ring(), self.ctx(), cap).phi(k, self)
    }

    /// The p-derivation `(φ_p(f) - f^p)/p`.
    pub fn delta(&self, p: u64) -> Result<Self> {
        self.delta_to(p, None)
    }

    /// `δ_p` with an extra truncation cap.
    pub fn delta_to(&self, p: u64, cap: Option<i64>) -> Result<Self> {
        let k = self.ring().index_of(p)?;
        let cap = min_opt(self.frobenius_cap(p), cap);
        Frobenius::new(self.ring(), self.ctx(), cap).delta(k, self)
    }

    /// `δ_p^n f`.
    pub fn delta_n(&self, p: u64, n: u32) -> Result<Self> {
        let mut f = self.clone();
        for _ in 0..n {
            f = f.delta(p)?;
        }
        Ok(f)
    }

    /// Applies `φ_P^i = Π_k φ_{p_k}^{i_k}`.
    pub fn phi_multi(&self, idx: &[u32]) -> Result<Self> {
        if idx.len() != self.ring().arity() {
            return Err(Error::Domain("multi-index length differs from prime count".into()));
        }
        let mut f = self.clone();
        let primes = self.ring().primes().to_vec();
        for (k, &n) in idx.iter().enumerate() {
            for _ in 0..n {
                f = f.phi(primes[k])?;
            }
        }
        Ok(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{fermat_quotient, PadicCtx, PadicTrunc};
    use crate::deltajet::BaseVar;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn r(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    #[test]
    fn generators() {
        let ring = JetRing::new(&[5], BaseVar::Q).unwrap();
        let q = JetSeries::<BigRational>::base_var(&ring, &());
        let q1 = JetSeries::jet_var(&ring, &(), &[1]).unwrap();
        let q2 = JetSeries::jet_var(&ring, &(), &[2]).unwrap();
        assert_eq!(q.phi(5).unwrap(), q.pow(5).add(&q1.scale_int(5)));
        assert_eq!(q.delta(5).unwrap(), q1);
        assert_eq!(q.delta_n(5, 2).unwrap(), q2);
        let c = JetSeries::constant(&ring, &(), r(7), None);
        assert_eq!(c.phi(5).unwrap(), c);
    }

    #[test]
    fn constants_reduce_to_fermat_quotients() {
        let ring = JetRing::new(&[3], BaseVar::Q).unwrap();
        let two = JetSeries::constant(&ring, &(), r(2), None);
        assert_eq!(two.delta_n(3, 2).unwrap(), JetSeries::constant(&ring, &(), r(2), None));
        let one = JetSeries::<BigRational>::one(&ring, &());
        assert!(one.delta_n(3, 3).unwrap().is_zero());
        let six = JetSeries::constant(&ring, &(), r(6), None);
        let d = fermat_quotient(&r(6), 3).unwrap();
        assert_eq!(six.delta(3).unwrap(), JetSeries::constant(&ring, &(), d, None));
    }

    #[test]
    fn phi_of_inverse_base() {
        let ctx = PadicCtx::new(5, 3).unwrap();
        let ring = JetRing::new(&[5], BaseVar::Q).unwrap();
        let q = JetSeries::<PadicTrunc>::base_var(&ring, &ctx);
        let qinv = q.inverse(None).unwrap();
        let img = qinv.phi(5).unwrap();
        let q1 = JetVar::jet(&[1]).unwrap();
        let expect = [(Monomial::base_power(-5), 1), (Monomial::from_parts(-10, [(q1, 1)]), -5), (Monomial::from_parts(-15, [(q1, 2)]), 25)];
        assert_eq!(img.len(), 3);
        for (m, c) in expect {
            assert_eq!(img.coeff(&m).unwrap().symmetric(), BigInt::from(c));
        }
    }

    #[test]
    fn frobenius_lifts_commute_on_generators() {
        let ring = JetRing::new(&[5, 7], BaseVar::T).unwrap();
        let t = JetSeries::<BigRational>::base_var(&ring, &()).truncate(Some(80));
        let a = t.phi(5).unwrap().phi(7).unwrap();
        let b = t.phi(7).unwrap().phi(5).unwrap();
        assert_eq!(a.first_difference(&b), None);
        assert_eq!(a.bound(), Some(2800));
        // Each derivation loses the weight of the unknown tail times p - 1.
        let d57 = t.delta(7).unwrap().delta(5).unwrap();
        assert_eq!(d57, JetSeries::jet_var(&ring, &(), &[1, 1]).unwrap().truncate(Some(114)));
    }

    #[test]
    fn order_budget_is_enforced() {
        let ring = JetRing::with_budget(&[5], BaseVar::T, &[1]).unwrap();
        let t = JetSeries::<BigRational>::base_var(&ring, &());
        let t1 = t.delta(5).unwrap();
        assert!(matches!(t1.delta(5), Err(Error::OrderBudget(_))));
        // Above the cap the next jet is never created.
        assert!(t1.delta_to(5, Some(25)).is_ok());
    }
}
