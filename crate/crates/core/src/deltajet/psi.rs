use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::{BaseVar, JetRing, JetSeries, JetVar, Monomial, Substitution};
use crate::arith::{valuation, Coefficient, PadicCtx, PadicTrunc, Weight};
use crate::error::{Error, Result};
use crate::qseries::Series1;

pub(crate) fn require_large_prime(p: u64) -> Result<()> {
    crate::arith::require_prime(p)?;
    if p < 5 {
        return Err(Error::Domain(format!("this construction needs p >= 5, got {p}")));
    }
    Ok(())
}

impl<C: Coefficient> JetSeries<C> {
    /// A one-variable series as an element of `ring` (same base variable).
    pub fn from_series1(ring: &Arc<JetRing>, s: &Series1<C>) -> Result<Self> {
        if s.var() != ring.base() {
            return Err(Error::Domain(format!(
                "series in {} does not live in a ring over {}",
                s.var().name(),
                ring.base().name()
            )));
        }
        let terms = s.terms().map(|(e, c)| (Monomial::base_power(e), c.clone()));
        let out = JetSeries::from_terms(ring, s.ctx(), terms, s.order())?;
        Ok(match s.precision() {
            Some(g) => out.reduce_precision(g),
            None => out,
        })
    }

    /// Moves a series into a ring whose primes contain this ring's primes in
    /// the same relative order; jet indices are placed accordingly.
    pub fn embed_into(&self, target: &Arc<JetRing>) -> Result<Self> {
        let src = self.ring();
        if src.base() != target.base() || src.has_constant() && !target.has_constant() {
            return Err(Error::Domain("rings have different generators".into()));
        }
        let slots: Vec<usize> = src
            .primes()
            .iter()
            .map(|&p| target.index_of(p))
            .collect::<Result<_>>()?;
        if slots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Domain(
                "target ring lists the primes in a different order".into(),
            ));
        }
        let mut terms = Vec::with_capacity(self.len());
        for (m, c) in self.terms() {
            let mut parts = Vec::with_capacity(m.factors().len());
            for &(v, e) in m.factors() {
                let mut idx = vec![0; target.arity()];
                for (k, &slot) in slots.iter().enumerate() {
                    idx[slot] = v.index(k);
                }
                parts.push((JetVar::new(v.generator(), &idx)?, e));
            }
            terms.push((Monomial::from_parts(m.base_exponent(), parts), c.clone()));
        }
        let out = JetSeries::from_terms(target, self.ctx(), terms, self.bound())?;
        Ok(match self.precision() {
            Some(g) => out.reduce_precision(g),
            None => out,
        })
    }
}

/// `log(1 + t)` in a `t`-based ring, known below weight `n`.
pub fn log_one_plus_t(ring: &Arc<JetRing>, n: i64) -> Result<JetSeries<BigRational>> {
    let t = Series1::<BigRational>::gen(BaseVar::T, &());
    JetSeries::from_series1(ring, &t.log1p(n)?)
}

/// `Ψ_{p_k} = (1/p)(φ_{p} - p) log(1 + t)` in a `t`-based ring, known below
/// weight `n`. The coefficients are checked to be `p`-integral.
pub fn psi_serretate_in(ring: &Arc<JetRing>, p: u64, n: i64) -> Result<JetSeries<BigRational>> {
    if ring.base() != BaseVar::T {
        return Err(Error::Domain("the Serre-Tate form lives over t".into()));
    }
    let l = log_one_plus_t(ring, n)?;
    let psi = l.phi_to(p, Some(n))?.sub(&l.scale_int(p as i64)).div_prime(p)?;
    psi.require_integral(&[p])?;
    Ok(psi)
}

/// Serre–Tate form of Ψ over the single-prime ring in `t`.
pub fn psi_serretate(p: u64, n: i64) -> Result<JetSeries<BigRational>> {
    require_large_prime(p)?;
    let ring = JetRing::new(&[p], BaseVar::T)?;
    psi_serretate_in(&ring, p, n)
}

/// The coefficient `(-1)^{n-1} p^{n-1} / n` of `(q'/q^p)^n` in the Fourier
/// form of Ψ.
pub fn psi_fourier_coefficient(p: u64, n: u32) -> BigRational {
    let sign = if n % 2 == 1 { 1 } else { -1 };
    BigRational::new(
        BigInt::from(sign) * BigInt::from(p).pow(n - 1),
        BigInt::from(n),
    )
}

/// Fourier form `Ψ = Σ_{n≥1} (-1)^{n-1} p^{n-1}/n (q'/q^p)^n` modulo `p^m`.
///
/// Every term has weight 0, so the sum is cut p-adically: the coefficient
/// has valuation `n - 1 - v_p(n)`, and terms at or above `m` vanish. The
/// result is exact modulo `p^m`.
pub fn psi_fourier(p: u64, m: u32) -> Result<JetSeries<PadicTrunc>> {
    require_large_prime(p)?;
    let ctx = PadicCtx::new(p, m)?;
    let ring = JetRing::new(&[p], BaseVar::Q)?;
    let q1 = JetVar::jet(&[1])?;
    let mut terms = Vec::new();
    let mut n: u32 = 1;
    loop {
        // v_p(n) <= log_p(n), so once n - 1 - log_p(n) >= m nothing survives.
        let floor_log = std::iter::successors(Some(p), |&x| Some(x * p))
            .take_while(|&x| x <= n as u64)
            .count() as u32;
        if n > m + floor_log {
            break;
        }
        let c = psi_fourier_coefficient(p, n);
        let v = valuation(c.numer(), p).unwrap_or(u32::MAX);
        if v < m {
            let m_n = Monomial::from_parts(-((p as i64) * n as i64), [(q1, n)]);
            terms.push((m_n, PadicTrunc::from_rational(&c, &ctx)?));
        }
        n += 1;
    }
    JetSeries::from_terms(&ring, &ctx, terms, None)
}

/// The change of variables `q = 1 + t` on a single-prime ring: `q ↦ 1 + t`
/// and `q^(i) ↦ δ^i(1 + t)`, computed below weight `n` in `t`.
///
/// The input must be exact (in the p-adic case: exact modulo `p^M`), since
/// q-side weights say nothing about t-adic size.
pub fn fourier_to_serretate<C: Coefficient>(f: &JetSeries<C>, n: i64) -> Result<JetSeries<C>> {
    let src = f.ring();
    if src.arity() != 1 || src.base() != BaseVar::Q || src.has_constant() {
        return Err(Error::Domain("expected a single-prime series in q".into()));
    }
    if f.bound().is_some() {
        return Err(Error::Domain(
            "only exact q-series can be rewritten in t".into(),
        ));
    }
    let p = src.primes()[0];
    let ring = JetRing::new(&[p], BaseVar::T)?;
    let ctx = f.ctx();
    let t = JetSeries::<C>::base_var(&ring, ctx);
    let q = JetSeries::one(&ring, ctx).add(&t);
    let q_inv = q.inverse(Some(n))?;
    let mut sub = Substitution::new(q.truncate(Some(n)), Some(n)).with_base_inverse(q_inv);
    for v in sub.needed_vars(f) {
        let mut img = q.clone();
        for _ in 0..v.index(0) {
            img = img.delta_to(p, Some(n))?;
        }
        sub.set_image(v, img);
    }
    sub.apply(f, None)
}

/// `u^w = Π φ^i(u)^{a_i}` for `w = Σ a_i φ^i`, known below `cap` when the
/// negative powers are infinite series.
pub fn weight_action<C: Coefficient>(
    u: &JetSeries<C>,
    w: &Weight,
    cap: Option<i64>,
) -> Result<JetSeries<C>> {
    let d = u.ring().arity();
    let mut acc = JetSeries::one(u.ring(), u.ctx());
    for (idx, a) in w.terms() {
        if idx.len() != d {
            return Err(Error::Domain("weight and ring have different prime counts".into()));
        }
        let image = u.phi_multi(idx)?;
        acc = acc.mul(&image.pow_signed(a, cap)?).truncate(cap);
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn serretate_leading_terms() {
        let psi = psi_serretate(5, 7).unwrap();
        let t1 = JetVar::jet(&[1]).unwrap();
        // Below weight 7 only the linear term of log(1 + φ(t)) survives:
        // Ψ = t' + t^5/5 - log(1 + t).
        assert_eq!(psi.coeff(&Monomial::var(t1)), Some(&r(1, 1)));
        assert_eq!(psi.coeff(&Monomial::base_power(1)), Some(&r(-1, 1)));
        assert_eq!(psi.coeff(&Monomial::base_power(2)), Some(&r(1, 2)));
        // t^5: -1/5 from -log and +1/5 from the t^5 inside φ(t).
        assert!(psi.coeff(&Monomial::base_power(5)).is_none());
        assert_eq!(psi.coeff(&Monomial::base_power(6)), Some(&r(1, 6)));
        assert_eq!(psi.len(), 6);
        assert_eq!(psi.bound(), Some(7));
    }

    #[test]
    fn fourier_valuations() {
        for p in [5u64, 7] {
            for n in 1..=25 {
                let c = psi_fourier_coefficient(p, n);
                let v = crate::arith::rational_valuation(&c, p).unwrap();
                let vn = valuation(&BigInt::from(n), p).unwrap() as i64;
                assert_eq!(v, n as i64 - 1 - vn);
            }
        }
        let psi = psi_fourier(5, 4).unwrap();
        let q1 = JetVar::jet(&[1]).unwrap();
        let lead = psi.coeff(&Monomial::from_parts(-5, [(q1, 1)])).unwrap();
        assert_eq!(lead.symmetric(), BigInt::from(1));
        // -(5/2): the inverse of 2 mod 5^4 times -5
        let second = psi.coeff(&Monomial::from_parts(-10, [(q1, 2)])).unwrap();
        let expect = PadicTrunc::from_rational(&r(-5, 2), &PadicCtx::new(5, 4).unwrap()).unwrap();
        assert_eq!(second, &expect);
    }

    #[test]
    fn fourier_and_serretate_agree() {
        let n = 12;
        let ctx = PadicCtx::new(5, 6).unwrap();
        let st = psi_serretate(5, n)
            .unwrap()
            .map_coefficients(&ctx, |c| c.to_padic(&ctx))
            .unwrap();
        let from_q = fourier_to_serretate(&psi_fourier(5, 6).unwrap(), n).unwrap();
        assert_eq!(st.first_difference(&from_q), None);
        assert!(!st.is_zero());
    }

    #[test]
    fn weight_action_examples() {
        let ring = JetRing::new(&[5], BaseVar::Q).unwrap();
        let q = JetSeries::<BigRational>::base_var(&ring, &());
        let w = Weight::from_coeffs(&[-1, 1]);
        let got = weight_action(&q, &w, None).unwrap();
        let expect = q.phi(5).unwrap().mul(&q.inverse(None).unwrap());
        assert_eq!(got, expect);
        assert_eq!(weight_action(&q, &Weight::from_coeffs(&[1]), None).unwrap(), q);
        assert!(weight_action(&q, &Weight::zero(), None).unwrap().sub(&JetSeries::one(&ring, &())).is_zero());
    }
}
