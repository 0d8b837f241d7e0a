//! Special series built from modular data: δ-Fourier expansions of classical
//! forms, the order-2 series `f^♯` attached to a newform, its multi-prime
//! version `f^{2e}`, and the isogeny-covariance test.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::Value;

use crate::arith::{Coefficient, PadicCtx, PadicTrunc};
use crate::deltajet::{
    psi_serretate, BaseVar, JetRing, JetSeries, JetVar, Monomial, Substitution,
};
use crate::error::{Error, Result};
use crate::modular::QExpansion;
use crate::multiprime::MultiJetSeries;
use crate::qseries::{Gamma, Series1};

/// `δ_p^n f(q)` in the q-side jet ring of `p`, coefficients mod `p^m`.
pub fn delta_fourier_expand(
    f: &QExpansion,
    n: u32,
    p: u64,
    m: u32,
) -> Result<JetSeries<PadicTrunc>> {
    let ctx = PadicCtx::new(p, m)?;
    let ring = JetRing::new(&[p], BaseVar::Q)?;
    let mut out = JetSeries::from_series1(&ring, &f.series.to_padic(&ctx)?)?;
    for _ in 0..n {
        let cap = out.bound();
        out = out.delta_to(p, cap)?;
    }
    Ok(out)
}

/// `Σ_{1≤n<N} (a_n/n) q^n` in `ring`, known below weight `N`.
/// `an[0]` is `a_1`.
fn integrated_newform(ring: &Arc<JetRing>, an: &[i64], n: i64) -> Result<JetSeries<BigRational>> {
    let needed = (n - 1).max(0) as usize;
    if an.len() < needed {
        return Err(Error::Missing(format!(
            "need a_1..a_{needed}, got {} coefficients",
            an.len()
        )));
    }
    let terms = (1..n).filter(|&k| an[k as usize - 1] != 0).map(|k| {
        (
            Monomial::base_power(k),
            BigRational::new(BigInt::from(an[k as usize - 1]), BigInt::from(k)),
        )
    });
    JetSeries::from_terms(ring, &(), terms, Some(n))
}

/// `(1/p)(φ_p^2 - a_p φ_p + p) f`, truncated at `cap`.
fn hecke_polynomial_step(
    f: &JetSeries<BigRational>,
    p: u64,
    a_p: i64,
    cap: Option<i64>,
) -> Result<JetSeries<BigRational>> {
    let phi1 = f.phi_to(p, cap)?;
    let phi2 = phi1.phi_to(p, cap)?;
    phi2.sub(&phi1.scale_int(a_p))
        .add(&f.scale_int(p as i64))
        .truncate(cap)
        .div_prime(p)
}

/// `f^♯ = (1/p) Σ_n (a_n/n)(φ(q)^{n}∘φ - a_p φ(q)^n + p q^n)` with exact
/// coefficients, retaining weights below `window` (`q`, `q'`, `q''` have
/// weights `1, p, p^2`). Fails unless every coefficient is `p`-integral.
pub fn fsharp_exact(an: &[i64], a_p: i64, p: u64, window: i64) -> Result<JetSeries<BigRational>> {
    crate::deltajet::require_large_prime(p)?;
    let ring = JetRing::with_budget(&[p], BaseVar::Q, &[2])?;
    let l = integrated_newform(&ring, an, window)?;
    let f = hecke_polynomial_step(&l, p, a_p, Some(window))?;
    f.require_integral(&[p])?;
    Ok(f)
}

/// [`fsharp_exact`] reduced modulo `p^m`.
pub fn fsharp_expansion(
    an: &[i64],
    a_p: i64,
    p: u64,
    m: u32,
    window: i64,
) -> Result<JetSeries<PadicTrunc>> {
    let ctx = PadicCtx::new(p, m)?;
    fsharp_exact(an, a_p, p, window)?.map_coefficients(&ctx, |c| c.to_padic(&ctx))
}

fn require_good_primes(primes: &[u64], ap: &[i64]) -> Result<()> {
    if primes.len() != ap.len() {
        return Err(Error::Domain("one a_p is needed for each prime".into()));
    }
    for &p in primes {
        crate::deltajet::require_large_prime(p)?;
    }
    Ok(())
}

/// `f^{2e}_0 = (1/Π p) Π_p (φ_p^2 - a_p φ_p + p) Σ (a_n/n) q^n` in the
/// q-side ring of `P`, below weight `n`, with `Z_(P)`-integrality checked.
pub fn build_f2e0(an: &[i64], primes: &[u64], ap: &[i64], n: i64) -> Result<MultiJetSeries<BigRational>> {
    require_good_primes(primes, ap)?;
    let ring = JetRing::with_budget(primes, BaseVar::Q, &vec![2; primes.len()])?;
    let mut f = integrated_newform(&ring, an, n)?;
    for (&p, &a) in primes.iter().zip(ap) {
        f = hecke_polynomial_step(&f, p, a, Some(n))?;
    }
    f.require_integral(primes)?;
    Ok(f)
}

/// `f^{2e}_k = Π_{l≠k} (1/p_l)(φ_l^2 - a_l φ_l + p_l) f^♯_{p_k}`, with
/// `f^♯_{p_k}` built in its own ring and moved into the ring of `P`.
pub fn build_f2e_k(
    an: &[i64],
    primes: &[u64],
    ap: &[i64],
    k: usize,
    n: i64,
) -> Result<MultiJetSeries<BigRational>> {
    require_good_primes(primes, ap)?;
    let pk = *primes
        .get(k)
        .ok_or_else(|| Error::Domain(format!("no prime at position {k}")))?;
    let ring = JetRing::with_budget(primes, BaseVar::Q, &vec![2; primes.len()])?;
    let mut f = fsharp_exact(an, ap[k], pk, n)?.embed_into(&ring)?;
    for (l, (&p, &a)) in primes.iter().zip(ap).enumerate() {
        if l != k {
            f = hecke_polynomial_step(&f, p, a, Some(n))?;
        }
    }
    f.require_integral(&[pk])?;
    Ok(f)
}

/// Outcome of comparing `F(σ(t), δ_P^i σ(t), …)` with `γ^ν F`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub gamma: Value,
    pub nu: i64,
    pub pass: bool,
    /// Lowest-weight monomial where the two sides differ.
    pub witness: Option<String>,
}

fn gamma_json(g: &Gamma) -> Value {
    match g {
        Gamma::Int(n) => Value::from(*n),
        Gamma::Padic(x) => x.to_json(),
    }
}

fn gamma_coefficient<C: Coefficient>(g: &Gamma, ctx: &C::Ctx) -> Result<C> {
    match g {
        Gamma::Int(n) => Ok(C::from_i64(*n, ctx)),
        Gamma::Padic(x) => C::from_padic(x, ctx),
    }
}

/// Image of the base variable under the isogeny action: `(1+t)^γ - 1` over
/// `t`, `q^γ` over `q`.
fn base_action<C: Coefficient>(
    ring: &Arc<JetRing>,
    ctx: &C::Ctx,
    gamma: &Gamma,
    cap: Option<i64>,
) -> Result<(JetSeries<C>, i64)> {
    match (ring.base(), gamma) {
        (BaseVar::T, _) => {
            let order = cap.ok_or_else(|| {
                Error::Domain("the t-side action is an infinite series; the input needs a bound".into())
            })?;
            let one = Series1::<C>::one(BaseVar::T, ctx);
            let u = one.add(&Series1::gen(BaseVar::T, ctx)).truncate(Some(order));
            let image = u.pow_weight(gamma)?.sub(&one);
            Ok((JetSeries::from_series1(ring, &image)?, 1))
        }
        (BaseVar::Q, Gamma::Int(g)) if *g >= 2 => Ok((
            JetSeries::monomial(ring, ctx, Monomial::base_power(*g), C::one_in(ctx))?,
            *g,
        )),
        (BaseVar::Q, _) => Err(Error::Domain(
            "over q the action q -> q^γ needs an integer γ >= 2".into(),
        )),
        (BaseVar::Z, _) => Err(Error::Domain("no isogeny action on the z-ring".into())),
    }
}

fn validate_gamma(g: &Gamma) -> Result<()> {
    match g {
        Gamma::Int(n) if n.abs() <= 1 => Err(Error::Domain(format!(
            "γ = {n} is zero or a root of unity"
        ))),
        Gamma::Padic(x) if !x.is_unit() => Err(Error::Domain("p-adic γ must be a unit".into())),
        _ => Ok(()),
    }
}

/// Jet images `σ(x_i) = δ_{p_l} σ(x_{i - e_l})`, `l` the first nonzero
/// index, memoized.
fn jet_image<C: Coefficient>(
    v: JetVar,
    base: &JetSeries<C>,
    cap: Option<i64>,
    memo: &mut HashMap<JetVar, JetSeries<C>>,
) -> Result<JetSeries<C>> {
    if let Some(s) = memo.get(&v) {
        return Ok(s.clone());
    }
    let img = match v.first_index() {
        None => base.clone(),
        Some(l) => {
            let inner = jet_image(v.lowered(l), base, cap, memo)?;
            inner.delta_to(base.ring().primes()[l], cap)?
        }
    };
    memo.insert(v, img.clone());
    Ok(img)
}

/// Checks `F(…δ_P^i σ(x)…) = γ^ν F(…δ_P^i x…)` below the bound of `F`,
/// where `σ` is the isogeny action of [`base_action`] extended to the jets.
pub fn covariance_check<C: Coefficient>(
    f: &JetSeries<C>,
    gamma: &Gamma,
    nu: i64,
) -> Result<CovarianceReport> {
    validate_gamma(gamma)?;
    let ring = f.ring();
    if ring.has_constant() {
        return Err(Error::Domain("the isogeny action is not defined on δ-constants".into()));
    }
    let cap = f.bound();
    let (base, scale) = base_action(ring, f.ctx(), gamma, cap)?;
    let mut sub = Substitution::new(base.clone(), cap).with_scale(scale);
    if sub.needs_base_inverse(f) {
        let inv = base.inverse(cap)?;
        sub = sub.with_base_inverse(inv);
    }
    let mut memo = HashMap::new();
    for v in sub.needed_vars(f) {
        if v.generator() == 0 && !v.is_base() {
            let img = jet_image(v, &base, cap, &mut memo)?;
            sub.set_image(v, img);
        }
    }
    let lhs = sub.apply(f, cap.map(|b| scale * b))?;
    let factor = gamma_coefficient::<C>(gamma, f.ctx())?;
    let rhs = match nu {
        n if n >= 0 => f.scale(&pow_coefficient(&factor, n as u32, f.ctx())),
        n => f.scale(&pow_coefficient(&factor.inverse()?, n.unsigned_abs() as u32, f.ctx())),
    };
    let diff = lhs.sub(&rhs);
    if diff.bound().is_some_and(|b| b <= 1) {
        return Err(Error::PrecisionExhausted(
            "truncation too small to compare any monomial".into(),
        ));
    }
    let witness = lhs.first_difference(&rhs).map(|m| f.display_monomial(&m));
    Ok(CovarianceReport {
        gamma: gamma_json(gamma),
        nu,
        pass: witness.is_none(),
        witness,
    })
}

fn pow_coefficient<C: Coefficient>(c: &C, e: u32, ctx: &C::Ctx) -> C {
    (0..e).fold(C::one_in(ctx), |acc, _| acc.times(c))
}

/// Serre–Tate expansions of the basic forms of order at most one.
#[derive(Clone, Debug, PartialEq)]
pub struct BasicExpansions {
    /// `f^0`, and hence every `(f^0)^w`.
    pub f0: JetSeries<BigRational>,
    pub f_partial: JetSeries<BigRational>,
    pub f1: JetSeries<BigRational>,
    /// `f^♮ = (f^0)^{φ+1} f^1`.
    pub f_natural: JetSeries<BigRational>,
}

/// The expansions `1, 1, Ψ, Ψ` of `f^0, f^∂, f^1, f^♮`, known below weight `n`.
pub fn expansion_of_f1_fnatural(p: u64, n: i64) -> Result<BasicExpansions> {
    let psi = psi_serretate(p, n)?;
    let one = JetSeries::one(psi.ring(), &());
    let f_natural = crate::deltajet::weight_action(&one, &crate::arith::Weight::from_coeffs(&[1, 1]), Some(n))?
        .mul(&psi);
    Ok(BasicExpansions {
        f0: one.clone(),
        f_partial: one,
        f1: psi,
        f_natural,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::{discriminant_delta, eisenstein, CurveFixture};
    use crate::multiprime::build_fe0;

    fn fixture() -> CurveFixture {
        CurveFixture::from_json(include_str!("../fixtures/11a1.json")).unwrap()
    }

    #[test]
    fn delta_expansion_of_zero_iterations_is_embedding() {
        let d = discriminant_delta(15);
        let e = delta_fourier_expand(&d, 0, 5, 4).unwrap();
        assert_eq!(e.len(), d.series.len());
        let c = e.coeff(&Monomial::base_power(2)).unwrap();
        assert_eq!(c.symmetric(), BigInt::from(-24));
    }

    #[test]
    fn delta_expansion_of_constant() {
        let ctx = PadicCtx::new(5, 6).unwrap();
        let mut c = eisenstein(4, 10).unwrap();
        c.series = Series1::constant(BaseVar::Q, &(), BigRational::from_integer(2.into()))
            .truncate(Some(10));
        let e = delta_fourier_expand(&c, 2, 5, 6).unwrap();
        let expect = PadicTrunc::from_int(&2.into(), &ctx).fermat_delta(5).unwrap().fermat_delta(5).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!(e.coeff(&Monomial::one()), Some(&expect));
    }

    #[test]
    fn fsharp_first_term_and_projection() {
        let fx = fixture();
        let an = fx.coefficients(60).unwrap();
        let p = 5;
        let a_p = an[4];
        let w = 60;
        let f = fsharp_exact(&an, a_p, p, w).unwrap();
        // Only the n = 1 term reaches the jet q'' below weight 60:
        // φ^2(q) contains p^2 q''.
        let q2 = JetVar::jet(&[2]).unwrap();
        assert_eq!(
            f.coeff(&Monomial::var(q2)),
            Some(&BigRational::from_integer(BigInt::from(5)))
        );
        // The pure-q part against a one-variable oracle.
        let l = Series1::from_coeffs(
            BaseVar::Q,
            &(),
            (1..w).map(|n| (n, BigRational::new(an[n as usize - 1].into(), n.into()))),
            Some(w),
        )
        .unwrap();
        let expect = l
            .frobenius_sub(p)
            .frobenius_sub(p)
            .sub(&l.frobenius_sub(p).scale(&BigRational::from_integer(a_p.into())))
            .add(&l.scale(&BigRational::from_integer(5.into())))
            .truncate(Some(w))
            .scale(&BigRational::new(1.into(), 5.into()));
        let got = f.base_part();
        assert_eq!(got.len(), expect.len());
        for (e, c) in expect.terms() {
            assert_eq!(got.coeff(&Monomial::base_power(e)), Some(c));
        }
    }

    #[test]
    fn fsharp_windows_agree() {
        let an = fixture().coefficients(80).unwrap();
        let small = fsharp_exact(&an, an[6], 7, 50).unwrap();
        let large = fsharp_exact(&an, an[6], 7, 80).unwrap();
        assert_eq!(small.first_difference(&large.truncate(Some(50))), None);
        assert_eq!(large.truncate(Some(50)), small);
    }

    #[test]
    fn f2e_single_prime_is_fsharp() {
        let an = fixture().coefficients(40).unwrap();
        let a = build_f2e0(&an, &[13], &[an[12]], 40).unwrap();
        let b = fsharp_exact(&an, an[12], 13, 40).unwrap();
        assert_eq!(a, b);
        let k = build_f2e_k(&an, &[13], &[an[12]], 0, 40).unwrap();
        assert_eq!(k, b);
    }

    #[test]
    fn f2e_of_zero_form() {
        let an = vec![0; 30];
        assert!(build_f2e0(&an, &[5, 7], &[0, 0], 30).unwrap().is_zero());
    }

    #[test]
    fn covariance_examples() {
        let psi = psi_serretate(5, 20).unwrap();
        assert!(covariance_check(&psi, &Gamma::Int(2), 1).unwrap().pass);
        let t = JetSeries::<BigRational>::base_var(psi.ring(), &()).truncate(Some(20));
        let r = covariance_check(&t, &Gamma::Int(2), 1).unwrap();
        assert!(!r.pass);
        assert_eq!(r.witness.as_deref(), Some("t^2"));
        let fe = build_fe0(&[5, 7], 20).unwrap();
        assert!(covariance_check(&fe, &Gamma::Int(3), 1).unwrap().pass);
        assert!(covariance_check(&psi.mul(&psi), &Gamma::Int(3), 2).unwrap().pass);
        let one = JetSeries::<BigRational>::one(psi.ring(), &()).truncate(Some(20));
        assert!(covariance_check(&one, &Gamma::Int(2), 0).unwrap().pass);
        assert!(covariance_check(&psi, &Gamma::Int(1), 1).is_err());
    }

    #[test]
    fn covariance_with_padic_gamma() {
        let ctx = PadicCtx::new(5, 8).unwrap();
        let psi = psi_serretate(5, 15)
            .unwrap()
            .map_coefficients(&ctx, |c| c.to_padic(&ctx))
            .unwrap();
        // γ = 1/3 is a 5-adic unit that is not an integer.
        let g = PadicTrunc::from_rational(&BigRational::new(1.into(), 3.into()), &ctx).unwrap();
        let r = covariance_check(&psi, &Gamma::Padic(g), 1).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn f2e_is_not_covariant() {
        let an = fixture().coefficients(30).unwrap();
        let f = build_f2e0(&an, &[5], &[an[4]], 30).unwrap();
        let r = covariance_check(&f, &Gamma::Int(2), 1).unwrap();
        assert!(!r.pass);
        assert!(r.witness.is_some());
    }

    #[test]
    fn basic_expansions() {
        let b = expansion_of_f1_fnatural(5, 12).unwrap();
        assert_eq!(b.f1, psi_serretate(5, 12).unwrap());
        assert_eq!(b.f_natural, b.f1);
        assert!(b.f_partial.sub(&JetSeries::one(b.f1.ring(), &())).is_zero());
        let w = crate::arith::Weight::from_coeffs(&[3, -2, 1]);
        let fw = crate::deltajet::weight_action(&b.f0, &w, Some(12)).unwrap();
        assert!(fw.sub(&b.f0).is_zero());
    }
}
