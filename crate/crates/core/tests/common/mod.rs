#![allow(dead_code)]

use std::sync::Arc;

use deltaforms::arith::{binomial, factorial_valuation, is_localized_at, Coefficient};
use deltaforms::{JetRing, JetSeries, JetVar, Monomial, PadicCtx, PadicTrunc};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// A random rational of height at most `height` with denominator prime to
/// every prime in `primes`.
pub fn random_localized(rng: &mut ChaCha8Rng, primes: &[u64], height: i64) -> BigRational {
    loop {
        let n = rng.gen_range(-height..=height);
        let d = rng.gen_range(1..=height);
        let q = rat(n, d);
        if is_localized_at(&q, primes) {
            return q;
        }
    }
}

/// Every monomial of `ring` with nonnegative base exponent and weight below
/// `bound`, built from jets of total order at most `max_order`.
pub fn monomials_below(ring: &Arc<JetRing>, bound: i64, max_order: u32) -> Vec<Monomial> {
    let d = ring.arity();
    let mut indices = vec![vec![]];
    for _ in 0..d {
        indices = indices
            .into_iter()
            .flat_map(|idx: Vec<u32>| {
                let used: u32 = idx.iter().sum();
                (0..=max_order - used).map(move |i| {
                    let mut next = idx.clone();
                    next.push(i);
                    next
                })
            })
            .collect();
    }
    let vars: Vec<JetVar> = indices
        .iter()
        .filter(|idx| idx.iter().any(|&i| i > 0))
        .map(|idx| JetVar::jet(idx).unwrap())
        .filter(|&v| ring.var_weight(v) < bound)
        .collect();
    let mut out = vec![Monomial::one()];
    let mut frontier = vec![Monomial::one()];
    while let Some(m) = frontier.pop() {
        let mut gens: Vec<Monomial> = vars.iter().map(|&v| Monomial::var(v)).collect();
        gens.push(Monomial::base_power(1));
        for g in gens {
            let n = m.mul(&g);
            if ring.monomial_weight(&n) < bound && !out.contains(&n) {
                out.push(n.clone());
                frontier.push(n);
            }
        }
    }
    out
}

/// A random series with `terms` distinct monomials and `Z_(P)`
/// coefficients of height at most `height`.
pub fn random_series(
    rng: &mut ChaCha8Rng,
    ring: &Arc<JetRing>,
    bound: i64,
    height: i64,
    terms: usize,
) -> JetSeries<BigRational> {
    let mut pool = monomials_below(ring, bound, 2);
    let mut picked = Vec::new();
    while picked.len() < terms && !pool.is_empty() {
        let m = pool.swap_remove(rng.gen_range(0..pool.len()));
        picked.push((m, random_localized(rng, ring.primes(), height)));
    }
    JetSeries::from_terms(ring, &(), picked, Some(bound)).unwrap()
}

/// `exp(x)` for a p-adic series whose coefficients are all divisible by
/// `p`, summed until the remaining terms vanish modulo `p^M`.
pub fn exp_padic(x: &JetSeries<PadicTrunc>) -> JetSeries<PadicTrunc> {
    let ctx = x.ctx().clone();
    let p = ctx.p();
    let mut acc = JetSeries::one(x.ring(), &ctx);
    let mut power = JetSeries::one(x.ring(), &ctx);
    let mut k: u64 = 1;
    loop {
        power = power.mul(x);
        let v = factorial_valuation(k, p);
        if k as u32 > ctx.m() + v {
            break;
        }
        // k! = p^v u with u a unit
        let unit_part = (1..=k).fold(BigInt::one(), |a, j| a * BigInt::from(j)) / BigInt::from(p).pow(v);
        let mut term = power.scale(&PadicTrunc::from_int(&unit_part, &ctx).inverse().unwrap());
        for _ in 0..v {
            term = term.div_prime(p).unwrap();
        }
        acc = acc.add(&term);
        k += 1;
    }
    acc
}

/// `C_p(x, y)` on jet series, from its integer coefficients.
pub fn cp_series<C: Coefficient>(x: &JetSeries<C>, y: &JetSeries<C>, p: u64, cap: Option<i64>) -> JetSeries<C> {
    let mut acc = JetSeries::zero(x.ring(), x.ctx(), cap);
    for j in 1..p {
        let c = -binomial(p, j) / BigInt::from(p);
        let term = x
            .pow(j as u32)
            .mul(&y.pow((p - j) as u32))
            .truncate(cap)
            .scale(&C::from_bigint(&c, x.ctx()));
        acc = acc.add(&term);
    }
    acc.truncate(cap)
}

/// `δ_p` of a q-series computed only from the axioms
/// `δ(x + y) = δx + δy + C_p(x, y)`, `δ(xy) = x^p δy + y^p δx + p δx δy`,
/// `δ(q) = q'` and the Fermat quotient on constants.
pub fn axiom_delta(f: &JetSeries<PadicTrunc>, p: u64) -> JetSeries<PadicTrunc> {
    let ctx: PadicCtx = f.ctx().clone();
    let ring = f.ring().clone();
    let cap = f.bound();
    let q = JetSeries::base_var(&ring, &ctx);
    let q1 = JetSeries::jet_var(&ring, &ctx, &[1]).unwrap();
    let product = |x: &JetSeries<PadicTrunc>, dx: &JetSeries<PadicTrunc>, y: &JetSeries<PadicTrunc>, dy: &JetSeries<PadicTrunc>| {
        x.pow(p as u32)
            .mul(dy)
            .add(&y.pow(p as u32).mul(dx))
            .add(&dx.mul(dy).scale_int(p as i64))
            .truncate(cap)
    };
    // δ(q^n) by peeling one factor of q at a time.
    let mut qn = JetSeries::one(&ring, &ctx);
    let mut dqn = JetSeries::zero(&ring, &ctx, None);
    let mut delta_powers = vec![(qn.clone(), dqn.clone())];
    let top = f.terms().map(|(m, _)| m.base_exponent()).max().unwrap_or(0);
    for _ in 0..top {
        dqn = product(&qn, &dqn, &q, &q1);
        qn = qn.mul(&q);
        delta_powers.push((qn.clone(), dqn.clone()));
    }
    let mut sum = JetSeries::zero(&ring, &ctx, cap);
    let mut dsum = JetSeries::zero(&ring, &ctx, cap);
    for (m, c) in f.terms() {
        assert!(m.is_pure_base() && m.base_exponent() >= 0);
        let (x, dx) = &delta_powers[m.base_exponent() as usize];
        let cst = JetSeries::constant(&ring, &ctx, c.clone(), None);
        let dc = JetSeries::constant(&ring, &ctx, c.fermat_delta(p).unwrap(), None);
        let term = cst.mul(x);
        let dterm = product(&cst, &dc, x, dx);
        dsum = dsum.add(&dterm).add(&cp_series(&sum, &term, p, cap));
        sum = sum.add(&term).truncate(cap);
    }
    dsum.truncate(cap)
}
