//! Desk checks of two congruences for iterated p-derivations in the jet
//! ring of a variable `z`.
//!
//! Both are statements modulo a filtration: `O(k)` stands for anything
//! involving only `z, z', …, z^(k)`, and `pO(k)` for `p` times such a term.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use super::psi::require_large_prime;
use super::{BaseVar, JetRing, JetSeries, JetVar, Monomial};
use crate::arith::{rational_valuation, Coefficient, PadicCtx, PadicTrunc};
use crate::error::{Error, Result};

/// The constant in `φ(z)/z - c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Varphi {
    /// A free δ-constant: its jets are independent variables.
    Symbolic,
    Int(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub p: u64,
    pub n: u32,
    pub pass: bool,
    /// Number of terms left after removing the predicted part.
    pub residual_terms: usize,
    /// First residual monomial outside the allowed error, if any.
    pub witness: Option<String>,
}

fn involves_jet_order(m: &Monomial, orders: &[u32]) -> bool {
    m.factors()
        .iter()
        .any(|&(v, _)| v.generator() == 0 && orders.contains(&v.index(0)))
}

fn max_z_order(m: &Monomial) -> u32 {
    m.factors()
        .iter()
        .filter(|(v, _)| v.generator() == 0)
        .map(|&(v, _)| v.index(0))
        .max()
        .unwrap_or(0)
}

/// `δ^n(φ(z)/z - c) ≡ z^{-p^n}(z^(n))^p - z^{p^{n+1}-2p^n} z^(n)` modulo
/// `O(n-1) + pO(n+1)`.
///
/// Computed with `M = n + 2` digits in the Laurent jet ring of `z` (plus a
/// free constant when `c` is symbolic). After subtracting the predicted
/// terms every monomial involving `z^(n)` or `z^(n+1)` must have a
/// coefficient divisible by `p`.
pub fn lemma_xlaphi_check(p: u64, n: u32, varphi: Varphi) -> Result<LemmaReport> {
    require_large_prime(p)?;
    if n == 0 {
        return Err(Error::Domain("the lemma concerns n >= 1".into()));
    }
    let ctx = PadicCtx::new(p, n + 2)?;
    let ring = match varphi {
        Varphi::Symbolic => JetRing::with_constant(p, BaseVar::Z)?,
        Varphi::Int(_) => JetRing::new(&[p], BaseVar::Z)?,
    };
    let int = |k: i64| PadicTrunc::from_int(&BigInt::from(k), &ctx);
    let z1 = JetVar::jet(&[1])?;
    let pi = p as i64;
    let c = match varphi {
        Varphi::Symbolic => JetSeries::constant_var(&ring, &ctx, &[0])?,
        Varphi::Int(k) => JetSeries::constant(&ring, &ctx, int(k), None),
    };
    let f = JetSeries::from_terms(
        &ring,
        &ctx,
        [
            (Monomial::base_power(pi - 1), int(1)),
            (Monomial::from_parts(-1, [(z1, 1)]), int(pi)),
        ],
        None,
    )?
    .sub(&c);
    let lhs = f.delta_n(p, n)?;
    let zn = JetVar::jet(&[n])?;
    let pn = pi.pow(n);
    let predicted = JetSeries::from_terms(
        &ring,
        &ctx,
        [
            (Monomial::from_parts(-pn, [(zn, p as u32)]), int(1)),
            (Monomial::from_parts(pn * pi - 2 * pn, [(zn, 1)]), int(-1)),
        ],
        None,
    )?;
    let residual = lhs.sub(&predicted);
    if residual.precision().is_some_and(|g| g == 0) {
        return Err(Error::PrecisionExhausted("no digits left to test divisibility".into()));
    }
    let witness = residual
        .terms()
        .filter(|(m, _)| involves_jet_order(m, &[n, n + 1]))
        .find(|(_, c)| c.padic_valuation() == Some(0))
        .map(|(m, c)| format!("{} * {}", c.symmetric(), ring.display_monomial(m)));
    Ok(LemmaReport {
        lemma: "xlaphi".into(),
        p,
        n,
        pass: witness.is_none(),
        residual_terms: residual.len(),
        witness,
    })
}

/// `δ^n(λz) = z^(n) + a z^{p^n} + pO(n)` for `λ = 1 + p^n a`, checked
/// exactly over the rationals.
pub fn lemma_logder_check(p: u64, n: u32, a: i64) -> Result<LemmaReport> {
    require_large_prime(p)?;
    if n == 0 {
        return Err(Error::Domain("the lemma concerns n >= 1".into()));
    }
    let ring = JetRing::new(&[p], BaseVar::Z)?;
    let q = |k: BigInt| BigRational::from_integer(k);
    let lambda = q(BigInt::from(1) + BigInt::from(p).pow(n) * a);
    let z = JetSeries::<BigRational>::base_var(&ring, &());
    let lhs = z.scale(&lambda).delta_n(p, n)?;
    let zn = JetVar::jet(&[n])?;
    let predicted = JetSeries::from_terms(
        &ring,
        &(),
        [
            (Monomial::var(zn), q(1.into())),
            (Monomial::base_power((p as i64).pow(n)), q(a.into())),
        ],
        None,
    )?;
    let residual = lhs.sub(&predicted);
    let witness = residual
        .terms()
        .find(|(m, c)| max_z_order(m) > n || rational_valuation(c, p).is_some_and(|v| v < 1))
        .map(|(m, c)| format!("{} * {}", c, ring.display_monomial(m)));
    Ok(LemmaReport {
        lemma: "logder".into(),
        p,
        n,
        pass: witness.is_none(),
        residual_terms: residual.len(),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xlaphi_base_cases() {
        for (p, n, v) in [(5, 1, Varphi::Int(0)), (7, 1, Varphi::Int(1)), (5, 1, Varphi::Symbolic)] {
            let r = lemma_xlaphi_check(p, n, v).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn xlaphi_second_term_sign() {
        // n = 1, c = 0: the z^{p^2-2p} z' term of δ(z^{p-1} + p z'/z) is -1.
        let ctx = PadicCtx::new(5, 3).unwrap();
        let ring = JetRing::new(&[5], BaseVar::Z).unwrap();
        let z1 = JetVar::jet(&[1]).unwrap();
        let f = JetSeries::from_terms(
            &ring,
            &ctx,
            [
                (Monomial::base_power(4), PadicTrunc::from_int(&1.into(), &ctx)),
                (Monomial::from_parts(-1, [(z1, 1)]), PadicTrunc::from_int(&5.into(), &ctx)),
            ],
            None,
        )
        .unwrap();
        let d = f.delta(5).unwrap();
        let c = d.coeff(&Monomial::from_parts(15, [(z1, 1)])).unwrap();
        assert_eq!(c.symmetric(), BigInt::from(-1));
    }

    #[test]
    fn logder_cases() {
        for (p, n, a) in [(5, 1, 1), (7, 1, 2), (5, 1, 0)] {
            let r = lemma_logder_check(p, n, a).unwrap();
            assert!(r.pass, "{r:?}");
        }
        assert_eq!(lemma_logder_check(5, 1, 0).unwrap().residual_terms, 0);
    }
}
