use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use super::coeff::RingOps;
use super::padic::PadicTrunc;
use super::{big_pow, binomial, factorial_valuation, mod_inverse, require_prime};
use crate::error::{Error, Result};

/// `(a - a^p)/p`: the p-derivation attached to the identity Frobenius lift.
pub fn fermat_quotient<R: RingOps>(a: &R, p: u64) -> Result<R> {
    require_prime(p)?;
    a.ring_sub(&a.ring_pow(p as u32)).ring_div_prime(p)
}

/// Coefficients of `C_p(X, Y) = (X^p + Y^p - (X+Y)^p)/p` as pairs
/// `(j, c_j)` meaning `c_j X^j Y^(p-j)`, for `0 < j < p`.
pub fn cp_coefficients(p: u64) -> Vec<(u32, BigInt)> {
    (1..p)
        .map(|j| {
            let c = binomial(p, j) / BigInt::from(p);
            (j as u32, -c)
        })
        .collect()
}

/// Evaluates `C_p(x, y)` through its integer coefficients, so no division
/// is needed in the target ring.
pub fn cp_polynomial<R: RingOps>(x: &R, y: &R, p: u64) -> Result<R> {
    require_prime(p)?;
    let xs = powers(x, p as u32 - 1);
    let ys = powers(y, p as u32 - 1);
    let mut acc = x.ring_zero_like();
    for (j, c) in cp_coefficients(p) {
        let term = xs[j as usize].ring_mul(&ys[(p as u32 - j) as usize]);
        acc = acc.ring_add(&term.ring_scale(&c));
    }
    Ok(acc)
}

fn powers<R: RingOps>(x: &R, n: u32) -> Vec<R> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(x.ring_one_like());
    for k in 1..=n as usize {
        out.push(out[k - 1].ring_mul(x));
    }
    out
}

/// `C_{p2}(X^{p1}, p1 Y)/p1` expanded with integer coefficients.
fn scaled_cp<R: RingOps>(x0: &R, y: &R, p1: u64, p2: u64) -> R {
    let base = x0.ring_pow(p1 as u32);
    let bs = powers(&base, p2 as u32 - 1);
    let ys = powers(y, p2 as u32 - 1);
    let mut acc = x0.ring_zero_like();
    for (j, c) in cp_coefficients(p2) {
        let k = p2 as u32 - j;
        let c = c * big_pow(p1, k - 1);
        let term = bs[j as usize].ring_mul(&ys[k as usize]);
        acc = acc.ring_add(&term.ring_scale(&c));
    }
    acc
}

/// The two-prime commutator polynomial `C_{p1,p2}(x0, x1, x2)`.
///
/// With `x1 = δ_{p1} x0` and `x2 = δ_{p2} x0` its value equals
/// `δ_{p1} δ_{p2} x0 - δ_{p2} δ_{p1} x0`. Every coefficient is an integer,
/// so the evaluation never divides.
pub fn cross_prime_commutator<R: RingOps>(x0: &R, x1: &R, x2: &R, p1: u64, p2: u64) -> Result<R> {
    require_prime(p1)?;
    require_prime(p2)?;
    if p1 == p2 {
        return Err(Error::Domain("commutator needs two distinct primes".into()));
    }
    let c12 = unit_delta_ratio(p1, p2)?;
    let c21 = unit_delta_ratio(p2, p1)?;
    let a = scaled_cp(x0, x1, p1, p2);
    let b = scaled_cp(x0, x2, p2, p1);
    let t2 = x2.ring_pow(p1 as u32).ring_scale(&c12);
    let t1 = x1.ring_pow(p2 as u32).ring_scale(&c21);
    Ok(a.ring_sub(&b).ring_sub(&t2).ring_add(&t1))
}

/// `δ_{p}(q)/q = (1 - q^{p-1})/p`, an integer for distinct primes.
fn unit_delta_ratio(p: u64, q: u64) -> Result<BigInt> {
    (BigInt::one() - big_pow(q, p as u32 - 1)).ring_div_prime(p)
}

/// Binomial coefficient `C(γ, k)` for a p-adic integer `γ`.
///
/// The numerator `γ(γ-1)…(γ-k+1)` is divisible by the p-part of `k!`; that
/// division costs exactly `v_p(k!)` digits.
pub fn padic_binomial(gamma: &PadicTrunc, k: u64) -> Result<PadicTrunc> {
    let ctx = gamma.ctx();
    let p = ctx.p();
    let loss = factorial_valuation(k, p);
    let g = gamma.guaranteed_digits();
    if loss > g {
        return Err(Error::PrecisionExhausted(format!(
            "C(gamma, {k}) needs {loss} digits, only {g} known"
        )));
    }
    // The factors are only known mod p^g, so the product is too.
    let m = ctx.pow(g).clone();
    let mut num = BigInt::one();
    let mut unit_den = BigInt::one();
    for j in 0..k {
        num = (num * (gamma.residue() - BigInt::from(j))).mod_floor(&m);
        let mut f = j + 1;
        while f % p == 0 {
            f /= p;
        }
        unit_den = (unit_den * BigInt::from(f)).mod_floor(&m);
    }
    let pk = big_pow(p, loss);
    let (q, r) = num.div_rem(&pk);
    if !r.is_zero() {
        return Err(Error::Integrality(format!(
            "numerator of C(gamma, {k}) not divisible by {p}^{loss}"
        )));
    }
    let digits = g - loss;
    let md = ctx.pow(digits).clone();
    let inv = mod_inverse(&unit_den, &md).expect("unit part of k! is invertible");
    Ok(PadicTrunc::with_precision(q * inv, digits, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::padic::PadicCtx;
    use num_rational::BigRational;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn fermat_quotient_examples() {
        assert_eq!(fermat_quotient(&b(1), 5).unwrap(), b(0));
        assert_eq!(fermat_quotient(&b(2), 5).unwrap(), b(-6));
        assert_eq!(fermat_quotient(&b(6), 3).unwrap(), b(-70));
        assert_eq!(fermat_quotient(&b(-2), 3).unwrap(), b(2));
        assert!(fermat_quotient(&b(2), 6).is_err());
    }

    #[test]
    fn cp_examples() {
        assert_eq!(cp_coefficients(2), vec![(1, b(-1))]);
        assert_eq!(cp_polynomial(&b(1), &b(1), 3).unwrap(), b(-2));
        for p in [3u64, 5, 7, 11] {
            assert_eq!(cp_polynomial(&b(1), &b(-1), p).unwrap(), b(0));
        }
        // direct definition on a few integers
        for (x, y) in [(2i64, 3i64), (-4, 7), (10, -1)] {
            for p in [2u64, 3, 5, 7] {
                let (bx, by) = (b(x), b(y));
                let direct = (num_traits::pow(bx.clone(), p as usize)
                    + num_traits::pow(by.clone(), p as usize)
                    - num_traits::pow(&bx + &by, p as usize))
                    / b(p as i64);
                assert_eq!(cp_polynomial(&bx, &by, p).unwrap(), direct);
            }
        }
    }

    #[test]
    fn commutator_worked_case() {
        let a = b(6);
        let d2 = fermat_quotient(&a, 2).unwrap();
        let d3 = fermat_quotient(&a, 3).unwrap();
        assert_eq!((d2.clone(), d3.clone()), (b(-15), b(-70)));
        let d2d3 = fermat_quotient(&d3, 2).unwrap();
        let d3d2 = fermat_quotient(&d2, 3).unwrap();
        assert_eq!((d2d3.clone(), d3d2.clone()), (b(-2485), b(1120)));
        let c = cross_prime_commutator(&a, &d2, &d3, 2, 3).unwrap();
        assert_eq!(c, b(-3605));
        assert_eq!(c, d2d3 - d3d2);
    }

    #[test]
    fn commutator_trivial_inputs() {
        for (p1, p2) in [(2u64, 3u64), (5, 7), (3, 11)] {
            assert_eq!(cross_prime_commutator(&b(1), &b(0), &b(0), p1, p2).unwrap(), b(0));
            assert_eq!(cross_prime_commutator(&b(0), &b(0), &b(0), p1, p2).unwrap(), b(0));
        }
        assert!(cross_prime_commutator(&b(1), &b(0), &b(0), 5, 5).is_err());
    }

    #[test]
    fn commutator_over_rationals() {
        let a = BigRational::new(b(2), b(11));
        let d5 = fermat_quotient(&a, 5).unwrap();
        let d7 = fermat_quotient(&a, 7).unwrap();
        let lhs = fermat_quotient(&d7, 5).unwrap() - fermat_quotient(&d5, 7).unwrap();
        assert_eq!(cross_prime_commutator(&a, &d5, &d7, 5, 7).unwrap(), lhs);
    }

    #[test]
    fn padic_binomial_examples() {
        let ctx = PadicCtx::new(5, 8).unwrap();
        let g = |n: i64| PadicTrunc::from_int(&b(n), &ctx);
        let minus_one = padic_binomial(&g(-1), 3).unwrap();
        assert_eq!(minus_one.symmetric(), b(-1));
        assert_eq!(padic_binomial(&g(2), 2).unwrap().symmetric(), b(1));
        assert_eq!(padic_binomial(&g(2), 5).unwrap().symmetric(), b(0));
        let c = padic_binomial(&g(6), 5).unwrap();
        assert_eq!(c.guaranteed_digits(), 7);
        assert_eq!(c.symmetric(), b(6));
        assert_eq!(padic_binomial(&g(30), 25).unwrap().guaranteed_digits(), 2);
        assert!(padic_binomial(&g(30), 125).is_err());
    }
}
