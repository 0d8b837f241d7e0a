//! Coefficient domains and the Fermat-quotient p-derivation on them.
//!
//! Three carriers are provided: exact rationals ([`BigRational`]), rationals
//! localized away from a finite prime set ([`LocalizedRational`]) and
//! truncated p-adic integers with a guaranteed-digit counter
//! ([`PadicTrunc`]). The Frobenius lift acts trivially on all of them, so
//! the p-derivation is the plain Fermat quotient `(a - a^p) / p`.

mod coeff;
mod delta;
mod localized;
mod padic;
mod reconstruct;
mod weight;

pub use coeff::{Coefficient, RingOps};
pub use delta::{
    cp_coefficients, cp_polynomial, cross_prime_commutator, fermat_quotient, padic_binomial,
};
pub use localized::LocalizedRational;
pub use padic::{PadicCtx, PadicTrunc};
pub use reconstruct::{crt_combine, rational_reconstruct, Residue};
pub use weight::Weight;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Trial-division primality test; every prime in this crate is small.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n.is_multiple_of(2) {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 2;
    }
    true
}

/// All primes `<= bound`.
pub fn primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&n| is_prime(n)).collect()
}

pub(crate) fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::Domain(format!("{p} is not prime")))
    }
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation(n: &BigInt, p: u64) -> Option<u32> {
    if n.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut n = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        n = q;
        v += 1;
    }
}

/// p-adic valuation of a nonzero rational; `None` for zero.
pub fn rational_valuation(q: &BigRational, p: u64) -> Option<i64> {
    let num = valuation(q.numer(), p)?;
    let den = valuation(q.denom(), p).unwrap_or(0);
    Some(num as i64 - den as i64)
}

/// `v_p(n!)` by Legendre's formula.
pub fn factorial_valuation(n: u64, p: u64) -> u32 {
    let mut v = 0;
    let mut q = n / p;
    while q > 0 {
        v += q as u32;
        q /= p;
    }
    v
}

pub(crate) fn big_pow(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    if m.is_one() {
        return Some(BigInt::zero());
    }
    let e = a.mod_floor(m).extended_gcd(m);
    if !e.gcd.is_one() {
        return None;
    }
    Some(e.x.mod_floor(m))
}

/// Binomial coefficient `C(n, k)` over the integers.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * BigInt::from(n - j) / BigInt::from(j + 1);
    }
    acc
}

/// Whether the denominator of `q` avoids every prime in `primes`.
pub fn is_localized_at(q: &BigRational, primes: &[u64]) -> bool {
    primes
        .iter()
        .all(|&p| !(q.denom() % BigInt::from(p)).is_zero())
}

/// Formats a rational as the canonical `"n/d"` string.
pub fn format_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parses `"n/d"` or a bare integer `"n"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let parse_int = |t: &str| {
        t.trim()
            .parse::<BigInt>()
            .map_err(|e| Error::Parse(format!("bad integer {t:?}: {e}")))
    };
    match s.split_once('/') {
        Some((n, d)) => {
            let n = parse_int(n)?;
            let d = parse_int(d)?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(parse_int(s)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_valuations() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(valuation(&BigInt::from(250), 5), Some(3));
        assert_eq!(valuation(&BigInt::zero(), 5), None);
        assert_eq!(factorial_valuation(25, 5), 6);
        let q = BigRational::new(BigInt::from(7), BigInt::from(50));
        assert_eq!(rational_valuation(&q, 5), Some(-2));
    }

    #[test]
    fn rational_strings() {
        let q = parse_rational("-2/3").unwrap();
        assert_eq!(format_rational(&q), "-2/3");
        assert_eq!(format_rational(&parse_rational("4").unwrap()), "4/1");
        assert_eq!(format_rational(&parse_rational("6/-4").unwrap()), "-3/2");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn inverses_and_binomials() {
        let m = BigInt::from(125);
        assert_eq!(mod_inverse(&BigInt::from(2), &m), Some(BigInt::from(63)));
        assert_eq!(mod_inverse(&BigInt::from(5), &m), None);
        assert_eq!(binomial(7, 3), BigInt::from(35));
        assert_eq!(binomial(3, 7), BigInt::zero());
    }
}
