use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::localized::LocalizedRational;
use super::{big_pow, mod_inverse, require_prime};
use crate::error::{Error, Result};

/// A congruence `x ≡ residue (mod p^exponent)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residue {
    pub p: u64,
    pub exponent: u32,
    pub residue: BigInt,
}

impl Residue {
    pub fn new(p: u64, exponent: u32, residue: BigInt) -> Self {
        Residue {
            p,
            exponent,
            residue,
        }
    }

    /// The image of a rational; fails if `p` divides its denominator.
    pub fn of_rational(q: &BigRational, p: u64, exponent: u32) -> Result<Self> {
        let m = big_pow(p, exponent);
        let inv = mod_inverse(q.denom(), &m)
            .ok_or_else(|| Error::Integrality(format!("{q} is not {p}-integral")))?;
        Ok(Residue::new(p, exponent, (q.numer() * inv).mod_floor(&m)))
    }
}

/// Chinese remaindering of prime-power congruences. Congruences at the same
/// prime must agree to the smaller exponent; the larger one is kept.
/// Returns `(residue, modulus)`.
pub fn crt_combine(residues: &[Residue]) -> Result<(BigInt, BigInt)> {
    if residues.is_empty() {
        return Err(Error::Missing("no residues to combine".into()));
    }
    let mut by_prime: Vec<Residue> = Vec::new();
    for r in residues {
        require_prime(r.p)?;
        match by_prime.iter_mut().find(|s| s.p == r.p) {
            Some(s) => {
                let e = s.exponent.min(r.exponent);
                let m = big_pow(r.p, e);
                if (&s.residue - &r.residue).mod_floor(&m) != BigInt::zero() {
                    return Err(Error::Reconstruction(format!(
                        "inconsistent residues modulo {}^{e}",
                        r.p
                    )));
                }
                if r.exponent > s.exponent {
                    *s = r.clone();
                }
            }
            None => by_prime.push(r.clone()),
        }
    }
    let mut x = BigInt::zero();
    let mut m = BigInt::one();
    for r in &by_prime {
        let mi = big_pow(r.p, r.exponent);
        let ri = r.residue.mod_floor(&mi);
        // x + m*t ≡ ri (mod mi)
        let inv = mod_inverse(&m, &mi).expect("prime powers are coprime");
        let t = ((ri - &x) * inv).mod_floor(&mi);
        x += &m * t;
        m *= mi;
    }
    Ok((x.mod_floor(&m), m))
}

/// Recovers the rational `n/d` with `|n|, d <= height` matching every
/// congruence, with `d` prime to the listed primes.
///
/// The default height is `floor(sqrt(m/2))` for the combined modulus `m`,
/// the largest bound for which the answer is unique. Requesting a larger
/// height is rejected.
pub fn rational_reconstruct(
    residues: &[Residue],
    height: Option<&BigInt>,
) -> Result<LocalizedRational> {
    let (r, m) = crt_combine(residues)?;
    let max_height: BigInt = (&m / 2u32).sqrt();
    let h = match height {
        Some(h) if h > &max_height => {
            return Err(Error::Reconstruction(format!(
                "height {h} exceeds the uniqueness bound {max_height} for modulus {m}"
            )))
        }
        Some(h) => h.clone(),
        None => max_height,
    };
    let mut primes: Vec<u64> = residues.iter().map(|r| r.p).collect();
    primes.sort_unstable();
    primes.dedup();

    // Half-extended Euclid on (m, r), tracking the cofactor of r.
    let (mut r0, mut r1) = (m.clone(), r);
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > h {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    let (mut n, mut d) = (r1, t1);
    if d.is_negative() {
        n = -n;
        d = -d;
    }
    if d.is_zero() || d > h || !d.gcd(&m).is_one() {
        return Err(Error::Reconstruction(format!(
            "no rational of height <= {h} modulo {m}"
        )));
    }
    LocalizedRational::new(BigRational::new(n, d), &primes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn recovers_small_rationals() {
        let r = Residue::of_rational(&q(-2, 3), 5, 8).unwrap();
        assert_eq!(rational_reconstruct(&[r], None).unwrap().value(), &q(-2, 3));
        let z = Residue::new(7, 3, BigInt::zero());
        assert!(rational_reconstruct(&[z], None).unwrap().value().is_zero());
    }

    #[test]
    fn combines_two_primes() {
        let x = q(1234, 997);
        let rs = [
            Residue::of_rational(&x, 5, 6).unwrap(),
            Residue::of_rational(&x, 7, 6).unwrap(),
        ];
        let (_, m) = crt_combine(&rs).unwrap();
        assert_eq!(m, BigInt::from(35u64.pow(6)));
        let back = rational_reconstruct(&rs, Some(&BigInt::from(10_000))).unwrap();
        assert_eq!(back.value(), &x);
        assert_eq!(back.primes(), &[5, 7]);
    }

    #[test]
    fn height_bound_is_enforced() {
        let r = Residue::new(5, 1, BigInt::from(2));
        assert!(matches!(
            rational_reconstruct(std::slice::from_ref(&r), Some(&BigInt::from(2))),
            Err(Error::Reconstruction(_))
        ));
        // With the default height 1 there is no rational congruent to 2.
        assert!(rational_reconstruct(&[r], None).is_err());
    }

    #[test]
    fn inconsistent_same_prime_residues() {
        let rs = [
            Residue::new(5, 2, BigInt::from(3)),
            Residue::new(5, 3, BigInt::from(4)),
        ];
        assert!(crt_combine(&rs).is_err());
    }
}
