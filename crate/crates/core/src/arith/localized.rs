use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::coeff::RingOps;
use super::{format_rational, is_localized_at, require_prime};
use crate::error::{Error, Result};

/// A rational number whose denominator is prime to every prime of an
/// active set, i.e. an element of the semilocal ring `Z_(P)`.
#[derive(Clone, PartialEq, Eq)]
pub struct LocalizedRational {
    value: BigRational,
    primes: Arc<[u64]>,
}

impl LocalizedRational {
    pub fn new(value: BigRational, primes: &[u64]) -> Result<Self> {
        for &p in primes {
            require_prime(p)?;
        }
        let mut sorted = primes.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != primes.len() {
            return Err(Error::Domain("active primes must be distinct".into()));
        }
        Self::with_primes(value, sorted.into())
    }

    fn with_primes(value: BigRational, primes: Arc<[u64]>) -> Result<Self> {
        if !is_localized_at(&value, &primes) {
            return Err(Error::Integrality(format!(
                "denominator of {} meets {:?}",
                format_rational(&value),
                primes
            )));
        }
        Ok(LocalizedRational { value, primes })
    }

    pub fn from_int(n: i64, primes: &[u64]) -> Result<Self> {
        Self::new(BigRational::from_integer(BigInt::from(n)), primes)
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn numer(&self) -> &BigInt {
        self.value.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.value.denom()
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn into_rational(self) -> BigRational {
        self.value
    }

    fn same(&self, value: BigRational) -> Self {
        LocalizedRational {
            value,
            primes: self.primes.clone(),
        }
    }

    fn check(&self, other: &Self) {
        assert!(
            self.primes == other.primes,
            "mixing prime sets {:?} and {:?}",
            self.primes,
            other.primes
        );
    }

    /// The Fermat quotient `(a - a^p)/p` for a prime `p` of the active set.
    pub fn fermat_delta(&self, p: u64) -> Result<Self> {
        if !self.primes.contains(&p) {
            return Err(Error::Domain(format!(
                "{p} is not in the active prime set {:?}",
                self.primes
            )));
        }
        let ap = num_traits::pow(self.value.clone(), p as usize);
        Self::with_primes((&self.value - ap) / BigInt::from(p), self.primes.clone())
    }
}

impl fmt::Debug for LocalizedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} in Z_({:?})", format_rational(&self.value), self.primes)
    }
}

impl fmt::Display for LocalizedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.value))
    }
}

impl RingOps for LocalizedRational {
    fn ring_add(&self, other: &Self) -> Self {
        self.check(other);
        self.same(&self.value + &other.value)
    }

    fn ring_sub(&self, other: &Self) -> Self {
        self.check(other);
        self.same(&self.value - &other.value)
    }

    fn ring_mul(&self, other: &Self) -> Self {
        self.check(other);
        self.same(&self.value * &other.value)
    }

    fn ring_scale(&self, n: &BigInt) -> Self {
        self.same(&self.value * BigRational::from_integer(n.clone()))
    }

    fn ring_div_prime(&self, p: u64) -> Result<Self> {
        Self::with_primes(&self.value / BigInt::from(p), self.primes.clone())
    }

    fn ring_zero_like(&self) -> Self {
        self.same(BigRational::zero())
    }

    fn ring_one_like(&self) -> Self {
        self.same(BigRational::one())
    }
}
