use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::Value;

use super::{format_rational, parse_rational, PadicCtx, PadicTrunc};
use crate::error::{Error, Result};

/// A coefficient ring for truncated series.
///
/// Exact rationals carry no context. Truncated p-adics carry the prime and
/// working modulus in [`Coefficient::Ctx`] so constants can be built without
/// a template value.
pub trait Coefficient: Clone + Debug + PartialEq + Send + Sync + 'static {
    type Ctx: Clone + Debug + PartialEq + Send + Sync;

    fn zero_in(ctx: &Self::Ctx) -> Self;
    fn one_in(ctx: &Self::Ctx) -> Self;
    fn from_bigint(n: &BigInt, ctx: &Self::Ctx) -> Self;
    fn from_rational(q: &BigRational, ctx: &Self::Ctx) -> Result<Self>;
    /// Embeds a truncated p-adic; only meaningful for p-adic carriers.
    fn from_padic(x: &PadicTrunc, ctx: &Self::Ctx) -> Result<Self>;
    /// Image in the p-adic ring of `ctx`.
    fn to_padic(&self, ctx: &PadicCtx) -> Result<PadicTrunc>;

    fn from_i64(n: i64, ctx: &Self::Ctx) -> Self {
        Self::from_bigint(&BigInt::from(n), ctx)
    }

    /// Zero, or indistinguishable from zero at the known precision.
    fn is_zero(&self) -> bool;
    fn is_unit(&self) -> bool;
    /// Whether powers of `self` converge to zero, so `1 + self` can be
    /// inverted by a geometric series.
    fn is_nilpotent(&self) -> bool;

    fn plus(&self, other: &Self) -> Self;
    fn minus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn inverse(&self) -> Result<Self>;
    /// Exact division by the prime `p`.
    fn div_prime(&self, p: u64) -> Result<Self>;

    /// Guaranteed digits, `None` for exact values.
    fn digits(&self) -> Option<u32>;
    /// Valuation at the carrier prime, capped by the known digits.
    fn padic_valuation(&self) -> Option<u32>;
    /// Forget all but `g` digits. Identity on exact values.
    fn with_digits(&self, g: u32) -> Self;

    /// Exact rational value, when there is one.
    fn to_rational(&self) -> Option<BigRational>;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, ctx: &Self::Ctx) -> Result<Self>;
}

impl Coefficient for BigRational {
    type Ctx = ();

    fn zero_in(_: &()) -> Self {
        BigRational::zero()
    }

    fn one_in(_: &()) -> Self {
        BigRational::one()
    }

    fn from_bigint(n: &BigInt, _: &()) -> Self {
        BigRational::from_integer(n.clone())
    }

    fn from_rational(q: &BigRational, _: &()) -> Result<Self> {
        Ok(q.clone())
    }

    fn from_padic(x: &PadicTrunc, _: &()) -> Result<Self> {
        Err(Error::Domain(format!("{x} has no exact rational value")))
    }

    fn to_padic(&self, ctx: &PadicCtx) -> Result<PadicTrunc> {
        PadicTrunc::from_rational(self, ctx)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn is_unit(&self) -> bool {
        !Zero::is_zero(self)
    }

    fn is_nilpotent(&self) -> bool {
        Zero::is_zero(self)
    }

    fn plus(&self, other: &Self) -> Self {
        self + other
    }

    fn minus(&self, other: &Self) -> Self {
        self - other
    }

    fn times(&self, other: &Self) -> Self {
        self * other
    }

    fn negated(&self) -> Self {
        -self
    }

    fn inverse(&self) -> Result<Self> {
        if Zero::is_zero(self) {
            return Err(Error::NotInvertible("zero rational".into()));
        }
        Ok(self.recip())
    }

    fn div_prime(&self, p: u64) -> Result<Self> {
        Ok(self / BigInt::from(p))
    }

    fn digits(&self) -> Option<u32> {
        None
    }

    fn padic_valuation(&self) -> Option<u32> {
        None
    }

    fn with_digits(&self, _: u32) -> Self {
        self.clone()
    }

    fn to_rational(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value, _: &()) -> Result<Self> {
        match v {
            Value::String(s) => parse_rational(s),
            Value::Number(n) => parse_rational(&n.to_string()),
            other => Err(Error::Parse(format!("expected rational string, got {other}"))),
        }
    }
}

/// The handful of ring operations the closed-form polynomials need
/// (`C_p`, the two-prime commutator, Fermat quotients).
pub trait RingOps: Clone {
    fn ring_add(&self, other: &Self) -> Self;
    fn ring_sub(&self, other: &Self) -> Self;
    fn ring_mul(&self, other: &Self) -> Self;
    fn ring_scale(&self, n: &BigInt) -> Self;
    /// Exact division by the prime `p`, failing when it does not divide.
    fn ring_div_prime(&self, p: u64) -> Result<Self>;
    fn ring_zero_like(&self) -> Self;
    fn ring_one_like(&self) -> Self;

    fn ring_pow(&self, e: u32) -> Self {
        let mut acc = self.ring_one_like();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.ring_mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.ring_mul(&base);
            }
        }
        acc
    }
}

impl RingOps for BigInt {
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }

    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }

    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }

    fn ring_scale(&self, n: &BigInt) -> Self {
        self * n
    }

    fn ring_div_prime(&self, p: u64) -> Result<Self> {
        let (q, r) = self.div_rem(&BigInt::from(p));
        if !r.is_zero() {
            return Err(Error::Integrality(format!("{p} does not divide {self}")));
        }
        Ok(q)
    }

    fn ring_zero_like(&self) -> Self {
        BigInt::zero()
    }

    fn ring_one_like(&self) -> Self {
        BigInt::one()
    }
}

impl RingOps for BigRational {
    fn ring_add(&self, other: &Self) -> Self {
        self + other
    }

    fn ring_sub(&self, other: &Self) -> Self {
        self - other
    }

    fn ring_mul(&self, other: &Self) -> Self {
        self * other
    }

    fn ring_scale(&self, n: &BigInt) -> Self {
        self * BigRational::from_integer(n.clone())
    }

    fn ring_div_prime(&self, p: u64) -> Result<Self> {
        Ok(self / BigInt::from(p))
    }

    fn ring_zero_like(&self) -> Self {
        BigRational::zero()
    }

    fn ring_one_like(&self) -> Self {
        BigRational::one()
    }
}
