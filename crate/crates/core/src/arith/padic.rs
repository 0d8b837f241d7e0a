use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::coeff::{Coefficient, RingOps};
use super::{mod_inverse, require_prime, valuation};
use crate::error::{Error, Result};

/// Prime and working modulus exponent shared by a family of p-adic values.
#[derive(Clone)]
pub struct PadicCtx {
    p: u64,
    m: u32,
    // powers[k] = p^k for k in 0..=m
    powers: Arc<Vec<BigInt>>,
}

impl PadicCtx {
    pub fn new(p: u64, m: u32) -> Result<Self> {
        require_prime(p)?;
        if m == 0 {
            return Err(Error::Domain("modulus exponent must be positive".into()));
        }
        let mut powers = Vec::with_capacity(m as usize + 1);
        let mut acc = BigInt::one();
        for _ in 0..=m {
            powers.push(acc.clone());
            acc *= p;
        }
        Ok(PadicCtx {
            p,
            m,
            powers: Arc::new(powers),
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn modulus(&self) -> &BigInt {
        &self.powers[self.m as usize]
    }

    pub fn pow(&self, k: u32) -> &BigInt {
        &self.powers[k.min(self.m) as usize]
    }
}

impl PartialEq for PadicCtx {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.m == other.m
    }
}

impl Eq for PadicCtx {}

impl fmt::Debug for PadicCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}/{}^{}", self.p, self.p, self.m)
    }
}

/// A p-adic integer known modulo `p^digits`, stored as a residue mod `p^M`.
#[derive(Clone)]
pub struct PadicTrunc {
    ctx: PadicCtx,
    residue: BigInt,
    digits: u32,
}

impl PadicTrunc {
    /// Full-precision image of an integer.
    pub fn from_int(n: &BigInt, ctx: &PadicCtx) -> Self {
        Self::with_precision(n.clone(), ctx.m, ctx)
    }

    /// Image of a rational whose denominator is prime to `p`.
    pub fn from_rational(q: &BigRational, ctx: &PadicCtx) -> Result<Self> {
        let inv = mod_inverse(q.denom(), ctx.modulus()).ok_or_else(|| {
            Error::Integrality(format!("{q} is not {}-integral", ctx.p))
        })?;
        Ok(Self::from_int(&(q.numer() * inv), ctx))
    }

    /// A value known to `digits` digits; extra digits of `n` are discarded.
    pub fn with_precision(n: BigInt, digits: u32, ctx: &PadicCtx) -> Self {
        let digits = digits.min(ctx.m);
        let residue = n.mod_floor(ctx.pow(digits));
        PadicTrunc {
            ctx: ctx.clone(),
            residue,
            digits,
        }
    }

    pub fn ctx(&self) -> &PadicCtx {
        &self.ctx
    }

    pub fn p(&self) -> u64 {
        self.ctx.p
    }

    pub fn m(&self) -> u32 {
        self.ctx.m
    }

    pub fn residue(&self) -> &BigInt {
        &self.residue
    }

    pub fn guaranteed_digits(&self) -> u32 {
        self.digits
    }

    /// Representative in `(-p^g/2, p^g/2]`, handy for printing small values.
    pub fn symmetric(&self) -> BigInt {
        let m = self.ctx.pow(self.digits);
        let half: BigInt = m / 2u32;
        if self.residue > half {
            &self.residue - m
        } else {
            self.residue.clone()
        }
    }

    /// Valuation, capped by the guaranteed digits.
    pub fn val(&self) -> u32 {
        valuation(&self.residue, self.ctx.p)
            .unwrap_or(self.digits)
            .min(self.digits)
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    fn check_ctx(&self, other: &Self) {
        assert!(
            self.ctx == other.ctx,
            "mixing p-adic contexts {:?} and {:?}",
            self.ctx,
            other.ctx
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check_ctx(other);
        let g = self.digits.min(other.digits);
        Self::with_precision(&self.residue + &other.residue, g, &self.ctx)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.check_ctx(other);
        let g = self.digits.min(other.digits);
        Self::with_precision(&self.residue - &other.residue, g, &self.ctx)
    }

    pub fn neg(&self) -> Self {
        Self::with_precision(-&self.residue, self.digits, &self.ctx)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check_ctx(other);
        let g = (self.digits + other.val())
            .min(other.digits + self.val())
            .min(self.ctx.m);
        Self::with_precision(&self.residue * &other.residue, g, &self.ctx)
    }

    pub fn pow(&self, e: u32) -> Self {
        self.ring_pow(e)
    }

    /// Inverse of a unit, to the same number of digits.
    pub fn inv(&self) -> Result<Self> {
        if self.digits == 0 || self.val() > 0 {
            return Err(Error::NotInvertible(format!(
                "{} is not a {}-adic unit",
                self.residue, self.ctx.p
            )));
        }
        let m = self.ctx.pow(self.digits);
        let inv = mod_inverse(&self.residue, m).expect("unit has an inverse");
        Ok(Self::with_precision(inv, self.digits, &self.ctx))
    }

    /// Exact division by `p`; consumes one guaranteed digit.
    pub fn div_p(&self) -> Result<Self> {
        if self.digits == 0 {
            return Err(Error::PrecisionExhausted(format!(
                "no digits left to divide by {}",
                self.ctx.p
            )));
        }
        let (q, r) = self.residue.div_rem(&BigInt::from(self.ctx.p));
        if !r.is_zero() {
            return Err(Error::Integrality(format!(
                "{} is not divisible by {}",
                self.residue, self.ctx.p
            )));
        }
        Ok(Self::with_precision(q, self.digits - 1, &self.ctx))
    }

    /// The Fermat quotient `(a - a^p)/p`.
    pub fn fermat_delta(&self, p: u64) -> Result<Self> {
        if p != self.ctx.p {
            return Err(Error::Domain(format!(
                "cannot take a {p}-derivation of a {}-adic value",
                self.ctx.p
            )));
        }
        self.sub(&self.pow(p as u32)).div_p()
    }
}

impl PartialEq for PadicTrunc {
    /// Compares residues modulo `p^min(g1, g2)`.
    fn eq(&self, other: &Self) -> bool {
        if self.ctx != other.ctx {
            return false;
        }
        let g = self.digits.min(other.digits);
        (&self.residue - &other.residue)
            .mod_floor(self.ctx.pow(g))
            .is_zero()
    }
}

impl fmt::Debug for PadicTrunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} + O({}^{})",
            self.residue, self.ctx.p, self.digits
        )
    }
}

impl fmt::Display for PadicTrunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Coefficient for PadicTrunc {
    type Ctx = PadicCtx;

    fn zero_in(ctx: &PadicCtx) -> Self {
        Self::from_int(&BigInt::zero(), ctx)
    }

    fn one_in(ctx: &PadicCtx) -> Self {
        Self::from_int(&BigInt::one(), ctx)
    }

    fn from_bigint(n: &BigInt, ctx: &PadicCtx) -> Self {
        Self::from_int(n, ctx)
    }

    fn from_rational(q: &BigRational, ctx: &PadicCtx) -> Result<Self> {
        PadicTrunc::from_rational(q, ctx)
    }

    fn from_padic(x: &PadicTrunc, ctx: &PadicCtx) -> Result<Self> {
        x.to_padic(ctx)
    }

    fn to_padic(&self, ctx: &PadicCtx) -> Result<PadicTrunc> {
        if self.ctx.p != ctx.p {
            return Err(Error::Domain(format!(
                "cannot move a {}-adic value to {}-adics",
                self.ctx.p, ctx.p
            )));
        }
        let g = self.digits.min(ctx.m);
        Ok(Self::with_precision(self.residue.clone(), g, ctx))
    }

    fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    fn is_unit(&self) -> bool {
        self.digits > 0 && self.val() == 0
    }

    fn is_nilpotent(&self) -> bool {
        self.val() > 0 || self.residue.is_zero()
    }

    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }

    fn minus(&self, other: &Self) -> Self {
        self.sub(other)
    }

    fn times(&self, other: &Self) -> Self {
        self.mul(other)
    }

    fn negated(&self) -> Self {
        self.neg()
    }

    fn inverse(&self) -> Result<Self> {
        self.inv()
    }

    fn div_prime(&self, p: u64) -> Result<Self> {
        if p == self.ctx.p {
            return self.div_p();
        }
        let inv = PadicTrunc::from_int(&BigInt::from(p), &self.ctx).inv()?;
        Ok(self.mul(&inv))
    }

    fn digits(&self) -> Option<u32> {
        Some(self.digits)
    }

    fn padic_valuation(&self) -> Option<u32> {
        Some(self.val())
    }

    fn with_digits(&self, g: u32) -> Self {
        Self::with_precision(self.residue.clone(), g.min(self.digits), &self.ctx)
    }

    fn to_rational(&self) -> Option<BigRational> {
        None
    }

    fn to_json(&self) -> Value {
        json!({
            "p": self.ctx.p,
            "M": self.ctx.m,
            "residue": self.residue.to_string(),
            "digits": self.digits,
        })
    }

    fn from_json(v: &Value, ctx: &PadicCtx) -> Result<Self> {
        let field = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::Parse(format!("p-adic value lacks {k:?}")))
        };
        let p = field("p")?.as_u64();
        let m = field("M")?.as_u64();
        if p != Some(ctx.p) || m != Some(ctx.m as u64) {
            return Err(Error::Parse(format!(
                "p-adic value does not match context {ctx:?}"
            )));
        }
        let residue: BigInt = field("residue")?
            .as_str()
            .ok_or_else(|| Error::Parse("residue must be a decimal string".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad residue: {e}")))?;
        let digits = field("digits")?
            .as_u64()
            .ok_or_else(|| Error::Parse("digits must be an integer".into()))?;
        if digits > ctx.m as u64 {
            return Err(Error::Parse("digits exceed the modulus exponent".into()));
        }
        if residue < BigInt::zero() || &residue >= ctx.modulus() {
            return Err(Error::Parse("residue is not reduced".into()));
        }
        Ok(Self::with_precision(residue, digits as u32, ctx))
    }
}

impl RingOps for PadicTrunc {
    fn ring_add(&self, other: &Self) -> Self {
        self.add(other)
    }

    fn ring_sub(&self, other: &Self) -> Self {
        self.sub(other)
    }

    fn ring_mul(&self, other: &Self) -> Self {
        self.mul(other)
    }

    fn ring_scale(&self, n: &BigInt) -> Self {
        self.mul(&PadicTrunc::from_int(n, &self.ctx))
    }

    fn ring_div_prime(&self, p: u64) -> Result<Self> {
        Coefficient::div_prime(self, p)
    }

    fn ring_zero_like(&self) -> Self {
        Coefficient::zero_in(&self.ctx)
    }

    fn ring_one_like(&self) -> Self {
        Coefficient::one_in(&self.ctx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: u64, m: u32) -> PadicCtx {
        PadicCtx::new(p, m).unwrap()
    }

    fn int(n: i64, c: &PadicCtx) -> PadicTrunc {
        PadicTrunc::from_int(&BigInt::from(n), c)
    }

    #[test]
    fn fermat_delta_small_values() {
        let c = ctx(5, 6);
        assert!(int(1, &c).fermat_delta(5).unwrap().is_zero());
        let d = int(2, &c).fermat_delta(5).unwrap();
        assert_eq!(d.symmetric(), BigInt::from(-6));
        assert_eq!(d.guaranteed_digits(), 5);
        let c3 = ctx(3, 8);
        assert_eq!(int(6, &c3).fermat_delta(3).unwrap().symmetric(), BigInt::from(-70));
        assert!(int(2, &c).fermat_delta(7).is_err());
    }

    #[test]
    fn digits_run_out() {
        let c = ctx(5, 2);
        let a = int(25, &c);
        let a1 = a.div_p().unwrap();
        let a2 = a1.div_p().unwrap();
        assert_eq!(a2.guaranteed_digits(), 0);
        assert!(matches!(a2.div_p(), Err(Error::PrecisionExhausted(_))));
        assert!(matches!(int(7, &c).div_p(), Err(Error::Integrality(_))));
    }

    #[test]
    fn equality_uses_common_precision() {
        let c = ctx(5, 4);
        let a = PadicTrunc::with_precision(BigInt::from(3), 1, &c);
        let b = int(8, &c);
        assert_eq!(a, b);
        assert_ne!(int(3, &c), b);
    }

    #[test]
    fn multiplication_gains_from_valuation() {
        let c = ctx(5, 6);
        let a = PadicTrunc::with_precision(BigInt::from(5), 3, &c);
        let b = PadicTrunc::with_precision(BigInt::from(10), 3, &c);
        assert_eq!(a.mul(&b).guaranteed_digits(), 4);
    }

    #[test]
    fn rational_images_and_inverse() {
        let c = ctx(5, 8);
        let q = BigRational::new(BigInt::from(-2), BigInt::from(3));
        let x = PadicTrunc::from_rational(&q, &c).unwrap();
        assert_eq!(x.mul(&int(3, &c)), int(-2, &c));
        assert_eq!(x.inv().unwrap().mul(&x), int(1, &c));
        assert!(PadicTrunc::from_rational(&BigRational::new(1.into(), 5.into()), &c).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = ctx(7, 5);
        let x = PadicTrunc::with_precision(BigInt::from(-3), 4, &c);
        let back = PadicTrunc::from_json(&x.to_json(), &c).unwrap();
        assert_eq!(back.residue(), x.residue());
        assert_eq!(back.guaranteed_digits(), 4);
    }
}
