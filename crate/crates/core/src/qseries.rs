//! Truncated series in one variable: Laurent series in `q` and power series
//! in `t`.
//!
//! A series stores its known coefficients and an exclusive order `N`:
//! every coefficient below `N` is exact, nothing is known from `N` on.
//! `None` marks an exact (finite) Laurent polynomial. For p-adic
//! coefficients the series also carries a digit floor shared by every
//! coefficient, absent ones included.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::arith::{padic_binomial, Coefficient, PadicCtx, PadicTrunc};
use crate::deltajet::BaseVar;
use crate::error::{Error, Result};

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn min_opt_u32(a: Option<u32>, b: Option<u32>) -> Option<u32> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// An exponent for `u^γ`: a rational integer or a p-adic integer.
#[derive(Clone, Debug, PartialEq)]
pub enum Gamma {
    Int(i64),
    Padic(PadicTrunc),
}

#[derive(Clone)]
pub struct Series1<C: Coefficient> {
    var: BaseVar,
    ctx: C::Ctx,
    coeffs: BTreeMap<i64, C>,
    order: Option<i64>,
    precision: Option<u32>,
}

impl<C: Coefficient> Series1<C> {
    pub fn zero(var: BaseVar, ctx: &C::Ctx, order: Option<i64>) -> Self {
        Series1 {
            var,
            ctx: ctx.clone(),
            coeffs: BTreeMap::new(),
            order,
            precision: C::one_in(ctx).digits(),
        }
    }

    pub fn from_coeffs<I: IntoIterator<Item = (i64, C)>>(
        var: BaseVar,
        ctx: &C::Ctx,
        coeffs: I,
        order: Option<i64>,
    ) -> Result<Self> {
        let mut s = Self::zero(var, ctx, order);
        for (e, c) in coeffs {
            if e < 0 && !var.is_laurent() {
                return Err(Error::Domain(format!(
                    "negative power of {} in a power series",
                    var.name()
                )));
            }
            match s.coeffs.get_mut(&e) {
                Some(x) => *x = x.plus(&c),
                None => {
                    s.coeffs.insert(e, c);
                }
            }
        }
        s.normalize();
        Ok(s)
    }

    /// Coefficients `a_0, a_1, …` of a power series known below `values.len()`.
    pub fn from_dense(var: BaseVar, ctx: &C::Ctx, values: Vec<C>) -> Self {
        let n = values.len() as i64;
        Self::from_coeffs(var, ctx, (0..).zip(values), Some(n)).expect("exponents are nonnegative")
    }

    pub fn constant(var: BaseVar, ctx: &C::Ctx, c: C) -> Self {
        Self::from_coeffs(var, ctx, [(0, c)], None).expect("constant term is always valid")
    }

    pub fn one(var: BaseVar, ctx: &C::Ctx) -> Self {
        Self::constant(var, ctx, C::one_in(ctx))
    }

    pub fn monomial(var: BaseVar, ctx: &C::Ctx, e: i64, c: C) -> Result<Self> {
        Self::from_coeffs(var, ctx, [(e, c)], None)
    }

    /// The variable itself.
    pub fn gen(var: BaseVar, ctx: &C::Ctx) -> Self {
        Self::monomial(var, ctx, 1, C::one_in(ctx)).expect("the variable is always valid")
    }

    fn normalize(&mut self) {
        if let Some(n) = self.order {
            self.coeffs.retain(|&e, _| e < n);
        }
        let floor = self
            .coeffs
            .values()
            .fold(self.precision, |acc, c| min_opt_u32(acc, c.digits()));
        self.precision = floor;
        match floor {
            Some(g) => {
                let coeffs = std::mem::take(&mut self.coeffs);
                self.coeffs = coeffs
                    .into_iter()
                    .map(|(e, c)| (e, c.with_digits(g)))
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
            }
            None => self.coeffs.retain(|_, c| !c.is_zero()),
        }
    }

    fn with_coeffs(&self, coeffs: BTreeMap<i64, C>, order: Option<i64>, precision: Option<u32>) -> Self {
        let mut s = Series1 {
            var: self.var,
            ctx: self.ctx.clone(),
            coeffs,
            order,
            precision,
        };
        s.normalize();
        s
    }

    fn same_shape(&self, other: &Self) {
        assert!(
            self.var == other.var && self.ctx == other.ctx,
            "series in different rings"
        );
    }

    pub fn var(&self) -> BaseVar {
        self.var
    }

    pub fn ctx(&self) -> &C::Ctx {
        &self.ctx
    }

    /// Exclusive truncation order; `None` for exact polynomials.
    pub fn order(&self) -> Option<i64> {
        self.order
    }

    pub fn precision(&self) -> Option<u32> {
        self.precision
    }

    pub fn coeff(&self, e: i64) -> C {
        self.coeffs
            .get(&e)
            .cloned()
            .unwrap_or_else(|| C::zero_in(&self.ctx))
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &C)> {
        self.coeffs.iter().map(|(&e, c)| (e, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn valuation(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    fn effective_valuation(&self) -> Option<i64> {
        self.valuation().or(self.order)
    }

    fn coefficient_valuation(&self) -> Option<u32> {
        self.coeffs
            .values()
            .filter_map(|c| c.padic_valuation())
            .min()
            .or(self.precision)
    }

    pub fn truncate(&self, order: Option<i64>) -> Self {
        self.with_coeffs(self.coeffs.clone(), min_opt(self.order, order), self.precision)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_shape(other);
        let mut coeffs = self.coeffs.clone();
        for (&e, c) in &other.coeffs {
            match coeffs.get_mut(&e) {
                Some(x) => *x = x.plus(c),
                None => {
                    coeffs.insert(e, c.clone());
                }
            }
        }
        self.with_coeffs(
            coeffs,
            min_opt(self.order, other.order),
            min_opt_u32(self.precision, other.precision),
        )
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(&e, c)| (e, c.negated())).collect();
        self.with_coeffs(coeffs, self.order, self.precision)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &C) -> Self {
        self.mul(&Self::constant(self.var, &self.ctx, c.clone()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_shape(other);
        let (va, vb) = (self.effective_valuation(), other.effective_valuation());
        let order = min_opt(
            self.order.and_then(|n| vb.map(|v| n + v)),
            other.order.and_then(|n| va.map(|v| n + v)),
        );
        let (ca, cb) = (self.coefficient_valuation(), other.coefficient_valuation());
        let precision = min_opt_u32(
            self.precision.and_then(|g| cb.map(|v| g + v)),
            other.precision.and_then(|g| ca.map(|v| g + v)),
        );
        let mut coeffs: BTreeMap<i64, C> = BTreeMap::new();
        for (&ea, a) in &self.coeffs {
            for (&eb, b) in &other.coeffs {
                let e = ea + eb;
                if order.is_some_and(|n| e >= n) {
                    break;
                }
                let t = a.times(b);
                match coeffs.get_mut(&e) {
                    Some(x) => *x = x.plus(&t),
                    None => {
                        coeffs.insert(e, t);
                    }
                }
            }
        }
        self.with_coeffs(coeffs, order, precision)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.var, &self.ctx);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse. The leading coefficient must be a unit; an
    /// exact polynomial with more than one term must be truncated first.
    pub fn invert(&self) -> Result<Self> {
        let v = self
            .valuation()
            .ok_or_else(|| Error::NotInvertible("zero series".into()))?;
        if v != 0 && !self.var.is_laurent() {
            return Err(Error::NotInvertible(format!(
                "{}^{v} is not a unit of the power-series ring",
                self.var.name()
            )));
        }
        let lead = &self.coeffs[&v];
        if !lead.is_unit() {
            return Err(Error::NotInvertible(format!(
                "leading coefficient {lead:?} is not a unit"
            )));
        }
        let c_inv = lead.inverse()?;
        // u = c q^v w with w known to q^{N-v}; so is w^{-1}.
        let out_len = match self.order {
            Some(n) => n - v,
            None if self.coeffs.len() == 1 => 1,
            None => {
                return Err(Error::Domain(
                    "the inverse is an infinite series; truncate the input first".into(),
                ))
            }
        };
        let mut b: Vec<C> = Vec::with_capacity(out_len.max(0) as usize);
        for n in 0..out_len {
            let mut s = if n == 0 { C::one_in(&self.ctx) } else { C::zero_in(&self.ctx) };
            for k in 1..=n {
                if let Some(a) = self.coeffs.get(&(v + k)) {
                    s = s.minus(&a.times(&b[(n - k) as usize]));
                }
            }
            b.push(s.times(&c_inv));
        }
        let coeffs = b.into_iter().enumerate().map(|(i, c)| (i as i64 - v, c)).collect();
        let order = self.order.map(|n| n - 2 * v);
        Ok(self.with_coeffs(coeffs, order, self.precision))
    }

    /// `u^e` for a signed exponent.
    pub fn pow_int(&self, e: i64) -> Result<Self> {
        if e >= 0 {
            Ok(self.pow(e as u32))
        } else {
            Ok(self.invert()?.pow(e.unsigned_abs() as u32))
        }
    }

    /// `log(1 + x) = Σ (-1)^{n-1} x^n / n`, truncated at `order`.
    pub fn log1p(&self, order: i64) -> Result<Self> {
        let x = self.truncate(Some(order));
        match x.effective_valuation() {
            Some(v) if v >= 1 => {}
            None => return Ok(x),
            Some(_) => {
                return Err(Error::Domain(
                    "logarithm needs a series of positive valuation".into(),
                ))
            }
        }
        let mut acc = Self::zero(self.var, &self.ctx, Some(order));
        let mut power = x.clone();
        for n in 1..order.max(1) {
            if power.is_zero() {
                break;
            }
            let sign = if n % 2 == 1 { 1 } else { -1 };
            let c = C::from_rational(&BigRational::new(BigInt::from(sign), BigInt::from(n)), &self.ctx)?;
            acc = acc.add(&power.scale(&c));
            power = power.mul(&x);
        }
        Ok(acc)
    }

    /// `u^γ`. Integer exponents work for any unit; a p-adic exponent needs
    /// `u = 1 + x` with `x` of positive valuation and uses the binomial
    /// series `Σ C(γ,k) x^k`.
    pub fn pow_weight(&self, gamma: &Gamma) -> Result<Self> {
        let g = match gamma {
            Gamma::Int(e) => return self.pow_int(*e),
            Gamma::Padic(g) => g,
        };
        let one = Self::one(self.var, &self.ctx);
        let x = self.sub(&one);
        if x.effective_valuation().is_some_and(|v| v < 1) {
            return Err(Error::Domain(
                "a p-adic exponent needs a series of the form 1 + (positive valuation)".into(),
            ));
        }
        let order = match x.order {
            Some(n) => n,
            None if x.is_zero() => return Ok(one),
            None => {
                return Err(Error::Domain(
                    "a p-adic power is an infinite series; truncate the input first".into(),
                ))
            }
        };
        let mut acc = Self::zero(self.var, &self.ctx, Some(order));
        let mut power = one.truncate(Some(order));
        for k in 0..order.max(0) {
            if power.is_zero() {
                break;
            }
            let c = C::from_padic(&padic_binomial(g, k as u64)?, &self.ctx)?;
            acc = acc.add(&power.scale(&c));
            power = power.mul(&x);
        }
        Ok(acc)
    }

    /// `Σ a_n q^n ↦ Σ a_n q^{pn}`; coefficients are fixed by the lift.
    pub fn frobenius_sub(&self, p: u64) -> Self {
        let p = p as i64;
        let coeffs = self.coeffs.iter().map(|(&e, c)| (p * e, c.clone())).collect();
        self.with_coeffs(coeffs, self.order.map(|n| p * n), self.precision)
    }

    /// Coefficientwise change of carrier.
    pub fn map_coefficients<D: Coefficient, F: Fn(&C) -> Result<D>>(
        &self,
        ctx: &D::Ctx,
        f: F,
    ) -> Result<Series1<D>> {
        let mut coeffs = BTreeMap::new();
        for (&e, c) in &self.coeffs {
            coeffs.insert(e, f(c)?);
        }
        let mut s = Series1 {
            var: self.var,
            ctx: ctx.clone(),
            coeffs,
            order: self.order,
            precision: min_opt_u32(self.precision, D::one_in(ctx).digits()),
        };
        s.normalize();
        Ok(s)
    }

    /// Reduction into `Z/p^M` coefficients.
    pub fn to_padic(&self, ctx: &PadicCtx) -> Result<Series1<PadicTrunc>> {
        self.map_coefficients(ctx, |c| c.to_padic(ctx))
    }

    /// Smallest exponent where two series differ below their common order.
    pub fn first_difference(&self, other: &Self) -> Option<i64> {
        self.sub(other).valuation()
    }
}

/// `δ_0 a = (a(q^p) - a^p) / p` with p-adic coefficients mod `p^M`.
pub fn delta0<C: Coefficient>(a: &Series1<C>, p: u64, m: u32) -> Result<Series1<PadicTrunc>> {
    let ctx = PadicCtx::new(p, m)?;
    let a = a.to_padic(&ctx)?;
    let diff = a.frobenius_sub(p).sub(&a.pow(p as u32));
    if diff.precision == Some(0) {
        return Err(Error::PrecisionExhausted(format!("no digits left to divide by {p}")));
    }
    let mut coeffs = BTreeMap::new();
    for (&e, c) in &diff.coeffs {
        coeffs.insert(e, c.div_p()?);
    }
    Ok(diff.with_coeffs(coeffs, diff.order, diff.precision.map(|g| g - 1)))
}

impl<C: Coefficient> PartialEq for Series1<C> {
    fn eq(&self, other: &Self) -> bool {
        self.var == other.var
            && self.ctx == other.ctx
            && self.order == other.order
            && self.precision == other.precision
            && self.coeffs == other.coeffs
    }
}

impl<C: Coefficient> fmt::Debug for Series1<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl<C: Coefficient> fmt::Display for Series1<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let x = self.var.name();
        let mut first = true;
        for (&e, c) in &self.coeffs {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            let cs = match c.to_rational() {
                Some(q) => q.to_string(),
                None => format!("({c:?})"),
            };
            match e {
                0 => write!(f, "{cs}")?,
                1 => write!(f, "{cs}*{x}")?,
                e => write!(f, "{cs}*{x}^{e}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        if let Some(n) = self.order {
            write!(f, " + O({x}^{n})")?;
        }
        if let Some(g) = self.precision {
            write!(f, " [{g} digits]")?;
        }
        Ok(())
    }
}
