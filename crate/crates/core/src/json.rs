//! JSON forms of series and reports.
//!
//! Rationals are `"n/d"` strings and p-adic coefficients are
//! `{"p","M","residue","digits"}` objects. A p-adic series also carries
//! `"modulus": {"p","M"}` so the coefficient ring is known before the terms
//! are read.
//!
//! * one-variable series: `{"var","N","terms":[[exp, coeff], …]}`
//! * single-prime jet series: `{"var","p","r","N","terms":[[exp, coeff, [e_1..e_r]], …]}`
//!   with `e_i` the exponent of the `i`-th jet of the base variable
//! * several primes: `{"P","r","N","var","terms":[[[[i, e], …], coeff], …]}`
//!   pairing each multi-index `i` (all zeros for the base variable) with its
//!   exponent

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use crate::arith::{Coefficient, PadicCtx, PadicTrunc};
use crate::deltajet::{BaseVar, JetRing, JetSeries, JetVar, Monomial};
use crate::error::{Error, Result};
use crate::modular::QExpansion;
use crate::qseries::Series1;

/// Coefficient rings whose context can be written next to a series.
pub trait JsonCoefficient: Coefficient {
    fn ctx_to_json(ctx: &Self::Ctx) -> Option<Value>;
    fn ctx_from_json(modulus: Option<&Value>) -> Result<Self::Ctx>;
}

impl JsonCoefficient for BigRational {
    fn ctx_to_json(_: &()) -> Option<Value> {
        None
    }

    fn ctx_from_json(modulus: Option<&Value>) -> Result<()> {
        match modulus {
            None | Some(Value::Null) => Ok(()),
            Some(_) => Err(Error::Parse("expected a rational series, found a modulus".into())),
        }
    }
}

impl JsonCoefficient for PadicTrunc {
    fn ctx_to_json(ctx: &PadicCtx) -> Option<Value> {
        Some(json!({"p": ctx.p(), "M": ctx.m()}))
    }

    fn ctx_from_json(modulus: Option<&Value>) -> Result<PadicCtx> {
        let v = modulus.ok_or_else(|| Error::Parse("p-adic series lacks \"modulus\"".into()))?;
        let p = v.get("p").and_then(Value::as_u64);
        let m = v.get("M").and_then(Value::as_u64);
        match (p, m) {
            (Some(p), Some(m)) => PadicCtx::new(p, u32::try_from(m).map_err(|_| Error::Parse("M too large".into()))?),
            _ => Err(Error::Parse("modulus needs integer \"p\" and \"M\"".into())),
        }
    }
}

fn field<'a>(v: &'a Value, k: &str) -> Result<&'a Value> {
    v.get(k).ok_or_else(|| Error::Parse(format!("missing field {k:?}")))
}

fn as_i64(v: &Value, what: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::Parse(format!("{what} must be an integer")))
}

fn as_u32(v: &Value, what: &str) -> Result<u32> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| Error::Parse(format!("{what} must be a small nonnegative integer")))
}

fn as_array<'a>(v: &'a Value, what: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{what} must be an array")))
}

fn bound_json(b: Option<i64>) -> Value {
    b.map_or(Value::Null, Value::from)
}

fn bound_from_json(v: &Value) -> Result<Option<i64>> {
    match v.get("N") {
        None | Some(Value::Null) => Ok(None),
        Some(n) => as_i64(n, "N").map(Some),
    }
}

fn var_from_json(v: &Value) -> Result<BaseVar> {
    field(v, "var")?
        .as_str()
        .ok_or_else(|| Error::Parse("var must be a string".into()))
        .and_then(BaseVar::parse)
}

fn with_modulus<C: JsonCoefficient>(mut obj: Map<String, Value>, ctx: &C::Ctx) -> Value {
    if let Some(m) = C::ctx_to_json(ctx) {
        obj.insert("modulus".into(), m);
    }
    Value::Object(obj)
}

pub fn series1_to_json<C: JsonCoefficient>(s: &Series1<C>) -> Value {
    let terms: Vec<Value> = s.terms().map(|(e, c)| json!([e, c.to_json()])).collect();
    let mut obj = Map::new();
    obj.insert("var".into(), s.var().name().into());
    obj.insert("N".into(), bound_json(s.order()));
    obj.insert("terms".into(), terms.into());
    with_modulus::<C>(obj, s.ctx())
}

pub fn series1_from_json<C: JsonCoefficient>(v: &Value) -> Result<Series1<C>> {
    let ctx = C::ctx_from_json(v.get("modulus"))?;
    let var = var_from_json(v)?;
    let mut coeffs = Vec::new();
    for t in as_array(field(v, "terms")?, "terms")? {
        let pair = as_array(t, "term")?;
        if pair.len() != 2 {
            return Err(Error::Parse("a term is [exponent, coefficient]".into()));
        }
        coeffs.push((as_i64(&pair[0], "exponent")?, C::from_json(&pair[1], &ctx)?));
    }
    Series1::from_coeffs(var, &ctx, coeffs, bound_from_json(v)?)
}

pub fn qexpansion_to_json(f: &QExpansion) -> Value {
    let mut v = series1_to_json(&f.series);
    v["weight"] = f.weight.into();
    v["level"] = f.level.into();
    v
}

pub fn qexpansion_from_json(v: &Value) -> Result<QExpansion> {
    let series = series1_from_json::<BigRational>(v)?;
    if series.order().is_none() {
        return Err(Error::Parse("a q-expansion needs a truncation order".into()));
    }
    Ok(QExpansion {
        weight: v.get("weight").map_or(Ok(0), |w| as_i64(w, "weight"))?,
        level: v.get("level").map_or(Ok(1), |l| as_i64(l, "level").map(|x| x as u64))?,
        series,
    })
}

fn max_orders(f: &JetSeries<impl Coefficient>) -> Vec<u32> {
    let d = f.ring().arity();
    let mut r = vec![0; d];
    for (m, _) in f.terms() {
        for &(v, _) in m.factors() {
            for (k, x) in r.iter_mut().enumerate() {
                *x = (*x).max(v.index(k));
            }
        }
    }
    r
}

/// Writes a jet series. Series over a ring with a free δ-constant have no
/// JSON form.
pub fn jet_to_json<C: JsonCoefficient>(f: &JetSeries<C>) -> Result<Value> {
    let ring = f.ring();
    if ring.has_constant() {
        return Err(Error::Domain("series with a δ-constant have no JSON form".into()));
    }
    let d = ring.arity();
    let r = max_orders(f);
    let mut obj = Map::new();
    obj.insert("var".into(), ring.base().name().into());
    let terms: Vec<Value> = if d == 1 {
        obj.insert("p".into(), ring.primes()[0].into());
        obj.insert("r".into(), r[0].into());
        f.terms()
            .map(|(m, c)| {
                let mut e = vec![0u32; r[0] as usize];
                for &(v, k) in m.factors() {
                    e[v.index(0) as usize - 1] = k;
                }
                json!([m.base_exponent(), c.to_json(), e])
            })
            .collect()
    } else {
        obj.insert("P".into(), ring.primes().into());
        obj.insert("r".into(), r.clone().into());
        f.terms()
            .map(|(m, c)| {
                let mut parts = Vec::new();
                if m.base_exponent() != 0 {
                    parts.push(json!([vec![0u32; d], m.base_exponent()]));
                }
                for &(v, k) in m.factors() {
                    parts.push(json!([v.indices(d), k]));
                }
                json!([parts, c.to_json()])
            })
            .collect()
    };
    obj.insert("N".into(), bound_json(f.bound()));
    if let Some(g) = f.precision() {
        obj.insert("precision".into(), g.into());
    }
    obj.insert("terms".into(), terms.into());
    Ok(with_modulus::<C>(obj, f.ctx()))
}

pub fn jet_from_json<C: JsonCoefficient>(v: &Value) -> Result<JetSeries<C>> {
    let ctx = C::ctx_from_json(v.get("modulus"))?;
    let var = var_from_json(v)?;
    let bound = bound_from_json(v)?;
    let terms = as_array(field(v, "terms")?, "terms")?;
    let mut out: BTreeMap<Monomial, C> = BTreeMap::new();
    let ring = if let Some(p) = v.get("p") {
        let p = p.as_u64().ok_or_else(|| Error::Parse("p must be a prime".into()))?;
        let ring = JetRing::new(&[p], var)?;
        for t in terms {
            let t = as_array(t, "term")?;
            if t.len() != 3 {
                return Err(Error::Parse("a term is [exponent, coefficient, jets]".into()));
            }
            let mut parts = Vec::new();
            for (i, e) in as_array(&t[2], "jet exponents")?.iter().enumerate() {
                let e = as_u32(e, "jet exponent")?;
                if e > 0 {
                    parts.push((JetVar::jet(&[i as u32 + 1])?, e));
                }
            }
            let m = Monomial::from_parts(as_i64(&t[0], "exponent")?, parts);
            insert_term(&mut out, m, C::from_json(&t[1], &ctx)?)?;
        }
        ring
    } else {
        let primes: Vec<u64> = as_array(field(v, "P")?, "P")?
            .iter()
            .map(|x| x.as_u64().ok_or_else(|| Error::Parse("P lists primes".into())))
            .collect::<Result<_>>()?;
        let ring = JetRing::new(&primes, var)?;
        for t in terms {
            let t = as_array(t, "term")?;
            if t.len() != 2 {
                return Err(Error::Parse("a term is [factors, coefficient]".into()));
            }
            let mut base = 0;
            let mut parts = Vec::new();
            for f in as_array(&t[0], "factors")? {
                let f = as_array(f, "factor")?;
                if f.len() != 2 {
                    return Err(Error::Parse("a factor is [multi-index, exponent]".into()));
                }
                let idx: Vec<u32> = as_array(&f[0], "multi-index")?
                    .iter()
                    .map(|x| as_u32(x, "index"))
                    .collect::<Result<_>>()?;
                if idx.len() != primes.len() {
                    return Err(Error::Parse("multi-index length differs from P".into()));
                }
                if idx.iter().all(|&i| i == 0) {
                    base += as_i64(&f[1], "exponent")?;
                } else {
                    parts.push((JetVar::jet(&idx)?, as_u32(&f[1], "exponent")?));
                }
            }
            let m = Monomial::from_parts(base, parts);
            insert_term(&mut out, m, C::from_json(&t[1], &ctx)?)?;
        }
        ring
    };
    let s = JetSeries::from_terms(&ring, &ctx, out, bound)?;
    Ok(match v.get("precision").and_then(Value::as_u64) {
        Some(g) => s.reduce_precision(g as u32),
        None => s,
    })
}

fn insert_term<C: Coefficient>(out: &mut BTreeMap<Monomial, C>, m: Monomial, c: C) -> Result<()> {
    if out.insert(m, c).is_some() {
        return Err(Error::Parse("monomial listed twice".into()));
    }
    Ok(())
}

/// A jet series read from JSON with whichever coefficients it declares.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyJetSeries {
    Rational(JetSeries<BigRational>),
    Padic(JetSeries<PadicTrunc>),
}

impl AnyJetSeries {
    pub fn from_json(v: &Value) -> Result<Self> {
        if v.get("modulus").is_some() {
            jet_from_json(v).map(AnyJetSeries::Padic)
        } else {
            jet_from_json(v).map(AnyJetSeries::Rational)
        }
    }

    pub fn to_json(&self) -> Result<Value> {
        match self {
            AnyJetSeries::Rational(f) => jet_to_json(f),
            AnyJetSeries::Padic(f) => jet_to_json(f),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deltajet::psi_fourier;
    use crate::multiprime::build_fe0;

    #[test]
    fn series1_round_trip() {
        let ctx = PadicCtx::new(5, 4).unwrap();
        let s = crate::qseries::delta0(
            &Series1::<BigRational>::from_dense(
                BaseVar::Q,
                &(),
                vec![1, 2, 3].into_iter().map(|n| BigRational::from_integer(n.into())).collect(),
            ),
            5,
            4,
        )
        .unwrap();
        let v = series1_to_json(&s);
        assert_eq!(v["modulus"], json!({"p": 5, "M": 4}));
        let back: Series1<PadicTrunc> = series1_from_json(&v).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.ctx(), &ctx);
    }

    #[test]
    fn jet_round_trips() {
        let psi = psi_fourier(7, 5).unwrap();
        let v = jet_to_json(&psi).unwrap();
        assert_eq!(v["p"], json!(7));
        assert_eq!(v["r"], json!(1));
        assert_eq!(jet_from_json::<PadicTrunc>(&v).unwrap(), psi);

        let fe = build_fe0(&[5, 7], 30).unwrap();
        let v = jet_to_json(&fe).unwrap();
        assert_eq!(v["P"], json!([5, 7]));
        let back = AnyJetSeries::from_json(&v).unwrap();
        assert_eq!(back, AnyJetSeries::Rational(fe));
        assert_eq!(back.to_json().unwrap(), v);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(jet_from_json::<BigRational>(&json!({"var": "t", "p": 5, "terms": [[1, "1/2"]]})).is_err());
        assert!(jet_from_json::<BigRational>(&json!({"var": "w", "p": 5, "terms": []})).is_err());
        assert!(series1_from_json::<PadicTrunc>(&json!({"var": "q", "terms": []})).is_err());
    }
}
