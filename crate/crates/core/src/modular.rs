//! Classical q-expansions: Eisenstein series, the discriminant form, the
//! j-invariant, and newform coefficients of an elliptic curve over Q from
//! point counts and the Hecke recursions.

use std::collections::BTreeMap;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{binomial, is_prime, PadicCtx, PadicTrunc};
use crate::deltajet::BaseVar;
use crate::error::{Error, Result};
use crate::qseries::Series1;

/// A q-expansion with exact rational coefficients, tagged with weight and
/// level. Only level-1 Eisenstein data and curve newforms are produced.
#[derive(Clone, Debug, PartialEq)]
pub struct QExpansion {
    pub weight: i64,
    pub level: u64,
    pub series: Series1<BigRational>,
}

impl QExpansion {
    pub fn coefficient(&self, n: i64) -> BigRational {
        self.series.coeff(n)
    }

    /// Exclusive truncation order.
    pub fn order(&self) -> i64 {
        self.series.order().expect("q-expansions are always truncated")
    }
}

/// Bernoulli numbers `B_0, …, B_n` with `B_1 = -1/2`, from
/// `Σ_{j<m+1} C(m+1, j) B_j = 0`.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        let mut s = BigRational::zero();
        for (j, bj) in b.iter().enumerate() {
            s += BigRational::from_integer(binomial(m as u64 + 1, j as u64)) * bj;
        }
        b.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

pub fn bernoulli(n: usize) -> BigRational {
    bernoulli_numbers(n).pop().expect("nonempty")
}

/// `σ_k(n) = Σ_{d | n} d^k`.
pub fn sigma(k: u32, n: u64) -> BigInt {
    let mut s = BigInt::zero();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            s += BigInt::from(d).pow(k);
            let e = n / d;
            if e != d {
                s += BigInt::from(e).pow(k);
            }
        }
        d += 1;
    }
    s
}

/// Normalized Eisenstein series `E_k = 1 - (2k/B_k) Σ σ_{k-1}(n) q^n`
/// modulo `q^order`.
pub fn eisenstein(k: u32, order: i64) -> Result<QExpansion> {
    if k < 4 || k % 2 == 1 {
        return Err(Error::Domain(format!("Eisenstein weight must be even and >= 4, got {k}")));
    }
    let bk = bernoulli(k as usize);
    let factor = -BigRational::from_integer(BigInt::from(2 * k)) / bk;
    let mut coeffs = vec![(0, BigRational::one())];
    for n in 1..order.max(0) {
        coeffs.push((n, &factor * BigRational::from_integer(sigma(k - 1, n as u64))));
    }
    Ok(QExpansion {
        weight: k as i64,
        level: 1,
        series: Series1::from_coeffs(BaseVar::Q, &(), coeffs, Some(order.max(0)))?,
    })
}

/// `Δ = q Π_{n≥1} (1 - q^n)^24` modulo `q^order`.
pub fn discriminant_delta(order: i64) -> QExpansion {
    // Work with Π (1 - q^n) to q^{order-1}, then raise to the 24th power.
    let len = (order - 1).max(0) as usize;
    let mut prod = vec![BigInt::zero(); len];
    if len > 0 {
        prod[0] = BigInt::one();
    }
    for n in 1..len {
        for e in (n..len).rev() {
            let t = prod[e - n].clone();
            prod[e] -= t;
        }
    }
    let base = Series1::from_dense(
        BaseVar::Q,
        &(),
        prod.into_iter().map(BigRational::from_integer).collect(),
    );
    let q = Series1::gen(BaseVar::Q, &());
    QExpansion {
        weight: 12,
        level: 1,
        series: q.mul(&base.pow(24)).truncate(Some(order)),
    }
}

/// `j = E_4^3 / Δ = q^{-1} + 744 + …` with coefficients mod `p^m`.
pub fn j_invariant(order: i64, p: u64, m: u32) -> Result<Series1<PadicTrunc>> {
    let ctx = PadicCtx::new(p, m)?;
    let e4 = eisenstein(4, order)?.series.to_padic(&ctx)?;
    let delta = discriminant_delta(order).series.to_padic(&ctx)?;
    Ok(e4.pow(3).mul(&delta.invert()?))
}

/// `y^2 + a1 xy + a3 y = x^3 + a2 x^2 + a4 x + a6`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EllipticCurveQ {
    pub a1: i64,
    pub a2: i64,
    pub a3: i64,
    pub a4: i64,
    pub a6: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl EllipticCurveQ {
    pub fn new(a: [i64; 5], label: Option<&str>) -> Result<Self> {
        let e = EllipticCurveQ {
            a1: a[0],
            a2: a[1],
            a3: a[2],
            a4: a[3],
            a6: a[4],
            label: label.map(str::to_string),
        };
        e.validate()?;
        Ok(e)
    }

    fn validate(&self) -> Result<()> {
        if self.discriminant().is_zero() {
            return Err(Error::Domain("singular Weierstrass equation".into()));
        }
        Ok(())
    }

    pub fn discriminant(&self) -> BigInt {
        let [a1, a2, a3, a4, a6] = [self.a1, self.a2, self.a3, self.a4, self.a6].map(BigInt::from);
        let b2 = &a1 * &a1 + 4 * &a2;
        let b4 = 2 * &a4 + &a1 * &a3;
        let b6 = &a3 * &a3 + 4 * &a6;
        let b8 = &a1 * &a1 * &a6 + 4 * &a2 * &a6 - &a1 * &a3 * &a4 + &a2 * &a3 * &a3 - &a4 * &a4;
        -&b2 * &b2 * &b8 - 8 * &b4 * &b4 * &b4 - 27 * &b6 * &b6 + 9 * &b2 * &b4 * &b6
    }

    pub fn has_good_reduction(&self, p: u64) -> bool {
        !(self.discriminant() % BigInt::from(p)).is_zero()
    }

    /// Number of points over `F_p`, the point at infinity included.
    pub fn count_points(&self, p: u64) -> u64 {
        let pi = p as i64;
        let r = |x: i64| x.rem_euclid(pi);
        let mut count = 1;
        if p == 2 {
            for x in 0..2 {
                for y in 0..2 {
                    let lhs = y * y + self.a1 * x * y + self.a3 * y;
                    let rhs = x * x * x + self.a2 * x * x + self.a4 * x + self.a6;
                    if r(lhs - rhs) == 0 {
                        count += 1;
                    }
                }
            }
            return count;
        }
        // (2y + a1 x + a3)^2 = 4(x^3 + a2 x^2 + a4 x + a6) + (a1 x + a3)^2
        let (a1, a2, a3, a4, a6) = (r(self.a1), r(self.a2), r(self.a3), r(self.a4), r(self.a6));
        let mut squares = vec![0u32; p as usize];
        for y in 0..pi {
            squares[(y * y % pi) as usize] += 1;
        }
        for x in 0..pi {
            let cubic = r(r(r(x * x) * x) + r(a2 * r(x * x)) + r(a4 * x) + a6);
            let lin = r(a1 * x + a3);
            let d = r(4 * cubic + lin * lin);
            count += squares[d as usize] as u64;
        }
        count
    }
}

/// `a_p = p + 1 - #E(F_p)` at a prime of good reduction; the Hasse bound
/// `|a_p| ≤ 2√p` is asserted.
pub fn ap_point_count(e: &EllipticCurveQ, p: u64) -> Result<i64> {
    if !is_prime(p) {
        return Err(Error::Domain(format!("{p} is not prime")));
    }
    if !e.has_good_reduction(p) {
        return Err(Error::Domain(format!(
            "bad reduction at {p}; supply a_{p} externally"
        )));
    }
    let ap = p as i64 + 1 - e.count_points(p) as i64;
    assert!(ap * ap <= 4 * p as i64, "Hasse bound violated at {p}");
    Ok(ap)
}

/// `a_1, …, a_n` from prime values via multiplicativity and the prime-power
/// recursions: `a_{ℓ^{k+1}} = a_ℓ a_{ℓ^k} - ℓ a_{ℓ^{k-1}}` at good primes and
/// `a_{ℓ^k} = a_ℓ^k` at the primes listed in `bad`.
pub fn an_multiplicative(ap: &BTreeMap<u64, i64>, bad: &[u64], n: usize) -> Result<Vec<i64>> {
    let mut a = vec![0i64; n + 1];
    if n == 0 {
        return Ok(vec![]);
    }
    a[1] = 1;
    for m in 2..=n as u64 {
        let (l, k) = smallest_prime_power(m);
        let lk = l.pow(k);
        let rest = m / lk;
        let al = *ap
            .get(&l)
            .ok_or_else(|| Error::Missing(format!("no value of a_{l}")))?;
        let prime_power = if k == 1 {
            al
        } else if bad.contains(&l) {
            al.pow(k)
        } else {
            al * a[(lk / l) as usize] - l as i64 * a[(lk / l / l) as usize]
        };
        a[m as usize] = if rest == 1 { prime_power } else { prime_power * a[rest as usize] };
    }
    Ok(a[1..].to_vec())
}

/// `(ℓ, k)` with `ℓ` the smallest prime factor of `m` and `ℓ^k || m`.
fn smallest_prime_power(m: u64) -> (u64, u32) {
    let mut l = 2;
    while !m.is_multiple_of(l) {
        l += 1;
    }
    let mut k = 0;
    let mut r = m;
    while r.is_multiple_of(l) {
        r /= l;
        k += 1;
    }
    (l, k)
}

/// A curve together with externally supplied `a_ℓ` at its bad primes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveFixture {
    pub curve: EllipticCurveQ,
    /// `a_ℓ` at primes of bad reduction, keyed by the prime as a string.
    pub bad_primes: BTreeMap<String, i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conductor: Option<u64>,
}

impl CurveFixture {
    pub fn from_json(text: &str) -> Result<Self> {
        let f: CurveFixture =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("curve fixture: {e}")))?;
        f.curve.validate()?;
        for k in f.bad_primes.keys() {
            let p: u64 = k
                .parse()
                .map_err(|_| Error::Parse(format!("bad prime key {k:?} is not an integer")))?;
            if !is_prime(p) {
                return Err(Error::Parse(format!("bad prime key {p} is not prime")));
            }
        }
        Ok(f)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Missing(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn bad_prime_list(&self) -> Vec<u64> {
        self.bad_primes.keys().filter_map(|k| k.parse().ok()).collect()
    }

    /// `a_ℓ` for every prime `ℓ ≤ bound`: point counts at good primes,
    /// fixture values at bad ones.
    pub fn prime_coefficients(&self, bound: u64) -> Result<BTreeMap<u64, i64>> {
        let mut out = BTreeMap::new();
        for l in crate::arith::primes_up_to(bound) {
            let v = match self.bad_primes.get(&l.to_string()) {
                Some(&v) => v,
                None => ap_point_count(&self.curve, l)?,
            };
            out.insert(l, v);
        }
        Ok(out)
    }

    /// `a_1, …, a_n` of the attached newform.
    pub fn coefficients(&self, n: usize) -> Result<Vec<i64>> {
        let ap = self.prime_coefficients(n as u64)?;
        an_multiplicative(&ap, &self.bad_prime_list(), n)
    }

    /// The newform `Σ a_n q^n` modulo `q^order`.
    pub fn newform(&self, order: i64) -> Result<QExpansion> {
        let n = (order - 1).max(0) as usize;
        let a = self.coefficients(n)?;
        let coeffs = a
            .iter()
            .enumerate()
            .map(|(i, &c)| (i as i64 + 1, BigRational::from_integer(c.into())));
        Ok(QExpansion {
            weight: 2,
            level: self.conductor.unwrap_or(0),
            series: Series1::from_coeffs(BaseVar::Q, &(), coeffs, Some(order.max(1)))?,
        })
    }
}

/// All non-constant coefficients of `f` are divisible by `p` (and the
/// constant term is 1): the q-expansion is `1` modulo `p`.
pub fn is_one_mod_p(f: &QExpansion, p: u64) -> bool {
    let pb = BigInt::from(p);
    f.series.terms().all(|(e, c)| {
        let ok_den = !(c.denom() % &pb).is_zero();
        if e == 0 {
            ok_den && ((c.numer() - c.denom()) % &pb).is_zero()
        } else {
            ok_den && (c.numer() % &pb).is_zero()
        }
    })
}

/// Coefficients as `i64`, failing on non-integers or overflow.
pub fn integer_coefficients(f: &QExpansion) -> Result<Vec<i64>> {
    (0..f.order())
        .map(|n| {
            let c = f.coefficient(n);
            if !c.denom().is_one() {
                return Err(Error::Domain(format!("coefficient {n} is {c}, not an integer")));
            }
            c.numer()
                .to_i64()
                .ok_or_else(|| Error::Domain(format!("coefficient {n} overflows")))
        })
        .collect()
}
