use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

/// An element `Σ a_i φ^i` of the weight ring, generalized to several
/// commuting Frobenius lifts: the key `i` is a multi-index over the active
/// primes and `a_i` its integer coefficient.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Weight {
    terms: BTreeMap<Vec<u32>, i64>,
}

impl Weight {
    pub fn zero() -> Self {
        Weight::default()
    }

    /// Single-prime weight from its coefficient list `[a_0, a_1, ...]`.
    pub fn from_coeffs(a: &[i64]) -> Self {
        Self::from_terms(a.iter().enumerate().map(|(i, &c)| (vec![i as u32], c)))
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, i64)>>(it: I) -> Self {
        let mut w = Weight::zero();
        for (i, a) in it {
            w.add_term(i, a);
        }
        w
    }

    /// The monomial `φ_P^i`.
    pub fn monomial(i: Vec<u32>) -> Self {
        Self::from_terms([(i, 1)])
    }

    fn add_term(&mut self, i: Vec<u32>, a: i64) {
        if a == 0 {
            return;
        }
        let e = self.terms.entry(i.clone()).or_insert(0);
        *e += a;
        if *e == 0 {
            self.terms.remove(&i);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], i64)> {
        self.terms.iter().map(|(i, &a)| (i.as_slice(), a))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `deg(w) = Σ a_i`.
    pub fn deg(&self) -> i64 {
        self.terms.values().sum()
    }

    /// Largest total index with a nonzero coefficient, or `None` for `w = 0`.
    pub fn ord(&self) -> Option<u32> {
        self.terms.keys().map(|i| i.iter().sum()).max()
    }

    /// Number of primes the multi-indices range over.
    pub fn arity(&self) -> Option<usize> {
        self.terms.keys().next().map(Vec::len)
    }
}

impl Add for &Weight {
    type Output = Weight;

    fn add(self, rhs: &Weight) -> Weight {
        let mut w = self.clone();
        for (i, &a) in &rhs.terms {
            w.add_term(i.clone(), a);
        }
        w
    }
}

impl Neg for &Weight {
    type Output = Weight;

    fn neg(self) -> Weight {
        Weight::from_terms(self.terms.iter().map(|(i, &a)| (i.clone(), -a)))
    }
}

impl Sub for &Weight {
    type Output = Weight;

    fn sub(self, rhs: &Weight) -> Weight {
        self + &(-rhs)
    }
}
