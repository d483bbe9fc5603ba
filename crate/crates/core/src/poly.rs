//! Sparse polynomials and formal linear combinations.
//!
//! Bracket identities in this crate are polynomial, so they are checked on
//! exact term lists rather than on floating-point samples. Coefficients of
//! [`Poly`] are complex doubles, but every coefficient produced by the bracket
//! formulas is a small integer multiple of one global constant, so addition
//! and multiplication stay exact.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

/// A formal integer combination of keys, such as `v_13 - v_24`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearForm<K: Ord> {
    terms: BTreeMap<K, i64>,
}

impl<K: Ord + Clone> LinearForm<K> {
    pub fn zero() -> Self {
        LinearForm { terms: BTreeMap::new() }
    }

    pub fn term(coeff: i64, key: K) -> Self {
        let mut f = Self::zero();
        f.add_term(coeff, key);
        f
    }

    pub fn add_term(&mut self, coeff: i64, key: K) {
        if coeff == 0 {
            return;
        }
        let e = self.terms.entry(key.clone()).or_insert(0);
        *e += coeff;
        if *e == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn add_scaled(&mut self, coeff: i64, other: &Self) {
        for (k, c) in &other.terms {
            self.add_term(coeff * c, k.clone());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&K, i64)> {
        self.terms.iter().map(|(k, c)| (k, *c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Folds the combination with a value for each key.
    pub fn eval(&self, mut value: impl FnMut(&K) -> Complex64) -> Complex64 {
        self.terms.iter().map(|(k, c)| value(k) * *c as f64).sum()
    }
}

impl<K: Ord + Clone> Default for LinearForm<K> {
    fn default() -> Self {
        Self::zero()
    }
}

/// A monomial as a sorted multiset of variable indices.
pub type Monomial = Vec<usize>;

/// Sparse multivariate polynomial with complex coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Complex64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly { terms: BTreeMap::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        let mut p = Self::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub fn real(c: f64) -> Self {
        Self::constant(Complex64::new(c, 0.0))
    }

    pub fn var(index: usize) -> Self {
        let mut p = Self::zero();
        p.add_term(vec![index], Complex64::new(1.0, 0.0));
        p
    }

    pub fn add_term(&mut self, mut mono: Monomial, c: Complex64) {
        if c == Complex64::new(0.0, 0.0) {
            return;
        }
        mono.sort_unstable();
        let e = self.terms.entry(mono.clone()).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.terms.remove(&mono);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Largest coefficient modulus; zero for the zero polynomial.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, k: Complex64) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c * k);
        }
        out
    }

    /// Partial derivative with respect to variable `var`.
    pub fn derivative(&self, var: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let power = m.iter().filter(|&&v| v == var).count();
            if power == 0 {
                continue;
            }
            let mut reduced = m.clone();
            let pos = reduced.iter().position(|&v| v == var).expect("variable present");
            reduced.remove(pos);
            out.add_term(reduced, c * power as f64);
        }
        out
    }

    pub fn eval(&self, point: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(m, c)| m.iter().fold(*c, |acc, &v| acc * point[v])).sum()
    }

    /// Substitutes a polynomial for every variable.
    pub fn compose(&self, images: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut term = Poly::constant(*c);
            for &v in m {
                term = &term * &images[v];
            }
            out = &out + &term;
        }
        out
    }

    /// Formats with the supplied variable names.
    pub fn display_with<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), *c);
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let mut m = ma.clone();
                m.extend_from_slice(mb);
                out.add_term(m, ca * cb);
            }
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, rhs: Poly) -> Poly {
        &self + &rhs
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, rhs: Poly) -> Poly {
        &self - &rhs
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.poly.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            if c.im == 0.0 {
                write!(f, "{}", c.re)?;
            } else {
                write!(f, "({}{:+}i)", c.re, c.im)?;
            }
            for v in m {
                match self.names.get(*v) {
                    Some(name) => write!(f, "*{name}")?,
                    None => write!(f, "*x{v}")?,
                }
            }
        }
        Ok(())
    }
}
