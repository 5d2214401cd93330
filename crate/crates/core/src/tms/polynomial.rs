use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::multi_index::{monomial_basis, MultiIndex};
use crate::error::{domain, Result};

/// Real polynomial p(x) = Σ p_α x^α in `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), c);
        p
    }

    /// The coordinate polynomial x_i.
    pub fn var(n: usize, i: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::unit(n, i), 1.0);
        p
    }

    pub fn from_terms(n: usize, terms: impl IntoIterator<Item = (MultiIndex, f64)>) -> Result<Self> {
        let mut p = Self::zero(n);
        for (alpha, c) in terms {
            if alpha.nvars() != n {
                return domain(format!(
                    "term {alpha} has {} variables, expected {n}",
                    alpha.nvars()
                ));
            }
            p.add_term(alpha, c);
        }
        Ok(p)
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: f64) {
        if c == 0.0 {
            return;
        }
        let sum = self.terms.get(&alpha).copied().unwrap_or(0.0) + c;
        if sum == 0.0 {
            self.terms.remove(&alpha);
        } else {
            self.terms.insert(alpha, sum);
        }
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(k, &v)| (k, v))
    }

    pub fn coefficient(&self, alpha: &MultiIndex) -> f64 {
        self.terms.get(alpha).copied().unwrap_or(0.0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(MultiIndex::degree).max().unwrap_or(0)
    }

    /// ⌈deg(g)/2⌉.
    pub fn half_degree(&self) -> u32 {
        self.degree().div_ceil(2)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(a, c)| c * a.eval(x)).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.n);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), c * s);
        }
        out
    }

    /// Drops coefficients with magnitude at or below `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Polynomial {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(_, c)| c.abs() > tol)
                .map(|(a, c)| (a.clone(), *c))
                .collect(),
        }
    }

    /// Embeds the polynomial into `n_total` variables, placing its own
    /// variables at positions `offset..offset + n`.
    pub fn shifted_into(&self, n_total: usize, offset: usize) -> Self {
        let mut out = Self::zero(n_total);
        for (a, c) in &self.terms {
            let mut e = vec![0; n_total];
            e[offset..offset + self.n].copy_from_slice(a.exponents());
            out.add_term(MultiIndex::new(e), *c);
        }
        out
    }

    /// Coefficient vector in the degree-lex basis of degree ≤ k.
    pub fn coefficient_vector(&self, k: u32) -> Result<DVector<f64>> {
        if self.degree() > k {
            return domain(format!("degree {} exceeds basis order {k}", self.degree()));
        }
        let basis = monomial_basis(self.n, k);
        Ok(DVector::from_iterator(
            basis.len(),
            basis.iter().map(|a| self.coefficient(a)),
        ))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (a, c) in &rhs.terms {
            out.add_term(a.clone(), *c);
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &rhs.scale(-1.0)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut acc: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                *acc.entry(a.add(b)).or_insert(0.0) += ca * cb;
            }
        }
        Polynomial {
            n: self.n,
            terms: acc.into_iter().filter(|(_, c)| *c != 0.0).collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    alpha: Vec<u32>,
    coef: f64,
}

/// `{"n": int, "terms": [{"alpha": [..], "coef": x}]}`
#[derive(Serialize, Deserialize)]
pub(crate) struct PolynomialJson {
    n: usize,
    terms: Vec<TermJson>,
}

impl From<&Polynomial> for PolynomialJson {
    fn from(p: &Polynomial) -> Self {
        PolynomialJson {
            n: p.n,
            terms: p
                .terms
                .iter()
                .map(|(a, c)| TermJson {
                    alpha: a.exponents().to_vec(),
                    coef: *c,
                })
                .collect(),
        }
    }
}

impl TryFrom<PolynomialJson> for Polynomial {
    type Error = crate::Error;
    fn try_from(j: PolynomialJson) -> Result<Self> {
        Polynomial::from_terms(
            j.n,
            j.terms.into_iter().map(|t| (MultiIndex::new(t.alpha), t.coef)),
        )
    }
}

impl Serialize for Polynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PolynomialJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = PolynomialJson::deserialize(d)?;
        Polynomial::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coefficient_vector_of_listed_example() {
        // 7 x3 − 3 x2² + 2
        let p = Polynomial::from_terms(
            3,
            [
                (MultiIndex::new(vec![0, 0, 1]), 7.0),
                (MultiIndex::new(vec![0, 2, 0]), -3.0),
                (MultiIndex::new(vec![0, 0, 0]), 2.0),
            ],
        )
        .unwrap();
        let v = p.coefficient_vector(2).unwrap();
        assert_eq!(
            v.as_slice(),
            &[2.0, 0.0, 0.0, 7.0, 0.0, 0.0, 0.0, -3.0, 0.0, 0.0]
        );
    }

    #[test]
    fn product_and_eval_agree() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&x + &y) * &(&x - &y);
        let pt = [0.7, -1.3];
        assert!((p.eval(&pt) - (0.49 - 1.69)).abs() < 1e-12);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.half_degree(), 1);
    }

    #[test]
    fn cancellation_removes_terms() {
        let x = Polynomial::var(1, 0);
        let z = &x - &x;
        assert!(z.is_zero());
    }
}
