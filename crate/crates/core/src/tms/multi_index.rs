use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector α of a monomial x^α = x₁^α₁ ⋯ xₙ^αₙ.
///
/// Ordering is degree-lexicographic: total degree first, then lexicographic
/// with x₁ > x₂ > ⋯, so that for n = 3 the degree-2 monomials come out as
/// x₁², x₁x₂, x₁x₃, x₂², x₂x₃, x₃².
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// The index of the single variable x_i.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Monomial product: exponent-wise sum.
    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.0.len(), other.0.len());
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &xi)| xi.powi(e as i32))
            .product()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn push_exponents(n: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() == n - 1 {
        prefix.push(remaining);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for e in (0..=remaining).rev() {
        prefix.push(e);
        push_exponents(n, remaining - e, prefix, out);
        prefix.pop();
    }
}

/// All monomials of exact degree `deg` in `n` variables, in degree-lex order.
pub fn monomials_of_degree(n: usize, deg: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    if n == 0 {
        if deg == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return out;
    }
    push_exponents(n, deg, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Degree-lex monomial basis of all monomials with degree ≤ k.
pub fn monomial_basis(n: usize, k: u32) -> Vec<MultiIndex> {
    (0..=k).flat_map(|d| monomials_of_degree(n, d)).collect()
}

/// C(n + k, k): the size of `monomial_basis(n, k)`.
pub fn basis_size(n: usize, k: u32) -> usize {
    let mut num: u128 = 1;
    let mut den: u128 = 1;
    for i in 1..=k as u128 {
        num *= n as u128 + i;
        den *= i;
    }
    (num / den) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn basis_n3_k1() {
        let b = monomial_basis(3, 1);
        assert_eq!(b, vec![mi(&[0, 0, 0]), mi(&[1, 0, 0]), mi(&[0, 1, 0]), mi(&[0, 0, 1])]);
    }

    #[test]
    fn basis_n3_k2_matches_listed_order() {
        let b = monomial_basis(3, 2);
        let expected = [
            [0, 0, 0],
            [1, 0, 0],
            [0, 1, 0],
            [0, 0, 1],
            [2, 0, 0],
            [1, 1, 0],
            [1, 0, 1],
            [0, 2, 0],
            [0, 1, 1],
            [0, 0, 2],
        ];
        assert_eq!(b.len(), 10);
        for (got, want) in b.iter().zip(expected.iter()) {
            assert_eq!(got.exponents(), want);
        }
        let mut sorted = b.clone();
        sorted.sort();
        assert_eq!(sorted, b);
    }

    #[test]
    fn basis_sizes() {
        for n in 1..5 {
            for k in 0..5 {
                assert_eq!(monomial_basis(n, k).len(), basis_size(n, k));
            }
        }
    }

    #[test]
    fn basis_is_prefix_of_next_order() {
        for n in 1..4 {
            for k in 0..4 {
                let a = monomial_basis(n, k);
                let b = monomial_basis(n, k + 1);
                assert_eq!(&b[..a.len()], &a[..]);
            }
        }
    }
}
