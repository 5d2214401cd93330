use std::collections::BTreeMap;

use super::basis::standard_basis;
use super::ops::binomial;
use crate::error::Result;
use crate::linalg::CMatrix;
use crate::semialgebraic::Relation;
use crate::tms::{MultiIndex, Polynomial};

type MatrixPoly = BTreeMap<MultiIndex, CMatrix>;

fn mat_poly_mul(a: &MatrixPoly, b: &MatrixPoly, d: usize) -> MatrixPoly {
    let mut out: MatrixPoly = BTreeMap::new();
    for (ea, ma) in a {
        for (eb, mb) in b {
            let slot = out
                .entry(ea.add(eb))
                .or_insert_with(|| CMatrix::zeros(d, d));
            *slot += ma * mb;
        }
    }
    out
}

fn trace_poly(a: &MatrixPoly, n: usize) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for (e, m) in a {
        p.add_term(e.clone(), m.trace().re);
    }
    p
}

/// Constraint polynomials in the t = d² − 1 coordinates x of a local operator
/// A(x) = I + Σ_a x_a S_a, whose satisfaction means A(x)/d is a state.
///
/// Mixed: e_j(A) ≥ 0 for j = 2..d, the elementary symmetric functions of the
/// eigenvalues obtained from power sums tr(A^i) via Newton's identities.
/// Pure: |x|² − (d − 1) = 0 (unit purity) plus e_j(A) ≥ 0 for j = 3..d.
pub fn local_constraint_polynomials(dim: usize, pure: bool) -> Result<Vec<(Polynomial, Relation)>> {
    let basis = standard_basis(dim)?;
    let d = dim;
    let t = basis.t();

    let mut a: MatrixPoly = BTreeMap::new();
    a.insert(MultiIndex::zero(t), CMatrix::identity(d, d));
    for i in 0..t {
        a.insert(MultiIndex::unit(t, i), basis.op(i + 1).clone());
    }

    let mut powers = vec![Polynomial::zero(t)];
    let mut power = a.clone();
    for i in 1..=d {
        powers.push(trace_poly(&power, t).pruned(1e-12));
        if i < d {
            power = mat_poly_mul(&power, &a, d);
        }
    }

    let mut e = vec![Polynomial::constant(t, 1.0)];
    for j in 1..=d {
        let mut acc = Polynomial::zero(t);
        for i in 1..=j {
            let term = &e[j - i] * &powers[i];
            acc = if i % 2 == 1 { &acc + &term } else { &acc - &term };
        }
        e.push(acc.scale(1.0 / j as f64).pruned(1e-10));
    }
    // Rescale so that each e_j equals 1 at the maximally mixed point x = 0.
    let e: Vec<Polynomial> = e
        .into_iter()
        .enumerate()
        .map(|(j, q)| q.scale(1.0 / binomial(d, j)))
        .collect();

    let mut out = Vec::new();
    if pure {
        let mut sphere = Polynomial::constant(t, -((d - 1) as f64));
        for i in 0..t {
            let xi = Polynomial::var(t, i);
            sphere = &sphere + &(&xi * &xi);
        }
        out.push((sphere, Relation::Eq));
        for ej in e.into_iter().skip(3) {
            out.push((ej, Relation::Geq));
        }
    } else {
        for ej in e.into_iter().skip(2) {
            out.push((ej, Relation::Geq));
        }
    }
    Ok(out)
}
