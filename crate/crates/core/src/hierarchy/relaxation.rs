use std::collections::HashMap;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
use crate::sdp::{LinearEquality, LmiBlock, SdpProblem};
use crate::semialgebraic::SemialgebraicSet;
use crate::tms::{monomial_basis, MultiIndex, Polynomial, Tms};

/// Smallest relaxation order, ⌊d/2⌋ + 1.
pub fn k0_of(tms: &Tms) -> u32 {
    tms.degree() / 2 + 1
}

/// R = Σ_i q_i² with C(n + k0, k0) random polynomials q_i of degree ≤ k0
/// whose coefficients are standard normal.
pub fn random_sos_objective<R: Rng + ?Sized>(n: usize, k0: u32, rng: &mut R) -> Polynomial {
    let basis = monomial_basis(n, k0);
    let s = basis.len();
    let q = nalgebra::DMatrix::<f64>::from_fn(s, s, |_, _| rng.sample(StandardNormal));
    let gram = q.transpose() * q;
    let mut r = Polynomial::zero(n);
    for a in 0..s {
        for b in 0..s {
            r.add_term(basis[a].add(&basis[b]), gram[(a, b)]);
        }
    }
    r
}

/// The SDP at order k together with the map between its variables and
/// moment indices.
#[derive(Debug, Clone)]
pub struct Relaxation {
    pub problem: SdpProblem,
    pub order: u32,
    pub variables: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
}

impl Relaxation {
    pub fn variable_index(&self, alpha: &MultiIndex) -> Option<usize> {
        self.index.get(alpha).copied()
    }

    /// Reads a primal vector back as a full tms of degree 2k.
    pub fn tms_from_primal(&self, z: &[f64]) -> Result<Tms> {
        if z.len() != self.variables.len() {
            return domain("primal vector does not match the relaxation");
        }
        let n = self.variables[0].nvars();
        Tms::from_values(n, 2 * self.order, self.variables.iter().cloned().zip(z.iter().copied()))
    }
}

/// Builds min Σ R_α z_α subject to M_k(z) ⪰ 0, one localizing block per
/// inequality of K, the equality constraints of K as linear equations, and
/// z_α = y_α on the support of `tms`. Without an objective the SDP is a pure
/// feasibility problem.
pub fn build_relaxation(
    tms: &Tms,
    k_set: &SemialgebraicSet,
    k: u32,
    objective: Option<&Polynomial>,
) -> Result<Relaxation> {
    let n = tms.nvars();
    if k_set.nvars() != n {
        return domain(format!(
            "K has {} variables but the tms has {n}",
            k_set.nvars()
        ));
    }
    if k < k0_of(tms) {
        return domain(format!("order {k} is below k0 = {}", k0_of(tms)));
    }
    if tms.is_empty() {
        return Err(Error::Integrity("tms has no known moments".into()));
    }
    let zero = MultiIndex::zero(n);
    match tms.get(&zero) {
        Some(v) if v > 0.0 && v.is_finite() => {}
        Some(v) => return Err(Error::Integrity(format!("zeroth moment {v} is not positive"))),
        None => return Err(Error::Integrity("zeroth moment is unknown".into())),
    }
    if let Some((a, v)) = tms.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Integrity(format!("moment {a} = {v} is not finite")));
    }

    let variables = monomial_basis(n, 2 * k);
    let index: HashMap<MultiIndex, usize> =
        variables.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
    let m = variables.len();

    let mut c = vec![0.0; m];
    if let Some(r) = objective {
        if r.nvars() != n || r.degree() > 2 * k {
            return domain("objective does not fit the relaxation");
        }
        for (a, v) in r.terms() {
            c[index[a]] += v;
        }
    }

    let fixed: Vec<(usize, f64)> = tms.iter().map(|(a, v)| (index[a], v)).collect();

    let mut blocks = Vec::new();
    let labels = monomial_basis(n, k);
    let mut mk = LmiBlock::new(labels.len());
    for i in 0..labels.len() {
        for j in i..labels.len() {
            mk.add_coeff(index[&labels[i].add(&labels[j])], i, j, 1.0);
        }
    }
    blocks.push(mk);

    for g in k_set.inequalities() {
        let dg = g.half_degree();
        if dg > k {
            return domain(format!("constraint of degree {} exceeds order {k}", g.degree()));
        }
        let labels = monomial_basis(n, k - dg);
        let mut blk = LmiBlock::new(labels.len());
        for i in 0..labels.len() {
            for j in i..labels.len() {
                let base = labels[i].add(&labels[j]);
                for (gamma, gv) in g.terms() {
                    blk.add_coeff(index[&base.add(gamma)], i, j, gv);
                }
            }
        }
        blocks.push(blk);
    }

    let mut equalities = Vec::new();
    for h in k_set.equalities() {
        let dh = h.degree();
        if dh > 2 * k {
            return domain(format!("constraint of degree {dh} exceeds order {k}"));
        }
        for delta in monomial_basis(n, 2 * k - dh) {
            let coeffs: Vec<(usize, f64)> = h
                .terms()
                .map(|(gamma, hv)| (index[&delta.add(gamma)], hv))
                .collect();
            equalities.push(LinearEquality { coeffs, rhs: 0.0 });
        }
    }

    let problem = SdpProblem::new(m, c, fixed, equalities, blocks)?;
    Ok(Relaxation {
        problem,
        order: k,
        variables,
        index,
    })
}
