//! Compact basic semialgebraic sets K = {x : g_i(x) ≥ 0 or g_i(x) = 0}.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quantum::{local_constraint_polynomials, PartitionSpec};
use crate::tms::Polynomial;

/// Default tolerance for [`membership`].
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "GEQ")]
    Geq,
    #[serde(rename = "EQ")]
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub poly: Polynomial,
    pub relation: Relation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SetJson", into = "SetJson")]
pub struct SemialgebraicSet {
    n: usize,
    constraints: Vec<Constraint>,
}

#[derive(Serialize, Deserialize)]
struct SetJson {
    n: usize,
    constraints: Vec<Constraint>,
}

impl TryFrom<SetJson> for SemialgebraicSet {
    type Error = crate::Error;
    fn try_from(j: SetJson) -> Result<Self> {
        SemialgebraicSet::new(
            j.n,
            j.constraints.into_iter().map(|c| (c.poly, c.relation)).collect(),
        )
    }
}

impl From<SemialgebraicSet> for SetJson {
    fn from(s: SemialgebraicSet) -> Self {
        SetJson {
            n: s.n,
            constraints: s.constraints,
        }
    }
}

impl SemialgebraicSet {
    pub fn new(n: usize, constraints: Vec<(Polynomial, Relation)>) -> Result<Self> {
        for (g, _) in &constraints {
            if g.nvars() != n {
                return domain(format!("constraint has {} variables, expected {n}", g.nvars()));
            }
            if g.degree() == 0 {
                return domain("constraint polynomials must have degree ≥ 1");
            }
        }
        Ok(SemialgebraicSet {
            n,
            constraints: constraints
                .into_iter()
                .map(|(poly, relation)| Constraint { poly, relation })
                .collect(),
        })
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn inequalities(&self) -> impl Iterator<Item = &Polynomial> {
        self.constraints
            .iter()
            .filter(|c| c.relation == Relation::Geq)
            .map(|c| &c.poly)
    }

    pub fn equalities(&self) -> impl Iterator<Item = &Polynomial> {
        self.constraints
            .iter()
            .filter(|c| c.relation == Relation::Eq)
            .map(|c| &c.poly)
    }

    /// d0 = max(1, max_i ⌈deg g_i / 2⌉).
    pub fn d0(&self) -> u32 {
        self.constraints
            .iter()
            .map(|c| c.poly.half_degree())
            .fold(1, u32::max)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        membership(x, self, tol)
    }
}

/// The Bloch sphere x1² + x2² + x3² − 1 = 0.
pub fn unit_sphere() -> SemialgebraicSet {
    let mut g = Polynomial::constant(3, -1.0);
    for i in 0..3 {
        let xi = Polynomial::var(3, i);
        g = &g + &(&xi * &xi);
    }
    SemialgebraicSet::new(3, vec![(g, Relation::Eq)]).expect("sphere is well formed")
}

/// Local state body of a d-level system in its t = d² − 1 coordinates.
pub fn from_local_constraints(dim: usize, pure: bool) -> Result<SemialgebraicSet> {
    let polys = local_constraint_polynomials(dim, pure)?;
    SemialgebraicSet::new(dim * dim - 1, polys)
}

/// Cartesian product with constraints re-indexed into disjoint blocks.
pub fn product(sets: &[SemialgebraicSet]) -> Result<SemialgebraicSet> {
    if sets.is_empty() {
        return domain("product of an empty list of sets");
    }
    let n: usize = sets.iter().map(|s| s.n).sum();
    let mut out = Vec::new();
    let mut offset = 0;
    for s in sets {
        for c in &s.constraints {
            out.push((c.poly.shifted_into(n, offset), c.relation));
        }
        offset += s.n;
    }
    SemialgebraicSet::new(n, out)
}

/// GEQ constraints ≥ −tol and EQ constraints within ±tol.
pub fn membership(x: &[f64], k: &SemialgebraicSet, tol: f64) -> bool {
    if x.len() != k.n {
        return false;
    }
    k.constraints.iter().all(|c| {
        let v = c.poly.eval(x);
        match c.relation {
            Relation::Geq => v >= -tol,
            Relation::Eq => v.abs() <= tol,
        }
    })
}

/// K = Π_classes K_c for the classes of a partition, in variable order.
pub fn for_partition(spec: &PartitionSpec) -> Result<SemialgebraicSet> {
    let sets = (0..spec.symmetry_classes().len())
        .map(|c| from_local_constraints(spec.class_dim(c), spec.purity_flags()[c]))
        .collect::<Result<Vec<_>>>()?;
    product(&sets)
}
