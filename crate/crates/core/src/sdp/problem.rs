use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Symmetric matrix stored as its upper-triangular nonzero entries.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymSparse {
    dim: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SymSparse {
    pub fn new(dim: usize) -> Self {
        SymSparse {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Adds `v` at (i, j) and, implicitly, at (j, i).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.dim && j < self.dim, "entry ({i},{j}) outside {}", self.dim);
        if v == 0.0 {
            return;
        }
        let key = (i.min(j), i.max(j));
        let e = self.entries.entry(key).or_insert(0.0);
        *e += v;
        if *e == 0.0 {
            self.entries.remove(&key);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Upper-triangular entries (i ≤ j).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        self.add_to(&mut m, 1.0);
        m
    }

    /// m += s · self.
    pub fn add_to(&self, m: &mut DMatrix<f64>, s: f64) {
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] += s * v;
            if i != j {
                m[(j, i)] += s * v;
            }
        }
    }

    /// ⟨self, m⟩ = tr(self · m) for symmetric m.
    pub fn dot(&self, m: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|(&(i, j), &v)| if i == j { v * m[(i, i)] } else { v * (m[(i, j)] + m[(j, i)]) })
            .sum()
    }

    /// Converts a dense matrix, rejecting asymmetry above `1e-12 · max(1, ‖m‖∞)`.
    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return domain(format!("block matrix is {}×{}", m.nrows(), m.ncols()));
        }
        let scale = m.amax().max(1.0);
        if (m - m.transpose()).amax() > 1e-12 * scale {
            return domain("block matrix is not symmetric");
        }
        let mut s = SymSparse::new(m.nrows());
        for j in 0..m.ncols() {
            for i in 0..=j {
                s.add(i, j, 0.5 * (m[(i, j)] + m[(j, i)]));
            }
        }
        Ok(s)
    }
}

/// Affine matrix map z ↦ A_0 + Σ_i z_i A_i required to be PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    dim: usize,
    constant: SymSparse,
    coeffs: BTreeMap<usize, SymSparse>,
}

impl LmiBlock {
    pub fn new(dim: usize) -> Self {
        LmiBlock {
            dim,
            constant: SymSparse::new(dim),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_dense(constant: &DMatrix<f64>, coeffs: &[(usize, DMatrix<f64>)]) -> Result<Self> {
        let mut b = LmiBlock::new(constant.nrows());
        b.constant = SymSparse::from_dense(constant)?;
        for (var, m) in coeffs {
            if m.nrows() != b.dim {
                return domain(format!("coefficient of variable {var} has wrong size"));
            }
            let s = SymSparse::from_dense(m)?;
            for (i, j, v) in s.entries() {
                b.add_coeff(*var, i, j, v);
            }
        }
        Ok(b)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn add_constant(&mut self, i: usize, j: usize, v: f64) {
        self.constant.add(i, j, v);
    }

    pub fn add_coeff(&mut self, var: usize, i: usize, j: usize, v: f64) {
        let dim = self.dim;
        let m = self.coeffs.entry(var).or_insert_with(|| SymSparse::new(dim));
        m.add(i, j, v);
        if m.is_empty() {
            self.coeffs.remove(&var);
        }
    }

    pub fn constant(&self) -> &SymSparse {
        &self.constant
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (usize, &SymSparse)> {
        self.coeffs.iter().map(|(&k, v)| (k, v))
    }

    pub fn coeff(&self, var: usize) -> Option<&SymSparse> {
        self.coeffs.get(&var)
    }

    /// A_0 + Σ z_i A_i as a dense matrix.
    pub fn evaluate(&self, z: &[f64]) -> DMatrix<f64> {
        let mut m = self.constant.to_dense();
        for (&var, a) in &self.coeffs {
            a.add_to(&mut m, z[var]);
        }
        m
    }
}

/// Linear equation Σ a_i z_i = rhs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearEquality {
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

/// minimize cᵀz subject to z_i = v_i (fixed), E z = f, and A_0^b + Σ z_i A_i^b ⪰ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    num_vars: usize,
    objective: Vec<f64>,
    fixed: Vec<(usize, f64)>,
    equalities: Vec<LinearEquality>,
    blocks: Vec<LmiBlock>,
}

impl SdpProblem {
    pub fn new(
        num_vars: usize,
        objective: Vec<f64>,
        fixed: Vec<(usize, f64)>,
        equalities: Vec<LinearEquality>,
        blocks: Vec<LmiBlock>,
    ) -> Result<Self> {
        if objective.len() != num_vars {
            return domain(format!(
                "objective has {} entries for {num_vars} variables",
                objective.len()
            ));
        }
        if objective.iter().any(|c| !c.is_finite()) {
            return domain("objective has non-finite entries");
        }
        let mut seen = vec![false; num_vars];
        for &(i, v) in &fixed {
            if i >= num_vars || std::mem::replace(&mut seen[i], true) {
                return domain(format!("fixed index {i} repeated or out of range"));
            }
            if !v.is_finite() {
                return domain(format!("fixed value of variable {i} is not finite"));
            }
        }
        for e in &equalities {
            if e.coeffs.iter().any(|&(i, a)| i >= num_vars || !a.is_finite()) || !e.rhs.is_finite() {
                return domain("linear equality refers to an invalid variable or value");
            }
        }
        if blocks.is_empty() {
            return domain("problem has no LMI blocks");
        }
        for b in &blocks {
            if let Some((var, _)) = b.coeffs().find(|(v, _)| *v >= num_vars) {
                return domain(format!("block refers to variable {var} ≥ {num_vars}"));
            }
            let finite = b.constant().entries().all(|(_, _, v)| v.is_finite())
                && b.coeffs().all(|(_, m)| m.entries().all(|(_, _, v)| v.is_finite()));
            if !finite {
                return domain("block data is not finite");
            }
        }
        Ok(SdpProblem {
            num_vars,
            objective,
            fixed,
            equalities,
            blocks,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn fixed(&self) -> &[(usize, f64)] {
        &self.fixed
    }

    pub fn equalities(&self) -> &[LinearEquality] {
        &self.equalities
    }

    pub fn blocks(&self) -> &[LmiBlock] {
        &self.blocks
    }

    /// Copy of the problem with a different objective.
    pub fn with_objective(&self, objective: Vec<f64>) -> Result<Self> {
        SdpProblem::new(
            self.num_vars,
            objective,
            self.fixed.clone(),
            self.equalities.clone(),
            self.blocks.clone(),
        )
    }
}

#[derive(Serialize, Deserialize)]
struct CoeffJson {
    var: usize,
    matrix: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct BlockJson {
    constant: Vec<Vec<f64>>,
    coeffs: Vec<CoeffJson>,
}

/// Dense export format:
/// `{"num_vars", "objective", "fixed": [[i, v]], "equalities": [{"coeffs": [[i, a]], "rhs"}],
///   "blocks": [{"constant": [[..]], "coeffs": [{"var": i, "matrix": [[..]]}]}]}`.
#[derive(Serialize, Deserialize)]
struct ProblemJson {
    num_vars: usize,
    objective: Vec<f64>,
    fixed: Vec<(usize, f64)>,
    equalities: Vec<LinearEquality>,
    blocks: Vec<BlockJson>,
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub(crate) fn from_rows(r: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = r.len();
    if r.iter().any(|row| row.len() != n) {
        return domain("matrix rows must form a square array");
    }
    Ok(DMatrix::from_fn(n, n, |i, j| r[i][j]))
}

impl Serialize for SdpProblem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProblemJson {
            num_vars: self.num_vars,
            objective: self.objective.clone(),
            fixed: self.fixed.clone(),
            equalities: self.equalities.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockJson {
                    constant: rows(&b.constant.to_dense()),
                    coeffs: b
                        .coeffs()
                        .map(|(var, m)| CoeffJson {
                            var,
                            matrix: rows(&m.to_dense()),
                        })
                        .collect(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SdpProblem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = ProblemJson::deserialize(d)?;
        let build = || -> Result<SdpProblem> {
            let mut blocks = Vec::new();
            for b in &j.blocks {
                let c = from_rows(&b.constant)?;
                let coeffs = b
                    .coeffs
                    .iter()
                    .map(|cj| Ok((cj.var, from_rows(&cj.matrix)?)))
                    .collect::<Result<Vec<_>>>()?;
                blocks.push(LmiBlock::from_dense(&c, &coeffs)?);
            }
            SdpProblem::new(
                j.num_vars,
                j.objective.clone(),
                j.fixed.clone(),
                j.equalities.clone(),
                blocks,
            )
        };
        build().map_err(D::Error::custom)
    }
}
