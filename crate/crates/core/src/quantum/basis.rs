use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::linalg::CMatrix;

/// Orthogonal Hermitian operator basis S_0 = I, S_1, …, S_t of a d-level
/// system, normalized so that tr(S_μ S_ν) = d·δ_μν.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl LocalBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// t = d² − 1, the number of non-identity operators.
    pub fn t(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn op(&self, mu: usize) -> &CMatrix {
        &self.ops[mu]
    }

    /// Local operator (1/d)(I + Σ_a x_a S_a) for coordinates x ∈ R^t.
    pub fn operator_from_coords(&self, x: &[f64]) -> CMatrix {
        let mut m = self.ops[0].clone();
        for (a, &xa) in x.iter().enumerate() {
            m += &self.ops[a + 1] * Complex64::new(xa, 0.0);
        }
        m / Complex64::new(self.dim as f64, 0.0)
    }

    /// Coordinates x_a = tr(ρ S_a), a = 1..t.
    pub fn coords_of(&self, rho: &CMatrix) -> Vec<f64> {
        self.ops[1..]
            .iter()
            .map(|s| (rho * s).trace().re)
            .collect()
    }
}

/// Identity plus generalized Gell-Mann matrices scaled to tr(S_μ S_ν) = d·δ_μν.
///
/// The order is: symmetric off-diagonal pairs, antisymmetric pairs, then
/// diagonal generators. For d = 2 this reproduces (I, σ₁, σ₂, σ₃).
pub fn standard_basis(dim: usize) -> Result<LocalBasis> {
    if dim < 2 {
        return domain(format!("local dimension must be ≥ 2, got {dim}"));
    }
    let d = dim;
    let scale = Complex64::new((d as f64 / 2.0).sqrt(), 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut ops = vec![CMatrix::identity(d, d)];
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|j| ((j + 1)..d).map(move |k| (j, k)))
        .collect();
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(d, d);
        m[(j, k)] = one;
        m[(k, j)] = one;
        ops.push(m * scale);
    }
    for &(j, k) in &pairs {
        let mut m = CMatrix::zeros(d, d);
        m[(j, k)] = -i;
        m[(k, j)] = i;
        ops.push(m * scale);
    }
    for l in 1..d {
        let c = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMatrix::zeros(d, d);
        for jj in 0..l {
            m[(jj, jj)] = Complex64::new(c, 0.0);
        }
        m[(l, l)] = Complex64::new(-c * l as f64, 0.0);
        ops.push(m * scale);
    }
    Ok(LocalBasis { dim: d, ops })
}
