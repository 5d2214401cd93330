use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{cmax_abs, hermitian_eigenvalues, CMatrix};

/// Hermitian tolerance for density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for density matrices.
pub const TRACE_TOL: f64 = 1e-12;
/// Smallest admissible eigenvalue of a density matrix.
pub const EIGEN_FLOOR: f64 = -1e-10;

/// Density operator on a Hilbert space factored as ⊗ C^{d_i}.
///
/// Basis ordering is big-endian: party 0 is the most significant digit.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let rho = Self::operator(matrix, dims)?;
        let lo = hermitian_eigenvalues(&rho.matrix)
            .first()
            .copied()
            .unwrap_or(0.0);
        if lo < EIGEN_FLOOR {
            return domain(format!("density matrix has eigenvalue {lo:.3e} < 0"));
        }
        Ok(rho)
    }

    /// Like [`DensityMatrix::new`] but without the positivity check; used for
    /// operators reconstructed from tensors that need not encode a state.
    pub fn operator(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let dim: usize = dims.iter().product();
        if dims.is_empty() || dims.iter().any(|&d| d < 2) {
            return domain(format!("local dimensions must be ≥ 2, got {dims:?}"));
        }
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return domain(format!(
                "matrix is {}×{} but factor dims {dims:?} give {dim}",
                matrix.nrows(),
                matrix.ncols()
            ));
        }
        let herm = cmax_abs(&(&matrix - matrix.adjoint()));
        if herm > HERMITIAN_TOL {
            return domain(format!("matrix is not Hermitian (deviation {herm:.3e})"));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return domain(format!("trace is {tr}, expected 1"));
        }
        Ok(DensityMatrix { dims, matrix })
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalized) vector ψ.
    pub fn pure(psi: &[Complex64], dims: Vec<usize>) -> Result<Self> {
        let v = nalgebra::DVector::from_column_slice(psi);
        let norm2 = v.norm_squared();
        if norm2 == 0.0 {
            return domain("zero state vector");
        }
        let m = &v * v.adjoint() / Complex64::new(norm2, 0.0);
        Self::new(hermitize(&m), dims)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let dim: usize = dims.iter().product();
        Self::new(
            CMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
            dims,
        )
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigenvalues().iter().filter(|&&l| l > tol).count()
    }

    /// Tensor product ρ ⊗ σ.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityMatrix {
            dims,
            matrix: self.matrix.kronecker(&other.matrix),
        }
    }

    /// Convex mixture Σ w_j ρ_j of states on the same space.
    pub fn mixture(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return domain("empty mixture");
        };
        let mut acc = CMatrix::zeros(first.dim(), first.dim());
        for (w, r) in parts {
            if r.dims != first.dims {
                return domain("mixture components live on different spaces");
            }
            acc += &r.matrix * Complex64::new(*w, 0.0);
        }
        let tr = acc.trace().re;
        Self::new(hermitize(&(acc / Complex64::new(tr, 0.0))), first.dims.clone())
    }
}

pub(crate) fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `{"dims": [d1,...], "re": [[...]], "im": [[...]]}`
#[derive(Serialize, Deserialize)]
struct DensityJson {
    dims: Vec<usize>,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for DensityMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| (0..n).map(|j| f(&self.matrix[(i, j)])).collect())
                .collect()
        };
        DensityJson {
            dims: self.dims.clone(),
            re: rows(|c| c.re),
            im: rows(|c| c.im),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = DensityJson::deserialize(d)?;
        let n = j.re.len();
        if j.im.len() != n || j.re.iter().chain(j.im.iter()).any(|r| r.len() != n) {
            return Err(D::Error::custom("re/im must be square arrays of equal size"));
        }
        let re = DMatrix::from_fn(n, n, |a, b| j.re[a][b]);
        let im = DMatrix::from_fn(n, n, |a, b| j.im[a][b]);
        let m = CMatrix::from_fn(n, n, |a, b| Complex64::new(re[(a, b)], im[(a, b)]));
        DensityMatrix::new(m, j.dims).map_err(D::Error::custom)
    }
}
