//! Small dense linear-algebra helpers shared by the numerical modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

/// Relative tolerance used for every "is this matrix PSD" decision.
pub const PSD_TOL: f64 = 1e-9;

pub fn kron_c(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest entry modulus of a complex matrix.
pub fn cmax_abs<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex64, R, C>>(
    m: &nalgebra::Matrix<Complex64, R, C, S>,
) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a real symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let h = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Symmetric eigendecomposition sorted by descending eigenvalue.
pub fn sorted_eigen_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let h = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// PSD test on a sorted spectrum: smallest eigenvalue ≥ −tol·max(1, ‖·‖₂).
pub fn spectrum_is_psd(ascending: &[f64], tol: f64) -> bool {
    let Some(&lo) = ascending.first() else {
        return true;
    };
    let hi = ascending.last().copied().unwrap_or(0.0);
    let norm = lo.abs().max(hi.abs());
    lo >= -tol * norm.max(1.0)
}

pub fn is_psd(m: &DMatrix<f64>) -> bool {
    spectrum_is_psd(&symmetric_eigenvalues(m), PSD_TOL)
}

pub fn is_psd_c(m: &CMatrix) -> bool {
    spectrum_is_psd(&hermitian_eigenvalues(m), PSD_TOL)
}

/// Number of singular values above `tol · max(σ_max, 1)`.
pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let cut = tol * smax.max(1.0);
    sv.iter().filter(|&&s| s > cut).count()
}

/// Orthonormal basis (columns) of the null space of `m`, using singular values
/// below `rel_tol · σ_max` as zero.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    // Gram route keeps the right singular vectors complete even when rows < cols.
    let gram = m.transpose() * m;
    let (vals, vecs) = sorted_eigen_desc(&gram);
    let smax = vals.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let cut = rel_tol * smax;
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| vals[i].max(0.0).sqrt() <= cut || smax == 0.0)
        .collect();
    let mut out = DMatrix::zeros(cols, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &vecs.column(i));
    }
    out
}

/// Non-negative least squares, `min ‖A w − b‖₂ s.t. w ≥ 0` (Lawson–Hanson).
pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut w = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-14 * a.norm().max(1.0) * b.norm().max(1.0);
    for _outer in 0..(3 * n + 10) {
        let grad = a.transpose() * (b - a * &w);
        let cand = (0..n)
            .filter(|&j| !passive[j])
            .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
        match cand {
            Some(j) if grad[j] > tol => passive[j] = true,
            _ => break,
        }
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = a.select_columns(&idx);
            let z_p = lstsq(&sub, b);
            if z_p.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    w[j] = z_p[k];
                }
                break;
            }
            let mut alpha = f64::INFINITY;
            for (k, &j) in idx.iter().enumerate() {
                if z_p[k] <= 0.0 {
                    let t = w[j] / (w[j] - z_p[k]);
                    alpha = alpha.min(t);
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                w[j] += alpha * (z_p[k] - w[j]);
                if w[j] <= 1e-15 {
                    w[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    w
}

/// Minimum-norm least-squares solution via SVD.
pub fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = 1e-13 * smax.max(f64::MIN_POSITIVE);
    svd.solve(b, eps).unwrap_or_else(|_| DVector::zeros(a.ncols()))
}

/// Frobenius inner product of two real matrices of equal shape.
pub fn frob(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}
