use num_complex::Complex64;

use super::state::DensityMatrix;
use crate::error::{domain, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix, PSD_TOL};

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Symmetric N-qubit Dicke state with `k` qubits in |0⟩, as a vector of
/// length 2^N in the computational basis.
pub fn dicke_state(n: usize, k: usize) -> Result<Vec<Complex64>> {
    if n == 0 {
        return domain("Dicke state needs at least one qubit");
    }
    if k > n {
        return domain(format!("zero count {k} exceeds qubit count {n}"));
    }
    let amp = 1.0 / binomial(n, k).sqrt();
    Ok((0..1usize << n)
        .map(|i| {
            let zeros = n - (i as u64).count_ones() as usize;
            Complex64::new(if zeros == k { amp } else { 0.0 }, 0.0)
        })
        .collect())
}

/// P_s = Σ_k |D_N^(k)⟩⟨D_N^(k)|.
pub fn symmetric_projector(n: usize) -> Result<CMatrix> {
    let dim = 1usize << n;
    let mut p = CMatrix::zeros(dim, dim);
    for k in 0..=n {
        let v = nalgebra::DVector::from_vec(dicke_state(n, k)?);
        p += &v * v.adjoint();
    }
    Ok(p)
}

fn check_subset(nparties: usize, subset: &[usize]) -> Result<()> {
    if subset.is_empty() || subset.len() >= nparties {
        return domain(format!(
            "subset {subset:?} must be a nonempty proper subset of {nparties} parties"
        ));
    }
    let mut seen = vec![false; nparties];
    for &p in subset {
        if p >= nparties || std::mem::replace(&mut seen[p], true) {
            return domain(format!("invalid or repeated party {p} in {subset:?}"));
        }
    }
    Ok(())
}

/// Transposes the tensor factors listed in `subset`.
pub fn partial_transpose(rho: &DensityMatrix, subset: &[usize]) -> Result<CMatrix> {
    partial_transpose_matrix(rho.matrix(), rho.dims(), subset)
}

/// [`partial_transpose`] on a raw operator with the given factor dims.
pub fn partial_transpose_matrix(m: &CMatrix, dims: &[usize], subset: &[usize]) -> Result<CMatrix> {
    check_subset(dims.len(), subset)?;
    let big: usize = dims.iter().product();
    if m.nrows() != big || m.ncols() != big {
        return domain("matrix size does not match factor dims");
    }
    let mut flip = vec![false; dims.len()];
    for &p in subset {
        flip[p] = true;
    }
    let mut out = CMatrix::zeros(big, big);
    let mut rd = vec![0; dims.len()];
    let mut cd = vec![0; dims.len()];
    for r in 0..big {
        for c in 0..big {
            let (mut rr, mut cc) = (r, c);
            for p in (0..dims.len()).rev() {
                rd[p] = rr % dims[p];
                cd[p] = cc % dims[p];
                rr /= dims[p];
                cc /= dims[p];
            }
            let (mut nr, mut nc) = (0, 0);
            for p in 0..dims.len() {
                let (a, b) = if flip[p] { (cd[p], rd[p]) } else { (rd[p], cd[p]) };
                nr = nr * dims[p] + a;
                nc = nc * dims[p] + b;
            }
            out[(nr, nc)] = m[(r, c)];
        }
    }
    Ok(out)
}

/// Whether the partial transpose over `subset` is positive semidefinite,
/// together with its smallest eigenvalue.
pub fn ppt_check(rho: &DensityMatrix, subset: &[usize]) -> Result<(bool, f64)> {
    let pt = partial_transpose(rho, subset)?;
    let ev = hermitian_eigenvalues(&pt);
    let lo = ev[0];
    let scale = ev.iter().fold(1.0f64, |a, e| a.max(e.abs()));
    Ok((lo >= -PSD_TOL * scale, lo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::cmax_abs;

    #[test]
    fn dicke_examples() {
        let d = dicke_state(1, 1).unwrap();
        assert_eq!(d[0].re, 1.0);
        let d = dicke_state(2, 2).unwrap();
        assert_eq!(d[0].re, 1.0);
        let d = dicke_state(2, 1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((d[1].re - s).abs() < 1e-15 && (d[2].re - s).abs() < 1e-15);
        assert_eq!(d[0].re, 0.0);
        assert!(dicke_state(2, 3).is_err());
    }

    #[test]
    fn projector_ranks() {
        let p1 = symmetric_projector(1).unwrap();
        assert!(cmax_abs(&(p1 - CMatrix::identity(2, 2))) < 1e-15);
        for n in 2..5 {
            let p = symmetric_projector(n).unwrap();
            assert!(cmax_abs(&(&p * &p - &p)) < 1e-13);
            assert!((p.trace().re - (n + 1) as f64).abs() < 1e-12);
        }
        let p2 = symmetric_projector(2).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = nalgebra::DVector::from_vec(
            [0.0, s, -s, 0.0].map(|v| Complex64::new(v, 0.0)).to_vec(),
        );
        assert!(cmax_abs(&(p2 * singlet)) < 1e-15);
    }

    #[test]
    fn dicke_ppt_minimum() {
        let rho = DensityMatrix::pure(&dicke_state(2, 1).unwrap(), vec![2, 2]).unwrap();
        let (ok, lo) = ppt_check(&rho, &[1]).unwrap();
        assert!(!ok);
        assert!((lo + 0.5).abs() < 1e-12);
        let twice = partial_transpose_matrix(&partial_transpose(&rho, &[1]).unwrap(), &[2, 2], &[1]).unwrap();
        assert!(cmax_abs(&(twice - rho.matrix())) < 1e-15);
    }

    #[test]
    fn maximally_mixed_is_ppt() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 3]).unwrap();
        let (ok, lo) = ppt_check(&rho, &[0]).unwrap();
        assert!(ok);
        assert!((lo - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_subsets() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert!(partial_transpose(&rho, &[]).is_err());
        assert!(partial_transpose(&rho, &[0, 1]).is_err());
        assert!(partial_transpose(&rho, &[2]).is_err());
    }
}
