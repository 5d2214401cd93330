//! Seeded random states. Every generator takes the caller's RNG, so a fixed
//! seed reproduces its output exactly.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{domain, Result};
use crate::linalg::CMatrix;
use crate::quantum::{dicke_state, DensityMatrix, PartitionSpec};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixture size used for random separable symmetric states of N qubits.
pub fn default_mixture_size(n: usize) -> usize {
    if n <= 6 {
        25
    } else {
        45
    }
}

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

fn normalized_gram(g: &CMatrix) -> CMatrix {
    let rho = g * g.adjoint();
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = rho.trace().re;
    rho / Complex64::new(tr, 0.0)
}

/// ρ = G G† / tr(G G†) with G a dim × rank complex Ginibre matrix, on the
/// space with the given factor dimensions.
pub fn haar_random_state<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let dim: usize = dims.iter().product();
    if rank == 0 || rank > dim {
        return domain(format!("rank {rank} must lie in 1..={dim}"));
    }
    DensityMatrix::new(normalized_gram(&ginibre(dim, rank, rng)), dims.to_vec())
}

/// Ginibre state of the given rank on the (N+1)-dimensional symmetric
/// subspace of N qubits, embedded in the full 2^N space.
pub fn haar_random_symmetric<R: Rng + ?Sized>(n: usize, rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    if n == 0 {
        return domain("need at least one qubit");
    }
    if rank == 0 || rank > n + 1 {
        return domain(format!("rank {rank} must lie in 1..={}", n + 1));
    }
    let sym = normalized_gram(&ginibre(n + 1, rank, rng));
    let mut basis = CMatrix::zeros(1 << n, n + 1);
    for k in 0..=n {
        basis.set_column(k, &DVector::from_vec(dicke_state(n, k)?));
    }
    let rho = &basis * sym * basis.adjoint();
    DensityMatrix::new((&rho + rho.adjoint()) * Complex64::new(0.5, 0.0), vec![2; n])
}

/// Uniform point on the unit sphere of R³.
pub fn random_bloch_vector<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-12 {
            return [v[0] / norm, v[1] / norm, v[2] / norm];
        }
    }
}

/// Qubit state vector whose Bloch vector is `n`; (0, 0, 1) gives |0⟩.
pub fn qubit_from_bloch(n: [f64; 3]) -> [Complex64; 2] {
    let theta = n[2].clamp(-1.0, 1.0).acos();
    let phi = n[1].atan2(n[0]);
    [
        Complex64::new((theta / 2.0).cos(), 0.0),
        Complex64::from_polar((theta / 2.0).sin(), phi),
    ]
}

/// |ψ⟩^{⊗N} for a single-qubit vector ψ.
pub fn tensor_power(psi: &[Complex64; 2], n: usize) -> Vec<Complex64> {
    (0..1usize << n)
        .map(|i| {
            (0..n).fold(Complex64::new(1.0, 0.0), |acc, q| {
                let bit = (i >> (n - 1 - q)) & 1;
                acc * psi[bit]
            })
        })
        .collect()
}

/// Flat-Dirichlet weights from normalized exponentials.
pub fn dirichlet_weights<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = e.iter().sum();
    e.into_iter().map(|x| x / total).collect()
}

/// Σ_i w_i (|ψ_i⟩⟨ψ_i|)^{⊗N} together with its weights and Bloch vectors.
pub fn random_separable_symmetric_with_atoms<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<(DensityMatrix, Vec<(f64, [f64; 3])>)> {
    if n == 0 || m == 0 {
        return domain("need at least one qubit and one mixture component");
    }
    let blochs: Vec<[f64; 3]> = (0..m).map(|_| random_bloch_vector(rng)).collect();
    let weights = dirichlet_weights(m, rng);
    let dim = 1usize << n;
    let mut rho = CMatrix::zeros(dim, dim);
    for (w, b) in weights.iter().zip(&blochs) {
        let v = DVector::from_vec(tensor_power(&qubit_from_bloch(*b), n));
        rho += &v * v.adjoint() * Complex64::new(*w, 0.0);
    }
    let rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = rho.trace().re;
    let state = DensityMatrix::new(rho / Complex64::new(tr, 0.0), vec![2; n])?;
    Ok((state, weights.into_iter().zip(blochs).collect()))
}

pub fn random_separable_symmetric<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Result<DensityMatrix> {
    random_separable_symmetric_with_atoms(n, m, rng).map(|(r, _)| r)
}

/// Tensor product of independent Ginibre local states, one per symmetry
/// class and repeated over the parties of that class; classes flagged pure
/// get rank-one states.
pub fn random_product_state<R: Rng + ?Sized>(spec: &PartitionSpec, rng: &mut R) -> Result<DensityMatrix> {
    let locals = (0..spec.symmetry_classes().len())
        .map(|c| {
            let d = spec.class_dim(c);
            let rank = if spec.purity_flags()[c] { 1 } else { d };
            haar_random_state(&[d], rank, rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut state: Option<DensityMatrix> = None;
    for party in 0..spec.num_parties() {
        let local = &locals[spec.class_of(party)];
        state = Some(match state {
            None => local.clone(),
            Some(s) => s.kron(local),
        });
    }
    Ok(state.expect("partitions have at least one party"))
}
