use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use tmsep::criteria::*;
use tmsep::hierarchy::{Decomposition, Verdict};
use tmsep::quantum::*;
use tmsep::randgen::*;
use tmsep::tms::*;

fn sym_tms(rho: &DensityMatrix) -> Tms {
    let spec = PartitionSpec::symmetric_qubits(rho.dims().len(), true).unwrap();
    state_to_tms(rho, &spec).unwrap()
}

fn dicke(n: usize, k: usize) -> DensityMatrix {
    DensityMatrix::pure(&dicke_state(n, k).unwrap(), vec![2; n]).unwrap()
}

fn coherent_up(n: usize) -> DensityMatrix {
    dicke(n, n)
}

fn ps_over_3() -> DensityMatrix {
    let p = symmetric_projector(2).unwrap() / Complex64::new(3.0, 0.0);
    DensityMatrix::new(p, vec![2, 2]).unwrap()
}

fn m1_of(dec: &Decomposition) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for a in &dec.atoms {
        let v = nalgebra::DVector::from_vec(vec![1.0, a.point[0], a.point[1], a.point[2]]);
        m += &v * v.transpose() * a.weight;
    }
    m
}

#[test]
fn two_qubit_nsc_examples() {
    assert!(two_qubit_sym_nsc(&sym_tms(&coherent_up(2))).unwrap());
    assert!(!two_qubit_sym_nsc(&sym_tms(&dicke(2, 1))).unwrap());
    let y = sym_tms(&ps_over_3());
    assert!(two_qubit_sym_nsc(&y).unwrap());
    let m1 = moment_matrix(&y, 1).unwrap().entries;
    let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]));
    assert!((m1 - expected).amax() < 1e-12);
}

#[test]
fn dicke_two_qubit_m1_has_eigenvalue_minus_one() {
    let m1 = moment_matrix(&sym_tms(&dicke(2, 1)), 1).unwrap().entries;
    let ev = tmsep::linalg::symmetric_eigenvalues(&m1);
    assert!((ev[0] + 1.0).abs() < 1e-12);
}

#[test]
fn nsc_rejects_wrong_degree() {
    assert!(two_qubit_sym_nsc(&sym_tms(&coherent_up(3))).is_err());
    assert!(three_qubit_sym_nsc(&sym_tms(&coherent_up(2))).is_err());
}

#[test]
fn three_qubit_nsc_examples() {
    assert!(three_qubit_sym_nsc(&sym_tms(&coherent_up(3))).unwrap());
    let d31 = dicke(3, 1);
    assert!(!three_qubit_sym_nsc(&sym_tms(&d31)).unwrap());
    assert!(!ppt_check(&d31, &[0]).unwrap().0);
    let mut rng = rng_from_seed(3);
    for _ in 0..20 {
        let rho = random_separable_symmetric(3, 25, &mut rng).unwrap();
        assert!(three_qubit_sym_nsc(&sym_tms(&rho)).unwrap());
    }
}

#[test]
fn cns_matrix_is_hermitian_for_arbitrary_moments() {
    let mut rng = rng_from_seed(11);
    use rand::Rng;
    for _ in 0..50 {
        let y = Tms::from_values(
            3,
            3,
            monomial_basis(3, 3).into_iter().map(|a| (a, rng.random_range(-1.0..1.0))),
        )
        .unwrap();
        let m = cns_matrix(&y).unwrap();
        assert!(tmsep::linalg::cmax_abs(&(&m - m.adjoint())) == 0.0);
    }
}

#[test]
fn three_qubit_nsc_matches_ppt_on_haar_states() {
    let mut rng = rng_from_seed(5);
    for i in 0..100 {
        let rank = 1 + i % 4;
        let rho = haar_random_symmetric(3, rank, &mut rng).unwrap();
        let (ppt, _) = ppt_check(&rho, &[0]).unwrap();
        assert_eq!(three_qubit_sym_nsc(&sym_tms(&rho)).unwrap(), ppt, "instance {i}");
    }
}

#[test]
fn ppt_rank_examples() {
    let mut rng = rng_from_seed(9);
    for _ in 0..10 {
        let rho = random_separable_symmetric(2, 25, &mut rng).unwrap();
        assert_eq!(ppt_rank_sufficient(&rho).unwrap(), Some(Verdict::Separable));
    }
    // Full-rank PPT state on the symmetric subspace of four qubits: rank 5 > 4.
    let rho4 = random_separable_symmetric(4, 25, &mut rng).unwrap();
    assert_eq!(rho4.rank(1e-9), 5);
    assert_eq!(ppt_rank_sufficient(&rho4).unwrap(), None);
    // Five qubits, mixture of three coherent states: rank 3 ≤ 5.
    let rho5 = random_separable_symmetric(5, 3, &mut rng).unwrap();
    assert_eq!(ppt_rank_sufficient(&rho5).unwrap(), Some(Verdict::Separable));
    assert_eq!(ppt_rank_sufficient(&dicke(2, 1)).unwrap(), None);
}

#[test]
fn four_atom_examples() {
    let dec = two_qubit_four_atom_decomposition(&sym_tms(&coherent_up(2))).unwrap();
    assert_eq!(dec.len(), 1);
    assert!((dec.atoms[0].point[2] - 1.0).abs() < 1e-12);

    let y = sym_tms(&ps_over_3());
    let dec = two_qubit_four_atom_decomposition(&y).unwrap();
    assert_eq!(dec.len(), 4);
    let m1 = moment_matrix(&y, 1).unwrap().entries;
    assert!((m1_of(&dec) - m1).amax() < 1e-8);

    let up = coherent_up(2);
    let down = dicke(2, 0);
    let mix = DensityMatrix::mixture(&[(0.5, up), (0.5, down)]).unwrap();
    let dec = two_qubit_four_atom_decomposition(&sym_tms(&mix)).unwrap();
    assert_eq!(dec.len(), 2);
    let mut z: Vec<f64> = dec.atoms.iter().map(|a| a.point[2]).collect();
    z.sort_by(f64::total_cmp);
    assert!((z[0] + 1.0).abs() < 1e-10 && (z[1] - 1.0).abs() < 1e-10);
    assert!(dec.atoms.iter().all(|a| (a.weight - 0.5).abs() < 1e-10));
}

#[test]
fn four_atom_rejects_entangled() {
    assert!(two_qubit_four_atom_decomposition(&sym_tms(&dicke(2, 1))).is_err());
}

#[test]
fn moment_ppt_examples() {
    let spec2 = PartitionSpec::symmetric_qubits(2, true).unwrap();
    let x = state_to_tensor(&dicke(2, 1), &spec2).unwrap().tensor;
    assert_eq!(moment_ppt_equivalence(&x).unwrap(), (false, false));
    for n in [2, 4, 6] {
        let spec = PartitionSpec::symmetric_qubits(n, true).unwrap();
        let x = state_to_tensor(&coherent_up(n), &spec).unwrap().tensor;
        assert_eq!(moment_ppt_equivalence(&x).unwrap(), (true, true));
    }
    let spec3 = PartitionSpec::symmetric_qubits(3, true).unwrap();
    let x = state_to_tensor(&coherent_up(3), &spec3).unwrap().tensor;
    assert!(moment_ppt_equivalence(&x).is_err());
}

#[test]
fn moment_ppt_agree_on_haar_four_qubit_states() {
    let spec = PartitionSpec::symmetric_qubits(4, true).unwrap();
    let mut rng = rng_from_seed(21);
    for i in 0..200 {
        let rho = haar_random_symmetric(4, 1 + i % 5, &mut rng).unwrap();
        let x = state_to_tensor(&rho, &spec).unwrap().tensor;
        let (a, b) = moment_ppt_equivalence(&x).unwrap();
        assert_eq!(a, b, "instance {i}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_trace_identity(seed in any::<u64>(), rank in 1usize..=3) {
        let mut rng = rng_from_seed(seed);
        let y = sym_tms(&haar_random_symmetric(2, rank, &mut rng).unwrap());
        let get = |e: [u32; 3]| y.get(&MultiIndex::new(e.to_vec())).unwrap();
        let gap = get([0, 0, 0]) - get([2, 0, 0]) - get([0, 2, 0]) - get([0, 0, 2]);
        prop_assert!(gap.abs() < 1e-12);
    }

    #[test]
    fn four_atom_invariants(seed in any::<u64>(), m in 1usize..30) {
        let mut rng = rng_from_seed(seed);
        let y = sym_tms(&random_separable_symmetric(2, m, &mut rng).unwrap());
        let rank = tmsep::linalg::numerical_rank(&moment_matrix(&y, 1).unwrap().entries, 1e-10);
        let (dec, steps) = two_qubit_four_atom_decomposition_with_steps(&y).unwrap();
        prop_assert!(dec.len() <= 4);
        prop_assert!(steps <= rank);
        for a in &dec.atoms {
            let norm: f64 = a.point.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-8);
        }
        let m1 = moment_matrix(&y, 1).unwrap().entries;
        prop_assert!((m1_of(&dec) - m1).amax() < 1e-8);
    }

    #[test]
    fn three_qubit_nsc_agrees_with_ppt(seed in any::<u64>(), rank in 1usize..=4) {
        let mut rng = rng_from_seed(seed);
        let rho = haar_random_symmetric(3, rank, &mut rng).unwrap();
        let (ppt, _) = ppt_check(&rho, &[0]).unwrap();
        prop_assert_eq!(three_qubit_sym_nsc(&sym_tms(&rho)).unwrap(), ppt);
    }
}
