//! SDP instances shared by the solver tests and the acceptance run.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use tmsep::linalg::symmetric_eigenvalues;
use tmsep::randgen::rng_from_seed;
use tmsep::sdp::*;

pub fn m(rows: &[&[f64]]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j])
}

pub fn sym_random<R: Rng>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    (&a + a.transpose()) * 0.5
}

pub fn min_eig(p: &SdpProblem, z: &[f64]) -> f64 {
    p.blocks()
        .iter()
        .map(|b| symmetric_eigenvalues(&b.evaluate(z))[0])
        .fold(f64::INFINITY, f64::min)
}

/// Feasible at z = 0 (A_0 ≻ 0) and bounded (the first block pins
/// z inside a box), with random data elsewhere.
pub fn feasible_instance(seed: u64) -> SdpProblem {
    let mut rng = rng_from_seed(seed);
    let nv = rng.random_range(1..=3);
    let mut blocks = Vec::new();
    let box_dim = 2 * nv;
    let mut bx = LmiBlock::new(box_dim);
    for i in 0..nv {
        bx.add_constant(2 * i, 2 * i, 1.0);
        bx.add_constant(2 * i + 1, 2 * i + 1, 1.0);
        bx.add_coeff(i, 2 * i, 2 * i, 1.0);
        bx.add_coeff(i, 2 * i + 1, 2 * i + 1, -1.0);
    }
    blocks.push(bx);
    let n = rng.random_range(2..=4);
    let a0 = sym_random(n, &mut rng) * 0.5 + DMatrix::identity(n, n);
    let coeffs: Vec<(usize, DMatrix<f64>)> = (0..nv).map(|i| (i, sym_random(n, &mut rng))).collect();
    blocks.push(LmiBlock::from_dense(&a0, &coeffs).unwrap());
    let c: Vec<f64> = (0..nv).map(|_| rng.random_range(-1.0..1.0)).collect();
    SdpProblem::new(nv, c, vec![], vec![], blocks).unwrap()
}

/// Two variables, two random 2×2 blocks: feasible or not.
pub fn random_instance(seed: u64) -> SdpProblem {
    let mut rng = rng_from_seed(seed);
    let blocks = (0..2)
        .map(|_| {
            let a0 = sym_random(2, &mut rng);
            let coeffs: Vec<(usize, DMatrix<f64>)> = (0..2).map(|i| (i, sym_random(2, &mut rng))).collect();
            LmiBlock::from_dense(&a0, &coeffs).unwrap()
        })
        .collect();
    SdpProblem::new(2, vec![0.0, 0.0], vec![], vec![], blocks).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// min z subject to [[1, z], [z, 1]] ⪰ 0 has optimum −1.
pub fn check_off_diagonal_example() -> Result<(), String> {
    let blk = LmiBlock::from_dense(&m(&[&[1.0, 0.0], &[0.0, 1.0]]), &[(0, m(&[&[0.0, 1.0], &[1.0, 0.0]]))]).unwrap();
    let p = SdpProblem::new(1, vec![1.0], vec![], vec![], vec![blk]).unwrap();
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    ensure(sol.status == SdpStatus::Optimal, || format!("status {:?}", sol.status))?;
    let z = sol.primal.unwrap()[0];
    ensure((z + 1.0).abs() < 1e-7, || format!("z = {z}"))
}

/// z ≥ 1 and z ≤ 0 together, with the hand-written certificate ([1], [1]).
pub fn check_infeasible_example() -> Result<(), String> {
    let b1 = LmiBlock::from_dense(&m(&[&[-1.0]]), &[(0, m(&[&[1.0]]))]).unwrap();
    let b2 = LmiBlock::from_dense(&m(&[&[0.0]]), &[(0, m(&[&[-1.0]]))]).unwrap();
    let p = SdpProblem::new(1, vec![0.0], vec![], vec![], vec![b1, b2]).unwrap();
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    ensure(sol.status == SdpStatus::Infeasible, || format!("status {:?}", sol.status))?;
    ensure(verify_infeasibility_certificate(&p, sol.dual.as_ref().unwrap()).unwrap(), || {
        "solver certificate rejected".into()
    })?;
    let hand = Certificate {
        blocks: vec![m(&[&[1.0]]), m(&[&[1.0]])],
        multipliers: vec![],
    };
    ensure(verify_infeasibility_certificate(&p, &hand).unwrap(), || "hand certificate rejected".into())?;
    ensure(!verify_infeasibility_certificate(&p, &Certificate::zeros_like(&p)).unwrap(), || {
        "zero certificate accepted".into()
    })
}

/// z_0 = 2 fixed, [[z_0, 1], [1, z_1]] ⪰ 0, min z_1 gives 1/2.
pub fn check_fixed_variable_example() -> Result<(), String> {
    let blk = LmiBlock::from_dense(
        &m(&[&[0.0, 1.0], &[1.0, 0.0]]),
        &[(0, m(&[&[1.0, 0.0], &[0.0, 0.0]])), (1, m(&[&[0.0, 0.0], &[0.0, 1.0]]))],
    )
    .unwrap();
    let p = SdpProblem::new(2, vec![0.0, 1.0], vec![(0, 2.0)], vec![], vec![blk]).unwrap();
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    ensure(sol.status == SdpStatus::Optimal, || format!("status {:?}", sol.status))?;
    let z = sol.primal.unwrap()[1];
    ensure((z - 0.5).abs() < 1e-7, || format!("z_1 = {z}"))
}

/// The dual bound of an optimal solve never exceeds the objective at any
/// feasible point, and matches the optimum.
pub fn check_weak_duality(seed: u64) -> Result<(), String> {
    let p = feasible_instance(seed);
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    ensure(sol.status == SdpStatus::Optimal, || format!("status {:?}", sol.status))?;
    let z = sol.primal.clone().unwrap();
    ensure(min_eig(&p, &z) >= -1e-7, || "primal leaves the cone".into())?;
    let (bound, ev) = dual_bound(&p, sol.dual.as_ref().unwrap()).unwrap();
    ensure(ev.min_eigenvalue >= -1e-9 && ev.stationarity <= 1e-7, || format!("dual not feasible: {ev:?}"))?;
    let obj = |z: &[f64]| z.iter().zip(p.objective()).map(|(a, b)| a * b).sum::<f64>();
    let opt = obj(&z);
    ensure(bound <= opt + 1e-7, || format!("bound {bound} above optimum {opt}"))?;
    ensure((bound - opt).abs() <= 1e-6 * (1.0 + opt.abs()), || format!("gap {}", opt - bound))?;
    let mut rng = rng_from_seed(seed ^ 0x5eed);
    for _ in 0..200 {
        let trial: Vec<f64> = (0..p.num_vars()).map(|_| rng.random_range(-1.0..1.0)).collect();
        if min_eig(&p, &trial) >= 0.0 {
            ensure(bound <= obj(&trial) + 1e-7, || format!("feasible {trial:?} beats the bound"))?;
        }
    }
    Ok(())
}

/// Every reported certificate verifies, and no grid point of the box
/// [−6, 6]² is feasible for an instance declared infeasible.
pub fn check_certificate_soundness(seed: u64) -> Result<(), String> {
    let p = random_instance(seed);
    let sol = solve(&p, &SolverOptions::default()).unwrap();
    match sol.status {
        SdpStatus::Infeasible => {
            ensure(verify_infeasibility_certificate(&p, sol.dual.as_ref().unwrap()).unwrap(), || {
                "certificate rejected".into()
            })?;
            let steps = 120;
            for i in 0..=steps {
                for j in 0..=steps {
                    let z = [-6.0 + 12.0 * i as f64 / steps as f64, -6.0 + 12.0 * j as f64 / steps as f64];
                    ensure(min_eig(&p, &z) < 0.0, || format!("grid point {z:?} is feasible"))?;
                }
            }
            Ok(())
        }
        SdpStatus::Optimal => ensure(min_eig(&p, sol.primal.as_ref().unwrap()) >= -1e-7, || {
            "primal leaves the cone".into()
        }),
        SdpStatus::Inconclusive => Ok(()),
    }
}
