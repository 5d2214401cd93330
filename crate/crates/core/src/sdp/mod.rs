//! Semidefinite programs in the form
//! minimize cᵀz subject to fixed values, linear equalities and
//! A_0 + Σ z_i A_i ⪰ 0 per block, solved by a homogeneous self-dual
//! interior-point method, plus independent checking of dual certificates.

mod certificate;
mod problem;
mod solver;

pub use certificate::{
    dual_bound, evaluate_dual, verify_infeasibility_certificate, Certificate, DualEvaluation,
    CERT_PSD_TOL, CERT_RESIDUAL_TOL, CERT_VALUE_TOL,
};
pub use problem::{LinearEquality, LmiBlock, SdpProblem, SymSparse};
pub use solver::{solution_dual_bound, solve, Residuals, SdpSolution, SdpStatus, SolverOptions};

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        let n = rows.len();
        DMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    #[test]
    fn minimize_off_diagonal() {
        let blk = LmiBlock::from_dense(&m(&[&[1.0, 0.0], &[0.0, 1.0]]), &[(0, m(&[&[0.0, 1.0], &[1.0, 0.0]]))]).unwrap();
        let p = SdpProblem::new(1, vec![1.0], vec![], vec![], vec![blk]).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective_value.unwrap() + 1.0).abs() < 1e-6);
        let bound = solution_dual_bound(&p, &sol).unwrap();
        assert!((bound + 1.0).abs() < 1e-6);
    }

    #[test]
    fn contradictory_scalars() {
        let b1 = LmiBlock::from_dense(&m(&[&[-1.0]]), &[(0, m(&[&[1.0]]))]).unwrap();
        let b2 = LmiBlock::from_dense(&m(&[&[0.0]]), &[(0, m(&[&[-1.0]]))]).unwrap();
        let p = SdpProblem::new(1, vec![0.0], vec![], vec![], vec![b1, b2]).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        assert!(verify_infeasibility_certificate(&p, sol.dual.as_ref().unwrap()).unwrap());

        let hand = Certificate {
            blocks: vec![m(&[&[1.0]]), m(&[&[1.0]])],
            multipliers: vec![],
        };
        assert!(verify_infeasibility_certificate(&p, &hand).unwrap());
        assert!(!verify_infeasibility_certificate(&p, &Certificate::zeros_like(&p)).unwrap());
    }

    #[test]
    fn fixed_variable_hyperbola() {
        let blk = LmiBlock::from_dense(
            &m(&[&[0.0, 1.0], &[1.0, 0.0]]),
            &[
                (0, m(&[&[1.0, 0.0], &[0.0, 0.0]])),
                (1, m(&[&[0.0, 0.0], &[0.0, 1.0]])),
            ],
        )
        .unwrap();
        let p = SdpProblem::new(2, vec![0.0, 1.0], vec![(0, 2.0)], vec![], vec![blk]).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.objective_value.unwrap() - 0.5).abs() < 1e-6);
        let z = sol.primal.unwrap();
        assert_eq!(z[0], 2.0);
    }

    #[test]
    fn inconsistent_equalities() {
        let blk = LmiBlock::from_dense(&m(&[&[1.0]]), &[(0, m(&[&[1.0]]))]).unwrap();
        let eqs = vec![
            LinearEquality { coeffs: vec![(0, 1.0)], rhs: 1.0 },
            LinearEquality { coeffs: vec![(0, 2.0)], rhs: 3.0 },
        ];
        let p = SdpProblem::new(1, vec![0.0], vec![], eqs, vec![blk]).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Infeasible);
        assert!(verify_infeasibility_certificate(&p, sol.dual.as_ref().unwrap()).unwrap());
    }

    #[test]
    fn equality_with_kernel_block() {
        // [[z0, z1],[z1, 0]] ⪰ 0 forces z1 = 0; minimize z0 + z1 with z0 + z1 = 1.
        let blk = LmiBlock::from_dense(
            &DMatrix::zeros(2, 2),
            &[
                (0, m(&[&[1.0, 0.0], &[0.0, 0.0]])),
                (1, m(&[&[0.0, 1.0], &[1.0, 0.0]])),
            ],
        )
        .unwrap();
        let eqs = vec![LinearEquality { coeffs: vec![(0, 1.0), (1, 1.0)], rhs: 1.0 }];
        let p = SdpProblem::new(2, vec![0.0, 1.0], vec![], eqs, vec![blk]).unwrap();
        let sol = solve(&p, &SolverOptions::default()).unwrap();
        // No strictly feasible point exists, so the dual is not attained; the
        // primal iterate still converges.
        assert_ne!(sol.status, SdpStatus::Infeasible);
        assert!(sol.residuals.primal < 1e-8);
        let z = sol.primal.unwrap();
        assert!((z[0] - 1.0).abs() < 1e-5 && z[1].abs() < 1e-5);
    }

    #[test]
    fn unbounded_is_inconclusive() {
        let blk = LmiBlock::from_dense(&m(&[&[1.0]]), &[(0, m(&[&[1.0]]))]).unwrap();
        let p = SdpProblem::new(1, vec![1.0], vec![], vec![], vec![blk]).unwrap();
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, SdpStatus::Optimal);
        let p = SdpProblem::new(1, vec![-1.0], vec![], vec![], vec![blk_clone()]).unwrap();
        assert_eq!(solve(&p, &SolverOptions::default()).unwrap().status, SdpStatus::Inconclusive);
    }

    fn blk_clone() -> LmiBlock {
        LmiBlock::from_dense(&m(&[&[1.0]]), &[(0, m(&[&[1.0]]))]).unwrap()
    }
}
