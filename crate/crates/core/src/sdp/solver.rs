use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::certificate::{
    dual_bound, gradient, split_fixed, verify_infeasibility_certificate, Certificate, FixedSplit,
};
use super::problem::SdpProblem;
use crate::error::Result;
use crate::linalg::{lstsq, sorted_eigen_desc};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Relative tolerance on primal/dual residuals and the duality gap.
    pub tol: f64,
    pub max_iter: usize,
    /// Centering parameter of the fixed-σ path-following step.
    pub sigma: f64,
    /// Choose σ adaptively from an affine predictor step.
    pub predictor_corrector: bool,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-8,
            max_iter: 200,
            sigma: 0.1,
            predictor_corrector: false,
            step_fraction: 0.98,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Inconclusive,
}

/// Relative residuals of the last iterate, from the point of view of the
/// original problem: `primal` measures how far the LMI slack is from the
/// affine family, `dual` the stationarity of the dual matrices.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Residuals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Full variable vector z (fixed entries included) when available.
    pub primal: Option<Vec<f64>>,
    pub objective_value: Option<f64>,
    /// Dual matrices and equality multipliers: optimality multipliers when
    /// OPTIMAL, a Farkas certificate when INFEASIBLE.
    pub dual: Option<Certificate>,
    pub iterations: usize,
    pub residuals: Residuals,
    pub message: Option<String>,
}

impl SdpSolution {
    fn bare(status: SdpStatus, message: Option<String>) -> Self {
        SdpSolution {
            status,
            primal: None,
            objective_value: None,
            dual: None,
            iterations: 0,
            residuals: Residuals::default(),
            message,
        }
    }
}

/// Problem after eliminating fixed variables and linear equalities and
/// removing directions invisible to every block.
struct Reduced {
    split: FixedSplit,
    zp: DVector<f64>,
    null: DMatrix<f64>,
    /// Per original block: orthonormal basis of its reduced face, or None when
    /// the block vanishes identically.
    faces: Vec<Option<DMatrix<f64>>>,
    /// Free directions kept in the reduced problem (columns, in null-space coordinates).
    keep: DMatrix<f64>,
    sizes: Vec<usize>,
    /// Reduced constant term, vectorized over all kept blocks.
    c: DVector<f64>,
    /// Row j holds the vectorized reduced coefficient matrix of direction j.
    a: DMatrix<f64>,
    /// Objective on kept directions.
    cost: DVector<f64>,
}

enum Reduction {
    Done(Box<Reduced>),
    Early(SdpSolution),
}

fn vec_blocks(blocks: &[DMatrix<f64>], len: usize) -> DVector<f64> {
    let mut v = DVector::zeros(len);
    let mut off = 0;
    for b in blocks {
        let n = b.len();
        v.rows_mut(off, n).copy_from_slice(b.as_slice());
        off += n;
    }
    v
}

fn unvec_blocks(v: &DVector<f64>, sizes: &[usize]) -> Vec<DMatrix<f64>> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut off = 0;
    for &n in sizes {
        let m = DMatrix::from_column_slice(n, n, &v.as_slice()[off..off + n * n]);
        out.push((&m + m.transpose()) * 0.5);
        off += n * n;
    }
    out
}

fn null_and_particular(e: &DMatrix<f64>, f: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>, DVector<f64>) {
    let mf = e.ncols();
    if e.nrows() == 0 || mf == 0 {
        return (DVector::zeros(mf), DMatrix::identity(mf, mf), -f.clone());
    }
    // Thin SVD for the particular solution; the null space is the unit
    // eigenspace of the projector onto the complement of the row space.
    let svd = e.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cut = 1e-10 * smax.max(f64::MIN_POSITIVE);
    let zp = svd.solve(f, cut).expect("SVD factors were requested");
    let vt = svd.v_t.as_ref().expect("SVD factors were requested");
    let mut proj = DMatrix::identity(mf, mf);
    for i in (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] > cut) {
        let v = vt.row(i);
        proj -= v.transpose() * v;
    }
    let (vals, vecs) = sorted_eigen_desc(&proj);
    let dim = vals.iter().filter(|&&l| l > 0.5).count();
    let null = vecs.columns(0, dim).into_owned();
    let residual = e * &zp - f;
    (zp, null, residual)
}

fn reduce(p: &SdpProblem) -> Reduction {
    let split = split_fixed(p);
    let (zp, null, residual) = null_and_particular(&split.e, &split.f);
    let rnorm = residual.norm();
    if rnorm > 1e-9 * split.f.norm().max(1.0) {
        let mut cert = Certificate::zeros_like(p);
        cert.multipliers = (-&residual / (rnorm * rnorm)).iter().copied().collect();
        let mut sol = SdpSolution::bare(
            SdpStatus::Infeasible,
            Some("linear equalities are inconsistent".into()),
        );
        sol.dual = Some(cert);
        return Reduction::Early(sol);
    }
    let q = null.ncols();

    // Per-block constant G0 = Ā0 + Σ zp_i A_i and direction matrices B_j = Σ_i N_ij A_i.
    let mut g0s = Vec::new();
    let mut bs: Vec<Vec<DMatrix<f64>>> = Vec::new();
    for (blk, a0) in p.blocks().iter().zip(&split.a0) {
        let n = blk.dim();
        let mut g0 = a0.clone();
        let mut bj = vec![DMatrix::zeros(n, n); q];
        for (var, a) in blk.coeffs() {
            let Some(k) = split.pos[var] else { continue };
            a.add_to(&mut g0, zp[k]);
            for (j, b) in bj.iter_mut().enumerate() {
                let w = null[(k, j)];
                if w != 0.0 {
                    a.add_to(b, w);
                }
            }
        }
        g0s.push(g0);
        bs.push(bj);
    }

    // Facial reduction: drop the common kernel of each block's affine family.
    let mut faces = Vec::new();
    let mut sizes = Vec::new();
    let mut red_c = Vec::new();
    let mut red_b: Vec<Vec<DMatrix<f64>>> = vec![Vec::new(); q];
    for (g0, bj) in g0s.iter().zip(&bs) {
        let n = g0.nrows();
        let mut gram = g0 * g0;
        for b in bj {
            gram += b * b;
        }
        let (vals, vecs) = sorted_eigen_desc(&gram);
        let smax = vals.first().copied().unwrap_or(0.0).max(0.0).sqrt();
        let keep: Vec<usize> = (0..n)
            .filter(|&i| smax > 0.0 && vals[i].max(0.0).sqrt() > 1e-9 * smax)
            .collect();
        if keep.is_empty() {
            faces.push(None);
            continue;
        }
        let qm = vecs.select_columns(&keep);
        red_c.push(qm.transpose() * g0 * &qm);
        for (j, b) in bj.iter().enumerate() {
            red_b[j].push(qm.transpose() * b * &qm);
        }
        sizes.push(keep.len());
        faces.push(Some(qm));
    }
    let len: usize = sizes.iter().map(|n| n * n).sum();
    let c = vec_blocks(&red_c, len);
    let mut v = DMatrix::zeros(q, len);
    for (j, blocks) in red_b.iter().enumerate() {
        v.set_row(j, &vec_blocks(blocks, len).transpose());
    }

    let mut c_free = DVector::zeros(split.free.len());
    for (k, &i) in split.free.iter().enumerate() {
        c_free[k] = p.objective()[i];
    }
    let c_null = null.transpose() * &c_free;

    // Directions that no block sees.
    let h = &v * v.transpose();
    let (vals, vecs) = sorted_eigen_desc(&h);
    let smax = vals.first().copied().unwrap_or(0.0).max(0.0).sqrt();
    let (kept, dropped): (Vec<usize>, Vec<usize>) =
        (0..q).partition(|&i| smax > 0.0 && vals[i].max(0.0).sqrt() > 1e-9 * smax);
    let drop_m = vecs.select_columns(&dropped);
    let drift = (drop_m.transpose() * &c_null).norm();
    if drift > 1e-9 * c_null.norm().max(1.0) {
        return Reduction::Early(SdpSolution::bare(
            SdpStatus::Inconclusive,
            Some("objective is unbounded along directions no constraint restricts".into()),
        ));
    }
    let keep = vecs.select_columns(&kept);
    let a = keep.transpose() * &v;
    let cost = keep.transpose() * &c_null;
    Reduction::Done(Box::new(Reduced {
        split,
        zp,
        null,
        faces,
        keep,
        sizes,
        c,
        a,
        cost,
    }))
}

impl Reduced {
    fn free_point(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.zp + &self.null * (&self.keep * v)
    }

    fn full_point(&self, p: &SdpProblem, free: &DVector<f64>) -> Vec<f64> {
        (0..p.num_vars())
            .map(|i| match (self.split.fixed_value[i], self.split.pos[i]) {
                (Some(v), _) => v,
                (None, Some(k)) => free[k],
                _ => unreachable!(),
            })
            .collect()
    }

    /// Lifts reduced dual blocks to the original block shapes.
    fn lift(&self, p: &SdpProblem, blocks: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
        let mut it = blocks.iter();
        p.blocks()
            .iter()
            .zip(&self.faces)
            .map(|(b, face)| match face {
                Some(q) => {
                    let x = it.next().expect("one reduced block per kept face");
                    let w = q * x * q.transpose();
                    (&w + w.transpose()) * 0.5
                }
                None => DMatrix::zeros(b.dim(), b.dim()),
            })
            .collect()
    }

    /// Equality multipliers that best satisfy g(W) + Ēᵀλ = target.
    fn multipliers(&self, p: &SdpProblem, blocks: &[DMatrix<f64>], target: &DVector<f64>) -> Vec<f64> {
        if self.split.e.nrows() == 0 {
            return Vec::new();
        }
        let probe = Certificate {
            blocks: blocks.to_vec(),
            multipliers: vec![0.0; p.equalities().len()],
        };
        let g = gradient(p, &self.split, &probe);
        lstsq(&self.split.e.transpose(), &(target - g)).iter().copied().collect()
    }

    fn infeasibility_certificate(&self, p: &SdpProblem, reduced_blocks: &[DMatrix<f64>]) -> Certificate {
        let blocks = self.lift(p, reduced_blocks);
        let zero = DVector::zeros(self.split.free.len());
        let multipliers = self.multipliers(p, &blocks, &zero);
        let cert = Certificate {
            blocks,
            multipliers,
        };
        match super::certificate::evaluate_dual(p, &cert, false) {
            Ok(ev) if ev.value < 0.0 => cert.scaled(1.0 / ev.value.abs()),
            _ => cert,
        }
    }
}

fn cholesky_with_fallback(m: &DMatrix<f64>) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    if let Some(c) = m.clone().cholesky() {
        return Some(c);
    }
    let scale = m.diagonal().amax().max(1.0);
    let mut reg = 1e-12 * scale;
    for _ in 0..6 {
        let shifted = m + DMatrix::identity(m.nrows(), m.ncols()) * reg;
        if let Some(c) = shifted.cholesky() {
            return Some(c);
        }
        reg *= 100.0;
    }
    None
}

/// Largest α with X + α ΔX ⪰ 0, given the Cholesky factor of X.
fn max_step(l: &DMatrix<f64>, dx: &DMatrix<f64>) -> f64 {
    let n = l.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    let linv = l
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .expect("Cholesky factor is nonsingular");
    let z = &linv * dx * linv.transpose();
    let z = (&z + z.transpose()) * 0.5;
    let lo = SymmetricEigen::new(z).eigenvalues.min();
    if lo < 0.0 {
        -1.0 / lo
    } else {
        f64::INFINITY
    }
}

struct Direction {
    dx: Vec<DMatrix<f64>>,
    dy: DVector<f64>,
    ds: Vec<DMatrix<f64>>,
    dtau: f64,
    dkappa: f64,
}

/// Solves the reduced problem in the standard dual form
/// max bᵀy s.t. C − Σ y_j A_j = S ⪰ 0 via the homogeneous self-dual
/// embedding; returns the raw final iterate and the outcome.
struct Hsde<'a> {
    sizes: &'a [usize],
    len: usize,
    a: DMatrix<f64>,
    b: DVector<f64>,
    c: DVector<f64>,
}

enum HsdeOutcome {
    Optimal,
    PrimalInfeasible,
    Unbounded,
    Stalled(String),
}

struct HsdeState {
    x: Vec<DMatrix<f64>>,
    y: DVector<f64>,
    s: Vec<DMatrix<f64>>,
    tau: f64,
    kappa: f64,
    iterations: usize,
    residuals: Residuals,
}

impl Hsde<'_> {
    fn op(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        &self.a * vec_blocks(x, self.len)
    }

    fn run(&self, opts: &SolverOptions) -> (HsdeOutcome, HsdeState) {
        let nu: usize = self.sizes.iter().sum();
        let m = self.a.nrows();
        let cmat = unvec_blocks(&self.c, self.sizes);
        let bnorm = self.b.norm();
        let cnorm = self.c.norm();
        let mut st = HsdeState {
            x: self.sizes.iter().map(|&n| DMatrix::identity(n, n)).collect(),
            y: DVector::zeros(m),
            s: self.sizes.iter().map(|&n| DMatrix::identity(n, n)).collect(),
            tau: 1.0,
            kappa: 1.0,
            iterations: 0,
            residuals: Residuals::default(),
        };
        for it in 0..=opts.max_iter {
            st.iterations = it;
            let xv = vec_blocks(&st.x, self.len);
            let sv = vec_blocks(&st.s, self.len);
            let ax = self.op(&st.x);
            let rp = &self.b * st.tau - &ax;
            let aty = self.a.transpose() * &st.y;
            let rd_v = &self.c * st.tau - &aty - &sv;
            let cx = self.c.dot(&xv);
            let by = self.b.dot(&st.y);
            let rg = by - cx - st.kappa;
            let mu = (xv.dot(&sv) + st.tau * st.kappa) / (nu as f64 + 1.0);

            let pres = rp.norm() / st.tau / (1.0 + bnorm);
            let dres = rd_v.norm() / st.tau / (1.0 + cnorm);
            let (pobj, dobj) = (cx / st.tau, by / st.tau);
            let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
            st.residuals = Residuals {
                primal: dres,
                dual: pres,
                gap,
            };
            if pres <= opts.tol && dres <= opts.tol && gap <= opts.tol {
                return (HsdeOutcome::Optimal, st);
            }
            if cx < 0.0 && ax.norm() / (-cx) <= opts.tol {
                return (HsdeOutcome::PrimalInfeasible, st);
            }
            if by > 0.0 && (&aty + &sv).norm() / by <= opts.tol {
                return (HsdeOutcome::Unbounded, st);
            }
            if it == opts.max_iter {
                break;
            }

            // Nesterov–Todd scaling W = G Gᵀ with W S W = X.
            let mut gs = Vec::with_capacity(self.sizes.len());
            let mut lx = Vec::with_capacity(self.sizes.len());
            let mut ls = Vec::with_capacity(self.sizes.len());
            let mut sinv = Vec::with_capacity(self.sizes.len());
            for (x, s) in st.x.iter().zip(&st.s) {
                let (Some(cx_), Some(cs_)) = (x.clone().cholesky(), s.clone().cholesky()) else {
                    return (HsdeOutcome::Stalled("iterate left the cone".into()), st);
                };
                let l = cx_.l();
                let inner = l.transpose() * s * &l;
                let eig = SymmetricEigen::new((&inner + inner.transpose()) * 0.5);
                if eig.eigenvalues.min() <= 0.0 {
                    return (HsdeOutcome::Stalled("scaling matrix lost definiteness".into()), st);
                }
                let d = eig.eigenvalues.map(|v| v.powf(-0.25));
                let g = &l * &eig.eigenvectors * DMatrix::from_diagonal(&d);
                sinv.push(cs_.inverse());
                gs.push(g);
                lx.push(l);
                ls.push(cs_.l());
            }
            let scale_blocks = |ms: &[DMatrix<f64>]| -> Vec<DMatrix<f64>> {
                ms.iter()
                    .zip(&gs)
                    .map(|(mm, g)| g.transpose() * mm * g)
                    .collect()
            };
            let mut atil = DMatrix::zeros(m, self.len);
            for j in 0..m {
                let aj = unvec_blocks(&self.a.row(j).transpose(), self.sizes);
                atil.set_row(j, &vec_blocks(&scale_blocks(&aj), self.len).transpose());
            }
            let schur = &atil * atil.transpose();
            let Some(chol) = cholesky_with_fallback(&schur) else {
                return (HsdeOutcome::Stalled("Schur complement is singular".into()), st);
            };
            let ctil = vec_blocks(&scale_blocks(&cmat), self.len);
            let u = &atil * &ctil;
            let cww = ctil.norm_squared();
            let rd = unvec_blocks(&rd_v, self.sizes);
            let rd_til = vec_blocks(&scale_blocks(&rd), self.len);
            let a_wrdw = &atil * &rd_til;
            let c_wrdw = ctil.dot(&rd_til);
            let q = chol.solve(&(&u + &self.b));
            let bmu = &self.b - &u;

            let direction = |sigma: f64| -> Direction {
                let eta = 1.0 - sigma;
                let rc: Vec<DMatrix<f64>> = st
                    .x
                    .iter()
                    .zip(&sinv)
                    .map(|(x, si)| si * (sigma * mu) - x)
                    .collect();
                let a_rc = self.op(&rc);
                let c_rc = self.c.dot(&vec_blocks(&rc, self.len));
                let f1 = &rp * eta - a_rc + &a_wrdw * eta;
                let f2 = -eta * rg + c_rc - eta * c_wrdw + (sigma * mu - st.tau * st.kappa) / st.tau;
                let pv = chol.solve(&f1);
                let dtau = (f2 - bmu.dot(&pv)) / (bmu.dot(&q) + cww + st.kappa / st.tau);
                let dy = &pv + &q * dtau;
                let ds_v = &rd_v * eta + &self.c * dtau - self.a.transpose() * &dy;
                let ds = unvec_blocks(&ds_v, self.sizes);
                let dx: Vec<DMatrix<f64>> = rc
                    .iter()
                    .zip(&ds)
                    .zip(&gs)
                    .map(|((r, d), g)| {
                        let w = g * g.transpose();
                        let v = r - &w * d * &w;
                        (&v + v.transpose()) * 0.5
                    })
                    .collect();
                let dkappa = (sigma * mu - st.tau * st.kappa - st.kappa * dtau) / st.tau;
                Direction {
                    dx,
                    dy,
                    ds,
                    dtau,
                    dkappa,
                }
            };
            let step_len = |d: &Direction| -> f64 {
                let mut alpha = f64::INFINITY;
                for ((l, dx), (l2, ds)) in lx.iter().zip(&d.dx).zip(ls.iter().zip(&d.ds)) {
                    alpha = alpha.min(max_step(l, dx)).min(max_step(l2, ds));
                }
                if d.dtau < 0.0 {
                    alpha = alpha.min(-st.tau / d.dtau);
                }
                if d.dkappa < 0.0 {
                    alpha = alpha.min(-st.kappa / d.dkappa);
                }
                alpha
            };

            let sigma = if opts.predictor_corrector {
                let aff = direction(0.0);
                let a_aff = step_len(&aff).min(1.0);
                let mut xs = 0.0;
                for b in 0..self.sizes.len() {
                    let xn = &st.x[b] + &aff.dx[b] * a_aff;
                    let sn = &st.s[b] + &aff.ds[b] * a_aff;
                    xs += crate::linalg::frob(&xn, &sn);
                }
                let mu_aff = (xs + (st.tau + a_aff * aff.dtau) * (st.kappa + a_aff * aff.dkappa))
                    / (nu as f64 + 1.0);
                (mu_aff / mu).clamp(0.0, 1.0).powi(3).clamp(1e-4, 0.9)
            } else {
                opts.sigma
            };
            let d = direction(sigma);
            let alpha = (opts.step_fraction * step_len(&d)).min(1.0);
            if !(alpha > 1e-12) {
                return (HsdeOutcome::Stalled(format!("step length {alpha:.1e}")), st);
            }
            for b in 0..self.sizes.len() {
                st.x[b] += &d.dx[b] * alpha;
                st.s[b] += &d.ds[b] * alpha;
            }
            st.y += &d.dy * alpha;
            st.tau += alpha * d.dtau;
            st.kappa += alpha * d.dkappa;
            // Keep the embedding away from overflow on infeasible instances.
            let scale = st.tau + st.kappa + st.x.iter().map(|x| x.trace()).sum::<f64>();
            if scale > 1e8 {
                let s = 1.0 / scale;
                for b in 0..self.sizes.len() {
                    st.x[b] *= s;
                    st.s[b] *= s;
                }
                st.y *= s;
                st.tau *= s;
                st.kappa *= s;
            }
        }
        (
            HsdeOutcome::Stalled(format!("iteration limit {} reached", opts.max_iter)),
            st,
        )
    }
}

/// Solves minimize cᵀz subject to the fixed values, linear equalities and LMI
/// blocks of `p`.
pub fn solve(p: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution> {
    let red = match reduce(p) {
        Reduction::Early(sol) => return Ok(sol),
        Reduction::Done(r) => r,
    };
    let m = red.a.nrows();
    let len = red.c.len();

    if m == 0 {
        let blocks = unvec_blocks(&red.c, &red.sizes);
        for (b, g) in blocks.iter().enumerate() {
            let (vals, vecs) = sorted_eigen_desc(g);
            let lo = vals.last().copied().unwrap_or(0.0);
            let scale = vals.first().copied().unwrap_or(0.0).abs().max(1.0);
            if lo < -opts.tol * scale {
                let v = vecs.column(vecs.ncols() - 1).into_owned();
                let mut xs: Vec<DMatrix<f64>> =
                    red.sizes.iter().map(|&n| DMatrix::zeros(n, n)).collect();
                xs[b] = &v * v.transpose();
                let cert = red.infeasibility_certificate(p, &xs);
                let mut sol = SdpSolution::bare(SdpStatus::Infeasible, None);
                sol.dual = Some(cert);
                return Ok(sol);
            }
        }
        let free = red.free_point(&DVector::zeros(0));
        let z = red.full_point(p, &free);
        let obj = z.iter().zip(p.objective()).map(|(a, b)| a * b).sum();
        let mut sol = SdpSolution::bare(SdpStatus::Optimal, None);
        sol.primal = Some(z);
        sol.objective_value = Some(obj);
        return Ok(sol);
    }

    // Scale rows of the operator, the constant and the objective.
    let dscale: Vec<f64> = (0..m).map(|j| red.a.row(j).norm().max(1e-300)).collect();
    let mut a_std = red.a.clone();
    for j in 0..m {
        let s = -1.0 / dscale[j];
        a_std.row_mut(j).scale_mut(s);
    }
    let sc = red.c.norm().max(1.0);
    let c_std = &red.c / sc;
    let mut b_std = DVector::from_iterator(m, (0..m).map(|j| -red.cost[j] / dscale[j]));
    let sb = b_std.norm().max(1.0);
    b_std /= sb;

    let hsde = Hsde {
        sizes: &red.sizes,
        len,
        a: a_std,
        b: b_std,
        c: c_std,
    };
    let (outcome, st) = hsde.run(opts);

    let mut sol = SdpSolution::bare(SdpStatus::Inconclusive, None);
    sol.iterations = st.iterations;
    sol.residuals = st.residuals;

    let v = DVector::from_iterator(m, (0..m).map(|j| st.y[j] / st.tau * sc / dscale[j]));
    let primal_point = |sol: &mut SdpSolution| {
        let free = red.free_point(&v);
        let z = red.full_point(p, &free);
        sol.objective_value = Some(z.iter().zip(p.objective()).map(|(a, b)| a * b).sum());
        sol.primal = Some(z);
    };

    match outcome {
        HsdeOutcome::Optimal => {
            sol.status = SdpStatus::Optimal;
            primal_point(&mut sol);
            let xs: Vec<DMatrix<f64>> = st.x.iter().map(|x| x * (sb / st.tau)).collect();
            let blocks = red.lift(p, &xs);
            let mut c_free = DVector::zeros(red.split.free.len());
            for (k, &i) in red.split.free.iter().enumerate() {
                c_free[k] = p.objective()[i];
            }
            let multipliers = red.multipliers(p, &blocks, &c_free);
            sol.dual = Some(Certificate {
                blocks,
                multipliers,
            });
        }
        HsdeOutcome::PrimalInfeasible => {
            let cert = red.infeasibility_certificate(p, &st.x);
            if verify_infeasibility_certificate(p, &cert)? {
                sol.status = SdpStatus::Infeasible;
            } else {
                sol.message = Some("infeasibility detected but the certificate failed verification".into());
            }
            sol.dual = Some(cert);
        }
        HsdeOutcome::Unbounded => {
            sol.message = Some("objective is unbounded below".into());
        }
        HsdeOutcome::Stalled(reason) => {
            sol.message = Some(reason);
            if st.tau > 0.0 {
                primal_point(&mut sol);
            }
        }
    }
    Ok(sol)
}

/// Convenience wrapper: the dual bound of an OPTIMAL solution.
pub fn solution_dual_bound(p: &SdpProblem, sol: &SdpSolution) -> Option<f64> {
    let cert = sol.dual.as_ref()?;
    if sol.status != SdpStatus::Optimal {
        return None;
    }
    dual_bound(p, cert).ok().map(|(b, _)| b)
}
