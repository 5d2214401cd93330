use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{nnls, sorted_eigen_desc, CMatrix};
use crate::quantum::{standard_basis, DensityMatrix, PartitionSpec};
use crate::semialgebraic::{membership, Relation, SemialgebraicSet, DEFAULT_MEMBERSHIP_TOL};
use crate::tms::{moment_matrix, MultiIndex, Polynomial, Tms};

/// Weights below this are treated as solver noise and dropped.
pub const WEIGHT_CLIP: f64 = 1e-10;
const EXTRACTION_RETRIES: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "w")]
    pub weight: f64,
    pub point: Vec<f64>,
}

/// Finitely atomic measure Σ_j w_j δ(x − p_j).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub atoms: Vec<Atom>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSpec>,
}

impl Decomposition {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Decomposition {
            atoms,
            partition: None,
        }
    }

    pub fn with_partition(mut self, spec: PartitionSpec) -> Self {
        self.partition = Some(spec);
        self
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// Moment Σ_j w_j p_j^α.
    pub fn moment(&self, alpha: &MultiIndex) -> f64 {
        self.atoms.iter().map(|a| a.weight * alpha.eval(&a.point)).sum()
    }

    pub fn as_pairs(&self) -> Vec<(f64, Vec<f64>)> {
        self.atoms.iter().map(|a| (a.weight, a.point.clone())).collect()
    }
}

/// Row indices chosen by greedy maximum-residual pivoting (column-pivoted QR
/// on Vᵀ) among the allowed rows.
fn pivot_rows(v: &DMatrix<f64>, allowed: &[usize], r: usize) -> Option<Vec<usize>> {
    let mut residual: Vec<DVector<f64>> = allowed.iter().map(|&i| v.row(i).transpose()).collect();
    let scale = residual.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut chosen = Vec::with_capacity(r);
    let mut used = vec![false; allowed.len()];
    for _ in 0..r {
        let (best, norm) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, x)| (i, x.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))?;
        if !(norm > 1e-8 * scale) {
            return None;
        }
        used[best] = true;
        chosen.push(allowed[best]);
        let q = &residual[best] / norm;
        for (i, x) in residual.iter_mut().enumerate() {
            if !used[i] {
                let c = x.dot(&q);
                *x -= &q * c;
            }
        }
    }
    Some(chosen)
}

/// Joint real eigenvalues of commuting matrices via the Schur form of a
/// random combination; None when the spectrum is complex or clustered.
fn joint_eigenvalues<R: Rng + ?Sized>(mats: &[DMatrix<f64>], rng: &mut R) -> Option<Vec<Vec<f64>>> {
    let r = mats[0].nrows();
    let lambda: Vec<f64> = (0..mats.len()).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = lambda.iter().sum();
    let mut comb = DMatrix::zeros(r, r);
    for (l, m) in lambda.iter().zip(mats) {
        comb += m * (l / total);
    }
    let schur = Schur::try_new(comb, f64::EPSILON, 100_000)?;
    let (q, t) = schur.unpack();
    let scale = t.amax().max(1.0);
    for j in 0..r.saturating_sub(1) {
        if t[(j + 1, j)].abs() > 1e-9 * scale {
            return None;
        }
    }
    let diag: Vec<f64> = (0..r).map(|j| t[(j, j)]).collect();
    for a in 0..r {
        for b in a + 1..r {
            if (diag[a] - diag[b]).abs() < 1e-7 * scale {
                return None;
            }
        }
    }
    let coords: Vec<DVector<f64>> = mats
        .iter()
        .map(|m| (q.transpose() * m * &q).diagonal())
        .collect();
    Some(
        (0..r)
            .map(|j| coords.iter().map(|c| c[j]).collect())
            .collect(),
    )
}

/// Recovers the atoms of a flat moment matrix M_k(z) by column reduction and
/// simultaneous diagonalization of multiplication operators, then fits
/// non-negative weights to every moment of z.
pub fn extract_atoms<R: Rng + ?Sized>(z: &Tms, k: u32, rank_tol: f64, rng: &mut R) -> Result<Decomposition> {
    if k == 0 {
        return domain("extraction needs order k ≥ 1");
    }
    let mm = moment_matrix(z, k)?;
    let n = z.nvars();
    let (vals, vecs) = sorted_eigen_desc(&mm.entries);
    let top = vals.first().copied().unwrap_or(0.0);
    let cut = rank_tol * top.abs().max(1.0);
    let r = vals.iter().filter(|&&l| l > cut).count();
    if r == 0 {
        return Err(Error::ExtractionFailed("moment matrix is numerically zero".into()));
    }
    let mut v = DMatrix::zeros(mm.labels.len(), r);
    for j in 0..r {
        v.set_column(j, &(vecs.column(j) * vals[j].sqrt()));
    }

    let low: Vec<usize> = (0..mm.labels.len()).filter(|&i| mm.labels[i].degree() < k).collect();
    let basis = pivot_rows(&v, &low, r).ok_or_else(|| {
        Error::ExtractionFailed(format!("rank {r} is not attained by monomials of degree < {k}"))
    })?;
    let vb = v.select_rows(&basis);
    let vb_inv = vb
        .try_inverse()
        .ok_or_else(|| Error::ExtractionFailed("pivot block is singular".into()))?;
    let w = &v * vb_inv;

    let row_of = |alpha: &MultiIndex| mm.labels.iter().position(|l| l == alpha);
    let mut mult = Vec::with_capacity(n);
    for i in 0..n {
        let ei = MultiIndex::unit(n, i);
        let mut ni = DMatrix::zeros(r, r);
        for (b, &row) in basis.iter().enumerate() {
            let shifted = mm.labels[row].add(&ei);
            let idx = row_of(&shifted).ok_or_else(|| {
                Error::ExtractionFailed(format!("monomial {shifted} is outside M_{k}"))
            })?;
            ni.set_row(b, &w.row(idx));
        }
        mult.push(ni);
    }

    let mut points = None;
    for _ in 0..EXTRACTION_RETRIES {
        if let Some(p) = joint_eigenvalues(&mult, rng) {
            points = Some(p);
            break;
        }
    }
    let points = points.ok_or_else(|| {
        Error::ExtractionFailed(format!(
            "multiplication matrices have no simple real joint spectrum after {EXTRACTION_RETRIES} tries"
        ))
    })?;

    Ok(fit_weights(z, points))
}

/// Non-negative least-squares weights for fixed points against every moment
/// of `z`, with tiny weights dropped and the rest rescaled to z_0.
pub fn fit_weights(z: &Tms, points: Vec<Vec<f64>>) -> Decomposition {
    let rows: Vec<(&MultiIndex, f64)> = z.iter().collect();
    let a = DMatrix::from_fn(rows.len(), points.len(), |i, j| rows[i].0.eval(&points[j]));
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|(_, v)| *v));
    let w = nnls(&a, &b);
    let mut atoms: Vec<Atom> = points
        .into_iter()
        .zip(w.iter())
        .filter(|(_, &w)| w > WEIGHT_CLIP)
        .map(|(p, &w)| Atom { weight: w, point: p })
        .collect();
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    if let Some(y0) = z.get(&MultiIndex::zero(z.nvars())) {
        if total > 0.0 {
            for a in &mut atoms {
                a.weight *= y0 / total;
            }
        }
    }
    Decomposition::new(atoms)
}

fn poly_gradient(p: &Polynomial, x: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for (gamma, c) in p.terms() {
        let e = gamma.exponents();
        for i in 0..x.len() {
            if e[i] == 0 {
                continue;
            }
            let mut term = c * e[i] as f64;
            for (l, &el) in e.iter().enumerate() {
                let pw = if l == i { el - 1 } else { el };
                term *= x[l].powi(pw as i32);
            }
            g[i] += term;
        }
    }
    g
}

fn monomial_gradient(alpha: &MultiIndex, x: &[f64]) -> Vec<f64> {
    let e = alpha.exponents();
    (0..x.len())
        .map(|i| {
            if e[i] == 0 {
                return 0.0;
            }
            let mut v = e[i] as f64;
            for (l, &el) in e.iter().enumerate() {
                let pw = if l == i { el - 1 } else { el };
                v *= x[l].powi(pw as i32);
            }
            v
        })
        .collect()
}

/// Residuals: moment mismatches on the support of `y`, then every equality
/// constraint and every violated inequality at every atom.
fn polish_residuals(dec: &Decomposition, y: &Tms, k_set: &SemialgebraicSet) -> (DVector<f64>, DMatrix<f64>) {
    let n = y.nvars();
    let r = dec.atoms.len();
    let nu = r * (n + 1);
    let mut res = Vec::new();
    let mut jac_rows: Vec<Vec<f64>> = Vec::new();
    for (alpha, v) in y.iter() {
        let mut row = vec![0.0; nu];
        let mut acc = -v;
        for (j, at) in dec.atoms.iter().enumerate() {
            let m = alpha.eval(&at.point);
            acc += at.weight * m;
            row[j * (n + 1)] = m;
            for (i, g) in monomial_gradient(alpha, &at.point).into_iter().enumerate() {
                row[j * (n + 1) + 1 + i] = at.weight * g;
            }
        }
        res.push(acc);
        jac_rows.push(row);
    }
    for c in k_set.constraints() {
        for (j, at) in dec.atoms.iter().enumerate() {
            let val = c.poly.eval(&at.point);
            if c.relation == Relation::Geq && val >= 0.0 {
                continue;
            }
            let mut row = vec![0.0; nu];
            for (i, g) in poly_gradient(&c.poly, &at.point).into_iter().enumerate() {
                row[j * (n + 1) + 1 + i] = g;
            }
            res.push(val);
            jac_rows.push(row);
        }
    }
    let jac = DMatrix::from_fn(jac_rows.len(), nu, |i, j| jac_rows[i][j]);
    (DVector::from_vec(res), jac)
}

/// Levenberg–Marquardt refinement of weights and points so that the atoms
/// reproduce the known moments of `y` and lie on K. The input is returned
/// unchanged when no improvement is found.
pub fn polish_decomposition(dec: &Decomposition, y: &Tms, k_set: &SemialgebraicSet, max_iter: usize) -> Decomposition {
    let n = y.nvars();
    let mut cur = dec.clone();
    let (mut res, mut jac) = polish_residuals(&cur, y, k_set);
    let mut cost = res.norm_squared();
    let mut damping = 1e-6;
    for _ in 0..max_iter {
        if cost < 1e-30 {
            break;
        }
        let jt = jac.transpose();
        let mut h = &jt * &jac;
        let g = &jt * &res;
        for i in 0..h.nrows() {
            h[(i, i)] += damping * (1.0 + h[(i, i)]);
        }
        let Some(step) = h.cholesky().map(|c| c.solve(&(-&g))) else {
            damping *= 10.0;
            continue;
        };
        let mut trial = cur.clone();
        for (j, at) in trial.atoms.iter_mut().enumerate() {
            at.weight = (at.weight + step[j * (n + 1)]).max(0.0);
            for i in 0..n {
                at.point[i] += step[j * (n + 1) + 1 + i];
            }
        }
        let (tres, tjac) = polish_residuals(&trial, y, k_set);
        let tcost = tres.norm_squared();
        if tcost < cost {
            cur = trial;
            res = tres;
            jac = tjac;
            cost = tcost;
            damping = (damping * 0.3).max(1e-15);
        } else {
            damping *= 10.0;
            if damping > 1e8 {
                break;
            }
        }
    }
    cur.atoms.retain(|a| a.weight > WEIGHT_CLIP);
    cur
}

/// Largest deviation between the atomic moments and `y` over its support,
/// and whether it is within `tol` with every atom in K and every weight positive.
pub fn verify_decomposition(dec: &Decomposition, y: &Tms, k_set: &SemialgebraicSet, tol: f64) -> (bool, f64) {
    if dec.is_empty() || dec.atoms.iter().any(|a| a.point.len() != y.nvars()) {
        return (false, f64::INFINITY);
    }
    let err = y
        .iter()
        .map(|(alpha, v)| (dec.moment(alpha) - v).abs())
        .fold(0.0, f64::max);
    let members = dec
        .atoms
        .iter()
        .all(|a| a.weight > 0.0 && membership(&a.point, k_set, DEFAULT_MEMBERSHIP_TOL));
    (err <= tol && members, err)
}

/// One product term of a separable decomposition.
#[derive(Debug, Clone)]
pub struct ProductTerm {
    pub weight: f64,
    pub locals: Vec<DensityMatrix>,
    pub state: DensityMatrix,
    /// A local operator had to be projected onto the state space.
    pub projected: bool,
}

fn nearest_state(m: &CMatrix) -> (CMatrix, bool) {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h.clone());
    if eig.eigenvalues.min() >= -1e-12 {
        return (h, false);
    }
    let clipped = eig.eigenvalues.map(|l| Complex64::new(l.max(0.0), 0.0));
    let u = &eig.eigenvectors;
    let p = u * CMatrix::from_diagonal(&clipped) * u.adjoint();
    let tr = p.trace().re;
    (p / Complex64::new(tr, 0.0), true)
}

/// Builds Σ_j w_j ρ_j^(1) ⊗ … ⊗ ρ_j^(N) from the atoms, reading each party's
/// local coordinates from its class block.
pub fn decomposition_to_states(dec: &Decomposition, spec: &PartitionSpec) -> Result<Vec<ProductTerm>> {
    let bases = (0..spec.symmetry_classes().len())
        .map(|c| standard_basis(spec.class_dim(c)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(dec.len());
    for atom in &dec.atoms {
        if atom.point.len() != spec.nvars() {
            return domain(format!(
                "atom has {} coordinates, partition needs {}",
                atom.point.len(),
                spec.nvars()
            ));
        }
        let mut locals = Vec::with_capacity(spec.num_parties());
        let mut projected = false;
        for party in 0..spec.num_parties() {
            let c = spec.class_of(party);
            let off = spec.class_offset(c);
            let x = &atom.point[off..off + spec.class_t(c)];
            let (m, p) = nearest_state(&bases[c].operator_from_coords(x));
            projected |= p;
            let tr = m.trace().re;
            locals.push(DensityMatrix::new(m / Complex64::new(tr, 0.0), vec![spec.class_dim(c)])?);
        }
        let state = locals[1..].iter().fold(locals[0].clone(), |acc, r| acc.kron(r));
        out.push(ProductTerm {
            weight: atom.weight,
            locals,
            state,
            projected,
        });
    }
    Ok(out)
}

/// Σ_j w_j ρ_j as one matrix.
pub fn mixture_of(terms: &[ProductTerm]) -> Result<DensityMatrix> {
    let parts: Vec<(f64, DensityMatrix)> = terms.iter().map(|t| (t.weight, t.state.clone())).collect();
    DensityMatrix::mixture(&parts)
}
