//! Closed-form separability tests for small symmetric systems and the
//! constructive four-atom decomposition of separable symmetric two-qubit
//! states.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::hierarchy::{Atom, Decomposition, Verdict};
use crate::linalg::{hermitian_eigenvalues, sorted_eigen_desc, spectrum_is_psd, symmetric_eigenvalues, CMatrix, PSD_TOL};
use crate::quantum::{ppt_check, tensor_to_state, DensityMatrix, StateTensor};
use crate::tms::{moment_matrix, tensor_to_tms, MultiIndex, Tms};

/// Tolerance on y000 − y200 − y020 − y002 = 0.
pub const SPHERE_TRACE_TOL: f64 = 1e-9;
/// Eigenvalues of M_1(y) above this (negative) value are clipped to zero.
pub const CLIP_FLOOR: f64 = -1e-10;
const NULL_TOL: f64 = 1e-10;

fn require_shape(y: &Tms, degree: u32) -> Result<()> {
    if y.nvars() != 3 || y.degree() != degree {
        return domain(format!(
            "expected a symmetric {degree}-qubit tms (n = 3, degree {degree}), got n = {}, degree {}",
            y.nvars(),
            y.degree()
        ));
    }
    Ok(())
}

fn y_at(y: &Tms, e: [u32; 3]) -> Result<f64> {
    y.require(&MultiIndex::new(e.to_vec()))
}

/// M_1(y) ⪰ 0 and y000 = y200 + y020 + y002.
pub fn two_qubit_sym_nsc(y: &Tms) -> Result<bool> {
    require_shape(y, 2)?;
    let m1 = moment_matrix(y, 1)?;
    let trace_gap = y_at(y, [0, 0, 0])? - y_at(y, [2, 0, 0])? - y_at(y, [0, 2, 0])? - y_at(y, [0, 0, 2])?;
    Ok(spectrum_is_psd(&symmetric_eigenvalues(&m1.entries), PSD_TOL) && trace_gap.abs() <= SPHERE_TRACE_TOL)
}

/// Entries of the 8×8 three-qubit condition, row by row. "abc+def" stands
/// for y_abc + y_def and "abc-idef" for y_abc − i·y_def.
const CNS_TABLE: [[&str; 8]; 8] = [
    ["000+001", "100-i010", "100+101", "200-i110", "010+011", "110-i020", "001+002", "101-i011"],
    ["100+i010", "000-001", "200+i110", "100-101", "110+i020", "010-011", "101+i011", "001-002"],
    ["100+101", "200-i110", "200+201", "300-i210", "110+111", "210-i120", "101+102", "201-i111"],
    ["200+i110", "100-101", "300+i210", "200-201", "210+i120", "110-111", "201+i111", "101-102"],
    ["010+011", "110-i020", "110+111", "210-i120", "020+021", "120-i030", "011+012", "111-i021"],
    ["110+i020", "010-011", "210+i120", "110-111", "120+i030", "020-021", "111+i021", "011-012"],
    ["001+002", "101-i011", "101+102", "201-i111", "011+012", "111-i021", "002+003", "102-i012"],
    ["101+i011", "001-002", "201+i111", "101-102", "111+i021", "011-012", "102+i012", "002-003"],
];

fn parse_index(s: &str) -> MultiIndex {
    MultiIndex::new(s.bytes().map(|b| (b - b'0') as u32).collect())
}

fn cns_entry(y: &Tms, spec: &str) -> Result<Complex64> {
    let (first, rest) = spec.split_at(3);
    let (sign, rest) = rest.split_at(1);
    let sign = if sign == "+" { 1.0 } else { -1.0 };
    let (imag, second) = match rest.strip_prefix('i') {
        Some(s) => (true, s),
        None => (false, rest),
    };
    let a = y.require(&parse_index(first))?;
    let b = sign * y.require(&parse_index(second))?;
    Ok(if imag {
        Complex64::new(a, b)
    } else {
        Complex64::new(a + b, 0.0)
    })
}

/// The 8×8 Hermitian matrix whose positivity characterizes degree-3 tms with
/// a representing measure on the unit sphere.
pub fn cns_matrix(y: &Tms) -> Result<CMatrix> {
    require_shape(y, 3)?;
    let mut m = CMatrix::zeros(8, 8);
    for (i, row) in CNS_TABLE.iter().enumerate() {
        for (j, spec) in row.iter().enumerate() {
            m[(i, j)] = cns_entry(y, spec)?;
        }
    }
    Ok(m)
}

pub fn three_qubit_sym_nsc(y: &Tms) -> Result<bool> {
    let m = cns_matrix(y)?;
    Ok(spectrum_is_psd(&hermitian_eigenvalues(&m), PSD_TOL))
}

/// SEPARABLE when ρ is PPT with respect to the first qubit and either
/// N ≤ 3 or rank ρ ≤ N; no claim otherwise.
pub fn ppt_rank_sufficient(rho: &DensityMatrix) -> Result<Option<Verdict>> {
    let n = rho.dims().len();
    if rho.dims().iter().any(|&d| d != 2) {
        return domain("expected an N-qubit state");
    }
    if n == 1 {
        return Ok(Some(Verdict::Separable));
    }
    let (ppt, _) = ppt_check(rho, &[0])?;
    let small = n <= 3 || rho.rank(PSD_TOL) <= n;
    Ok((ppt && small).then_some(Verdict::Separable))
}

fn lorentz(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    u[0] * v[0] - u[1] * v[1] - u[2] * v[2] - u[3] * v[3]
}

/// Root in (0, 1) of (A − 2B + C)t² + 2(B − C)t + C, where A < 0 < C.
fn crossing(a: f64, b: f64, c: f64) -> Result<f64> {
    let qa = a - 2.0 * b + c;
    let qb = 2.0 * (b - c);
    let qc = c;
    let mut roots = Vec::new();
    if qa.abs() < 1e-300 {
        roots.push(-qc / qb);
    } else {
        let disc = (qb * qb - 4.0 * qa * qc).max(0.0);
        let sq = disc.sqrt();
        // Cancellation-free pair of roots.
        let q = -0.5 * (qb + qb.signum() * sq);
        if q != 0.0 {
            roots.push(q / qa);
            roots.push(qc / q);
        } else {
            roots.push(-qb / (2.0 * qa));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
        .into_iter()
        .find(|t| *t > 0.0 && *t < 1.0)
        .ok_or_else(|| Error::Degenerate("no crossing in (0, 1)".into()))
}

fn atom_from(u: &DVector<f64>) -> Option<Atom> {
    let w = u[0] * u[0];
    if w <= 0.0 {
        return None;
    }
    let mut p = vec![u[1] / u[0], u[2] / u[0], u[3] / u[0]];
    let norm = p.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        p.iter_mut().for_each(|x| *x /= norm);
    }
    Some(Atom { weight: w, point: p })
}

/// Decomposition into at most four pure product states, also returning the
/// number of pairing steps used.
pub fn two_qubit_four_atom_decomposition_with_steps(y: &Tms) -> Result<(Decomposition, usize)> {
    if !two_qubit_sym_nsc(y)? {
        return domain("tms violates the two-qubit separability condition");
    }
    let m1 = moment_matrix(y, 1)?.entries;
    let (vals, vecs) = sorted_eigen_desc(&m1);
    let scale = vals[0].abs().max(1.0);
    let mut pending: Vec<DVector<f64>> = Vec::new();
    for (j, &l) in vals.iter().enumerate() {
        let l = if l < 0.0 && l >= CLIP_FLOOR * scale { 0.0 } else { l };
        if l > NULL_TOL * scale {
            pending.push(vecs.column(j) * l.sqrt());
        }
    }
    let mut atoms = Vec::new();
    let mut steps = 0;
    loop {
        let (null, rest): (Vec<_>, Vec<_>) = pending
            .into_iter()
            .partition(|u| lorentz(u, u).abs() <= NULL_TOL * u.norm_squared().max(1e-300));
        atoms.extend(null.iter().filter_map(atom_from));
        pending = rest;
        if pending.is_empty() {
            break;
        }
        let neg = pending.iter().position(|u| lorentz(u, u) < 0.0);
        let pos = pending.iter().position(|u| lorentz(u, u) > 0.0);
        let (Some(i), Some(j)) = (neg, pos) else {
            let residual: f64 = pending.iter().map(|u| lorentz(u, u).abs()).sum();
            if residual <= 1e-8 {
                atoms.extend(pending.iter().filter_map(atom_from));
                break;
            }
            return Err(Error::Degenerate(format!(
                "no sign-opposed pair among {} remaining vectors",
                pending.len()
            )));
        };
        let (ui, uj) = (pending[i].clone(), pending[j].clone());
        let t = crossing(lorentz(&ui, &ui), lorentz(&ui, &uj), lorentz(&uj, &uj))?;
        let s = 1.0 / (t * t + (1.0 - t) * (1.0 - t)).sqrt();
        let v = (&ui * t + &uj * (1.0 - t)) * s;
        let vp = (&ui * -(1.0 - t) + &uj * t) * s;
        let (hi, lo) = (i.max(j), i.min(j));
        pending.remove(hi);
        pending.remove(lo);
        atoms.extend(atom_from(&v));
        pending.push(vp);
        steps += 1;
    }
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    let y0 = y_at(y, [0, 0, 0])?;
    for a in &mut atoms {
        a.weight *= y0 / total;
    }
    Ok((Decomposition::new(atoms), steps))
}

/// Decomposition of a separable symmetric two-qubit tms into at most four
/// pure product states by pairing eigenvectors of M_1(y) until every vector
/// is light-like.
pub fn two_qubit_four_atom_decomposition(y: &Tms) -> Result<Decomposition> {
    two_qubit_four_atom_decomposition_with_steps(y).map(|(d, _)| d)
}

/// (M_{N/2}(y) ⪰ 0, ρ^{T_A} ⪰ 0) for a symmetric state of an even number N
/// of qubits, with A the first N/2 qubits.
pub fn moment_ppt_equivalence(x: &StateTensor) -> Result<(bool, bool)> {
    let spec = x.partition();
    if !spec.is_symmetric_qubits() {
        return domain("expected a symmetric qubit partition");
    }
    let n = spec.num_parties();
    if !n.is_multiple_of(2) {
        return domain(format!("number of qubits {n} is odd"));
    }
    let y = tensor_to_tms(x)?;
    let m = moment_matrix(&y, (n / 2) as u32)?;
    let moments_psd = spectrum_is_psd(&symmetric_eigenvalues(&m.entries), PSD_TOL);
    let rho = tensor_to_state(x)?;
    let half: Vec<usize> = (0..n / 2).collect();
    let (ppt, _) = ppt_check(&rho, &half)?;
    Ok((moments_psd, ppt))
}
