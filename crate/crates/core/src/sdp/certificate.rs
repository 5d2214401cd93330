use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::problem::{from_rows, SdpProblem};
use crate::error::{domain, Result};
use crate::linalg::symmetric_eigenvalues;

/// Smallest eigenvalue allowed in a dual block after normalization.
pub const CERT_PSD_TOL: f64 = 1e-9;
/// Largest stationarity violation allowed after normalization.
pub const CERT_RESIDUAL_TOL: f64 = 1e-7;
/// The certificate value must be below −CERT_VALUE_TOL.
pub const CERT_VALUE_TOL: f64 = 1e-9;

/// Dual data: one matrix per LMI block plus one multiplier per general
/// linear equality.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub blocks: Vec<DMatrix<f64>>,
    pub multipliers: Vec<f64>,
}

impl Certificate {
    pub fn zeros_like(p: &SdpProblem) -> Self {
        Certificate {
            blocks: p
                .blocks()
                .iter()
                .map(|b| DMatrix::zeros(b.dim(), b.dim()))
                .collect(),
            multipliers: vec![0.0; p.equalities().len()],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Certificate {
            blocks: self.blocks.iter().map(|b| b * s).collect(),
            multipliers: self.multipliers.iter().map(|l| l * s).collect(),
        }
    }
}

/// Pieces of a problem after substituting its fixed variables.
pub(crate) struct FixedSplit {
    pub free: Vec<usize>,
    /// Position of each variable among the free ones (None when fixed).
    pub pos: Vec<Option<usize>>,
    pub fixed_value: Vec<Option<f64>>,
    /// A_0 of every block with the fixed variables absorbed.
    pub a0: Vec<DMatrix<f64>>,
    /// Equality matrix restricted to the free variables.
    pub e: DMatrix<f64>,
    /// Right-hand side with fixed contributions moved over.
    pub f: DVector<f64>,
}

pub(crate) fn split_fixed(p: &SdpProblem) -> FixedSplit {
    let n = p.num_vars();
    let mut fixed_value = vec![None; n];
    for &(i, v) in p.fixed() {
        fixed_value[i] = Some(v);
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed_value[i].is_none()).collect();
    let mut pos = vec![None; n];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = Some(k);
    }
    let a0 = p
        .blocks()
        .iter()
        .map(|b| {
            let mut m = b.constant().to_dense();
            for (var, a) in b.coeffs() {
                if let Some(v) = fixed_value[var] {
                    a.add_to(&mut m, v);
                }
            }
            m
        })
        .collect();
    let neq = p.equalities().len();
    let mut e = DMatrix::zeros(neq, free.len());
    let mut f = DVector::zeros(neq);
    for (r, eq) in p.equalities().iter().enumerate() {
        f[r] = eq.rhs;
        for &(i, a) in &eq.coeffs {
            match (fixed_value[i], pos[i]) {
                (Some(v), _) => f[r] -= a * v,
                (None, Some(k)) => e[(r, k)] += a,
                _ => unreachable!(),
            }
        }
    }
    FixedSplit {
        free,
        pos,
        fixed_value,
        a0,
        e,
        f,
    }
}

fn check_shapes(p: &SdpProblem, cert: &Certificate) -> Result<()> {
    if cert.blocks.len() != p.blocks().len() {
        return domain(format!(
            "certificate has {} blocks, problem has {}",
            cert.blocks.len(),
            p.blocks().len()
        ));
    }
    for (w, b) in cert.blocks.iter().zip(p.blocks()) {
        if w.nrows() != b.dim() || w.ncols() != b.dim() {
            return domain(format!(
                "certificate block is {}×{}, expected {}",
                w.nrows(),
                w.ncols(),
                b.dim()
            ));
        }
    }
    if cert.multipliers.len() != p.equalities().len() {
        return domain(format!(
            "certificate has {} multipliers for {} equalities",
            cert.multipliers.len(),
            p.equalities().len()
        ));
    }
    Ok(())
}

/// g_i(W) = Σ_b tr(W_b A_i^b) for every free variable.
pub(crate) fn gradient(p: &SdpProblem, split: &FixedSplit, cert: &Certificate) -> DVector<f64> {
    let mut g = DVector::zeros(split.free.len());
    for (b, w) in p.blocks().iter().zip(&cert.blocks) {
        for (var, a) in b.coeffs() {
            if let Some(k) = split.pos[var] {
                g[k] += a.dot(w);
            }
        }
    }
    g
}

/// Quantities shared by the certificate checks.
#[derive(Debug, Clone)]
pub struct DualEvaluation {
    /// Σ_b tr(W_b Ā_0^b) − λᵀ f̄.
    pub value: f64,
    /// max_i |g_i(W) + (Ēᵀλ)_i − c_i| over free variables, with c = 0 for
    /// infeasibility certificates.
    pub stationarity: f64,
    /// Smallest eigenvalue over all dual blocks.
    pub min_eigenvalue: f64,
}

pub fn evaluate_dual(p: &SdpProblem, cert: &Certificate, with_objective: bool) -> Result<DualEvaluation> {
    check_shapes(p, cert)?;
    let split = split_fixed(p);
    let lambda = DVector::from_column_slice(&cert.multipliers);
    let mut r = gradient(p, &split, cert) + split.e.transpose() * &lambda;
    if with_objective {
        for (k, &i) in split.free.iter().enumerate() {
            r[k] -= p.objective()[i];
        }
    }
    let value: f64 = cert
        .blocks
        .iter()
        .zip(&split.a0)
        .map(|(w, a)| crate::linalg::frob(w, a))
        .sum::<f64>()
        - lambda.dot(&split.f);
    let mut min_eigenvalue = f64::INFINITY;
    for w in cert.blocks.iter().filter(|w| w.nrows() > 0) {
        let asym = (w - w.transpose()).amax();
        min_eigenvalue = if asym > 1e-9 * w.amax().max(1.0) {
            f64::NEG_INFINITY
        } else {
            min_eigenvalue.min(symmetric_eigenvalues(w)[0])
        };
    }
    Ok(DualEvaluation {
        value,
        stationarity: r.amax(),
        min_eigenvalue,
    })
}

/// True iff the certificate proves that no feasible z exists: after scaling
/// so that Σ tr(W Ā_0) − λᵀ f̄ = −1, every W_b ⪰ −1e-9 and the free-variable
/// stationarity residual is at most 1e-7.
pub fn verify_infeasibility_certificate(p: &SdpProblem, cert: &Certificate) -> Result<bool> {
    let ev = evaluate_dual(p, cert, false)?;
    if !(ev.value < -CERT_VALUE_TOL) {
        return Ok(false);
    }
    let s = 1.0 / ev.value.abs();
    Ok(ev.min_eigenvalue * s >= -CERT_PSD_TOL && ev.stationarity * s <= CERT_RESIDUAL_TOL)
}

/// Lower bound on the optimal value implied by a dual-feasible certificate:
/// −Σ tr(W Ā_0) + λᵀ f̄ + Σ_fixed c_i v_i. Returns the bound together with the
/// stationarity residual and smallest dual eigenvalue so callers can judge
/// its validity.
pub fn dual_bound(p: &SdpProblem, cert: &Certificate) -> Result<(f64, DualEvaluation)> {
    let ev = evaluate_dual(p, cert, true)?;
    let fixed_part: f64 = p.fixed().iter().map(|&(i, v)| p.objective()[i] * v).sum();
    Ok((-ev.value + fixed_part, ev))
}

#[derive(Serialize, Deserialize)]
struct CertificateJson {
    blocks: Vec<Vec<Vec<f64>>>,
    multipliers: Vec<f64>,
}

impl Serialize for Certificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CertificateJson {
            blocks: self
                .blocks
                .iter()
                .map(|m| m.row_iter().map(|r| r.iter().copied().collect()).collect())
                .collect(),
            multipliers: self.multipliers.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = CertificateJson::deserialize(d)?;
        let blocks = j
            .blocks
            .iter()
            .map(|b| from_rows(b))
            .collect::<Result<Vec<_>>>()
            .map_err(D::Error::custom)?;
        Ok(Certificate {
            blocks,
            multipliers: j.multipliers,
        })
    }
}
