use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::extraction::{extract_atoms, polish_decomposition, verify_decomposition, Atom, Decomposition};
use super::relaxation::{build_relaxation, k0_of, random_sos_objective};
use crate::error::{domain, Result};
use crate::sdp::{solve, verify_infeasibility_certificate, Certificate, Residuals, SdpStatus, SolverOptions};
use crate::semialgebraic::SemialgebraicSet;
use crate::tms::{moment_matrix, numerical_rank, Polynomial, Tms};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyOptions {
    /// Highest relaxation order; `None` means k0 + 2.
    pub k_max: Option<u32>,
    pub objectives_per_order: usize,
    /// Relative threshold for numerical ranks of moment matrices.
    pub rank_tol: f64,
    pub seed: u64,
    pub solver: SolverOptions,
    /// Maximum moment mismatch accepted for a decomposition.
    pub verify_tol: f64,
    /// An INCONCLUSIVE solve whose primal residual is below this still has
    /// its moments examined for flatness.
    pub accept_residual: f64,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions {
            k_max: None,
            objectives_per_order: 6,
            rank_tol: 1e-6,
            seed: 0,
            solver: SolverOptions::default(),
            verify_tol: 1e-6,
            accept_residual: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Entangled,
    Separable,
    Inconclusive,
}

/// Farkas certificate of the order-k relaxation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub order: u32,
    #[serde(flatten)]
    pub certificate: Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankCheck {
    pub t: u32,
    pub rank: usize,
    pub rank_lower: usize,
}

/// One SDP solve of the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attempt {
    pub order: u32,
    pub objective: usize,
    pub status: SdpStatus,
    pub iterations: usize,
    pub residuals: Residuals,
    pub ranks: Vec<RankCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub attempts: Vec<Attempt>,
    pub objectives_used: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reconstruction_error: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparabilityCertificate {
    pub verdict: Verdict,
    pub order: Option<u32>,
    pub witness: Option<Witness>,
    pub decomposition: Option<Decomposition>,
    pub diagnostics: Diagnostics,
}

/// `{"verdict", "order", "witness", "atoms", "diagnostics"}`
#[derive(Serialize, Deserialize)]
struct CertificateJson {
    verdict: Verdict,
    order: Option<u32>,
    witness: Option<Witness>,
    atoms: Option<Vec<Atom>>,
    #[serde(default)]
    diagnostics: Diagnostics,
}

impl Serialize for SeparabilityCertificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CertificateJson {
            verdict: self.verdict,
            order: self.order,
            witness: self.witness.clone(),
            atoms: self.decomposition.as_ref().map(|d| d.atoms.clone()),
            diagnostics: self.diagnostics.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SeparabilityCertificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CertificateJson::deserialize(d)?;
        Ok(SeparabilityCertificate {
            verdict: j.verdict,
            order: j.order,
            witness: j.witness,
            decomposition: j.atoms.map(Decomposition::new),
            diagnostics: j.diagnostics,
        })
    }
}

fn ranks_at(z: &Tms, t: u32, d0: u32, tol: f64) -> Result<RankCheck> {
    let hi = moment_matrix(z, t)?;
    let lo = moment_matrix(z, t - d0)?;
    Ok(RankCheck {
        t,
        rank: numerical_rank(&hi.entries, tol),
        rank_lower: numerical_rank(&lo.entries, tol),
    })
}

/// Tries to turn a flat moment sequence into a verified decomposition of `y`.
fn decompose_flat(
    z: &Tms,
    t: u32,
    y: &Tms,
    k_set: &SemialgebraicSet,
    opts: &HierarchyOptions,
    rng: &mut ChaCha8Rng,
    notes: &mut Vec<String>,
) -> Option<(Decomposition, f64)> {
    let dec = match extract_atoms(&z.truncated(2 * t), t, opts.rank_tol, rng) {
        Ok(d) => d,
        Err(e) => {
            notes.push(format!("order-{t} truncation: {e}"));
            return None;
        }
    };
    let (ok, err) = verify_decomposition(&dec, y, k_set, opts.verify_tol);
    if ok {
        return Some((dec, err));
    }
    let polished = polish_decomposition(&dec, y, k_set, 50);
    let (ok, perr) = verify_decomposition(&polished, y, k_set, opts.verify_tol);
    if ok {
        return Some((polished, perr));
    }
    notes.push(format!(
        "order-{t} truncation: {} atoms reproduce the data only to {:.2e}",
        dec.len(),
        err.min(perr)
    ));
    None
}

/// The moment hierarchy: for k = k0, …, k_max and up to
/// `objectives_per_order` random SOS objectives per order, solve the
/// relaxation; a verified Farkas certificate proves ENTANGLED, a flat
/// optimum whose extracted atoms reproduce `y` proves SEPARABLE.
pub fn run_hierarchy(y: &Tms, k_set: &SemialgebraicSet, opts: &HierarchyOptions) -> Result<SeparabilityCertificate> {
    if y.degree() < 1 {
        return domain("tms degree must be at least 1");
    }
    if k_set.nvars() != y.nvars() {
        return domain("K and the tms have different numbers of variables");
    }
    if opts.objectives_per_order == 0 {
        return domain("objectives_per_order must be at least 1");
    }
    let k0 = k0_of(y);
    let k_max = opts.k_max.unwrap_or(k0 + 2);
    if k_max < k0 {
        return domain(format!("k_max = {k_max} is below k0 = {k0}"));
    }
    let d = y.degree();
    let d0 = k_set.d0();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut diag = Diagnostics::default();

    let separable = |order: Option<u32>, dec: Decomposition, err: f64, rank: usize, mut diag: Diagnostics| {
        diag.rank = Some(rank);
        diag.reconstruction_error = Some(err);
        SeparabilityCertificate {
            verdict: Verdict::Separable,
            order,
            witness: None,
            decomposition: Some(dec),
            diagnostics: diag,
        }
    };

    // Data that is already flat needs no extension.
    if y.is_full() && d / 2 >= d0 {
        let t = d / 2;
        let check = ranks_at(y, t, d0, opts.rank_tol)?;
        if check.rank == check.rank_lower {
            if let Some((dec, err)) = decompose_flat(y, t, y, k_set, opts, &mut rng, &mut diag.notes) {
                diag.notes.push("moment data is already flat".into());
                return Ok(separable(None, dec, err, check.rank, diag));
            }
        }
    }

    let mut objectives: Vec<Polynomial> = Vec::new();
    for k in k0..=k_max {
        for i in 0..opts.objectives_per_order {
            if objectives.len() <= i {
                objectives.push(random_sos_objective(y.nvars(), k0, &mut rng));
            }
            diag.objectives_used = diag.objectives_used.max(i + 1);
            let relax = build_relaxation(y, k_set, k, Some(&objectives[i]))?;
            let sol = solve(&relax.problem, &opts.solver)?;
            let mut attempt = Attempt {
                order: k,
                objective: i,
                status: sol.status,
                iterations: sol.iterations,
                residuals: sol.residuals,
                ranks: Vec::new(),
                message: sol.message.clone(),
            };

            if sol.status == SdpStatus::Infeasible {
                let cert = sol.dual.expect("infeasible solutions carry a certificate");
                let verified = verify_infeasibility_certificate(&relax.problem, &cert)?;
                diag.attempts.push(attempt);
                if verified {
                    return Ok(SeparabilityCertificate {
                        verdict: Verdict::Entangled,
                        order: Some(k),
                        witness: Some(Witness {
                            order: k,
                            certificate: cert,
                        }),
                        decomposition: None,
                        diagnostics: diag,
                    });
                }
                // Feasibility does not depend on the objective.
                diag.notes.push(format!("order {k}: infeasibility certificate failed verification"));
                break;
            }

            let usable = match sol.status {
                SdpStatus::Optimal => true,
                _ => sol.residuals.primal <= opts.accept_residual,
            };
            let Some(primal) = sol.primal.as_ref().filter(|_| usable) else {
                diag.attempts.push(attempt);
                continue;
            };
            let z = relax.tms_from_primal(primal)?;
            let t_lo = d0.max(d.div_ceil(2));
            let mut found = None;
            for t in (t_lo..=k).rev() {
                let check = ranks_at(&z, t, d0, opts.rank_tol)?;
                let flat = check.rank == check.rank_lower;
                let rank = check.rank;
                attempt.ranks.push(check);
                if flat {
                    if let Some((dec, err)) = decompose_flat(&z, t, y, k_set, opts, &mut rng, &mut diag.notes) {
                        found = Some((dec, err, rank));
                        break;
                    }
                }
            }
            diag.attempts.push(attempt);
            if let Some((dec, err, rank)) = found {
                return Ok(separable(Some(k), dec, err, rank, diag));
            }
        }
    }
    Ok(SeparabilityCertificate {
        verdict: Verdict::Inconclusive,
        order: None,
        witness: None,
        decomposition: None,
        diagnostics: diag,
    })
}
