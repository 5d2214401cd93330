use std::collections::BTreeMap;

use super::moments::Tms;
use super::multi_index::MultiIndex;
use crate::error::{domain, Error, Result};
use crate::quantum::{state_to_tensor, DensityMatrix, PartitionSpec, StateTensor};

/// Largest allowed spread of tensor entries that map to the same moment.
pub const COLLISION_TOL: f64 = 1e-9;

/// Exponent vector of the monomial Π_i x^{(class(i))}_{μ_i}; parties in the
/// same symmetry class share variables, so their exponents add up.
pub fn mu_to_alpha(mu: &[usize], spec: &PartitionSpec) -> Result<MultiIndex> {
    if mu.len() != spec.num_parties() {
        return domain(format!(
            "index has {} entries for {} parties",
            mu.len(),
            spec.num_parties()
        ));
    }
    let mut alpha = vec![0u32; spec.nvars()];
    for (party, &m) in mu.iter().enumerate() {
        let class = spec.class_of(party);
        let t = spec.class_t(class);
        if m > t {
            return domain(format!("index entry {m} for party {party} exceeds t = {t}"));
        }
        if m > 0 {
            alpha[spec.class_offset(class) + m - 1] += 1;
        }
    }
    Ok(MultiIndex::new(alpha))
}

/// Moment sequence y_α = X_μ with α = mu_to_alpha(μ), restricted to the
/// partition's known support when one is declared.
pub fn tensor_to_tms(x: &StateTensor) -> Result<Tms> {
    let spec = x.partition();
    let mut seen: BTreeMap<MultiIndex, (f64, Vec<usize>)> = BTreeMap::new();
    for (mu, v) in x.iter() {
        let alpha = mu_to_alpha(&mu, spec)?;
        match seen.get(&alpha) {
            Some((prev, prev_mu)) => {
                if (prev - v).abs() > COLLISION_TOL * prev.abs().max(1.0) {
                    return Err(Error::Integrity(format!(
                        "entries {prev_mu:?} = {prev} and {mu:?} = {v} map to the same moment {alpha}"
                    )));
                }
            }
            None => {
                seen.insert(alpha, (v, mu));
            }
        }
    }
    let keep: Option<std::collections::BTreeSet<&MultiIndex>> =
        spec.known_support().map(|s| s.iter().collect());
    Tms::from_values(
        spec.nvars(),
        spec.num_parties() as u32,
        seen.into_iter()
            .filter(|(a, _)| keep.as_ref().is_none_or(|k| k.contains(a)))
            .map(|(a, (v, _))| (a, v)),
    )
}

/// state_to_tensor followed by tensor_to_tms. States that are not exactly
/// class-symmetric are projected first.
pub fn state_to_tms(rho: &DensityMatrix, spec: &PartitionSpec) -> Result<Tms> {
    tensor_to_tms(&state_to_tensor(rho, spec)?.tensor)
}
