use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::tms::MultiIndex;

/// How a multipartite system is split into parties, which parties are
/// identified by permutation symmetry, and which classes are pure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRaw", into = "PartitionRaw")]
pub struct PartitionSpec {
    parties: Vec<usize>,
    symmetry_classes: Vec<Vec<usize>>,
    purity_flags: Vec<bool>,
    known_support: Option<Vec<MultiIndex>>,
    class_of: Vec<usize>,
    offsets: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRaw {
    parties: Vec<usize>,
    symmetry_classes: Vec<Vec<usize>>,
    purity_flags: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    known_support: Option<Vec<MultiIndex>>,
}

impl TryFrom<PartitionRaw> for PartitionSpec {
    type Error = crate::Error;
    fn try_from(r: PartitionRaw) -> Result<Self> {
        PartitionSpec::new(r.parties, r.symmetry_classes, r.purity_flags, r.known_support)
    }
}

impl From<PartitionSpec> for PartitionRaw {
    fn from(p: PartitionSpec) -> Self {
        PartitionRaw {
            parties: p.parties,
            symmetry_classes: p.symmetry_classes,
            purity_flags: p.purity_flags,
            known_support: p.known_support,
        }
    }
}

impl PartitionSpec {
    pub fn new(
        parties: Vec<usize>,
        symmetry_classes: Vec<Vec<usize>>,
        purity_flags: Vec<bool>,
        known_support: Option<Vec<MultiIndex>>,
    ) -> Result<Self> {
        if parties.is_empty() {
            return domain("partition has no parties");
        }
        if let Some(&d) = parties.iter().find(|&&d| d < 2) {
            return domain(format!("local dimension {d} < 2"));
        }
        if purity_flags.len() != symmetry_classes.len() {
            return domain(format!(
                "{} purity flags for {} symmetry classes",
                purity_flags.len(),
                symmetry_classes.len()
            ));
        }
        let mut class_of = vec![usize::MAX; parties.len()];
        for (c, class) in symmetry_classes.iter().enumerate() {
            if class.is_empty() {
                return domain("empty symmetry class");
            }
            for &p in class {
                if p >= parties.len() {
                    return domain(format!("party index {p} out of range"));
                }
                if class_of[p] != usize::MAX {
                    return domain(format!("party {p} appears in two symmetry classes"));
                }
                if parties[p] != parties[class[0]] {
                    return domain(format!(
                        "parties {} and {p} are identified but have dimensions {} and {}",
                        class[0], parties[class[0]], parties[p]
                    ));
                }
                class_of[p] = c;
            }
        }
        if let Some(p) = class_of.iter().position(|&c| c == usize::MAX) {
            return domain(format!("party {p} belongs to no symmetry class"));
        }
        let mut offsets = Vec::with_capacity(symmetry_classes.len() + 1);
        let mut acc = 0;
        for class in &symmetry_classes {
            offsets.push(acc);
            acc += parties[class[0]] * parties[class[0]] - 1;
        }
        offsets.push(acc);
        if let Some(sup) = &known_support {
            if let Some(a) = sup.iter().find(|a| a.nvars() != acc) {
                return domain(format!("support index {a} does not have {acc} variables"));
            }
        }
        Ok(PartitionSpec {
            parties,
            symmetry_classes,
            purity_flags,
            known_support,
            class_of,
            offsets,
        })
    }

    /// N qubits identified into one permutation-symmetric class.
    pub fn symmetric_qubits(n: usize, pure: bool) -> Result<Self> {
        Self::new(vec![2; n], vec![(0..n).collect()], vec![pure], None)
    }

    /// Parties with no identification, all with the same purity flag.
    pub fn independent(dims: Vec<usize>, pure: bool) -> Result<Self> {
        let p = dims.len();
        Self::new(dims, (0..p).map(|i| vec![i]).collect(), vec![pure; p], None)
    }

    pub fn with_known_support(mut self, support: Vec<MultiIndex>) -> Result<Self> {
        self.known_support = Some(support);
        let raw = PartitionRaw::from(self);
        PartitionSpec::try_from(raw)
    }

    pub fn parties(&self) -> &[usize] {
        &self.parties
    }

    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn symmetry_classes(&self) -> &[Vec<usize>] {
        &self.symmetry_classes
    }

    pub fn purity_flags(&self) -> &[bool] {
        &self.purity_flags
    }

    pub fn known_support(&self) -> Option<&[MultiIndex]> {
        self.known_support.as_deref()
    }

    pub fn class_of(&self, party: usize) -> usize {
        self.class_of[party]
    }

    pub fn class_dim(&self, class: usize) -> usize {
        self.parties[self.symmetry_classes[class][0]]
    }

    /// Number of local coordinates t = d² − 1 of a class.
    pub fn class_t(&self, class: usize) -> usize {
        self.offsets[class + 1] - self.offsets[class]
    }

    /// Index of the first variable of a class in the full coordinate vector.
    pub fn class_offset(&self, class: usize) -> usize {
        self.offsets[class]
    }

    /// Total number of tms variables n = Σ_classes t_c.
    pub fn nvars(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn total_dim(&self) -> usize {
        self.parties.iter().product()
    }

    /// True when some class identifies two or more parties.
    pub fn has_symmetry(&self) -> bool {
        self.symmetry_classes.iter().any(|c| c.len() > 1)
    }

    /// The all-qubit single-class configuration.
    pub fn is_symmetric_qubits(&self) -> bool {
        self.symmetry_classes.len() == 1 && self.parties.iter().all(|&d| d == 2)
    }
}
