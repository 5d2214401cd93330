use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::basis::{standard_basis, LocalBasis};
use super::partition::PartitionSpec;
use super::state::{hermitize, DensityMatrix};
use crate::error::{domain, Result};
use crate::linalg::{cmax_abs, CMatrix};

/// Tolerance deciding whether a state already lives on the symmetric subspace.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Real tensor X_{μ1…μp} = tr(ρ S_{μ1} ⊗ … ⊗ S_{μp}).
///
/// Entries are stored densely in mixed radix with party 0 most significant;
/// the radix of party i is d_i².
#[derive(Debug, Clone, PartialEq)]
pub struct StateTensor {
    partition: PartitionSpec,
    values: Vec<f64>,
}

/// Output of [`state_to_tensor`].
#[derive(Debug, Clone)]
pub struct TensorConversion {
    pub tensor: StateTensor,
    /// The input was not supported on the symmetric subspace and was
    /// replaced by its renormalized projection.
    pub projected: bool,
}

impl StateTensor {
    pub fn new(partition: PartitionSpec, values: Vec<f64>) -> Result<Self> {
        let len: usize = partition.parties().iter().map(|d| d * d).product();
        if values.len() != len {
            return domain(format!("tensor has {} entries, expected {len}", values.len()));
        }
        if (values[0] - 1.0).abs() > SUPPORT_TOL {
            return domain(format!("X_(0..0) = {} but must equal 1", values[0]));
        }
        Ok(StateTensor { partition, values })
    }

    pub fn partition(&self) -> &PartitionSpec {
        &self.partition
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn flat_index(&self, mu: &[usize]) -> Result<usize> {
        let dims = self.partition.parties();
        if mu.len() != dims.len() {
            return domain(format!("index has {} entries for {} parties", mu.len(), dims.len()));
        }
        let mut idx = 0;
        for (&m, &d) in mu.iter().zip(dims) {
            if m >= d * d {
                return domain(format!("index entry {m} exceeds t = {}", d * d - 1));
            }
            idx = idx * d * d + m;
        }
        Ok(idx)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let dims = self.partition.parties();
        let mut mu = vec![0; dims.len()];
        for i in (0..dims.len()).rev() {
            let r = dims[i] * dims[i];
            mu[i] = flat % r;
            flat /= r;
        }
        mu
    }

    pub fn get(&self, mu: &[usize]) -> Result<f64> {
        Ok(self.values[self.flat_index(mu)?])
    }

    /// Every (μ, X_μ) pair in flat order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.multi_index(i), v))
    }
}

/// Applies a linear map to the (row, column) slot pair of one party of a
/// flattened D×D operator, in place. `map` is d²×d² and acts on the pair
/// index r·d + c; the result index is written back into the same slots.
fn apply_local(data: &mut [Complex64], dims: &[usize], party: usize, map: &CMatrix) {
    let big: usize = dims.iter().product();
    let d = dims[party];
    let stride: usize = dims[party + 1..].iter().product();
    let mut gathered = vec![Complex64::new(0.0, 0.0); d * d];
    for base in 0..big * big {
        let (row, col) = (base / big, base % big);
        if !(row / stride).is_multiple_of(d) || !(col / stride).is_multiple_of(d) {
            continue;
        }
        for r in 0..d {
            for c in 0..d {
                gathered[r * d + c] = data[base + r * stride * big + c * stride];
            }
        }
        for r in 0..d {
            for c in 0..d {
                let q = r * d + c;
                let mut acc = Complex64::new(0.0, 0.0);
                for (p, g) in gathered.iter().enumerate() {
                    acc += map[(q, p)] * g;
                }
                data[base + r * stride * big + c * stride] = acc;
            }
        }
    }
}

/// Position in the flat D×D buffer that holds X_μ after the forward maps.
fn tensor_slot(mu: &[usize], dims: &[usize]) -> usize {
    let big: usize = dims.iter().product();
    let (mut row, mut col) = (0, 0);
    for (&m, &d) in mu.iter().zip(dims) {
        row = row * d + m / d;
        col = col * d + m % d;
    }
    row * big + col
}

fn bases(dims: &[usize]) -> Result<Vec<LocalBasis>> {
    dims.iter().map(|&d| standard_basis(d)).collect()
}

/// Real symmetrizer over the permutation group of every symmetry class.
///
/// Entry (j, i) is 1/|orbit(i)| when j lies in the orbit of i.
pub fn class_symmetrizer(spec: &PartitionSpec) -> DMatrix<f64> {
    let dims = spec.parties();
    let big = spec.total_dim();
    let canon = |mut i: usize| -> Vec<usize> {
        let mut digits = vec![0; dims.len()];
        for p in (0..dims.len()).rev() {
            digits[p] = i % dims[p];
            i /= dims[p];
        }
        let mut key = Vec::with_capacity(dims.len());
        for class in spec.symmetry_classes() {
            let mut ds: Vec<usize> = class.iter().map(|&p| digits[p]).collect();
            ds.sort_unstable();
            key.extend(ds);
        }
        key
    };
    let keys: Vec<Vec<usize>> = (0..big).map(canon).collect();
    let mut counts: HashMap<&[usize], usize> = HashMap::new();
    for k in &keys {
        *counts.entry(k.as_slice()).or_insert(0) += 1;
    }
    DMatrix::from_fn(big, big, |j, i| {
        if keys[j] == keys[i] {
            1.0 / counts[keys[i].as_slice()] as f64
        } else {
            0.0
        }
    })
}

/// Tensor coordinates of ρ with respect to the standard local bases.
///
/// When the partition identifies parties and ρ is not supported on the
/// corresponding symmetric subspace, ρ is replaced by P ρ P / tr(P ρ P) and
/// the result is flagged as projected.
pub fn state_to_tensor(rho: &DensityMatrix, spec: &PartitionSpec) -> Result<TensorConversion> {
    if rho.dims() != spec.parties() {
        return domain(format!(
            "state has factor dims {:?} but partition expects {:?}",
            rho.dims(),
            spec.parties()
        ));
    }
    let mut m = rho.matrix().clone();
    let mut projected = false;
    if spec.has_symmetry() {
        let p = class_symmetrizer(spec).map(|v| Complex64::new(v, 0.0));
        let pmp = &p * &m * &p;
        if cmax_abs(&(&pmp - &m)) > SUPPORT_TOL {
            let tr = pmp.trace().re;
            if tr <= SUPPORT_TOL {
                return domain("state has no weight on the symmetric subspace");
            }
            m = hermitize(&(pmp / Complex64::new(tr, 0.0)));
            projected = true;
        }
    }
    let dims = spec.parties();
    let big = spec.total_dim();
    let mut data: Vec<Complex64> = (0..big * big).map(|i| m[(i / big, i % big)]).collect();
    for (party, basis) in bases(dims)?.iter().enumerate() {
        let d = basis.dim();
        let fwd = CMatrix::from_fn(d * d, d * d, |mu, q| basis.op(mu)[(q % d, q / d)]);
        apply_local(&mut data, dims, party, &fwd);
    }
    let len: usize = dims.iter().map(|d| d * d).product();
    let mut values = vec![0.0; len];
    let mut mu = vec![0; dims.len()];
    for (flat, v) in values.iter_mut().enumerate() {
        let mut f = flat;
        for i in (0..dims.len()).rev() {
            mu[i] = f % (dims[i] * dims[i]);
            f /= dims[i] * dims[i];
        }
        *v = data[tensor_slot(&mu, dims)].re;
    }
    Ok(TensorConversion {
        tensor: StateTensor::new(spec.clone(), values)?,
        projected,
    })
}

/// ρ = Π_i (1/d_i) Σ_μ X_μ S_{μ1} ⊗ … ⊗ S_{μp}. Positivity is not checked.
pub fn tensor_to_state(x: &StateTensor) -> Result<DensityMatrix> {
    let dims = x.partition().parties();
    let big = x.partition().total_dim();
    let mut data = vec![Complex64::new(0.0, 0.0); big * big];
    for (flat, &v) in x.values().iter().enumerate() {
        data[tensor_slot(&x.multi_index(flat), dims)] = Complex64::new(v, 0.0);
    }
    for (party, basis) in bases(dims)?.iter().enumerate() {
        let d = basis.dim();
        let inv = CMatrix::from_fn(d * d, d * d, |q, mu| {
            basis.op(mu)[(q / d, q % d)] / Complex64::new(d as f64, 0.0)
        });
        apply_local(&mut data, dims, party, &inv);
    }
    let m = CMatrix::from_fn(big, big, |r, c| data[r * big + c]);
    let m = hermitize(&m);
    let tr = m.trace().re;
    DensityMatrix::operator(m / Complex64::new(tr, 0.0), dims.to_vec())
}

/// T_{μ,ν} = X_{μ1…μk ν1…νk} for a symmetric state of 2k qubits, with the
/// multi-indices μ and ν flattened in base 4.
pub fn t_matrix(x: &StateTensor) -> Result<DMatrix<f64>> {
    let spec = x.partition();
    if !spec.is_symmetric_qubits() {
        return domain("t_matrix requires a symmetric qubit partition");
    }
    let n = spec.num_parties();
    if !n.is_multiple_of(2) {
        return domain(format!("t_matrix requires an even qubit count, got {n}"));
    }
    let side = 1usize << n;
    Ok(DMatrix::from_fn(side, side, |i, j| x.values()[i * side + j]))
}

#[derive(Serialize, Deserialize)]
struct CoordJson {
    mu: Vec<usize>,
    value: f64,
}

/// `{"partition": {...}, "coords": [{"mu": [..], "value": x}]}`; absent
/// coordinates are zero.
#[derive(Serialize, Deserialize)]
struct TensorJson {
    partition: PartitionSpec,
    coords: Vec<CoordJson>,
}

impl Serialize for StateTensor {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson {
            partition: self.partition.clone(),
            coords: self
                .iter()
                .filter(|(_, v)| *v != 0.0)
                .map(|(mu, value)| CoordJson { mu, value })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for StateTensor {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = TensorJson::deserialize(d)?;
        let len: usize = j.partition.parties().iter().map(|d| d * d).product();
        let mut probe = StateTensor {
            partition: j.partition,
            values: vec![0.0; len],
        };
        for c in j.coords {
            let i = probe.flat_index(&c.mu).map_err(D::Error::custom)?;
            probe.values[i] = c.value;
        }
        StateTensor::new(probe.partition, probe.values).map_err(D::Error::custom)
    }
}
