use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::multi_index::{monomial_basis, MultiIndex};
use super::polynomial::Polynomial;
use crate::error::{domain, Error, Result};
use crate::linalg;

/// Default relative tolerance for numerical rank decisions.
pub const DEFAULT_RANK_TOL: f64 = 1e-6;

/// Truncated moment sequence: moments y_α for α in a support set A with
/// |α| ≤ degree. Absent indices are unknown, not zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Tms {
    n: usize,
    degree: u32,
    values: BTreeMap<MultiIndex, f64>,
}

impl Tms {
    pub fn new(n: usize, degree: u32) -> Self {
        Tms {
            n,
            degree,
            values: BTreeMap::new(),
        }
    }

    pub fn from_values(
        n: usize,
        degree: u32,
        values: impl IntoIterator<Item = (MultiIndex, f64)>,
    ) -> Result<Self> {
        let mut t = Tms::new(n, degree);
        for (a, v) in values {
            t.insert(a, v)?;
        }
        Ok(t)
    }

    /// Moments of the atomic measure Σ w_j δ(x − p_j) for every |α| ≤ degree.
    pub fn from_atoms(n: usize, degree: u32, atoms: &[(f64, Vec<f64>)]) -> Self {
        let mut t = Tms::new(n, degree);
        for a in monomial_basis(n, degree) {
            let v = atoms.iter().map(|(w, p)| w * a.eval(p)).sum();
            t.values.insert(a, v);
        }
        t
    }

    pub fn insert(&mut self, alpha: MultiIndex, value: f64) -> Result<()> {
        if alpha.nvars() != self.n {
            return domain(format!("moment index {alpha} has wrong length (n = {})", self.n));
        }
        if alpha.degree() > self.degree {
            return domain(format!(
                "moment index {alpha} exceeds degree {}",
                self.degree
            ));
        }
        self.values.insert(alpha, value);
        Ok(())
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<f64> {
        self.values.get(alpha).copied()
    }

    pub fn require(&self, alpha: &MultiIndex) -> Result<f64> {
        self.get(alpha)
            .ok_or_else(|| Error::IncompleteTms(alpha.to_string()))
    }

    pub fn support(&self) -> impl Iterator<Item = &MultiIndex> {
        self.values.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.values.iter().map(|(a, &v)| (a, v))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Restriction to the indices accepted by `keep`.
    pub fn restricted(&self, mut keep: impl FnMut(&MultiIndex) -> bool) -> Tms {
        Tms {
            n: self.n,
            degree: self.degree,
            values: self
                .values
                .iter()
                .filter(|(a, _)| keep(a))
                .map(|(a, v)| (a.clone(), *v))
                .collect(),
        }
    }

    /// Truncation to |α| ≤ degree.
    pub fn truncated(&self, degree: u32) -> Tms {
        let mut t = self.restricted(|a| a.degree() <= degree);
        t.degree = degree.min(self.degree);
        t
    }

    /// True when every |α| ≤ degree is present.
    pub fn is_full(&self) -> bool {
        monomial_basis(self.n, self.degree)
            .iter()
            .all(|a| self.values.contains_key(a))
    }
}

/// Moment (or localizing) matrix with its degree-lex row/column labels.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentMatrix {
    pub order: u32,
    pub labels: Vec<MultiIndex>,
    pub entries: DMatrix<f64>,
}

/// M_k(z)_{αβ} = z_{α+β} for |α|, |β| ≤ k.
pub fn moment_matrix(z: &Tms, k: u32) -> Result<MomentMatrix> {
    if 2 * k > z.degree {
        return domain(format!(
            "moment matrix of order {k} needs degree {} but tms has degree {}",
            2 * k,
            z.degree
        ));
    }
    let labels = monomial_basis(z.n, k);
    let s = labels.len();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let v = z.require(&labels[i].add(&labels[j]))?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(MomentMatrix {
        order: k,
        labels,
        entries: m,
    })
}

/// (g ⋆ z)_α = Σ_γ g_γ z_{α+γ} for |α| ≤ deg z − deg g.
pub fn shifted_tms(g: &Polynomial, z: &Tms) -> Result<Tms> {
    let dg = g.degree();
    if g.is_zero() || dg == 0 {
        return domain("shifting polynomial must have degree ≥ 1");
    }
    if dg > z.degree {
        return domain(format!(
            "polynomial degree {dg} exceeds tms degree {}",
            z.degree
        ));
    }
    let out_deg = z.degree - dg;
    let mut out = Tms::new(z.n, out_deg);
    for a in monomial_basis(z.n, out_deg) {
        let v = shifted_entry(g, z, &a)?;
        out.values.insert(a, v);
    }
    Ok(out)
}

fn shifted_entry(g: &Polynomial, z: &Tms, alpha: &MultiIndex) -> Result<f64> {
    let mut acc = 0.0;
    for (gamma, c) in g.terms() {
        acc += c * z.require(&alpha.add(gamma))?;
    }
    Ok(acc)
}

/// k-th order localizing matrix M_{k−d_g}(g ⋆ z).
pub fn localizing_matrix(g: &Polynomial, z: &Tms, k: u32) -> Result<MomentMatrix> {
    let dg = g.half_degree();
    if g.degree() == 0 {
        return domain("localizing polynomial must have degree ≥ 1");
    }
    if k < dg || 2 * k > z.degree {
        return domain(format!(
            "localizing order {k} outside [{dg}, {}]",
            z.degree / 2
        ));
    }
    let labels = monomial_basis(z.n, k - dg);
    let s = labels.len();
    let mut m = DMatrix::zeros(s, s);
    for i in 0..s {
        for j in i..s {
            let v = shifted_entry(g, z, &labels[i].add(&labels[j]))?;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    Ok(MomentMatrix {
        order: k - dg,
        labels,
        entries: m,
    })
}

pub fn numerical_rank(m: &DMatrix<f64>, tol: f64) -> usize {
    linalg::numerical_rank(m, tol)
}

/// Numerical ranks of (M_k(z), M_{k−d0}(z)).
pub fn flatness_ranks(z: &Tms, k: u32, d0: u32, tol: f64) -> Result<(usize, usize)> {
    if d0 > k {
        return domain(format!("d0 = {d0} exceeds order {k}"));
    }
    let hi = moment_matrix(z, k)?;
    let lo = moment_matrix(z, k - d0)?;
    Ok((numerical_rank(&hi.entries, tol), numerical_rank(&lo.entries, tol)))
}

/// rank M_k(z) = rank M_{k−d0}(z) at tolerance `tol`.
pub fn flatness_check(z: &Tms, k: u32, d0: u32, tol: f64) -> Result<bool> {
    let (a, b) = flatness_ranks(z, k, d0, tol)?;
    Ok(a == b)
}

#[derive(Serialize, Deserialize)]
struct MomentJson {
    alpha: Vec<u32>,
    value: f64,
}

/// `{"n": int, "degree": int, "moments": [{"alpha": [..], "value": x}]}`
#[derive(Serialize, Deserialize)]
struct TmsJson {
    n: usize,
    degree: u32,
    moments: Vec<MomentJson>,
}

impl Serialize for Tms {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TmsJson {
            n: self.n,
            degree: self.degree,
            moments: self
                .values
                .iter()
                .map(|(a, v)| MomentJson {
                    alpha: a.exponents().to_vec(),
                    value: *v,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tms {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TmsJson::deserialize(d)?;
        Tms::from_values(
            j.n,
            j.degree,
            j.moments
                .into_iter()
                .map(|m| (MultiIndex::new(m.alpha), m.value)),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere() -> Polynomial {
        let mut g = Polynomial::constant(3, -1.0);
        for i in 0..3 {
            g = &g + &(&Polynomial::var(3, i) * &Polynomial::var(3, i));
        }
        g
    }

    #[test]
    fn point_mass_moment_matrix_is_outer_product() {
        let z = Tms::from_atoms(3, 2, &[(1.0, vec![0.0, 0.0, 1.0])]);
        let m = moment_matrix(&z, 1).unwrap().entries;
        let v = nalgebra::DVector::from_vec(vec![1.0, 0.0, 0.0, 1.0]);
        assert!((m - &v * v.transpose()).norm() < 1e-15);
    }

    #[test]
    fn two_antipodal_atoms() {
        let z = Tms::from_atoms(
            3,
            2,
            &[(0.5, vec![1.0, 0.0, 0.0]), (0.5, vec![-1.0, 0.0, 0.0])],
        );
        let m = moment_matrix(&z, 1).unwrap().entries;
        let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 0.0, 0.0]));
        assert!((m - want).norm() < 1e-15);
    }

    #[test]
    fn moment_matrix_labels_follow_listed_layout() {
        let z = Tms::from_atoms(3, 2, &[(1.0, vec![0.3, -0.2, 0.5])]);
        let m = moment_matrix(&z, 1).unwrap();
        // Entry (x1, x2) is y_110 and entry (x3, x3) is y_002.
        assert_eq!(m.labels[1].exponents(), &[1, 0, 0]);
        assert!((m.entries[(1, 2)] - z.get(&MultiIndex::new(vec![1, 1, 0])).unwrap()).abs() < 1e-15);
        assert!((m.entries[(3, 3)] - z.get(&MultiIndex::new(vec![0, 0, 2])).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn missing_moment_is_reported() {
        let mut z = Tms::new(1, 2);
        z.insert(MultiIndex::new(vec![0]), 1.0).unwrap();
        z.insert(MultiIndex::new(vec![1]), 0.0).unwrap();
        assert!(matches!(moment_matrix(&z, 1), Err(Error::IncompleteTms(_))));
    }

    #[test]
    fn shifted_requires_positive_degree() {
        let z = Tms::from_atoms(3, 2, &[(1.0, vec![0.0, 0.0, 1.0])]);
        assert!(matches!(
            shifted_tms(&Polynomial::constant(3, 1.0), &z),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn shift_by_x1_scales_point_mass() {
        let p = vec![0.3, -0.4, 0.5];
        let z = Tms::from_atoms(3, 3, &[(1.0, p.clone())]);
        let s = shifted_tms(&Polynomial::var(3, 0), &z).unwrap();
        let expect = Tms::from_atoms(3, 2, &[(0.3, p)]);
        for (a, v) in s.iter() {
            assert!((v - expect.get(a).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn sphere_shift_vanishes_on_sphere_atoms() {
        let s3 = 1.0 / 3f64.sqrt();
        let z = Tms::from_atoms(
            3,
            4,
            &[(0.25, vec![0.0, 0.0, 1.0]), (0.75, vec![s3, s3, -s3])],
        );
        let s = shifted_tms(&sphere(), &z).unwrap();
        assert!(s.iter().all(|(_, v)| v.abs() < 1e-14));
        let l = localizing_matrix(&sphere(), &z, 2).unwrap();
        assert!(l.entries.norm() < 1e-14);
    }

    #[test]
    fn localizing_of_ball_at_origin_equals_lower_moment_matrix() {
        let ball = &Polynomial::constant(3, 0.0) - &sphere();
        let z = Tms::from_atoms(3, 4, &[(1.0, vec![0.0, 0.0, 0.0])]);
        let l = localizing_matrix(&ball, &z, 2).unwrap();
        let m = moment_matrix(&z, 1).unwrap();
        assert_eq!(l.entries, m.entries);
    }

    #[test]
    fn localizing_matrix_has_listed_first_row() {
        // Entry (0, 1) of M_1(g ⋆ z) for the sphere is z100 − z300 − z120 − z102.
        let z = Tms::from_atoms(3, 4, &[(0.4, vec![0.2, 0.5, 0.1]), (0.6, vec![-0.3, 0.9, 0.7])]);
        let l = localizing_matrix(&sphere(), &z, 2).unwrap();
        let y = |e: [u32; 3]| z.get(&MultiIndex::new(e.to_vec())).unwrap();
        let want01 = y([1, 0, 0]) - y([3, 0, 0]) - y([1, 2, 0]) - y([1, 0, 2]);
        let want23 = y([0, 1, 1]) - y([2, 1, 1]) - y([0, 3, 1]) - y([0, 1, 3]);
        assert_eq!(l.entries.nrows(), 4);
        // With g = |x|² − 1 the listed matrix is −M_1(g ⋆ z).
        assert!((l.entries[(0, 1)] + want01).abs() < 1e-14);
        assert!((l.entries[(2, 3)] + want23).abs() < 1e-14);
    }

    #[test]
    fn flatness_of_atomic_measures() {
        let z1 = Tms::from_atoms(3, 4, &[(1.0, vec![0.0, 0.6, 0.8])]);
        assert!(flatness_check(&z1, 2, 1, DEFAULT_RANK_TOL).unwrap());
        let atoms: Vec<(f64, Vec<f64>)> = vec![
            (0.2, vec![1.0, 0.0, 0.0]),
            (0.3, vec![0.0, 1.0, 0.0]),
            (0.5, vec![0.0, 0.0, -1.0]),
        ];
        let z = Tms::from_atoms(3, 6, &atoms);
        assert_eq!(flatness_ranks(&z, 3, 1, DEFAULT_RANK_TOL).unwrap(), (3, 3));
    }

    #[test]
    fn json_round_trip() {
        let z = Tms::from_atoms(2, 2, &[(1.0, vec![0.5, -0.25])]);
        let s = serde_json::to_string(&z).unwrap();
        assert!(s.contains("\"moments\""));
        let back: Tms = serde_json::from_str(&s).unwrap();
        assert_eq!(back, z);
    }
}
