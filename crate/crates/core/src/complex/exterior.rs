//! Pointwise exterior algebra over an orthonormal coframe `ω^1, …, ω^m`.
//!
//! A `p`-form is stored as its full antisymmetric component array
//! `φ_{i1…ip}` (all `m^p` index tuples), so that contractions can be written
//! exactly as index sums. The inner product is `⟨φ, ψ⟩ = Σ_{i1<…<ip} φ ψ`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::manifold::SymmetricTwoTensor;

pub const MAX_DIM: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct PointwiseForm {
    m: usize,
    p: usize,
    data: Vec<f64>,
}

impl PointwiseForm {
    pub fn zero(m: usize, p: usize) -> Result<Self> {
        if m == 0 || m > MAX_DIM {
            return Err(Error::Dimension(format!(
                "pointwise forms support 1 ≤ m ≤ {MAX_DIM}, got {m}"
            )));
        }
        if p > m {
            return Err(Error::Degree { degree: p, max: m });
        }
        Ok(Self {
            m,
            p,
            data: vec![0.0; m.pow(p as u32)],
        })
    }

    /// Build from coefficients on the increasing index tuples, listed in
    /// lexicographic order (`C(m, p)` values).
    pub fn from_basis_coefficients(m: usize, p: usize, coeffs: &[f64]) -> Result<Self> {
        let mut form = Self::zero(m, p)?;
        let basis = increasing_tuples(m, p);
        if coeffs.len() != basis.len() {
            return Err(Error::Shape(format!(
                "{} coefficients for {} basis {p}-forms",
                coeffs.len(),
                basis.len()
            )));
        }
        for (tuple, &c) in basis.iter().zip(coeffs) {
            form.set_antisymmetric(tuple, c);
        }
        Ok(form)
    }

    /// Standard normal coefficients on the basis forms.
    pub fn random<R: Rng + ?Sized>(m: usize, p: usize, rng: &mut R) -> Result<Self> {
        let n = binomial(m, p);
        let coeffs: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        Self::from_basis_coefficients(m, p, &coeffs)
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    /// Component `φ_{i1…ip}` for an arbitrary index tuple.
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[self.flat(idx)]
    }

    /// Coefficients on the increasing tuples, in lexicographic order.
    pub fn basis_coefficients(&self) -> Vec<f64> {
        increasing_tuples(self.m, self.p).iter().map(|t| self.get(t)).collect()
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn inner(&self, other: &Self) -> f64 {
        increasing_tuples(self.m, self.p)
            .iter()
            .map(|t| self.get(t) * other.get(t))
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            m: self.m,
            p: self.p,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    /// Largest `|φ_σ(I) − sign(σ) φ_I|` over all tuples and transpositions.
    pub fn antisymmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut idx = vec![0usize; self.p];
        for flat in 0..self.data.len() {
            self.unflatten(flat, &mut idx);
            for a in 0..self.p {
                for b in a + 1..self.p {
                    let mut swapped = idx.clone();
                    swapped.swap(a, b);
                    worst = worst.max((self.get(&swapped) + self.data[flat]).abs());
                }
            }
        }
        worst
    }

    /// Component array after swapping index slots `a` and `b`.
    pub fn transposed(&self, a: usize, b: usize) -> Self {
        let mut out = self.clone();
        let mut idx = vec![0usize; self.p];
        for flat in 0..self.data.len() {
            self.unflatten(flat, &mut idx);
            idx.swap(a, b);
            out.data[flat] = self.get(&idx);
        }
        out
    }

    fn flat(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.m + i)
    }

    fn unflatten(&self, mut flat: usize, idx: &mut [usize]) {
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.m;
            flat /= self.m;
        }
    }

    fn set_antisymmetric(&mut self, increasing: &[usize], value: f64) {
        for (perm, sign) in permutations_with_sign(increasing) {
            let f = self.flat(&perm);
            self.data[f] = sign * value;
        }
    }
}

/// `Σ_{ij} T_ij ω^i ∧ ι(e_j) φ`, computed componentwise as
/// `(Tφ)_{i1…ip} = Σ_k Σ_j T_{j i_k} φ_{i1…j…ip}` with `j` in slot `k`.
pub fn wedge_contract(t: &SymmetricTwoTensor, phi: &PointwiseForm) -> Result<PointwiseForm> {
    check_tensor(t, phi)?;
    let mut out = PointwiseForm::zero(phi.m, phi.p)?;
    if phi.p == 0 {
        return Ok(out);
    }
    let mut idx = vec![0usize; phi.p];
    for flat in 0..out.data.len() {
        phi.unflatten(flat, &mut idx);
        let mut acc = 0.0;
        for k in 0..phi.p {
            let ik = idx[k];
            let mut moved = idx.clone();
            for j in 0..phi.m {
                moved[k] = j;
                acc += t.get(j, ik) * phi.get(&moved);
            }
        }
        out.data[flat] = acc;
    }
    Ok(out)
}

/// `(1/(p−1)!) Σ T_{j i1} φ_{j i2…ip} φ_{i1…ip}` over all index tuples.
pub fn contraction_pairing(t: &SymmetricTwoTensor, phi: &PointwiseForm) -> Result<f64> {
    check_tensor(t, phi)?;
    if phi.p == 0 {
        return Ok(0.0);
    }
    let mut idx = vec![0usize; phi.p];
    let mut sum = 0.0;
    for flat in 0..phi.data.len() {
        phi.unflatten(flat, &mut idx);
        let value = phi.data[flat];
        if value == 0.0 {
            continue;
        }
        let mut moved = idx.clone();
        for j in 0..phi.m {
            moved[0] = j;
            sum += t.get(j, idx[0]) * phi.get(&moved) * value;
        }
    }
    Ok(sum / factorial(phi.p - 1))
}

/// `p|T||φ|² − ⟨Σ T_ij ω^i ∧ ι(e_j)φ, φ⟩`, nonnegative for every symmetric
/// `T`.
pub fn contraction_bound_check(t: &SymmetricTwoTensor, phi: &PointwiseForm) -> Result<f64> {
    let tphi = wedge_contract(t, phi)?;
    Ok(phi.p as f64 * t.frobenius_norm() * phi.norm_sq() - tphi.inner(phi))
}

fn check_tensor(t: &SymmetricTwoTensor, phi: &PointwiseForm) -> Result<()> {
    if t.dim() != phi.m {
        Err(Error::Shape(format!(
            "tensor is {}x{} but the form lives in dimension {}",
            t.dim(),
            t.dim(),
            phi.m
        )))
    } else {
        Ok(())
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

/// Strictly increasing tuples of length `p` from `0..m`, lexicographic.
pub fn increasing_tuples(m: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, p, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, p, &mut Vec::with_capacity(p), &mut out);
    out
}

fn permutations_with_sign(items: &[usize]) -> Vec<(Vec<usize>, f64)> {
    if items.len() <= 1 {
        return vec![(items.to_vec(), 1.0)];
    }
    let mut out = Vec::new();
    for (pos, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(pos);
        let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
        for (mut tail, s) in permutations_with_sign(&rest) {
            tail.insert(0, first);
            out.push((tail, sign * s));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn random_tensor(m: usize, rng: &mut ChaCha8Rng) -> SymmetricTwoTensor {
        let a = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
        SymmetricTwoTensor::new(a).unwrap()
    }

    /// Sorts an index list, returning the permutation sign, or `None` on a
    /// repeated index.
    fn sort_blade(mut idx: Vec<usize>) -> Option<(Vec<usize>, f64)> {
        let mut sign = 1.0;
        for i in 0..idx.len() {
            for j in 0..idx.len() - 1 - i {
                if idx[j] == idx[j + 1] {
                    return None;
                }
                if idx[j] > idx[j + 1] {
                    idx.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some((idx, sign))
    }

    /// `Σ_ij T_ij ω^i ∧ ι(e_j) φ` evaluated on basis blades.
    fn blade_oracle(t: &SymmetricTwoTensor, phi: &PointwiseForm) -> BTreeMap<Vec<usize>, f64> {
        let mut out = BTreeMap::new();
        for blade in increasing_tuples(phi.dim(), phi.degree()) {
            let c = phi.get(&blade);
            for (k, &j) in blade.iter().enumerate() {
                let sign_k = if k % 2 == 0 { 1.0 } else { -1.0 };
                let mut rest = blade.clone();
                rest.remove(k);
                for i in 0..phi.dim() {
                    let mut wedge = vec![i];
                    wedge.extend(&rest);
                    if let Some((sorted, s)) = sort_blade(wedge) {
                        *out.entry(sorted).or_insert(0.0) += t.get(i, j) * sign_k * s * c;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn identity_scales_by_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (m, p) in [(3, 1), (4, 2), (5, 3)] {
            let phi = PointwiseForm::random(m, p, &mut rng).unwrap();
            let out = wedge_contract(&SymmetricTwoTensor::identity(m), &phi).unwrap();
            for (a, b) in out.basis_coefficients().iter().zip(phi.basis_coefficients()) {
                assert!((a - p as f64 * b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn one_forms_are_matrix_action() {
        let t = SymmetricTwoTensor::new(DMatrix::from_row_slice(2, 2, &[1.5, -0.25, -0.25, 2.0])).unwrap();
        let phi = PointwiseForm::from_basis_coefficients(2, 1, &[0.3, -0.7]).unwrap();
        let out = wedge_contract(&t, &phi).unwrap().basis_coefficients();
        assert!((out[0] - (1.5 * 0.3 + 0.25 * 0.7)).abs() < 1e-15);
        assert!((out[1] - (-0.25 * 0.3 - 2.0 * 0.7)).abs() < 1e-15);
    }

    #[test]
    fn matches_blade_algebra() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for m in 1..=5 {
            for p in 1..=m.min(4) {
                let t = random_tensor(m, &mut rng);
                let phi = PointwiseForm::random(m, p, &mut rng).unwrap();
                let fast = wedge_contract(&t, &phi).unwrap();
                let oracle = blade_oracle(&t, &phi);
                for blade in increasing_tuples(m, p) {
                    let expected = oracle.get(&blade).copied().unwrap_or(0.0);
                    assert!((fast.get(&blade) - expected).abs() < 1e-12, "m={m} p={p} {blade:?}");
                }
                assert!(fast.antisymmetry_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn pairing_routes_agree_and_bound_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = rng.random_range(1..=6);
            let p = rng.random_range(1..=m.min(4));
            let t = random_tensor(m, &mut rng);
            let phi = PointwiseForm::random(m, p, &mut rng).unwrap();
            let a = wedge_contract(&t, &phi).unwrap().inner(&phi);
            let b = contraction_pairing(&t, &phi).unwrap();
            assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
            assert!(contraction_bound_check(&t, &phi).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn identity_bound_slack() {
        let phi = PointwiseForm::from_basis_coefficients(3, 2, &[1.0, 0.0, 0.0]).unwrap();
        let slack = contraction_bound_check(&SymmetricTwoTensor::identity(3), &phi).unwrap();
        assert!((slack - (2.0 * 3f64.sqrt() - 2.0)).abs() < 1e-14);
    }

    #[test]
    fn scalars_and_zero_forms() {
        let t = SymmetricTwoTensor::identity(3);
        let scalar = PointwiseForm::from_basis_coefficients(3, 0, &[2.0]).unwrap();
        assert_eq!(wedge_contract(&t, &scalar).unwrap().norm_sq(), 0.0);
        let zero = PointwiseForm::zero(3, 2).unwrap();
        assert_eq!(contraction_bound_check(&t, &zero).unwrap(), 0.0);
    }

    #[test]
    fn transposition_flips_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let phi = PointwiseForm::random(5, 3, &mut rng).unwrap();
        let swapped = phi.transposed(0, 2);
        assert_eq!(swapped, phi.scaled(-1.0));
    }

    #[test]
    fn rejects_large_dimension() {
        assert!(matches!(PointwiseForm::zero(9, 1), Err(Error::Dimension(_))));
        assert!(matches!(PointwiseForm::zero(3, 4), Err(Error::Degree { .. })));
    }
}
