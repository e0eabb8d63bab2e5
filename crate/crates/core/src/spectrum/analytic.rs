//! Closed-form spectra of the drift Laplacian on `S^m(√m)`.
//!
//! The weight is constant on a centred sphere, so the drift operator reduces
//! to the Laplace–Beltrami operator, whose eigenvalues on the sphere of
//! radius `√m` are `l(l + m − 1)/m`. By Hodge duality the same values
//! describe top-degree forms, and on the circle every degree.

use super::Spectrum;
use crate::error::{Error, Result};

/// `l(l + m − 1)/m`.
pub fn sphere_eigenvalue(m: usize, l: usize) -> f64 {
    (l * (l + m - 1)) as f64 / m as f64
}

/// Dimension of the degree-`l` spherical harmonics on `S^m`,
/// `C(l+m, m) − C(l+m−2, m)`.
pub fn sphere_multiplicity(m: usize, l: usize) -> usize {
    let lower = if l >= 2 { binomial(l + m - 2, m) } else { 0 };
    binomial(l + m, m) - lower
}

/// The first `count` eigenvalues (with multiplicity) of `p`-forms on
/// `S^m(√m)`; available for `p ∈ {0, m}` and for the circle.
pub fn analytic_sphere_spectrum(m: usize, p: usize, count: usize) -> Result<Spectrum> {
    if m == 0 {
        return Err(Error::Dimension("intrinsic dimension must be at least 1".into()));
    }
    if p > m {
        return Err(Error::Degree { degree: p, max: m });
    }
    if !(p == 0 || p == m || m == 1) {
        return Err(Error::OracleUnavailable { m, p });
    }
    let mut values = Vec::with_capacity(count);
    let mut l = 0;
    while values.len() < count {
        let lam = sphere_eigenvalue(m, l);
        for _ in 0..sphere_multiplicity(m, l) {
            if values.len() == count {
                break;
            }
            values.push(lam);
        }
        l += 1;
    }
    Ok(Spectrum::from_eigenvalues(p, values, None))
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sphere_values() {
        let s = analytic_sphere_spectrum(2, 0, 9).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 1.0, 1.0, 3.0, 3.0, 3.0, 3.0, 3.0]);
        assert_eq!(s.clusters, vec![vec![1], vec![2, 3, 4], vec![5, 6, 7, 8, 9]]);
    }

    #[test]
    fn circle_one_forms() {
        let s = analytic_sphere_spectrum(1, 1, 5).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 1.0, 4.0, 4.0]);
    }

    #[test]
    fn middle_degree_unavailable() {
        assert!(matches!(
            analytic_sphere_spectrum(2, 1, 3),
            Err(Error::OracleUnavailable { m: 2, p: 1 })
        ));
    }

    #[test]
    fn multiplicities_match_harmonic_counts() {
        // S^3: (l+1)^2
        for l in 0..6 {
            assert_eq!(sphere_multiplicity(3, l), (l + 1) * (l + 1));
            assert_eq!(sphere_multiplicity(2, l), 2 * l + 1);
        }
    }
}
