//! Generalized symmetric eigenproblems `K u = λ M u`.
//!
//! Small problems go through a dense Cholesky reduction; large sparse ones
//! through shift-invert block Lanczos. Eigenvectors are normalized in the
//! `M` inner product and signed so that their largest entry is positive.

mod analytic;
pub mod factor;
mod lanczos;

use nalgebra::{Cholesky, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

pub use analytic::{analytic_sphere_spectrum, sphere_eigenvalue, sphere_multiplicity};

use crate::complex::{HodgePair, WeightedComplex};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Relative residual target `‖Kφ − λMφ‖/‖Mφ‖ ≤ tol·max(1, |λ|)`.
    pub tol: f64,
    pub seed: u64,
    /// Restart cap for the iterative solver.
    pub max_restarts: usize,
    /// Problems below this dimension are solved densely.
    pub dense_threshold: usize,
    /// Overrides the default clustering tolerance `1e-6·(λ_max + 1)`.
    pub cluster_tol: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            seed: DEFAULT_SEED,
            max_restarts: 300,
            dense_threshold: 2000,
            cluster_tol: None,
        }
    }
}

/// Smallest eigenpairs of one form degree.
#[derive(Clone, Debug, Serialize)]
pub struct Spectrum {
    pub degree: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Groups of (1-based) indices with numerically equal eigenvalues.
    pub clusters: Vec<Vec<usize>>,
    /// `M`-orthonormal coefficient vectors; empty for analytic spectra.
    #[serde(skip)]
    pub eigenforms: Vec<Vec<f64>>,
}

impl Spectrum {
    /// Spectrum without eigenforms, e.g. from a closed-form oracle.
    pub fn from_eigenvalues(degree: usize, eigenvalues: Vec<f64>, cluster_tol: Option<f64>) -> Self {
        let clusters = cluster_indices(&eigenvalues, cluster_tol);
        Self {
            degree,
            residuals: vec![0.0; eigenvalues.len()],
            eigenvalues,
            clusters,
            eigenforms: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn has_eigenforms(&self) -> bool {
        !self.eigenforms.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spectrum serializes")
    }
}

/// Group consecutive eigenvalues closer than the clustering tolerance.
pub fn cluster_indices(eigenvalues: &[f64], cluster_tol: Option<f64>) -> Vec<Vec<usize>> {
    let top = eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tol = cluster_tol.unwrap_or(1e-6 * (top + 1.0));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, &lam) in eigenvalues.iter().enumerate() {
        match clusters.last_mut() {
            Some(c) if (lam - eigenvalues[c[c.len() - 1] - 1]).abs() < tol => c.push(i + 1),
            _ => clusters.push(vec![i + 1]),
        }
    }
    clusters
}

/// Smallest `count` eigenpairs of `(K, M)`.
pub fn solve_spectrum(
    k: &CsrMatrix<f64>,
    m: &CsrMatrix<f64>,
    count: usize,
    opts: &SolverOptions,
) -> Result<Spectrum> {
    let n = k.nrows();
    if k.ncols() != n || m.nrows() != n || m.ncols() != n {
        return Err(Error::Shape(format!(
            "pencil shapes {}x{} and {}x{} do not match",
            k.nrows(),
            k.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    if count == 0 || count > n {
        return Err(Error::Input(format!("requested {count} eigenpairs of a {n}-dimensional pencil")));
    }
    for (name, a) in [("stiffness", k), ("mass", m)] {
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        if a.asymmetry() > 1e-12 * scale {
            return Err(Error::Input(format!("{name} matrix is not symmetric")));
        }
    }

    let (values, vectors) = if n < opts.dense_threshold {
        dense_solve(k, m, count)?
    } else {
        lanczos::shift_invert_lanczos(k, m, count, opts)?
    };

    let vectors: Vec<Vec<f64>> = vectors.into_iter().map(sign_normalized).collect();
    let residuals: Vec<f64> = values
        .par_iter()
        .zip(vectors.par_iter())
        .map(|(&lam, v)| relative_residual(k, m, lam, v))
        .collect();
    if n < opts.dense_threshold {
        let worst = residuals
            .iter()
            .zip(&values)
            .map(|(r, l)| r / l.abs().max(1.0))
            .fold(0.0, f64::max);
        if worst > opts.tol {
            return Err(Error::Solver {
                iterations: 1,
                worst_residual: worst,
                tolerance: opts.tol,
                residuals,
            });
        }
    }
    let clusters = cluster_indices(&values, opts.cluster_tol);
    Ok(Spectrum {
        degree: 0,
        eigenvalues: values,
        residuals,
        clusters,
        eigenforms: vectors,
    })
}

/// Smallest `count` eigenpairs of a weak Hodge Laplacian.
pub fn solve_hodge(pair: &HodgePair, count: usize, opts: &SolverOptions) -> Result<Spectrum> {
    let mut s = solve_spectrum(&pair.stiffness, &pair.mass, count, opts)?;
    s.degree = pair.degree;
    Ok(s)
}

/// `‖Kv − λMv‖ / ‖Mv‖`.
pub fn relative_residual(k: &CsrMatrix<f64>, m: &CsrMatrix<f64>, lambda: f64, v: &[f64]) -> f64 {
    let kv = k.mul_vec(v);
    let mv = m.mul_vec(v);
    let r: f64 = kv.iter().zip(&mv).map(|(a, b)| (a - lambda * b).powi(2)).sum();
    let d: f64 = mv.iter().map(|b| b * b).sum();
    (r / d).sqrt()
}

/// `max_A ‖𝔏x^A − x^A‖_{M_0} / ‖x^A‖_{M_0}` over the ambient coordinates
/// that do not vanish identically.
pub fn coordinate_eigenfunction_check(complex: &WeightedComplex) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for a in 0..complex.ambient_dim() {
        let x = complex.coordinate_function(a)?;
        let lx = complex.drift_apply(&x)?;
        let diff: Vec<f64> = lx.iter().zip(&x).map(|(l, v)| l - v).collect();
        let denom = complex.inner(0, &x, &x)?;
        if denom == 0.0 {
            continue;
        }
        worst = worst.max((complex.inner(0, &diff, &diff)? / denom).sqrt());
    }
    Ok(worst)
}

fn sign_normalized(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

fn dense_solve(k: &CsrMatrix<f64>, m: &CsrMatrix<f64>, count: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let kd = k.to_dense();
    let n = kd.nrows();
    let indefinite = || Error::Input("mass matrix is not positive definite".into());
    // C = L⁻¹ K L⁻ᵀ with M = L Lᵀ
    let (cm, l) = if m.is_diagonal() {
        let d = m.diagonal();
        if d.iter().any(|x| !(*x > 0.0)) {
            return Err(indefinite());
        }
        let s: Vec<f64> = d.iter().map(|x| x.sqrt()).collect();
        let cm = nalgebra::DMatrix::from_fn(n, n, |r, c| kd[(r, c)] / (s[r] * s[c]));
        (cm, nalgebra::DMatrix::from_diagonal(&DVector::from_vec(s)))
    } else {
        let l = Cholesky::new(m.to_dense()).ok_or_else(indefinite)?.l();
        let mut y = kd;
        for c in 0..n {
            let col = l.solve_lower_triangular(&y.column(c).into_owned()).expect("nonsingular factor");
            y.set_column(c, &col);
        }
        let mut cm = y.transpose();
        for c in 0..n {
            let col = l.solve_lower_triangular(&cm.column(c).into_owned()).expect("nonsingular factor");
            cm.set_column(c, &col);
        }
        (cm, l)
    };
    let cm = (&cm + cm.transpose()) * 0.5;
    let eig = SymmetricEigen::new(cm);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let lt = l.transpose();
    let mut values = Vec::with_capacity(count);
    let mut vectors = Vec::with_capacity(count);
    for &i in order.iter().take(count) {
        let yv: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        let u = lt.solve_upper_triangular(&yv).expect("nonsingular factor");
        values.push(eig.eigenvalues[i]);
        vectors.push(u.iter().copied().collect());
    }
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_pencil() {
        let k = CsrMatrix::from_diagonal(&[2.0, 0.0, 1.0]);
        let m = CsrMatrix::from_diagonal(&[1.0, 1.0, 1.0]);
        let s = solve_spectrum(&k, &m, 3, &SolverOptions::default()).unwrap();
        assert_eq!(s.eigenvalues, vec![0.0, 1.0, 2.0]);
        assert_eq!(s.eigenforms[0], vec![0.0, 1.0, 0.0]);
        assert_eq!(s.eigenforms[1], vec![0.0, 0.0, 1.0]);
        assert_eq!(s.eigenforms[2], vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn indefinite_mass_rejected() {
        let k = CsrMatrix::from_diagonal(&[1.0, 1.0]);
        let m = CsrMatrix::from_diagonal(&[1.0, -1.0]);
        assert!(matches!(
            solve_spectrum(&k, &m, 1, &SolverOptions::default()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn clusters_group_equal_values() {
        let c = cluster_indices(&[0.0, 1.0, 1.0 + 1e-9, 1.0, 3.0], None);
        assert_eq!(c, vec![vec![1], vec![2, 3, 4], vec![5]]);
    }

    #[test]
    fn count_larger_than_dimension() {
        let k = CsrMatrix::from_diagonal(&[1.0]);
        assert!(solve_spectrum(&k, &k, 2, &SolverOptions::default()).is_err());
    }
}
