//! Shift-invert block Lanczos with full reorthogonalization and thick
//! restarts.
//!
//! The Krylov space of `(K − σM)^{-1} M` (self-adjoint in the `M` inner
//! product) is built block by block with a negative shift `σ`, so the
//! smallest eigenvalues of the pencil are the dominant ones of the operator.
//! Eigenvalue estimates are Rayleigh quotients from a Rayleigh–Ritz
//! projection of `K` onto the `M`-orthonormal basis.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::factor::EnvelopeCholesky;
use super::SolverOptions;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

type Pairs = (Vec<f64>, Vec<Vec<f64>>);

pub(super) fn shift_invert_lanczos(
    k: &CsrMatrix<f64>,
    m: &CsrMatrix<f64>,
    count: usize,
    opts: &SolverOptions,
) -> Result<Pairs> {
    let n = k.nrows();
    let block = (count / 2).clamp(6, 16).min(n);
    let max_basis = ((3 * count).max(count + 4 * block) + block).min(n);

    let trace_k: f64 = k.diagonal().iter().sum();
    let trace_m: f64 = m.diagonal().iter().sum();
    if !(trace_m > 0.0) {
        return Err(Error::Input("mass matrix is not positive definite".into()));
    }
    let shift = 1e-4 * (trace_k / trace_m).max(1e-8);
    let shifted = k.add(&m.map(|x| x * shift))?;
    let factor = EnvelopeCholesky::factor(&shifted).map_err(|_| {
        Error::Input("shifted pencil is not positive definite; check that K is semidefinite and M definite".into())
    })?;
    let apply = |v: &Vec<f64>| factor.solve(&m.mul_vec(v));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut next: Vec<Vec<f64>> = (0..block)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut mbasis: Vec<Vec<f64>> = Vec::with_capacity(max_basis);
    let mut worst = f64::INFINITY;
    let mut residuals = Vec::new();

    for restart in 0..=opts.max_restarts {
        loop {
            let added = extend_basis(&mut basis, &mut mbasis, next, m, max_basis);
            if added.is_empty() || basis.len() + block > max_basis {
                break;
            }
            next = added.par_iter().map(apply).collect();
        }

        let kbasis: Vec<Vec<f64>> = basis.par_iter().map(|v| k.mul_vec(v)).collect();
        let s = basis.len();
        let h = DMatrix::from_fn(s, s, |i, j| dot(&basis[i], &kbasis[j]));
        let h = (&h + h.transpose()) * 0.5;
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..s).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let keep = (count + block).min(s);

        let combine = |vs: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (j, v) in vs.iter().enumerate() {
                let c = eig.eigenvectors[(j, col)];
                out.iter_mut().zip(v).for_each(|(o, x)| *o += c * x);
            }
            out
        };
        let ritz: Vec<RitzPair> = order[..keep]
            .par_iter()
            .map(|&col| {
                (
                    eig.eigenvalues[col],
                    combine(&basis, col),
                    combine(&mbasis, col),
                    combine(&kbasis, col),
                )
            })
            .collect();

        residuals = ritz[..count.min(keep)]
            .iter()
            .map(|(theta, _, mz, kz)| {
                let r: f64 = kz.iter().zip(mz).map(|(a, b)| (a - theta * b).powi(2)).sum();
                let d: f64 = mz.iter().map(|b| b * b).sum();
                (r / d).sqrt() / theta.abs().max(1.0)
            })
            .collect();
        worst = residuals.iter().cloned().fold(0.0, f64::max);
        if residuals.len() == count && worst <= opts.tol {
            let values = ritz[..count].iter().map(|r| r.0).collect();
            let vectors = ritz.into_iter().take(count).map(|r| r.1).collect();
            return Ok((values, vectors));
        }
        if restart == opts.max_restarts || s == n {
            break;
        }

        let mut by_residual: Vec<usize> = (0..residuals.len()).collect();
        by_residual.sort_by(|&a, &b| residuals[b].total_cmp(&residuals[a]).then(a.cmp(&b)));
        let expand: Vec<Vec<f64>> = by_residual
            .iter()
            .take(block)
            .map(|&i| ritz[i].1.clone())
            .collect();
        basis = ritz.iter().map(|r| r.1.clone()).collect();
        mbasis = ritz.into_iter().map(|r| r.2).collect();
        next = expand.par_iter().map(apply).collect();
    }

    Err(Error::Solver {
        iterations: opts.max_restarts,
        worst_residual: worst,
        tolerance: opts.tol,
        residuals,
    })
}

/// Ritz value with its vector and the vector's images under `M` and `K`.
type RitzPair = (f64, Vec<f64>, Vec<f64>, Vec<f64>);

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `M`-orthonormalize `block` against the basis (two Gram–Schmidt passes)
/// and append the survivors. Returns the appended vectors.
fn extend_basis(
    basis: &mut Vec<Vec<f64>>,
    mbasis: &mut Vec<Vec<f64>>,
    block: Vec<Vec<f64>>,
    m: &CsrMatrix<f64>,
    max_basis: usize,
) -> Vec<Vec<f64>> {
    let mut added = Vec::new();
    for mut w in block {
        if basis.len() >= max_basis {
            break;
        }
        let norm0 = m.dot_with(&w, &w).sqrt();
        if !(norm0 > 0.0) {
            continue;
        }
        for _ in 0..2 {
            let coeffs: Vec<f64> = mbasis.par_iter().map(|mv| dot(mv, &w)).collect();
            for (c, v) in coeffs.iter().zip(basis.iter()) {
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let mw = m.mul_vec(&w);
        let norm = dot(&w, &mw).sqrt();
        if !(norm > 1e-10 * norm0) {
            continue;
        }
        w.iter_mut().for_each(|x| *x /= norm);
        basis.push(w.clone());
        mbasis.push(mw.into_iter().map(|x| x / norm).collect());
        added.push(w);
    }
    added
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_dense_solver_on_ring() {
        let n = 300;
        let mut t = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            t.push((i, i, 2.0));
            t.push((i, j, -1.0));
            t.push((j, i, -1.0));
        }
        let k = CsrMatrix::from_triplets(n, n, t);
        let mdiag: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.1).sin()).collect();
        let m = CsrMatrix::from_diagonal(&mdiag);
        let opts = SolverOptions::default();
        let (values, _) = shift_invert_lanczos(&k, &m, 9, &opts).unwrap();
        let dense = crate::spectrum::solve_spectrum(&k, &m, 9, &opts).unwrap();
        for (a, b) in values.iter().zip(&dense.eigenvalues) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }
}
