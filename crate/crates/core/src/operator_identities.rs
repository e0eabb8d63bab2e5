//! Finite-dimensional checks of the commutator identities behind the
//! universal inequalities: the Ashbaugh–Hermi trace inequality, the
//! Levitin–Parnovski sum rule and the triangularization of the coupling
//! matrix by an orthogonal mix of perturbers.
//!
//! All operators are dense real symmetric matrices. Eigenvalues are sorted
//! ascending and indices are 1-based.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Violation threshold shared by the identity checks.
pub const IDENTITY_TOL: f64 = 1e-10;

/// A self-adjoint operator with symmetric perturbers and its cached
/// eigendecomposition.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    a: DMatrix<f64>,
    perturbers: Vec<DMatrix<f64>>,
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl OperatorPair {
    /// Symmetrizes every input as `(X + Xᵀ)/2`.
    pub fn new(a: DMatrix<f64>, perturbers: Vec<DMatrix<f64>>) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() || perturbers.iter().any(|b| b.shape() != (n, n)) {
            return Err(Error::Shape("operator and perturbers must be square of one size".into()));
        }
        let a = symmetrize(&a);
        let perturbers = perturbers.iter().map(symmetrize).collect();
        let (eigenvalues, eigenvectors) = sorted_eigen(&a);
        Ok(Self {
            a,
            perturbers,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn operator(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn perturbers(&self) -> &[DMatrix<f64>] {
        &self.perturbers
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, in eigenvalue order.
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `max_i ‖A u_i − λ_i u_i‖`.
    pub fn eigen_residual(&self) -> f64 {
        (0..self.eigenvalues.len())
            .map(|i| {
                let u = self.eigenvectors.column(i);
                (&self.a * u - u * self.eigenvalues[i]).norm()
            })
            .fold(0.0, f64::max)
    }
}

fn symmetrize(x: &DMatrix<f64>) -> DMatrix<f64> {
    (x + x.transpose()) * 0.5
}

fn sorted_eigen(a: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(a.clone());
    let n = a.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !a.is_square() || a.shape() != b.shape() {
        return Err(Error::Shape(format!(
            "commutator of {:?} and {:?} matrices",
            a.shape(),
            b.shape()
        )));
    }
    Ok(a * b - b * a)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AhCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
}

/// `Σ_{i≤k}(λ_{k+1} − λ_i)²ρ_i ≤ Σ_{i≤k}(λ_{k+1} − λ_i)Λ_i` with
/// `ρ_i = Σ_B ⟨[A,B]u_i, Bu_i⟩` and `Λ_i = Σ_B ‖[A,B]u_i‖²`.
pub fn ah_check(pair: &OperatorPair, k: usize) -> Result<AhCheck> {
    let n = pair.eigenvalues.len();
    if k == 0 || k + 1 > n {
        return Err(Error::Precondition(format!("k = {k} needs 1 ≤ k ≤ {}", n.saturating_sub(1))));
    }
    let commutators: Vec<DMatrix<f64>> = pair
        .perturbers
        .iter()
        .map(|b| commutator(&pair.a, b))
        .collect::<Result<_>>()?;
    let next = pair.eigenvalues[k];
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    for i in 0..k {
        let u = pair.eigenvectors.column(i);
        let mut rho = 0.0;
        let mut big_lambda = 0.0;
        for (b, c) in pair.perturbers.iter().zip(&commutators) {
            let cu = c * u;
            rho += cu.dot(&(b * u));
            big_lambda += cu.norm_squared();
        }
        let gap = next - pair.eigenvalues[i];
        lhs += gap * gap * rho;
        rhs += gap * big_lambda;
    }
    Ok(AhCheck {
        lhs,
        rhs,
        slack: rhs - lhs,
    })
}

/// Relative residual of the sum rule
/// `Σ_{λ_k ≠ λ_j} |⟨[L,G]u_j, u_k⟩|²/(λ_k − λ_j) = −½⟨[[L,G],G]u_j, u_j⟩`.
///
/// Terms inside the eigenvalue cluster of `λ_j` are skipped once their
/// coupling is confirmed to vanish; if it does not, the basis is rotated
/// within each cluster to diagonalize `G` there and the check is repeated.
pub fn lpt_identity_residual(l: &DMatrix<f64>, g: &DMatrix<f64>, j: usize) -> Result<f64> {
    let lg = commutator(l, g)?;
    let n = l.nrows();
    if j == 0 || j > n {
        return Err(Error::Precondition(format!("index {j} outside 1..={n}")));
    }
    let l = symmetrize(l);
    let g = symmetrize(g);
    let (values, mut vectors) = sorted_eigen(&l);
    let scale = l.norm().max(f64::MIN_POSITIVE);
    let cluster_tol = 1e-12 * scale.max(1.0);
    let coupling_tol = IDENTITY_TOL * scale * g.norm().max(1.0);

    for attempt in 0..2 {
        let uj = vectors.column(j - 1).into_owned();
        let cu = &lg * &uj;
        let mut lhs = 0.0;
        let mut worst_inside: f64 = 0.0;
        for k in 0..n {
            let c = vectors.column(k).dot(&cu);
            let gap = values[k] - values[j - 1];
            if gap.abs() <= cluster_tol {
                worst_inside = worst_inside.max(c.abs());
            } else {
                lhs += c * c / gap;
            }
        }
        if worst_inside > coupling_tol {
            if attempt == 0 {
                vectors = adapt_to_clusters(&values, &vectors, &g, cluster_tol);
                continue;
            }
            return Err(Error::IdentityViolation(format!(
                "coupling {worst_inside:.3e} inside the eigenvalue cluster of index {j}"
            )));
        }
        let double = commutator(&lg, &g)?;
        let rhs = -0.5 * uj.dot(&(&double * &uj));
        let floor = 1e-14 * scale * g.norm().powi(2);
        let denom = lhs.abs().max(rhs.abs()).max(floor).max(f64::MIN_POSITIVE);
        return Ok((lhs - rhs).abs() / denom);
    }
    unreachable!("second attempt always returns")
}

/// Rotate eigenvectors within each eigenvalue cluster so that `G` is
/// diagonal on the cluster.
fn adapt_to_clusters(values: &[f64], vectors: &DMatrix<f64>, g: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = values.len();
    let mut out = vectors.clone();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vectors.columns(start, end - start).into_owned();
            let small = block.transpose() * g * &block;
            let (_, rot) = sorted_eigen(&symmetrize(&small));
            out.columns_mut(start, end - start).copy_from(&(block * rot));
        }
        start = end;
    }
    out
}

/// Result of mixing the perturbers so that the coupling matrix
/// `C_{kA} = ⟨[L, G_A]u_i, u_{i+k}⟩` vanishes for `k < A`.
#[derive(Clone, Debug)]
pub struct Triangularization {
    /// Orthogonal `O` with `G'_A = Σ_B O_{BA} G_B`.
    pub rotation: DMatrix<f64>,
    pub rotated: Vec<DMatrix<f64>>,
    /// Coupling of the rotated family, recomputed from scratch.
    pub coupling: DMatrix<f64>,
    /// Columns `A` whose diagonal coupling vanished (rank deficiency).
    pub degenerate: Vec<usize>,
    /// `max_{k<A} |C'_{kA}| / max(1, ‖C‖)`.
    pub zero_pattern_residual: f64,
}

/// Coupling matrix `C_{kA} = ⟨[L, G_A]u_i, u_{i+k}⟩`, `k, A = 1…n`.
pub fn coupling_matrix(l: &DMatrix<f64>, gs: &[DMatrix<f64>], i: usize) -> Result<DMatrix<f64>> {
    let n = gs.len();
    let size = l.nrows();
    if i == 0 || i + n > size {
        return Err(Error::Precondition(format!(
            "index {i} with {n} perturbers needs i + n ≤ {size}"
        )));
    }
    let (_, vectors) = sorted_eigen(&symmetrize(l));
    let ui = vectors.column(i - 1).into_owned();
    let mut c = DMatrix::zeros(n, n);
    for (a, g) in gs.iter().enumerate() {
        let cu: DVector<f64> = commutator(l, g)? * &ui;
        for k in 1..=n {
            c[(k - 1, a)] = vectors.column(i - 1 + k).dot(&cu);
        }
    }
    Ok(c)
}

/// QR-based orthogonal mix of `gs` making the coupling lower triangular in
/// `(k, A)`. `L` is left untouched.
pub fn triangularize_coupling(l: &DMatrix<f64>, gs: &[DMatrix<f64>], i: usize) -> Result<Triangularization> {
    if gs.is_empty() {
        return Err(Error::Input("need at least one perturber".into()));
    }
    let c = coupling_matrix(l, gs, i)?;
    let n = gs.len();
    let qr = c.transpose().qr();
    let q = qr.q();
    let r = qr.r();
    let rotated: Vec<DMatrix<f64>> = (0..n)
        .map(|a| {
            (0..n).fold(DMatrix::zeros(l.nrows(), l.ncols()), |acc, b| acc + &gs[b] * q[(b, a)])
        })
        .collect();
    let coupling = coupling_matrix(l, &rotated, i)?;
    let scale = c.norm().max(1.0);
    let degenerate = (0..n).filter(|&a| r[(a, a)].abs() <= 1e-12 * scale).collect();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for k in 0..a {
            worst = worst.max(coupling[(k, a)].abs());
        }
    }
    Ok(Triangularization {
        rotation: q,
        rotated,
        coupling,
        degenerate,
        zero_pattern_residual: worst / scale,
    })
}

/// One failed check, with the matrices needed to reproduce it.
#[derive(Clone, Debug, Serialize)]
pub struct TrialFailure {
    pub trial: usize,
    pub check: &'static str,
    pub index: usize,
    pub violation: f64,
    pub operator: Vec<Vec<f64>>,
    pub perturbers: Vec<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialSummary {
    pub trials: usize,
    pub max_violation: f64,
    pub ah_max_violation: f64,
    pub lpt_max_residual: f64,
    pub triangular_max_residual: f64,
    pub failures: Vec<TrialFailure>,
}

/// Random symmetric matrix with standard normal entries.
pub fn random_symmetric<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    let x = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    symmetrize(&x)
}

/// Random instances with sizes `2 ≤ N ≤ n_max` and one to three perturbers.
/// Each trial checks the trace inequality for every `k`, the sum rule for
/// every `j` and perturber, and the triangularization at a random index.
/// Trial `t` draws from stream `t` of a generator seeded by `seed`, so the
/// summary does not depend on scheduling.
pub fn run_trials(seed: u64, trials: usize, n_max: usize) -> Result<TrialSummary> {
    if trials == 0 {
        return Err(Error::Input("trials must be at least 1".into()));
    }
    if n_max < 2 {
        return Err(Error::Input("n_max must be at least 2".into()));
    }
    let outcomes: Vec<(f64, f64, f64, Vec<TrialFailure>)> = (0..trials)
        .into_par_iter()
        .map(|t| run_one(seed, t, n_max))
        .collect::<Result<_>>()?;
    let mut summary = TrialSummary {
        trials,
        max_violation: 0.0,
        ah_max_violation: 0.0,
        lpt_max_residual: 0.0,
        triangular_max_residual: 0.0,
        failures: Vec::new(),
    };
    for (ah, lpt, tri, failures) in outcomes {
        summary.ah_max_violation = summary.ah_max_violation.max(ah);
        summary.lpt_max_residual = summary.lpt_max_residual.max(lpt);
        summary.triangular_max_residual = summary.triangular_max_residual.max(tri);
        summary.failures.extend(failures);
    }
    summary.max_violation = summary
        .ah_max_violation
        .max(summary.lpt_max_residual)
        .max(summary.triangular_max_residual);
    Ok(summary)
}

fn run_one(seed: u64, trial: usize, n_max: usize) -> Result<(f64, f64, f64, Vec<TrialFailure>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let n = rng.random_range(2..=n_max);
    let count = rng.random_range(1..=3usize);
    let a = random_symmetric(n, &mut rng);
    let bs: Vec<DMatrix<f64>> = (0..count).map(|_| random_symmetric(n, &mut rng)).collect();
    let pair = OperatorPair::new(a, bs)?;

    let mut failures = Vec::new();
    let mut fail = |check: &'static str, index: usize, violation: f64| {
        failures.push(TrialFailure {
            trial,
            check,
            index,
            violation,
            operator: rows(pair.operator()),
            perturbers: pair.perturbers().iter().map(rows).collect(),
        });
    };

    let mut ah_worst: f64 = 0.0;
    for k in 1..n {
        let r = ah_check(&pair, k)?;
        let v = (-r.slack / (1.0 + r.rhs.abs())).max(0.0);
        ah_worst = ah_worst.max(v);
        if v > IDENTITY_TOL {
            fail("ashbaugh-hermi", k, v);
        }
    }

    let mut lpt_worst: f64 = 0.0;
    for g in pair.perturbers() {
        for j in 1..=n {
            match lpt_identity_residual(pair.operator(), g, j) {
                Ok(res) => {
                    lpt_worst = lpt_worst.max(res);
                    if res > IDENTITY_TOL {
                        fail("levitin-parnovski", j, res);
                    }
                }
                Err(Error::IdentityViolation(_)) => {
                    lpt_worst = f64::INFINITY;
                    fail("levitin-parnovski", j, f64::INFINITY);
                }
                Err(e) => return Err(e),
            }
        }
    }

    let mut tri_worst: f64 = 0.0;
    if count < n {
        let i = rng.random_range(1..=n - count);
        let t = triangularize_coupling(pair.operator(), pair.perturbers(), i)?;
        tri_worst = t.zero_pattern_residual;
        if tri_worst > IDENTITY_TOL {
            fail("triangularization", i, tri_worst);
        }
    }
    Ok((ah_worst, lpt_worst, tri_worst, failures))
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commutator_examples() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]));
        let b = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let c = commutator(&a, &b).unwrap();
        assert_eq!(c, DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
        assert_eq!(commutator(&a, &DMatrix::identity(2, 2)).unwrap(), DMatrix::zeros(2, 2));
        assert!(commutator(&a, &DMatrix::zeros(3, 3)).is_err());
    }

    #[test]
    fn commuting_perturbers_give_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_symmetric(6, &mut rng);
        let pair = OperatorPair::new(a.clone(), vec![a.clone() * 2.0, DMatrix::identity(6, 6)]).unwrap();
        let r = ah_check(&pair, 3).unwrap();
        assert!(r.lhs.abs() < 1e-10 && r.rhs.abs() < 1e-10);
        assert!(lpt_identity_residual(&a, &DMatrix::identity(6, 6), 2).unwrap() < 1e-10);
    }

    #[test]
    fn batch_is_clean_and_deterministic() {
        let a = run_trials(7, 50, 8).unwrap();
        let b = run_trials(7, 50, 8).unwrap();
        assert!(a.failures.is_empty(), "{:?}", a.failures.first().map(|f| (f.check, f.violation)));
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn triangular_input_gives_signed_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let l = random_symmetric(7, &mut rng);
        let gs: Vec<DMatrix<f64>> = (0..3).map(|_| random_symmetric(7, &mut rng)).collect();
        let first = triangularize_coupling(&l, &gs, 2).unwrap();
        let second = triangularize_coupling(&l, &first.rotated, 2).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let target = if r == c { 1.0 } else { 0.0 };
                assert!((second.rotation[(r, c)].abs() - target).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_cluster_is_handled() {
        // L with a doubly repeated eigenvalue
        let l = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0, 2.0, 5.0]));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = random_symmetric(4, &mut rng);
        for j in 1..=4 {
            assert!(lpt_identity_residual(&l, &g, j).unwrap() < 1e-10);
        }
    }
}
