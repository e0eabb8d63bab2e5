use drift_hodge::bounds::{
    evaluate_suite, rhs_exact_all, rhs_geometric_all, yang_bound, yang_check, Tolerance,
};
use drift_hodge::complex::build_complex;
use drift_hodge::manifold::{mesh_backend, round_sphere, sphere_backend, EmbeddedMesh};
use drift_hodge::operator_identities::{ah_check, random_symmetric, OperatorPair};
use drift_hodge::spectrum::{analytic_sphere_spectrum, solve_hodge, SolverOptions};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rotation(seed: u64, n: usize) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_symmetric(n, &mut rng).qr().q()
}

fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
        .fold(0.0, f64::max)
}

#[test]
fn weak_adjointness_on_icosphere() {
    let complex = build_complex(&mesh_backend(&EmbeddedMesh::icosphere(2, 2f64.sqrt())).unwrap()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for p in 0..2 {
        let a: Vec<f64> = random_symmetric(complex.cell_count(p).unwrap(), &mut rng).column(0).iter().copied().collect();
        let b: Vec<f64> = random_symmetric(complex.cell_count(p + 1).unwrap(), &mut rng).column(0).iter().copied().collect();
        let lhs = complex.inner(p + 1, &complex.apply_d(p, &a).unwrap(), &b).unwrap();
        let rhs = complex.inner(p, &a, &complex.codifferential(p + 1, &b).unwrap()).unwrap();
        assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0), "p = {p}: {lhs} vs {rhs}");
    }
}

#[test]
fn betti_numbers_of_the_two_sphere() {
    let complex = build_complex(&round_sphere(2, 2f64.sqrt(), 2).unwrap()).unwrap();
    let zeros: Vec<usize> = (0..=2)
        .map(|p| {
            let s = solve_hodge(&complex.hodge_laplacian(p).unwrap(), 4, &SolverOptions::default()).unwrap();
            s.eigenvalues.iter().filter(|l| l.abs() < 1e-8).count()
        })
        .collect();
    assert_eq!(zeros, vec![1, 0, 1]);
}

#[test]
fn spectrum_invariant_under_rotation() {
    let mesh = EmbeddedMesh::icosphere(2, 2f64.sqrt());
    let q = rotation(9, 3);
    let opts = SolverOptions::default();
    for p in 0..=2 {
        let a = solve_hodge(&build_complex(&mesh_backend(&mesh).unwrap()).unwrap().hodge_laplacian(p).unwrap(), 12, &opts).unwrap();
        let rotated = mesh_backend(&mesh.transformed(&q)).unwrap();
        let b = solve_hodge(&build_complex(&rotated).unwrap().hodge_laplacian(p).unwrap(), 12, &opts).unwrap();
        assert!(rel_diff(&a.eigenvalues, &b.eigenvalues) < 1e-9, "p = {p}");
    }
}

#[test]
fn spectrum_invariant_under_vertex_relabeling() {
    let EmbeddedMesh::Surface { vertices, triangles } = EmbeddedMesh::icosphere(2, 2f64.sqrt()) else {
        unreachable!()
    };
    let n = vertices.len();
    let perm: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % n).collect();
    let mut relabeled = vec![[0.0; 3]; n];
    for (old, &new) in perm.iter().enumerate() {
        relabeled[new] = vertices[old];
    }
    let permuted = EmbeddedMesh::Surface {
        vertices: relabeled,
        triangles: triangles.iter().map(|t| [perm[t[0]], perm[t[1]], perm[t[2]]]).collect(),
    };
    let original = EmbeddedMesh::Surface { vertices, triangles };
    let opts = SolverOptions::default();
    for p in 0..=2 {
        let a = solve_hodge(&build_complex(&mesh_backend(&original).unwrap()).unwrap().hodge_laplacian(p).unwrap(), 12, &opts).unwrap();
        let b = solve_hodge(&build_complex(&mesh_backend(&permuted).unwrap()).unwrap().hodge_laplacian(p).unwrap(), 12, &opts).unwrap();
        assert!(rel_diff(&a.eigenvalues, &b.eigenvalues) < 1e-9, "p = {p}");
    }
}

/// Symmetrized drift Laplacian of the 64-gon with coordinate multipliers.
fn polygon_pair() -> OperatorPair {
    let complex = build_complex(&round_sphere(1, 1.0, 64).unwrap()).unwrap();
    let pair = complex.hodge_laplacian(0).unwrap();
    let s: Vec<f64> = pair.mass.diagonal().iter().map(|m| m.sqrt()).collect();
    let k = pair.stiffness.to_dense();
    let a = DMatrix::from_fn(64, 64, |r, c| k[(r, c)] / (s[r] * s[c]));
    let bs = (0..2)
        .map(|i| DMatrix::from_diagonal(&DVector::from_vec(complex.coordinate_function(i).unwrap())))
        .collect();
    OperatorPair::new(a, bs).unwrap()
}

#[test]
fn discrete_commutator_inequality_on_polygon() {
    let pair = polygon_pair();
    for k in 1..64 {
        let c = ah_check(&pair, k).unwrap();
        assert!(c.slack >= -1e-10 * c.rhs.abs().max(1.0), "k = {k}: {c:?}");
    }
    // equality at k = 1
    let c = ah_check(&pair, 1).unwrap();
    assert!(c.slack.abs() < 1e-9 * c.rhs.abs().max(1.0));
}

#[test]
fn commutator_sums_invariant_under_mixing() {
    let pair = polygon_pair();
    let q = rotation(2, 2);
    let mixed: Vec<DMatrix<f64>> = (0..2)
        .map(|a| pair.perturbers()[0].clone() * q[(0, a)] + pair.perturbers()[1].clone() * q[(1, a)])
        .collect();
    let other = OperatorPair::new(pair.operator().clone(), mixed).unwrap();
    for k in [1, 3, 10, 40] {
        let x = ah_check(&pair, k).unwrap();
        let y = ah_check(&other, k).unwrap();
        assert!((x.lhs - y.lhs).abs() < 1e-10 * x.lhs.abs().max(1.0));
        assert!((x.rhs - y.rhs).abs() < 1e-10 * x.rhs.abs().max(1.0));
    }
}

#[test]
fn geometric_rhs_dominates_exact() {
    for m in 1..=3 {
        let backend = sphere_backend(m, m + 1, 6).unwrap();
        for p in if m == 1 { vec![0, 1] } else { vec![0, m] } {
            let s = analytic_sphere_spectrum(m, p, 20).unwrap();
            let exact = rhs_exact_all(&s, &backend, None, 20).unwrap();
            let geometric = rhs_geometric_all(&s, &backend, 20).unwrap();
            for (e, g) in exact.values.iter().zip(&geometric.values) {
                assert!(g >= &(e - 1e-9), "m = {m}, p = {p}: {g} < {e}");
            }
        }
    }
}

#[test]
fn geometric_suite_on_icosphere_spectrum() {
    let backend = mesh_backend(&EmbeddedMesh::icosphere(3, 2f64.sqrt())).unwrap();
    let complex = build_complex(&backend).unwrap();
    let s = solve_hodge(&complex.hodge_laplacian(0).unwrap(), 14, &SolverOptions::default()).unwrap();
    let rhs = rhs_geometric_all(&s, &backend, 12).unwrap();
    let rows = evaluate_suite(&s, &rhs, 10, Tolerance::Mesh(0.05)).unwrap();
    assert!(rows.iter().all(|r| r.pass));
}

fn sorted_lambdas() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..20.0, 1..12).prop_map(|mut v| {
        v.sort_by(f64::total_cmp);
        v
    })
}

proptest! {
    #[test]
    fn yang_bound_shift_covariant(lambdas in sorted_lambdas(), c0 in 2.0f64..20.0, shift in -5.0f64..5.0, m in 1usize..5) {
        let d: Vec<f64> = lambdas.iter().map(|l| 4.0 * l + c0).collect();
        let base = yang_bound(&lambdas, &d, m);
        prop_assume!(base.is_ok());
        let shifted: Vec<f64> = lambdas.iter().map(|l| l + shift).collect();
        let moved = yang_bound(&shifted, &d, m).unwrap();
        let base = base.unwrap();
        prop_assert!((moved - base - shift).abs() < 1e-9 * base.abs().max(1.0));
    }

    #[test]
    fn yang_bound_monotone_in_rhs(lambdas in sorted_lambdas(), c0 in 2.0f64..20.0, bump in 0.0f64..5.0, slot in 0usize..12, m in 1usize..5) {
        let d: Vec<f64> = lambdas.iter().map(|l| 4.0 * l + c0).collect();
        let base = yang_bound(&lambdas, &d, m);
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        // below λ_k the root moves the other way
        prop_assume!(base >= lambdas[lambdas.len() - 1]);
        let mut bigger = d.clone();
        let j = slot % bigger.len();
        bigger[j] += bump;
        let grown = yang_bound(&lambdas, &bigger, m).unwrap();
        prop_assert!(grown >= base - 1e-9 * base.abs().max(1.0));
    }

    #[test]
    fn yang_check_vanishes_at_the_bound(lambdas in sorted_lambdas(), c0 in 2.0f64..20.0, m in 1usize..5) {
        let d: Vec<f64> = lambdas.iter().map(|l| 4.0 * l + c0).collect();
        let bound = yang_bound(&lambdas, &d, m);
        prop_assume!(bound.is_ok());
        let mut extended = lambdas.clone();
        extended.push(bound.unwrap());
        let slack = yang_check(&extended, &d, m, lambdas.len()).unwrap();
        let scale: f64 = d.iter().map(|x| x * extended[lambdas.len()]).sum::<f64>().max(1.0);
        prop_assert!(slack.abs() < 1e-9 * scale);
    }
}
