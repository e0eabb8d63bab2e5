//! Full inequality suite on the closed-form spectrum of `S^m(√m)` for
//! `m = 1, 2, 3`, and on a discrete icosphere spectrum with geometric
//! right-hand sides.

use drift_hodge::bounds::{evaluate_suite, rhs_exact_all, rhs_geometric_all, BoundReport, Tolerance};
use drift_hodge::complex::build_complex;
use drift_hodge::manifold::{mesh_backend, sphere_backend, EmbeddedMesh};
use drift_hodge::spectrum::{analytic_sphere_spectrum, solve_hodge, SolverOptions};

fn summarize(label: &str, rows: &[BoundReport]) {
    let tight = rows.iter().filter(|r| r.slack.abs() <= r.tolerance).count();
    let worst = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let failed = rows.iter().filter(|r| !r.pass).count();
    println!("{label:<40} rows {:>4}  equalities {tight:>3}  min slack {worst:>10.3e}  failed {failed}", rows.len());
}

fn main() -> drift_hodge::Result<()> {
    for m in 1..=3 {
        let backend = sphere_backend(m, m + 1, 6)?;
        for p in if m == 1 { vec![0, 1] } else { vec![0, m] } {
            let spectrum = analytic_sphere_spectrum(m, p, 60)?;
            let rhs = rhs_exact_all(&spectrum, &backend, None, 50)?;
            let rows = evaluate_suite(&spectrum, &rhs, 50, Tolerance::Analytic)?;
            summarize(&format!("S^{m}, p = {p}, closed form"), &rows);
        }
    }

    let exact = analytic_sphere_spectrum(2, 0, 20)?;
    let backend = mesh_backend(&EmbeddedMesh::icosphere(4, 2f64.sqrt()))?;
    let complex = build_complex(&backend)?;
    let spectrum = solve_hodge(&complex.hodge_laplacian(0)?, 20, &SolverOptions::default())?;
    let tau = spectrum.eigenvalues[1..]
        .iter()
        .zip(&exact.eigenvalues[1..])
        .map(|(a, b)| (a - b).abs() / b)
        .fold(0.0, f64::max);
    let rhs = rhs_geometric_all(&spectrum, &backend, 15)?;
    let rows = evaluate_suite(&spectrum, &rhs, 12, Tolerance::Mesh(tau))?;
    summarize(&format!("icosphere(4), p = 0, geometric, τ = {tau:.1e}"), &rows);
    println!("estimated G = {:.4e}", rhs.constants.g_max);
    Ok(())
}
