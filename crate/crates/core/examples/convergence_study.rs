//! Refinement study for the drift Laplacian on `S²(√2)`: relative error of
//! the first sixteen nonzero eigenvalues against `l(l+1)/2`, the observed
//! convergence order, and the coordinate-eigenfunction residual.

use std::time::Instant;

use drift_hodge::complex::build_complex;
use drift_hodge::manifold::{mesh_backend, EmbeddedMesh};
use drift_hodge::spectrum::{analytic_sphere_spectrum, coordinate_eigenfunction_check, solve_hodge, SolverOptions};

fn main() -> drift_hodge::Result<()> {
    let exact = analytic_sphere_spectrum(2, 0, 17)?.eigenvalues;
    let mut previous: Option<(f64, f64)> = None;
    println!("{:>5} {:>8} {:>12} {:>8} {:>12} {:>8}", "level", "vertices", "max rel err", "order", "coord resid", "secs");
    for level in 3..=5 {
        let start = Instant::now();
        let backend = mesh_backend(&EmbeddedMesh::icosphere(level, 2f64.sqrt()))?;
        let complex = build_complex(&backend)?;
        let spectrum = solve_hodge(&complex.hodge_laplacian(0)?, 17, &SolverOptions::default())?;
        let err = spectrum.eigenvalues[1..]
            .iter()
            .zip(&exact[1..])
            .map(|(a, b)| (a - b).abs() / b)
            .fold(0.0, f64::max);
        let h = 1.0 / (complex.cell_count(0)? as f64).sqrt();
        let order = previous.map(|(e0, h0)| (e0 / err).ln() / (h0 / h).ln());
        previous = Some((err, h));
        println!(
            "{:>5} {:>8} {:>12.4e} {:>8} {:>12.4e} {:>8.2}",
            level,
            complex.cell_count(0)?,
            err,
            order.map_or("-".to_string(), |o| format!("{o:.2}")),
            coordinate_eigenfunction_check(&complex)?,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
