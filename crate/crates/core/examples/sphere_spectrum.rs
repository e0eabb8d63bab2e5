//! Drift Hodge spectrum of `S²(√2)` in every degree, next to the closed form.
//!
//! ```text
//! cargo run --release --example sphere_spectrum -- [level]
//! ```

use drift_hodge::complex::build_complex;
use drift_hodge::manifold::round_sphere;
use drift_hodge::spectrum::{analytic_sphere_spectrum, solve_hodge, SolverOptions};

fn main() -> drift_hodge::Result<()> {
    let level = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let backend = round_sphere(2, 2f64.sqrt(), level)?;
    let complex = build_complex(&backend)?;
    println!(
        "icosphere level {level}: {} vertices, {} edges, {} faces",
        complex.cell_count(0)?,
        complex.cell_count(1)?,
        complex.cell_count(2)?
    );
    for p in 0..=2 {
        let spectrum = solve_hodge(&complex.hodge_laplacian(p)?, 10, &SolverOptions::default())?;
        println!("\np = {p}");
        let exact = analytic_sphere_spectrum(2, p, 10).ok();
        for (i, lambda) in spectrum.eigenvalues.iter().enumerate() {
            match &exact {
                Some(e) => println!("  λ_{:<2} = {lambda:>12.6}   exact {:>8.4}", i + 1, e.eigenvalues[i]),
                None => println!("  λ_{:<2} = {lambda:>12.6}", i + 1),
            }
        }
        println!("  clusters: {:?}", spectrum.clusters);
    }
    Ok(())
}
