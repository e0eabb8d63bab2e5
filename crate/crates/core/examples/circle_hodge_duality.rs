//! On the unit-speed `S¹(1)` the weight is constant, so the drift Laplacian
//! on functions and on 1-forms share their nonzero spectrum `l²`.

use drift_hodge::complex::build_complex;
use drift_hodge::manifold::round_sphere;
use drift_hodge::spectrum::{analytic_sphere_spectrum, solve_hodge, SolverOptions};

fn main() -> drift_hodge::Result<()> {
    let exact = analytic_sphere_spectrum(1, 0, 9)?.eigenvalues;
    println!("{:>5} {:>3} {:>14} {:>14} {:>10}", "N", "i", "p = 0", "p = 1", "exact");
    for n in [32, 64, 128, 256] {
        let complex = build_complex(&round_sphere(1, 1.0, n)?)?;
        let opts = SolverOptions::default();
        let s0 = solve_hodge(&complex.hodge_laplacian(0)?, 9, &opts)?;
        let s1 = solve_hodge(&complex.hodge_laplacian(1)?, 9, &opts)?;
        for i in [1, 3, 5, 7] {
            println!(
                "{n:>5} {:>3} {:>14.8} {:>14.8} {:>10.4}",
                i + 1,
                s0.eigenvalues[i],
                s1.eigenvalues[i],
                exact[i]
            );
        }
    }
    Ok(())
}
