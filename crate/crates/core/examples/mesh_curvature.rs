//! Jet-fitted curvature on an icosphere and on an ellipsoid, and the
//! shrinker residual `max|H + x^⊥/2|` that distinguishes them.

use drift_hodge::manifold::{mesh_backend, shrinker_residual, EmbeddedMesh};
use nalgebra::DMatrix;

fn report(label: &str, mesh: &EmbeddedMesh) -> drift_hodge::Result<()> {
    let backend = mesh_backend(mesh)?;
    let points = backend.sample_points();
    let n = points.len() as f64;
    let mean_h = points.iter().map(|s| s.mean_curvature_norm_sq().sqrt()).sum::<f64>() / n;
    let mean_hh = points.iter().map(|s| s.h_norm_sq()).sum::<f64>() / n;
    println!(
        "{label:<22} vertices {:>6}  mean |H| {mean_h:.5}  mean |h|² {mean_hh:.5}  shrinker residual {:.4}",
        points.len(),
        shrinker_residual(&backend)
    );
    Ok(())
}

fn main() -> drift_hodge::Result<()> {
    println!("S²(√2): |H| = √2 ≈ 1.41421, |h|² = 1");
    for level in 2..=5 {
        report(&format!("icosphere level {level}"), &EmbeddedMesh::icosphere(level, 2f64.sqrt()))?;
    }
    let stretch = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.3, 1.0, 0.8]));
    report("ellipsoid level 4", &EmbeddedMesh::icosphere(4, 2f64.sqrt()).transformed(&stretch))?;
    Ok(())
}
